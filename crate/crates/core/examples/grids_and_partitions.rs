//! Sample 1D and 2D locality graphs and split them into grid windows.

use btl_core::graph::{generate_grid, partition_grid, GridSpec, PartitionMode, SamplePolicy};
use btl_core::rng::seeded;

fn main() -> btl_core::Result<()> {
    let spec = GridSpec::grid1d(200, 10, 0.8)?;
    let g = generate_grid(&spec, &SamplePolicy::Constant(100), &mut seeded(1))?;
    println!(
        "Grid1D(n=200, r=10, p=0.8): {} edges, max degree {}, connected {}",
        g.num_edges(),
        g.max_degree(),
        g.is_connected()
    );

    for mode in [PartitionMode::Overlapping, PartitionMode::Disjoint] {
        let (partition, supergraph) = partition_grid(&g, &spec, mode)?;
        let sizes: Vec<usize> = partition.subsets().iter().map(|s| s.len()).collect();
        println!(
            "  {mode:?}: {} subsets of sizes {sizes:?}, {} super-edges",
            partition.len(),
            supergraph.edges().len()
        );
    }

    let spec2 = GridSpec::grid2d(256, 4, 0.5)?;
    let g2 = generate_grid(&spec2, &SamplePolicy::Constant(30), &mut seeded(2))?;
    let (blocks, sg) = partition_grid(&g2, &spec2, PartitionMode::Overlapping)?;
    println!(
        "Grid2D(16x16, r=4, p=0.5): {} edges, {} blocks, super-graph connected {}",
        g2.num_edges(),
        blocks.len(),
        sg.is_connected()
    );
    Ok(())
}
