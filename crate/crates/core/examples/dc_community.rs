//! DC-community: disjoint communities joined by cross edges. Each pair of
//! neighbouring communities gets a shift difference from a 1D likelihood
//! equation; the differences are reconciled by a weighted least-squares solve.

use btl_core::dc::{dc_community, CommunityWeights, LocalMethod};
use btl_core::graph::{generate_grid, partition_grid, GridSpec, PartitionMode, SamplePolicy};
use btl_core::metrics::error_report;
use btl_core::model::{make_scores, sample_comparisons, ScoreKind};
use btl_core::rng::seeded;

fn main() -> btl_core::Result<()> {
    let spec = GridSpec::grid1d(240, 10, 0.8)?;
    let g = generate_grid(&spec, &SamplePolicy::Constant(60), &mut seeded(11))?;
    let truth = make_scores(&ScoreKind::Sine, 240, 10)?;
    let data = sample_comparisons(&g, &truth, &mut seeded(12))?;
    let (partition, _) = partition_grid(&g, &spec, PartitionMode::Disjoint)?;

    for weights in [CommunityWeights::Unit, CommunityWeights::CrossEdgeCount] {
        let out = dc_community(&g, &data, &partition, weights, LocalMethod::Mle)?;
        println!(
            "{weights:?}: {} communities, {} shift differences, ℓ∞ error {:.4}",
            partition.len(),
            out.deltas.len(),
            error_report(&out.theta, &truth, None)?.linf
        );
    }
    Ok(())
}
