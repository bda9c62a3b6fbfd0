//! Effective resistances: series and parallel laws, and how the largest
//! resistance of a 1D grid scales with n and r.

use btl_core::graph::{generate_grid, GridSpec, SamplePolicy};
use btl_core::laplacian::LaplacianOperator;
use btl_core::model::{oracle_laplacian, ScoreVector};
use btl_core::rng::seeded;

fn main() -> btl_core::Result<()> {
    let series = LaplacianOperator::assemble(4, [(0, 1, 1.0), (1, 2, 0.5), (2, 3, 1.0 / 3.0)])?;
    println!("series 1 + 2 + 3 ohm: {:.6}", series.effective_resistance(0, 3)?);
    let parallel = LaplacianOperator::assemble(2, [(0, 1, 1.0), (0, 1, 3.0)])?;
    println!("parallel conductances 1 and 3: {:.6}", parallel.effective_resistance(0, 1)?);

    println!("\n   n   r   max Ω(L_z)   Ω·r/(n/r²+1)");
    for n in [64usize, 128, 256] {
        for r in [2usize, 4, 8] {
            let g = generate_grid(&GridSpec::grid1d(n, r, 1.0)?, &SamplePolicy::Constant(1), &mut seeded(0))?;
            let lz = oracle_laplacian(&g, &ScoreVector::zero_sum(vec![0.0; n]))?;
            let omega = lz.resistance_matrix(None)?.max();
            let (nf, rf) = (n as f64, r as f64);
            println!("{n:>4} {r:>3} {omega:>12.4} {:>14.4}", omega * rf / (nf / (rf * rf) + 1.0));
        }
    }
    Ok(())
}
