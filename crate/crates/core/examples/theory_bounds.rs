//! Per-pair bound quantities B, Q, V from L_z, and the grid theory curves.

use btl_core::graph::{generate_grid, GridKind, GridSpec, SamplePolicy};
use btl_core::metrics::{bound_quantities, locality_bound};
use btl_core::model::{dynamic_range, make_scores, oracle_laplacian, ScoreKind};
use btl_core::rng::seeded;

fn main() -> btl_core::Result<()> {
    let g = generate_grid(&GridSpec::grid1d(60, 4, 0.8)?, &SamplePolicy::Constant(40), &mut seeded(5))?;
    let truth = make_scores(&ScoreKind::Linear, 60, 4)?;
    let lz = oracle_laplacian(&g, &truth)?;
    let (kappa, kappa_e) = dynamic_range(&g, &truth);
    println!("κ = {kappa:.3e}, κ_E = {kappa_e:.3}");

    let q = bound_quantities(&lz, &g, kappa_e, 0.1, 1.0, Some(&[(0, 1), (0, 30), (0, 59)]))?;
    for e in &q.entries {
        println!(
            "({:>2},{:>2}) Ω {:.5}  B {:.4}  Q {:>8.4}  V {:>8.4}  bound {:.4}",
            e.k, e.l, e.omega, e.b, e.q, e.v, e.error_bound
        );
    }
    println!("Q ≤ 4B on every edge: {}", q.condition_holds);

    println!("\ntheory curves (constants 5 and 6):");
    for l in [10.0, 30.0, 100.0] {
        println!(
            "  L = {l:>5}: Grid1D(500, 20, 0.5) {:.3}   Grid2D(400, 5, 0.5) {:.3}",
            locality_bound(GridKind::Grid1D, 500.0, 20.0, 0.5, l, 5.0),
            locality_bound(GridKind::Grid2D, 400.0, 5.0, 0.5, l, 6.0)
        );
    }
    Ok(())
}
