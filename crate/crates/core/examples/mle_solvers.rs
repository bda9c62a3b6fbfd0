//! Fit the MLE with every solver on one Grid1D instance and compare.

use std::time::Instant;

use btl_core::estimators::{solve_mle, MleProblem, Preconditioner, SolverConfig};
use btl_core::experiments::small_step;
use btl_core::graph::{generate_grid, partition_grid, GridSpec, PartitionMode, SamplePolicy};
use btl_core::metrics::error_report;
use btl_core::model::{make_scores, sample_comparisons, ScoreKind};
use btl_core::rng::seeded;

fn main() -> btl_core::Result<()> {
    let spec = GridSpec::grid1d(100, 5, 0.8)?;
    let g = generate_grid(&spec, &SamplePolicy::Constant(50), &mut seeded(4))?;
    let truth = make_scores(&ScoreKind::Sine, 100, 5)?;
    let data = sample_comparisons(&g, &truth, &mut seeded(5))?;
    let p = MleProblem::new(&g, &data)?;
    let (partition, _) = partition_grid(&g, &spec, PartitionMode::Overlapping)?;
    let eta = small_step(&spec, 50.0);

    let solvers = [
        ("gd", SolverConfig::gd(&p, eta)),
        ("cd", SolverConfig::cd(&p)),
        ("precond (L_z oracle)", SolverConfig::precond_gd(&p).with_preconditioner(Preconditioner::Oracle(truth.clone()))),
        ("precond (L_G / 4)", SolverConfig::precond_gd(&p)),
        ("pgd", SolverConfig::pgd(&p, partition, eta).with_max_iter(100_000)),
    ];
    println!("{:<22} {:>8} {:>10} {:>10}", "solver", "iters", "ℓ∞ error", "seconds");
    for (name, config) in solvers {
        let start = Instant::now();
        let (theta, trace) = solve_mle(&p, &config, None)?;
        let err = error_report(&theta, &truth, None)?;
        println!(
            "{name:<22} {:>8} {:>10.4} {:>10.3}",
            trace.iterations(),
            err.linf,
            start.elapsed().as_secs_f64()
        );
    }
    Ok(())
}
