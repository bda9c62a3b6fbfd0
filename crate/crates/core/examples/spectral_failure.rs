//! The spectral method against the MLE when scores grow linearly along a
//! line: the stationary probabilities of the low-ranked items shrink like
//! e^{-i/r}, and once they drop below what power iteration resolves,
//! log π stops tracking θ*.

use btl_core::estimators::{solve_mle, spectral_estimate, MleProblem, SolverConfig, SpectralOptions};
use btl_core::graph::{generate_grid, GridSpec, SamplePolicy};
use btl_core::metrics::error_report;
use btl_core::model::{make_scores, sample_comparisons, ComparisonData, ScoreKind};
use btl_core::rng::seeded;

fn main() -> btl_core::Result<()> {
    println!("Grid1D r=10, p=0.8, L=100, θ*_i = i/r");
    println!("{:>5} {:>10} {:>10} {:>12} {:>10}", "n", "MLE ℓ∞", "spec ℓ∞", "min π", "exact ℓ∞");
    for n in [60usize, 120, 240, 480, 780] {
        let g = generate_grid(&GridSpec::grid1d(n, 10, 0.8)?, &SamplePolicy::Constant(100), &mut seeded(3))?;
        let truth = make_scores(&ScoreKind::Linear, n, 10)?;
        let data = sample_comparisons(&g, &truth, &mut seeded(4))?;
        let p = MleProblem::new(&g, &data)?;
        let (mle, _) = solve_mle(&p, &SolverConfig::precond_gd(&p), None)?;
        let spec = spectral_estimate(&g, &data, &SpectralOptions::default())?;
        // same chain with infinitely many samples: any error left is numerical
        let exact = spectral_estimate(&g, &ComparisonData::expected(&g, &truth)?, &SpectralOptions::default())?;
        println!(
            "{n:>5} {:>10.3} {:>10.3} {:>12.2e} {:>10.2e}",
            error_report(&mle, &truth, None)?.linf,
            error_report(&spec.theta, &truth, None)?.linf,
            spec.pi.iter().copied().fold(1.0, f64::min),
            error_report(&exact.theta, &truth, None)?.linf,
        );
    }

    // With r = 1 the smallest probabilities underflow outright.
    let g = generate_grid(&GridSpec::grid1d(3000, 1, 1.0)?, &SamplePolicy::Constant(100), &mut seeded(0))?;
    let truth = make_scores(&ScoreKind::Linear, 3000, 1)?;
    let est = spectral_estimate(&g, &ComparisonData::expected(&g, &truth)?, &SpectralOptions::default())?;
    let dead = est.pi.iter().filter(|&&p| p < btl_core::estimators::PI_UNDERFLOW).count();
    println!("\nline of 3000 items, r=1: numerical failure {}, {dead} entries of π below 1e-300", est.numerical_failure);
    Ok(())
}
