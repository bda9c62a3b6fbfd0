//! Run a small MLE vs DC-overlap sweep from a JSON config and print the summary.
//! Set BTL_WORKERS to bound the number of worker threads.

use btl_core::experiments::{run_experiment, ExperimentConfig};

fn main() -> btl_core::Result<()> {
    let config: ExperimentConfig = serde_json::from_str(
        r#"{
            "experiment": "mle-vs-dcoverlap",
            "grid": "grid1d",
            "n": [128, 256],
            "r": [16],
            "p": [0.5],
            "L": [30],
            "scores": ["linear"],
            "trials": 5,
            "seed": 42
        }"#,
    )?;
    let out = run_experiment(&config)?;
    println!("{:>5} {:>4} {:<11} {:>9} {:>7} {:>8}", "n", "L", "method", "mean ℓ∞", "bound", "within");
    for s in &out.summary {
        println!(
            "{:>5} {:>4} {:<11} {:>9.4} {:>7.4} {:>7.0}%",
            s.n,
            s.l,
            s.method,
            s.mean_linf.unwrap_or(f64::NAN),
            s.bound.unwrap_or(f64::NAN),
            100.0 * s.within_bound.unwrap_or(0.0)
        );
    }
    Ok(())
}
