//! Iterations each solver needs to get within 1e-6 · L_total of the optimal
//! loss on Grid1D(n=200, r=10, p=0.8, L=100). Writes one trace CSV per solver.

use std::path::PathBuf;

use btl_core::experiments::{run_experiment, write_outputs, ExperimentConfig, ExperimentId};
use btl_core::graph::GridKind;

fn main() -> btl_core::Result<()> {
    let mut config = ExperimentConfig::preset(ExperimentId::Convergence, GridKind::Grid1D, false);
    config.trials = 1;
    let out = run_experiment(&config)?;
    for r in &out.records {
        let iters = r.iterations.map_or("-".to_string(), |i| i.to_string());
        println!("{:<16} {:>7} iterations  ({})", r.method, iters, r.status);
    }
    let dir = PathBuf::from("target/convergence-example");
    write_outputs(&out, &dir)?;
    println!("traces written to {}", dir.join("traces").display());
    Ok(())
}
