//! Seeded Monte-Carlo experiments.
//!
//! Every trial derives its randomness from `base_seed ^ trial`, with one
//! sub-stream per grid coordinate for the graph and one for the samples, so
//! records do not depend on how trials are scheduled across workers.

use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dc::{dc_overlap, LocalMethod};
use crate::error::{Error, Result};
use crate::estimators::{
    loss, solve_mle, spectral_estimate, ConvergenceTrace, MleProblem, Preconditioner, SolverConfig,
    SpectralOptions,
};
use crate::graph::{generate_grid, ComparisonGraph, partition_grid, GridKind, GridSpec, PartitionMode, SamplePolicy};
use crate::metrics::{error_report, locality_bound};
use crate::model::{make_scores, sample_comparisons, ScoreKind, ScoreVector};
use crate::rng::{stream, trial_seed};

/// Environment variable bounding the worker pool.
pub const WORKERS_ENV: &str = "BTL_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentId {
    MleVsSpectral,
    MleVsDcoverlap,
    Convergence,
}

impl ExperimentId {
    pub fn name(self) -> &'static str {
        match self {
            Self::MleVsSpectral => "mle-vs-spectral",
            Self::MleVsDcoverlap => "mle-vs-dcoverlap",
            Self::Convergence => "convergence",
        }
    }

    pub fn default_methods(self) -> Vec<String> {
        let names: &[&str] = match self {
            Self::MleVsSpectral => &["mle", "spectral"],
            Self::MleVsDcoverlap => &["mle", "dc-overlap"],
            Self::Convergence => &["precond-oracle", "precond-lg", "pgd", "cd", "gd", "gd-large"],
        };
        names.iter().map(|s| s.to_string()).collect()
    }
}

/// Ground-truth recipe by name; `linear` means `(i1 + i2)/r` on 2D grids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreSetting {
    Sine,
    Linear,
}

impl ScoreSetting {
    pub fn name(self) -> &'static str {
        match self {
            Self::Sine => "sine",
            Self::Linear => "linear",
        }
    }

    fn kind(self, grid: GridKind) -> ScoreKind {
        match (self, grid) {
            (Self::Sine, _) => ScoreKind::Sine,
            (Self::Linear, GridKind::Grid1D) => ScoreKind::Linear,
            (Self::Linear, GridKind::Grid2D) => ScoreKind::Linear2d,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    pub grid: GridKind,
    pub n: Vec<usize>,
    pub r: Vec<usize>,
    pub p: Vec<f64>,
    #[serde(rename = "L")]
    pub l: Vec<u64>,
    pub scores: Vec<ScoreSetting>,
    pub trials: u64,
    pub seed: u64,
    /// Defaults to [`ExperimentId::default_methods`].
    #[serde(default)]
    pub methods: Vec<String>,
    /// Constant in the theory curve; 5 for 1D and 6 for 2D grids by default.
    #[serde(default)]
    pub bound_constant: Option<f64>,
    /// Iteration cap for the first-order methods of the convergence experiment.
    #[serde(default)]
    pub max_iter: Option<usize>,
}

impl ExperimentConfig {
    /// Desk-scale defaults, or the original sizes with `full_scale`.
    pub fn preset(experiment: ExperimentId, grid: GridKind, full_scale: bool) -> Self {
        let (n, r, p, l, scores, trials) = match (experiment, grid, full_scale) {
            (ExperimentId::MleVsSpectral, _, false) => (
                vec![60, 120, 240],
                vec![10],
                vec![0.8],
                vec![100],
                vec![ScoreSetting::Sine, ScoreSetting::Linear],
                20,
            ),
            (ExperimentId::MleVsSpectral, _, true) => (
                (1..=13).map(|k| 60 * k).collect(),
                vec![10],
                vec![0.8],
                vec![100],
                vec![ScoreSetting::Sine, ScoreSetting::Linear],
                30,
            ),
            (ExperimentId::MleVsDcoverlap, GridKind::Grid1D, false) => {
                (vec![256], vec![16], vec![0.5], vec![10, 30, 100], vec![ScoreSetting::Linear], 20)
            }
            (ExperimentId::MleVsDcoverlap, GridKind::Grid1D, true) => {
                (vec![500], vec![20], vec![0.5], vec![10, 30, 100], vec![ScoreSetting::Linear], 40)
            }
            (ExperimentId::MleVsDcoverlap, GridKind::Grid2D, false) => {
                (vec![256], vec![4], vec![0.5], vec![10, 30, 100], vec![ScoreSetting::Linear], 20)
            }
            (ExperimentId::MleVsDcoverlap, GridKind::Grid2D, true) => {
                (vec![400], vec![5], vec![0.5], vec![10, 30, 100], vec![ScoreSetting::Linear], 40)
            }
            (ExperimentId::Convergence, GridKind::Grid1D, false) => {
                (vec![200], vec![10], vec![0.8], vec![100], vec![ScoreSetting::Linear], 5)
            }
            (ExperimentId::Convergence, GridKind::Grid1D, true) => {
                (vec![400], vec![10], vec![0.8], vec![100], vec![ScoreSetting::Linear], 1)
            }
            (ExperimentId::Convergence, GridKind::Grid2D, false) => {
                (vec![400], vec![4], vec![0.8], vec![100], vec![ScoreSetting::Linear], 5)
            }
            (ExperimentId::Convergence, GridKind::Grid2D, true) => {
                (vec![900], vec![5], vec![0.8], vec![100], vec![ScoreSetting::Linear], 1)
            }
        };
        Self {
            experiment,
            grid: if experiment == ExperimentId::MleVsSpectral { GridKind::Grid1D } else { grid },
            n,
            r,
            p,
            l,
            scores,
            trials,
            seed: 0,
            methods: experiment.default_methods(),
            bound_constant: None,
            max_iter: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidInput("trial count must be at least 1".into()));
        }
        if self.n.is_empty() || self.r.is_empty() || self.p.is_empty() || self.l.is_empty() || self.scores.is_empty() {
            return Err(Error::InvalidInput("every sweep needs at least one value".into()));
        }
        for c in self.coordinates() {
            GridSpec::new(self.grid, c.n, c.r, c.p)?;
            if c.l == 0 {
                return Err(Error::InvalidInput("L must be positive".into()));
            }
        }
        let known = ExperimentId::default_methods(self.experiment);
        for m in self.methods() {
            if !known.contains(&m) {
                return Err(Error::InvalidInput(format!(
                    "unknown method {m:?} for {}; expected one of {known:?}",
                    self.experiment.name()
                )));
            }
        }
        Ok(())
    }

    pub fn methods(&self) -> Vec<String> {
        if self.methods.is_empty() {
            self.experiment.default_methods()
        } else {
            self.methods.clone()
        }
    }

    pub fn coordinates(&self) -> Vec<Coordinate> {
        let mut out = Vec::new();
        for &n in &self.n {
            for &r in &self.r {
                for &p in &self.p {
                    for &l in &self.l {
                        for &scores in &self.scores {
                            out.push(Coordinate { n, r, p, l, scores });
                        }
                    }
                }
            }
        }
        out
    }

    fn bound_constant(&self) -> f64 {
        self.bound_constant.unwrap_or(match self.grid {
            GridKind::Grid1D => 5.0,
            GridKind::Grid2D => 6.0,
        })
    }
}

/// One point of a parameter sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coordinate {
    pub n: usize,
    pub r: usize,
    pub p: f64,
    #[serde(rename = "L")]
    pub l: u64,
    pub scores: ScoreSetting,
}

/// Result of one method on one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub experiment: ExperimentId,
    pub grid: GridKind,
    pub n: usize,
    pub r: usize,
    pub p: f64,
    #[serde(rename = "L")]
    pub l: u64,
    pub scores: ScoreSetting,
    pub trial: u64,
    pub seed: u64,
    pub method: String,
    /// `‖θ - θ*‖_∞` in the zero-sum gauge.
    pub linf: Option<f64>,
    pub max_pairwise: Option<f64>,
    /// `‖π - π*‖_∞ / ‖π*‖_∞` (spectral method only).
    pub pi_rel_error: Option<f64>,
    pub numerical_failure: bool,
    /// Iterations to reach `ℒ - ℒ(θ^MLE) ≤ 1e-6 L_total` (convergence experiment).
    pub iterations: Option<usize>,
    /// Theory curve value at this coordinate (DC-overlap experiment).
    pub bound: Option<f64>,
    /// `ok`, `cap`, `diverged`, or `failed: <reason>`.
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRecord {
    pub n: usize,
    pub r: usize,
    pub p: f64,
    #[serde(rename = "L")]
    pub l: u64,
    pub scores: ScoreSetting,
    pub trial: u64,
    pub method: String,
    pub seconds: f64,
}

/// Aggregate over trials for one coordinate and method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub n: usize,
    pub r: usize,
    pub p: f64,
    #[serde(rename = "L")]
    pub l: u64,
    pub scores: ScoreSetting,
    pub method: String,
    pub trials: usize,
    pub failures: usize,
    pub numerical_failures: usize,
    pub mean_linf: Option<f64>,
    pub median_linf: Option<f64>,
    pub mean_max_pairwise: Option<f64>,
    pub mean_pi_rel_error: Option<f64>,
    /// Trials that never reach the target count as infinitely slow.
    pub median_iterations: Option<f64>,
    pub bound: Option<f64>,
    /// Fraction of trials with `linf ≤ bound`.
    pub within_bound: Option<f64>,
}

/// A named convergence trace, `trace_<method>_n<n>_L<L>_t<trial>`.
#[derive(Debug, Clone)]
pub struct NamedTrace {
    pub name: String,
    pub trace: ConvergenceTrace,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub config: ExperimentConfig,
    pub records: Vec<TrialRecord>,
    pub summary: Vec<SummaryRow>,
    pub timings: Vec<TimingRecord>,
    pub traces: Vec<NamedTrace>,
}

impl ExperimentOutput {
    /// Whether any trial failed.
    pub fn has_failures(&self) -> bool {
        self.summary.iter().any(|s| s.failures > 0)
    }

    /// Records for one method at one coordinate.
    pub fn records_for<'a>(&'a self, c: &'a Coordinate, method: &'a str) -> impl Iterator<Item = &'a TrialRecord> + 'a {
        self.records
            .iter()
            .filter(move |r| r.method == method && same_coordinate(r, c))
    }
}

fn same_coordinate(r: &TrialRecord, c: &Coordinate) -> bool {
    r.n == c.n && r.r == c.r && r.p == c.p && r.l == c.l && r.scores == c.scores
}

struct MethodResult {
    record: TrialRecord,
    seconds: f64,
    trace: Option<ConvergenceTrace>,
}

/// Runs all trials and aggregates them. Individual trial failures are
/// recorded, not propagated.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let coords = config.coordinates();
    let tasks: Vec<(usize, u64)> = (0..coords.len())
        .flat_map(|c| (0..config.trials).map(move |t| (c, t)))
        .collect();
    let run = || {
        tasks
            .par_iter()
            .map(|&(c, t)| run_trial(config, c, &coords[c], t))
            .collect::<Vec<_>>()
    };
    let results = match std::env::var(WORKERS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        Some(workers) if workers > 0 => rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::InvalidInput(format!("cannot build worker pool: {e}")))?
            .install(run),
        _ => run(),
    };

    let mut records = Vec::new();
    let mut timings = Vec::new();
    let mut traces = Vec::new();
    for result in results.into_iter().flatten() {
        let r = &result.record;
        timings.push(TimingRecord {
            n: r.n,
            r: r.r,
            p: r.p,
            l: r.l,
            scores: r.scores,
            trial: r.trial,
            method: r.method.clone(),
            seconds: result.seconds,
        });
        if let Some(trace) = result.trace {
            traces.push(NamedTrace {
                name: format!("trace_{}_n{}_L{}_t{}", r.method, r.n, r.l, r.trial),
                trace,
            });
        }
        records.push(result.record);
    }
    let summary = summarize(config, &coords, &records);
    Ok(ExperimentOutput {
        config: config.clone(),
        records,
        summary,
        timings,
        traces,
    })
}

fn base_record(config: &ExperimentConfig, c: &Coordinate, trial: u64, seed: u64, method: &str) -> TrialRecord {
    TrialRecord {
        experiment: config.experiment,
        grid: config.grid,
        n: c.n,
        r: c.r,
        p: c.p,
        l: c.l,
        scores: c.scores,
        trial,
        seed,
        method: method.to_string(),
        linf: None,
        max_pairwise: None,
        pi_rel_error: None,
        numerical_failure: false,
        iterations: None,
        bound: None,
        status: "ok".into(),
    }
}

fn failed(mut record: TrialRecord, e: &Error) -> TrialRecord {
    record.status = format!("failed: {e}");
    record
}

fn run_trial(config: &ExperimentConfig, coord_index: usize, c: &Coordinate, trial: u64) -> Vec<MethodResult> {
    let seed = trial_seed(config.seed, trial);
    let methods = config.methods();
    let fail_all = |e: Error| -> Vec<MethodResult> {
        methods
            .iter()
            .map(|m| MethodResult {
                record: failed(base_record(config, c, trial, seed, m), &e),
                seconds: 0.0,
                trace: None,
            })
            .collect()
    };
    let setup = (|| {
        let spec = GridSpec::new(config.grid, c.n, c.r, c.p)?;
        let graph = generate_grid(&spec, &SamplePolicy::Constant(c.l), &mut stream(seed, 2 * coord_index as u64))?;
        if !graph.is_connected() {
            return Err(Error::Disconnected);
        }
        let truth = make_scores(&c.scores.kind(config.grid), c.n, c.r)?;
        let data = sample_comparisons(&graph, &truth, &mut stream(seed, 2 * coord_index as u64 + 1))?;
        Ok((spec, graph, truth, data))
    })();
    let (spec, graph, truth, data) = match setup {
        Ok(s) => s,
        Err(e) => return fail_all(e),
    };
    let problem = match MleProblem::new(&graph, &data) {
        Ok(p) => p,
        Err(e) => return fail_all(e),
    };

    match config.experiment {
        ExperimentId::MleVsSpectral | ExperimentId::MleVsDcoverlap => methods
            .iter()
            .map(|m| {
                let start = Instant::now();
                let mut record = base_record(config, c, trial, seed, m);
                if config.experiment == ExperimentId::MleVsDcoverlap {
                    record.bound = Some(locality_bound(config.grid, c.n as f64, c.r as f64, c.p, c.l as f64, config.bound_constant()));
                }
                let outcome = match m.as_str() {
                    "mle" => accurate_mle(&problem).map(|t| (t, None, false)),
                    "spectral" => spectral_estimate(&graph, &data, &SpectralOptions::default()).map(|s| {
                        let pi_star = softmax(truth.values());
                        let scale = pi_star.iter().fold(0.0f64, |a, &b| a.max(b));
                        let rel = s.pi.iter().zip(&pi_star).fold(0.0f64, |a, (x, y)| a.max((x - y).abs())) / scale;
                        (s.theta, Some(rel), s.numerical_failure)
                    }),
                    "dc-overlap" => partition_grid(&graph, &spec, PartitionMode::Overlapping)
                        .and_then(|(partition, _)| dc_overlap(&graph, &data, &partition, LocalMethod::Mle))
                        .map(|out| (out.theta, None, false)),
                    other => Err(Error::InvalidInput(format!("unknown method {other}"))),
                };
                let record = match outcome {
                    Ok((theta, pi_rel, numerical_failure)) => {
                        record.pi_rel_error = pi_rel;
                        record.numerical_failure = numerical_failure;
                        fill_errors(record, &theta, &truth)
                    }
                    Err(e) => failed(record, &e),
                };
                MethodResult {
                    record,
                    seconds: start.elapsed().as_secs_f64(),
                    trace: None,
                }
            })
            .collect(),
        ExperimentId::Convergence => convergence_trial(config, c, &spec, &graph, &problem, &truth, trial, seed),
    }
}

fn fill_errors(mut record: TrialRecord, theta: &ScoreVector, truth: &ScoreVector) -> TrialRecord {
    if !theta.is_finite() {
        record.linf = Some(f64::INFINITY);
        record.max_pairwise = Some(f64::INFINITY);
        return record;
    }
    match error_report(theta, truth, None) {
        Ok(rep) => {
            record.linf = Some(rep.linf);
            record.max_pairwise = Some(rep.max_pairwise);
            record
        }
        Err(e) => failed(record, &e),
    }
}

fn softmax(theta: &[f64]) -> Vec<f64> {
    let max = theta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = theta.iter().map(|t| (t - max).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

/// MLE solved well past the default tolerance, for use as a reference.
pub fn accurate_mle(problem: &MleProblem) -> Result<ScoreVector> {
    let config = SolverConfig::precond_gd(problem)
        .with_tol(1e-10 * problem.total_weight())
        .with_max_iter(2000);
    let (theta, trace) = solve_mle(problem, &config, None)?;
    if !trace.converged {
        return Err(Error::InvalidInput("reference MLE did not converge".into()));
    }
    Ok(theta)
}

/// `1/(r p L)` on 1D grids and `1/(r² p L)` on 2D grids.
pub fn small_step(spec: &GridSpec, l: f64) -> f64 {
    let r = spec.r as f64;
    match spec.kind {
        GridKind::Grid1D => 1.0 / (r * spec.p * l),
        GridKind::Grid2D => 1.0 / (r * r * spec.p * l),
    }
}

/// Loss gap, relative to `L_total`, at which a solver counts as converged.
pub const CONVERGENCE_GAP: f64 = 1e-6;

#[allow(clippy::too_many_arguments)]
fn convergence_trial(
    config: &ExperimentConfig,
    c: &Coordinate,
    spec: &GridSpec,
    graph: &ComparisonGraph,
    problem: &MleProblem,
    truth: &ScoreVector,
    trial: u64,
    seed: u64,
) -> Vec<MethodResult> {
    let methods = config.methods();
    let reference = match accurate_mle(problem) {
        Ok(t) => t,
        Err(e) => {
            return methods
                .iter()
                .map(|m| MethodResult {
                    record: failed(base_record(config, c, trial, seed, m), &e),
                    seconds: 0.0,
                    trace: None,
                })
                .collect()
        }
    };
    let target = loss(problem, reference.values()) + CONVERGENCE_GAP * problem.total_weight();
    let eta = small_step(spec, c.l as f64);
    let cap = config.max_iter.unwrap_or(20_000);
    methods
        .iter()
        .map(|m| {
            let start = Instant::now();
            let mut record = base_record(config, c, trial, seed, m);
            let solver = match m.as_str() {
                "precond-oracle" => Ok(SolverConfig::precond_gd(problem)
                    .with_preconditioner(Preconditioner::Oracle(truth.clone()))
                    .with_max_iter(500)),
                "precond-lg" => Ok(SolverConfig::precond_gd(problem).with_max_iter(500)),
                "pgd" => partition_grid(graph, spec, PartitionMode::Overlapping)
                    .map(|(p, _)| SolverConfig::pgd(problem, p, eta).with_max_iter(cap)),
                "cd" => Ok(SolverConfig::cd(problem).with_max_iter(cap)),
                "gd" => Ok(SolverConfig::gd(problem, eta).with_max_iter(cap)),
                "gd-large" => Ok(SolverConfig::gd(problem, 5.0 * eta).with_max_iter(cap)),
                other => Err(Error::InvalidInput(format!("unknown method {other}"))),
            };
            let outcome = solver.and_then(|s| {
                let s = s
                    .with_tol(f64::MIN_POSITIVE)
                    .with_target_loss(target)
                    .with_reference(reference.values());
                solve_mle(problem, &s, None)
            });
            let (record, trace) = match outcome {
                Ok((theta, trace)) => {
                    record.iterations = trace.first_below(target);
                    record.status = if record.iterations.is_some() {
                        "ok".into()
                    } else if trace.diverged {
                        "diverged".into()
                    } else {
                        "cap".into()
                    };
                    (fill_errors(record, &theta, truth), Some(trace))
                }
                Err(e) => (failed(record, &e), None),
            };
            MethodResult {
                record,
                seconds: start.elapsed().as_secs_f64(),
                trace,
            }
        })
        .collect()
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(|a, b| a.total_cmp(b));
    let k = v.len();
    Some(if k % 2 == 1 { v[k / 2] } else { 0.5 * (v[k / 2 - 1] + v[k / 2]) })
}

fn summarize(config: &ExperimentConfig, coords: &[Coordinate], records: &[TrialRecord]) -> Vec<SummaryRow> {
    let mut rows = Vec::new();
    for c in coords {
        for m in config.methods() {
            let rs: Vec<&TrialRecord> = records.iter().filter(|r| r.method == m && same_coordinate(r, c)).collect();
            let failures = rs.iter().filter(|r| r.status.starts_with("failed")).count();
            let linf: Vec<f64> = rs.iter().filter_map(|r| r.linf).collect();
            let pairwise: Vec<f64> = rs.iter().filter_map(|r| r.max_pairwise).collect();
            let pi: Vec<f64> = rs.iter().filter_map(|r| r.pi_rel_error).collect();
            let bound = rs.iter().find_map(|r| r.bound);
            let median_iterations = if config.experiment == ExperimentId::Convergence {
                median(
                    rs.iter()
                        .filter(|r| !r.status.starts_with("failed"))
                        .map(|r| r.iterations.map_or(f64::INFINITY, |i| i as f64))
                        .collect(),
                )
                .filter(|v| v.is_finite())
            } else {
                None
            };
            rows.push(SummaryRow {
                n: c.n,
                r: c.r,
                p: c.p,
                l: c.l,
                scores: c.scores,
                method: m.clone(),
                trials: rs.len(),
                failures,
                numerical_failures: rs.iter().filter(|r| r.numerical_failure).count(),
                mean_linf: mean(&linf),
                median_linf: median(linf.clone()),
                mean_max_pairwise: mean(&pairwise),
                mean_pi_rel_error: mean(&pi),
                median_iterations,
                bound,
                within_bound: bound.and_then(|b| {
                    (!linf.is_empty()).then(|| linf.iter().filter(|&&e| e <= b).count() as f64 / rs.len() as f64)
                }),
            });
        }
    }
    rows
}

fn write_csv<T: Serialize>(rows: &[T], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `config.json`, `records.csv`, `summary.csv`, `timings.csv` and,
/// for the convergence experiment, one trace CSV per method and trial under
/// `traces/`. Everything except `timings.csv` is a deterministic function
/// of the config.
pub fn write_outputs(output: &ExperimentOutput, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("config.json"), serde_json::to_string_pretty(&output.config)? + "\n")?;
    write_csv(&output.records, &dir.join("records.csv"))?;
    write_csv(&output.summary, &dir.join("summary.csv"))?;
    write_csv(&output.timings, &dir.join("timings.csv"))?;
    if !output.traces.is_empty() {
        let tdir = dir.join("traces");
        fs::create_dir_all(&tdir)?;
        for t in &output.traces {
            crate::io::save_trace(&t.trace, &tdir.join(format!("{}.csv", t.name)))?;
        }
    }
    Ok(())
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let config: ExperimentConfig = serde_json::from_str(&fs::read_to_string(path)?)?;
    config.validate()?;
    Ok(config)
}
