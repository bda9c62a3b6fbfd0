//! The `btl` command-line front end.
//!
//! Exit codes: 0 on success, 1 on usage or input errors, 2 when the
//! estimate itself fails (no finite MLE, spectral underflow, divergence).

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::dc::{dc_community, dc_overlap, CommunityWeights, LocalMethod};
use crate::error::{Error, Result};
use crate::estimators::{solve_mle, spectral_estimate, MleProblem, Preconditioner, SolverConfig, SpectralOptions};
use crate::experiments::{load_config, run_experiment, write_outputs, ExperimentConfig, ExperimentId};
use crate::graph::{
    generate_grid, generate_special, partition_grid, ComparisonGraph, GridKind, GridSpec, Partition, PartitionMode,
    SamplePolicy, SpecialGraph,
};
use crate::io;
use crate::metrics::bound_quantities;
use crate::model::{dynamic_range, make_scores, oracle_laplacian, sample_comparisons, ComparisonData, ScoreKind, ScoreVector};
use crate::rng::seeded;

#[derive(Debug, Parser)]
#[command(name = "btl", version, about = "Bradley-Terry-Luce score estimation on comparison graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a comparison graph and optionally a grid partition.
    Generate(GenerateArgs),
    /// Sample comparison outcomes on a graph.
    Sample(SampleArgs),
    /// Estimate scores from comparison data.
    Estimate(EstimateArgs),
    /// Effective resistances of L_G, or of L_z when scores are given.
    Resistance(ResistanceArgs),
    /// Per-pair bound quantities B, Q, V.
    Bounds(BoundsArgs),
    /// Run a Monte-Carlo experiment.
    Experiment(ExperimentArgs),
    /// Run an MLE solver and write its convergence trace.
    Trace(TraceArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GraphKind {
    Grid1d,
    Grid2d,
    Er,
    Line,
    Ring,
    Complete,
    Barbell,
    Tree,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GridArg {
    Grid1d,
    Grid2d,
}

impl From<GridArg> for GridKind {
    fn from(g: GridArg) -> Self {
        match g {
            GridArg::Grid1d => GridKind::Grid1D,
            GridArg::Grid2d => GridKind::Grid2D,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Overlapping,
    Disjoint,
}

impl From<ModeArg> for PartitionMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Overlapping => PartitionMode::Overlapping,
            ModeArg::Disjoint => PartitionMode::Disjoint,
        }
    }
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long)]
    kind: GraphKind,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    r: Option<usize>,
    /// Edge probability (grids and Erdos-Renyi).
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    /// Comparisons per edge.
    #[arg(long = "L", alias = "l", default_value_t = 1)]
    l: u64,
    /// Barbell clique sizes and bridge sample count.
    #[arg(long)]
    left: Option<usize>,
    #[arg(long)]
    right: Option<usize>,
    #[arg(long)]
    bridge_l: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Also write a grid partition in this mode.
    #[arg(long)]
    partition: Option<ModeArg>,
    #[arg(long, requires = "partition")]
    partition_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScoreArg {
    Sine,
    Linear,
    Linear2d,
}

#[derive(Debug, Args)]
struct SampleArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Ground-truth scores file; alternatively use --score-kind.
    #[arg(long, conflicts_with = "score_kind")]
    scores: Option<PathBuf>,
    #[arg(long, requires = "r")]
    score_kind: Option<ScoreArg>,
    #[arg(long)]
    r: Option<usize>,
    /// Write the ground truth used.
    #[arg(long)]
    scores_out: Option<PathBuf>,
    /// Write expected win fractions instead of sampling.
    #[arg(long)]
    exact: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EstimateMethod {
    MleGd,
    MleCd,
    MlePrecond,
    MlePgd,
    Spectral,
    DcOverlap,
    DcCommunity,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PrecondArg {
    Oracle,
    Lg,
    QuarterLg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum LocalArg {
    Mle,
    Spectral,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum WeightsArg {
    Unit,
    CrossCount,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// Partition JSON for the partitioned methods.
    #[arg(long, conflicts_with = "auto_partition")]
    partition: Option<PathBuf>,
    /// Build a grid partition instead; needs --grid-kind and --r.
    #[arg(long, value_parser = ["grid"])]
    auto_partition: Option<String>,
    #[arg(long)]
    grid_kind: Option<GridArg>,
    #[arg(long)]
    r: Option<usize>,
    /// Step size for GD and PGD (defaults to 2 / max weighted degree).
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, default_value = "quarter-lg")]
    preconditioner: PrecondArg,
    /// Ground truth, needed by the oracle preconditioner.
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    #[arg(long)]
    method: EstimateMethod,
    #[command(flatten)]
    solve: SolveArgs,
    #[arg(long, default_value = "mle")]
    local: LocalArg,
    #[arg(long, default_value = "cross-count")]
    weights: WeightsArg,
    #[arg(long)]
    out: PathBuf,
    /// Convergence trace of the iterative MLE methods.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Stationary distribution of the spectral method.
    #[arg(long)]
    pi_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TraceArgs {
    #[arg(long)]
    method: EstimateMethod,
    #[command(flatten)]
    solve: SolveArgs,
    /// Scores whose gauged ℓ∞ distance is recorded per iteration.
    #[arg(long)]
    reference: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ResistanceArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Use L_z at these scores instead of L_G.
    #[arg(long)]
    scores: Option<PathBuf>,
    /// `all`, `edges`, or a list like `0:5,3:7`.
    #[arg(long, default_value = "all")]
    pairs: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct BoundsArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    scores: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long, default_value_t = 1.0)]
    c0: f64,
    #[arg(long, default_value = "all")]
    pairs: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PresetArg {
    MleVsSpectral,
    MleVsDcoverlap,
    Convergence,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    /// JSON config; alternatively use --preset.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<PresetArg>,
    #[arg(long, default_value = "grid1d")]
    grid_kind: GridArg,
    #[arg(long)]
    full_scale: bool,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

/// Failure of the estimate itself, as opposed to bad input.
struct EstimateFailure(String);

enum Failure {
    Usage(String),
    Estimate(EstimateFailure),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if is_numerical(&e) {
            Failure::Estimate(EstimateFailure(e.to_string()))
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

fn is_numerical(e: &Error) -> bool {
    match e {
        Error::NonExistence { .. }
        | Error::SpectralFailure(_)
        | Error::InfiniteLogit(_)
        | Error::UnanimousCrossEdges { .. } => true,
        Error::Subgraph { source, .. } => is_numerical(source),
        _ => false,
    }
}

type CliResult = std::result::Result<(), Failure>;

/// Runs the CLI on `argv` (including the program name) and returns the exit code.
pub fn cli_main(argv: Vec<String>) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Sample(a) => sample(a),
        Command::Estimate(a) => estimate(a),
        Command::Resistance(a) => resistance(a),
        Command::Bounds(a) => bounds(a),
        Command::Experiment(a) => experiment(a),
        Command::Trace(a) => trace(a),
    };
    match result {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(Failure::Estimate(EstimateFailure(msg))) => {
            eprintln!("estimation failed: {msg}");
            2
        }
    }
}

fn need<T>(v: Option<T>, flag: &str) -> std::result::Result<T, Failure> {
    v.ok_or_else(|| Failure::Usage(format!("--{flag} is required here")))
}

fn generate(a: GenerateArgs) -> CliResult {
    let mut rng = seeded(a.seed);
    let policy = SamplePolicy::Constant(a.l);
    let grid = |kind: GridKind| -> Result<GridSpec> {
        GridSpec::new(
            kind,
            a.n.ok_or_else(|| Error::InvalidInput("--n is required".into()))?,
            a.r.ok_or_else(|| Error::InvalidInput("--r is required for grids".into()))?,
            a.p,
        )
    };
    let (graph, spec) = match a.kind {
        GraphKind::Grid1d | GraphKind::Grid2d => {
            let kind = if matches!(a.kind, GraphKind::Grid1d) { GridKind::Grid1D } else { GridKind::Grid2D };
            let spec = grid(kind)?;
            (generate_grid(&spec, &policy, &mut rng)?, Some(spec))
        }
        other => {
            let special = match other {
                GraphKind::Er => SpecialGraph::Er { n: need(a.n, "n")?, p: a.p },
                GraphKind::Line => SpecialGraph::Line { n: need(a.n, "n")? },
                GraphKind::Ring => SpecialGraph::Ring { n: need(a.n, "n")? },
                GraphKind::Complete => SpecialGraph::Complete { n: need(a.n, "n")? },
                GraphKind::Tree => SpecialGraph::Tree { n: need(a.n, "n")? },
                _ => SpecialGraph::Barbell {
                    left: need(a.left, "left")?,
                    right: need(a.right, "right")?,
                    bridge_count: a.bridge_l.unwrap_or(a.l),
                },
            };
            (generate_special(&special, &policy, &mut rng)?, None)
        }
    };
    if !graph.is_connected() {
        eprintln!("warning: generated graph is not connected");
    }
    io::save_graph(&graph, &a.out)?;
    if let Some(mode) = a.partition {
        let spec = spec.ok_or_else(|| Failure::Usage("--partition needs a grid kind".into()))?;
        let out = need(a.partition_out, "partition-out")?;
        let (partition, supergraph) = partition_grid(&graph, &spec, mode.into())?;
        if !supergraph.is_connected() {
            eprintln!("warning: super-graph is not connected");
        }
        io::save_partition(&partition, &out)?;
    }
    Ok(())
}

fn sample(a: SampleArgs) -> CliResult {
    let graph = io::load_graph(&a.graph)?;
    let truth = match (&a.scores, a.score_kind) {
        (Some(path), _) => io::load_scores(path)?,
        (None, Some(kind)) => {
            let kind = match kind {
                ScoreArg::Sine => ScoreKind::Sine,
                ScoreArg::Linear => ScoreKind::Linear,
                ScoreArg::Linear2d => ScoreKind::Linear2d,
            };
            make_scores(&kind, graph.n(), need(a.r, "r")?)?
        }
        (None, None) => return Err(Failure::Usage("give --scores or --score-kind".into())),
    };
    if truth.len() != graph.n() {
        return Err(Failure::Usage(format!("{} scores for {} nodes", truth.len(), graph.n())));
    }
    let data = if a.exact {
        ComparisonData::expected(&graph, &truth)?
    } else {
        sample_comparisons(&graph, &truth, &mut seeded(a.seed))?
    };
    io::save_data(&data, &a.out)?;
    if let Some(path) = &a.scores_out {
        io::save_scores(&truth, path)?;
    }
    Ok(())
}

fn load_partition(s: &SolveArgs, graph: &ComparisonGraph, mode: PartitionMode) -> std::result::Result<Partition, Failure> {
    if let Some(path) = &s.partition {
        return Ok(io::load_partition(path, graph.n(), mode)?);
    }
    if s.auto_partition.is_some() {
        let kind = need(s.grid_kind, "grid-kind")?;
        let spec = GridSpec::new(kind.into(), graph.n(), need(s.r, "r")?, 1.0)?;
        return Ok(partition_grid(graph, &spec, mode)?.0);
    }
    Err(Failure::Usage("this method needs --partition or --auto-partition grid".into()))
}

fn solver_config(method: EstimateMethod, s: &SolveArgs, graph: &ComparisonGraph, problem: &MleProblem) -> std::result::Result<SolverConfig, Failure> {
    let step = s.step.unwrap_or_else(|| crate::estimators::safe_step(problem));
    let mut config = match method {
        EstimateMethod::MleGd => SolverConfig::gd(problem, step),
        EstimateMethod::MleCd => SolverConfig::cd(problem),
        EstimateMethod::MlePrecond => {
            let p = match s.preconditioner {
                PrecondArg::Oracle => {
                    let truth = io::load_scores(&need(s.truth.clone(), "truth")?)?;
                    Preconditioner::Oracle(truth)
                }
                PrecondArg::Lg => Preconditioner::Surrogate,
                PrecondArg::QuarterLg => Preconditioner::QuarterSurrogate,
            };
            SolverConfig::precond_gd(problem).with_preconditioner(p)
        }
        EstimateMethod::MlePgd => {
            let partition = load_partition(s, graph, PartitionMode::Overlapping)?;
            SolverConfig::pgd(problem, partition, step)
        }
        _ => return Err(Failure::Usage("not an iterative MLE method".into())),
    };
    if let Some(m) = s.max_iter {
        config = config.with_max_iter(m);
    }
    if let Some(t) = s.tol {
        config = config.with_tol(t);
    }
    Ok(config)
}

fn run_solver(
    method: EstimateMethod,
    s: &SolveArgs,
    reference: Option<&ScoreVector>,
) -> std::result::Result<(ScoreVector, crate::estimators::ConvergenceTrace), Failure> {
    let graph = io::load_graph(&s.graph)?;
    let data = io::load_data(&s.data, &graph)?;
    let problem = MleProblem::new(&graph, &data)?;
    let mut config = solver_config(method, s, &graph, &problem)?;
    if let Some(r) = reference {
        config = config.with_reference(r.values());
    }
    let (theta, trace) = solve_mle(&problem, &config, None)?;
    if trace.diverged {
        return Err(Failure::Estimate(EstimateFailure(format!(
            "solver diverged after {} iterations; try a smaller --step",
            trace.iterations()
        ))));
    }
    if !trace.converged {
        eprintln!("warning: stopped at the iteration cap ({}) before reaching the tolerance", trace.iterations());
    }
    Ok((theta, trace))
}

fn estimate(a: EstimateArgs) -> CliResult {
    let local = match a.local {
        LocalArg::Mle => LocalMethod::Mle,
        LocalArg::Spectral => LocalMethod::Spectral,
    };
    let theta = match a.method {
        EstimateMethod::MleGd | EstimateMethod::MleCd | EstimateMethod::MlePrecond | EstimateMethod::MlePgd => {
            let (theta, trace) = run_solver(a.method, &a.solve, None)?;
            if let Some(path) = &a.trace {
                io::save_trace(&trace, path)?;
            }
            theta
        }
        EstimateMethod::Spectral => {
            let graph = io::load_graph(&a.solve.graph)?;
            let data = io::load_data(&a.solve.data, &graph)?;
            let est = spectral_estimate(&graph, &data, &SpectralOptions::default())?;
            if let Some(path) = &a.pi_out {
                std::fs::write(path, serde_json::to_string(&est.pi).map_err(Error::from)? + "\n").map_err(Error::from)?;
            }
            if est.numerical_failure {
                let dead = est.pi.iter().filter(|&&p| p < crate::estimators::PI_UNDERFLOW).count();
                return Err(Failure::Estimate(EstimateFailure(format!(
                    "{dead} stationary probabilities underflowed below {:e}; log(pi) is not a usable score estimate",
                    crate::estimators::PI_UNDERFLOW
                ))));
            }
            if !est.converged {
                eprintln!("warning: power iteration stopped with residual {:e}", est.residual);
            }
            est.theta
        }
        EstimateMethod::DcOverlap => {
            let graph = io::load_graph(&a.solve.graph)?;
            let data = io::load_data(&a.solve.data, &graph)?;
            let partition = load_partition(&a.solve, &graph, PartitionMode::Overlapping)?;
            dc_overlap(&graph, &data, &partition, local)?.theta
        }
        EstimateMethod::DcCommunity => {
            let graph = io::load_graph(&a.solve.graph)?;
            let data = io::load_data(&a.solve.data, &graph)?;
            let partition = load_partition(&a.solve, &graph, PartitionMode::Disjoint)?;
            let weights = match a.weights {
                WeightsArg::Unit => CommunityWeights::Unit,
                WeightsArg::CrossCount => CommunityWeights::CrossEdgeCount,
            };
            dc_community(&graph, &data, &partition, weights, local)?.theta
        }
    };
    if !theta.is_finite() {
        return Err(Failure::Estimate(EstimateFailure("estimate has non-finite entries".into())));
    }
    io::save_scores(&theta, &a.out)?;
    Ok(())
}

fn trace(a: TraceArgs) -> CliResult {
    if matches!(a.method, EstimateMethod::Spectral | EstimateMethod::DcOverlap | EstimateMethod::DcCommunity) {
        return Err(Failure::Usage("trace needs one of mle-gd, mle-cd, mle-precond, mle-pgd".into()));
    }
    let reference = a.reference.as_deref().map(io::load_scores).transpose()?;
    let (_, trace) = run_solver(a.method, &a.solve, reference.as_ref())?;
    io::save_trace(&trace, &a.out)?;
    Ok(())
}

fn parse_pairs(spec: &str, graph: &ComparisonGraph) -> std::result::Result<Option<Vec<(usize, usize)>>, Failure> {
    match spec {
        "all" => Ok(None),
        "edges" => Ok(Some(graph.edges().iter().map(|e| (e.i, e.j)).collect())),
        list => list
            .split(',')
            .map(|item| {
                let (k, l) = item
                    .split_once(':')
                    .ok_or_else(|| Failure::Usage(format!("bad pair {item:?}; expected k:l")))?;
                let parse = |s: &str| {
                    s.trim()
                        .parse::<usize>()
                        .map_err(|_| Failure::Usage(format!("bad node index {s:?}")))
                };
                let (k, l) = (parse(k)?, parse(l)?);
                if k >= graph.n() || l >= graph.n() {
                    return Err(Failure::Usage(format!("pair {k}:{l} out of range for n = {}", graph.n())));
                }
                Ok((k, l))
            })
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(Some),
    }
}

fn resistance(a: ResistanceArgs) -> CliResult {
    let graph = io::load_graph(&a.graph)?;
    let lap = match &a.scores {
        Some(path) => oracle_laplacian(&graph, &load_scores_for(path, &graph)?)?,
        None => crate::model::surrogate_laplacian(&graph, 1.0)?,
    };
    let pairs = parse_pairs(&a.pairs, &graph)?;
    let omega = lap.resistance_matrix(pairs.as_deref())?;
    io::save_resistances(&omega, &a.out)?;
    Ok(())
}

fn load_scores_for(path: &Path, graph: &ComparisonGraph) -> std::result::Result<ScoreVector, Failure> {
    let s = io::load_scores(path)?;
    if s.len() != graph.n() {
        return Err(Failure::Usage(format!("{} scores for {} nodes", s.len(), graph.n())));
    }
    Ok(s)
}

fn bounds(a: BoundsArgs) -> CliResult {
    let graph = io::load_graph(&a.graph)?;
    let scores = load_scores_for(&a.scores, &graph)?;
    let lz = oracle_laplacian(&graph, &scores)?;
    let (_, kappa_e) = dynamic_range(&graph, &scores);
    let pairs = parse_pairs(&a.pairs, &graph)?;
    let q = bound_quantities(&lz, &graph, kappa_e, a.delta, a.c0, pairs.as_deref())?;
    if !q.condition_holds {
        eprintln!("note: Q_kl <= 4 B_kl fails on some edge; the error bound uses the looser branch there");
    }
    io::save_bounds(&q, &a.out)?;
    Ok(())
}

fn experiment(a: ExperimentArgs) -> CliResult {
    let mut config: ExperimentConfig = match (&a.config, a.preset) {
        (Some(path), _) => load_config(path)?,
        (None, Some(p)) => {
            let id = match p {
                PresetArg::MleVsSpectral => ExperimentId::MleVsSpectral,
                PresetArg::MleVsDcoverlap => ExperimentId::MleVsDcoverlap,
                PresetArg::Convergence => ExperimentId::Convergence,
            };
            ExperimentConfig::preset(id, a.grid_kind.into(), a.full_scale)
        }
        (None, None) => return Err(Failure::Usage("give --config or --preset".into())),
    };
    if let Some(t) = a.trials {
        config.trials = t;
    }
    if let Some(s) = a.seed {
        config.seed = s;
    }
    let output = run_experiment(&config)?;
    write_outputs(&output, &a.out)?;
    if output.has_failures() {
        let failed = output.records.iter().filter(|r| r.status.starts_with("failed")).count();
        eprintln!("warning: {failed} trial(s) failed; see the status column of records.csv");
    }
    Ok(())
}
