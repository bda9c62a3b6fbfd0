//! Divide-and-conquer estimators: DC-overlap, projected gradient descent
//! with re-parameterization, and DC-community.
//!
//! All three share the same shape: estimate (or update) scores on each
//! subgraph, then align the subgraphs with one shift per subgraph found by
//! a Laplacian solve on the super-graph.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimators::{
    gradient, solve_mle, spectral_estimate, ConvergenceTrace, MleProblem, ProblemEdge, PseudoInverse,
    SolverConfig, SpectralOptions, Status, Tracker,
};
use crate::graph::{ComparisonGraph, Partition, PartitionMode, SuperEdgePayload, SuperGraph};
use crate::laplacian::{project_out_ones, LaplacianOperator, SolveOptions, SolveReport};
use crate::model::{sigmoid, ComparisonData, EdgeObservation, ScoreVector};

/// How each subgraph is estimated in step 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LocalMethod {
    #[default]
    Mle,
    Spectral,
}

/// Per-subgraph scores, indexed like `subsets[a]` and zero-sum on each subgraph.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalEstimates {
    pub subsets: Vec<Vec<usize>>,
    pub values: Vec<Vec<f64>>,
}

impl LocalEstimates {
    /// `θ_(a)i`, if `i ∈ V_(a)`.
    pub fn get(&self, a: usize, i: usize) -> Option<f64> {
        self.subsets[a].binary_search(&i).ok().map(|k| self.values[a][k])
    }
}

/// Alignment step output: `c = L̃^† x`.
#[derive(Debug, Clone)]
pub struct AlignmentShifts {
    pub c: Vec<f64>,
    pub x: Vec<f64>,
    pub laplacian: LaplacianOperator,
    pub report: SolveReport,
}

#[derive(Debug, Clone)]
pub struct DcOverlapOutput {
    pub theta: ScoreVector,
    pub local: LocalEstimates,
    pub shifts: AlignmentShifts,
}

#[derive(Debug, Clone)]
pub struct DcCommunityOutput {
    pub theta: ScoreVector,
    pub local: LocalEstimates,
    pub shifts: AlignmentShifts,
    /// `((a, b), Δ_(a,b))` per super-edge.
    pub deltas: Vec<((usize, usize), f64)>,
}

/// Super-edge weights for DC-community.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CommunityWeights {
    Unit,
    /// `|(V_(a) × V_(b)) ∩ E|`.
    #[default]
    CrossEdgeCount,
}

/// Data restricted to the subgraph induced by `nodes` (sorted), relabelled `0..nodes.len()`.
pub fn restrict(graph: &ComparisonGraph, data: &ComparisonData, nodes: &[usize]) -> Result<(ComparisonGraph, ComparisonData)> {
    let (sub, kept) = graph.induced(nodes)?;
    let records: Vec<EdgeObservation> = sub
        .edges()
        .iter()
        .zip(&kept)
        .map(|(e, &k)| {
            let r = data.records()[k];
            EdgeObservation { i: e.i, j: e.j, ..r }
        })
        .collect();
    let sub_data = ComparisonData::for_graph(&sub, records)?;
    Ok((sub, sub_data))
}

fn local_estimate(graph: &ComparisonGraph, data: &ComparisonData, nodes: &[usize], method: LocalMethod) -> Result<Vec<f64>> {
    if nodes.len() == 1 {
        return Ok(vec![0.0]);
    }
    let (sub, sub_data) = restrict(graph, data, nodes)?;
    let theta = match method {
        LocalMethod::Mle => {
            let problem = MleProblem::new(&sub, &sub_data)?;
            let config = SolverConfig::precond_gd(&problem)
                .with_tol(1e-10 * problem.total_weight())
                .with_max_iter(2000);
            let (theta, trace) = solve_mle(&problem, &config, None)?;
            if !trace.converged {
                return Err(Error::InvalidInput("local MLE did not converge".into()));
            }
            theta
        }
        LocalMethod::Spectral => {
            let s = spectral_estimate(&sub, &sub_data, &SpectralOptions::default())?;
            if s.numerical_failure {
                return Err(Error::SpectralFailure("stationary distribution underflowed".into()));
            }
            s.theta
        }
    };
    Ok(theta.into_vec())
}

/// Step 1, run in parallel across subgraphs.
pub fn local_estimates(graph: &ComparisonGraph, data: &ComparisonData, partition: &Partition, method: LocalMethod) -> Result<LocalEstimates> {
    let values = partition
        .subsets()
        .par_iter()
        .enumerate()
        .map(|(a, nodes)| {
            local_estimate(graph, data, nodes, method).map_err(|e| Error::Subgraph {
                subgraph: a,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LocalEstimates {
        subsets: partition.subsets().to_vec(),
        values,
    })
}

fn overlaps(supergraph: &SuperGraph) -> impl Iterator<Item = (usize, usize, &[usize])> {
    supergraph.edges().iter().filter_map(|e| match &e.payload {
        SuperEdgePayload::Overlap(nodes) => Some((e.a, e.b, nodes.as_slice())),
        SuperEdgePayload::Cross(_) => None,
    })
}

/// `L̃` with weights `|V_(a) ∩ V_(b)|`.
pub fn overlap_laplacian(supergraph: &SuperGraph) -> Result<LaplacianOperator> {
    LaplacianOperator::assemble(
        supergraph.m(),
        overlaps(supergraph).map(|(a, b, nodes)| (a, b, nodes.len() as f64)),
    )
}

fn solve_shifts(laplacian: LaplacianOperator, x: Vec<f64>) -> Result<AlignmentShifts> {
    if !laplacian.is_connected() {
        return Err(Error::DisconnectedSuperGraph);
    }
    let (c, report) = laplacian.solve_orthogonal(&x, &SolveOptions::default())?;
    Ok(AlignmentShifts { c, x, laplacian, report })
}

/// Step 2 of DC-overlap: shifts minimizing the disagreement on shared nodes.
pub fn align_overlapping(supergraph: &SuperGraph, local: &LocalEstimates) -> Result<AlignmentShifts> {
    let mut x = vec![0.0; supergraph.m()];
    for (a, b, nodes) in overlaps(supergraph) {
        for &i in nodes {
            let d = local.get(b, i).expect("shared node") - local.get(a, i).expect("shared node");
            x[a] += d;
            x[b] -= d;
        }
    }
    solve_shifts(overlap_laplacian(supergraph)?, x)
}

/// `θ_i = (1/s_i) Σ_{a ∋ i} (θ_(a)i + c_(a))`, gauged to zero-sum.
fn merge(n: usize, local: &LocalEstimates, c: &[f64]) -> ScoreVector {
    let mut sum = vec![0.0; n];
    let mut count = vec![0usize; n];
    for (a, (nodes, vals)) in local.subsets.iter().zip(&local.values).enumerate() {
        for (&i, &v) in nodes.iter().zip(vals) {
            sum[i] += v + c[a];
            count[i] += 1;
        }
    }
    ScoreVector::zero_sum(sum.iter().zip(&count).map(|(s, &k)| s / k as f64).collect())
}

/// DC-overlap with overlapping subgraphs.
pub fn dc_overlap(graph: &ComparisonGraph, data: &ComparisonData, partition: &Partition, method: LocalMethod) -> Result<DcOverlapOutput> {
    check_partition(graph, partition)?;
    let supergraph = SuperGraph::from_overlaps(partition);
    if !supergraph.is_connected() {
        return Err(Error::DisconnectedSuperGraph);
    }
    let local = local_estimates(graph, data, partition, method)?;
    let shifts = align_overlapping(&supergraph, &local)?;
    let theta = merge(graph.n(), &local, &shifts.c);
    Ok(DcOverlapOutput { theta, local, shifts })
}

fn check_partition(graph: &ComparisonGraph, partition: &Partition) -> Result<()> {
    if partition.n() != graph.n() {
        return Err(Error::InvalidInput(format!(
            "partition covers {} nodes but graph has {}",
            partition.n(),
            graph.n()
        )));
    }
    Ok(())
}

/// Evaluates the alignment-error identity
/// `c - c* = -c̄* 1 + L̃^† Σ_(a,b) Σ_{i ∈ V_(a) ∩ V_(b)} (δ_(b)i - δ_(a)i)(e_(a) - e_(b))`
/// and returns the `ℓ∞` gap between its two sides.
///
/// Here `c*_(a)` is the mean of `θ*` over `V_(a)` and
/// `δ_(a) = θ_(a) - (θ*|V_(a) - c*_(a))`.
pub fn alignment_error_identity(supergraph: &SuperGraph, local: &LocalEstimates, truth: &ScoreVector, c: &[f64]) -> Result<f64> {
    let m = supergraph.m();
    if c.len() != m || local.subsets.len() != m {
        return Err(Error::InvalidInput("shift vector does not match the super-graph".into()));
    }
    let c_star: Vec<f64> = local
        .subsets
        .iter()
        .map(|s| s.iter().map(|&i| truth[i]).sum::<f64>() / s.len() as f64)
        .collect();
    let c_bar = c_star.iter().sum::<f64>() / m as f64;
    let delta = |a: usize, i: usize| local.get(a, i).expect("node in subset") - (truth[i] - c_star[a]);
    let mut rhs_x = vec![0.0; m];
    for (a, b, nodes) in overlaps(supergraph) {
        for &i in nodes {
            let d = delta(b, i) - delta(a, i);
            rhs_x[a] += d;
            rhs_x[b] -= d;
        }
    }
    let lap = overlap_laplacian(supergraph)?;
    let opts = SolveOptions {
        tol: 1e-14,
        ..SolveOptions::default()
    };
    let (v, _) = lap.solve_orthogonal(&rhs_x, &opts)?;
    Ok((0..m)
        .map(|a| ((c[a] - c_star[a]) - (v[a] - c_bar)).abs())
        .fold(0.0, f64::max))
}

/// Subproblem of projected gradient descent on one subgraph.
struct PgdBlock {
    nodes: Vec<usize>,
    problem: MleProblem,
}

/// Projected gradient descent with re-parameterization. Called through
/// [`solve_mle`] with [`crate::estimators::Method::Pgd`].
pub(crate) fn pgd_core(problem: &MleProblem, partition: &Partition, config: &SolverConfig, mut theta: Vec<f64>) -> Result<(Vec<f64>, ConvergenceTrace)> {
    let n = problem.n();
    if partition.n() != n {
        return Err(Error::InvalidInput("partition does not match the problem".into()));
    }
    let memberships = partition.memberships();
    let s: Vec<f64> = memberships.iter().map(|m| m.len() as f64).collect();

    // w_ij = 1 / #{a : (i, j) ∈ E_(a)}
    let mut local_index = vec![usize::MAX; n];
    let mut coverage = vec![0usize; problem.edges().len()];
    let mut blocks = Vec::with_capacity(partition.len());
    let mut block_edges: Vec<Vec<usize>> = Vec::with_capacity(partition.len());
    for nodes in partition.subsets() {
        for (k, &v) in nodes.iter().enumerate() {
            local_index[v] = k;
        }
        let inside: Vec<usize> = problem
            .edges()
            .iter()
            .enumerate()
            .filter(|(_, e)| nodes.binary_search(&e.i).is_ok() && nodes.binary_search(&e.j).is_ok())
            .map(|(k, _)| k)
            .collect();
        for &k in &inside {
            coverage[k] += 1;
        }
        block_edges.push(inside);
    }
    if let Some(k) = coverage.iter().position(|&c| c == 0) {
        let e = problem.edges()[k];
        return Err(Error::UncoveredEdge(e.i, e.j));
    }
    for (nodes, inside) in partition.subsets().iter().zip(&block_edges) {
        for (k, &v) in nodes.iter().enumerate() {
            local_index[v] = k;
        }
        let edges: Vec<ProblemEdge> = inside
            .iter()
            .map(|&k| {
                let e = problem.edges()[k];
                ProblemEdge {
                    i: local_index[e.i],
                    j: local_index[e.j],
                    weight: e.weight / coverage[k] as f64,
                    ..e
                }
            })
            .collect();
        blocks.push(PgdBlock {
            nodes: nodes.clone(),
            problem: local_problem(nodes.len(), edges),
        });
    }

    let supergraph = SuperGraph::from_overlaps(partition);
    let m = partition.len();
    let pinv = if m > 1 {
        let lap = LaplacianOperator::assemble(
            m,
            overlaps(&supergraph).map(|(a, b, nodes)| (a, b, nodes.iter().map(|&i| 1.0 / s[i]).sum::<f64>())),
        )?;
        if !lap.is_connected() {
            return Err(Error::DisconnectedSuperGraph);
        }
        Some(PseudoInverse::new(lap)?)
    } else {
        None
    };

    let mut tracker = Tracker::new(problem, config.tol, config.target_loss, config.reference.as_deref(), &theta);
    let g = gradient(problem, &theta);
    if let Status::Continue = tracker.record(0, &theta, &g) {
        let mut stepped: Vec<Vec<f64>> = blocks.iter().map(|b| vec![0.0; b.nodes.len()]).collect();
        for it in 1..=config.max_iter {
            for (block, out) in blocks.iter().zip(stepped.iter_mut()) {
                let local: Vec<f64> = block.nodes.iter().map(|&i| theta[i]).collect();
                let g = gradient(&block.problem, &local);
                for k in 0..local.len() {
                    out[k] = local[k] - config.step * g[k];
                }
            }
            let c = match &pinv {
                Some(pinv) => {
                    let mut x = vec![0.0; m];
                    for (a, b, nodes) in overlaps(&supergraph) {
                        for &i in nodes {
                            let ta = stepped[a][blocks[a].nodes.binary_search(&i).expect("shared node")];
                            let tb = stepped[b][blocks[b].nodes.binary_search(&i).expect("shared node")];
                            let d = (tb - ta) / s[i];
                            x[a] += d;
                            x[b] -= d;
                        }
                    }
                    pinv.apply(&x)?
                }
                None => vec![0.0],
            };
            theta.iter_mut().for_each(|t| *t = 0.0);
            for (a, block) in blocks.iter().enumerate() {
                for (&i, &v) in block.nodes.iter().zip(&stepped[a]) {
                    theta[i] += (v + c[a]) / s[i];
                }
            }
            let g = gradient(problem, &theta);
            if let Status::Done = tracker.record(it, &theta, &g) {
                break;
            }
        }
    }
    project_out_ones(&mut theta);
    Ok((theta, tracker.trace))
}

/// Local subproblems may be disconnected or empty (a subgraph can have no
/// internal edges); that is harmless for a gradient step.
fn local_problem(n: usize, edges: Vec<ProblemEdge>) -> MleProblem {
    MleProblem::from_edges_unchecked(n, edges)
}

/// Projected gradient descent for `T` iterations (or until the default
/// gradient tolerance), starting from `θ⁰` (zero by default).
pub fn pgd_solve(
    graph: &ComparisonGraph,
    data: &ComparisonData,
    partition: &Partition,
    step: f64,
    iterations: usize,
    theta0: Option<&[f64]>,
) -> Result<(ScoreVector, ConvergenceTrace)> {
    let problem = MleProblem::new(graph, data)?;
    let config = SolverConfig::pgd(&problem, partition.clone(), step).with_max_iter(iterations);
    solve_mle(&problem, &config, theta0)
}

/// Solves `Σ L_ij (σ(θ_(a)i - θ_(b)j + Δ) - y_ij) = 0` for `Δ` by bisection
/// on `[-60, 60]`. Terms are `(L_ij, θ_(a)i - θ_(b)j, y_ij)` oriented from `a` to `b`.
pub fn solve_shift_difference(terms: &[(f64, f64, f64)]) -> Option<f64> {
    let f = |d: f64| terms.iter().map(|&(l, g, y)| l * (sigmoid(g + d) - y)).sum::<f64>();
    let (mut lo, mut hi) = (-60.0f64, 60.0f64);
    if f(lo) > 0.0 || f(hi) < 0.0 {
        return None;
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// DC-community with a disjoint partition.
pub fn dc_community(
    graph: &ComparisonGraph,
    data: &ComparisonData,
    partition: &Partition,
    weights: CommunityWeights,
    method: LocalMethod,
) -> Result<DcCommunityOutput> {
    check_partition(graph, partition)?;
    if partition.mode() != PartitionMode::Disjoint {
        return Err(Error::InvalidInput("DC-community needs a disjoint partition".into()));
    }
    let supergraph = SuperGraph::from_cross_edges(partition, graph);
    if !supergraph.is_connected() {
        return Err(Error::DisconnectedSuperGraph);
    }
    let local = local_estimates(graph, data, partition, method)?;
    let mut owner = vec![0usize; graph.n()];
    let mut position = vec![0usize; graph.n()];
    for (a, nodes) in partition.subsets().iter().enumerate() {
        for (k, &i) in nodes.iter().enumerate() {
            owner[i] = a;
            position[i] = k;
        }
    }
    let theta_local = |i: usize| local.values[owner[i]][position[i]];

    let deltas = supergraph
        .edges()
        .par_iter()
        .map(|se| {
            let SuperEdgePayload::Cross(list) = &se.payload else {
                unreachable!("cross-edge super-graph")
            };
            let mut wins = 0.0;
            let mut total = 0.0;
            let terms: Vec<(f64, f64, f64)> = list
                .iter()
                .map(|&k| {
                    let r = data.records()[k];
                    let l = r.count as f64;
                    // orient the edge from V_(a) to V_(b)
                    let (u, v, y) = if owner[r.i] == se.a { (r.i, r.j, r.y()) } else { (r.j, r.i, 1.0 - r.y()) };
                    wins += l * y;
                    total += l;
                    (l, theta_local(u) - theta_local(v), y)
                })
                .collect();
            if wins <= 0.0 || wins >= total {
                return Err(Error::UnanimousCrossEdges { a: se.a, b: se.b });
            }
            let d = solve_shift_difference(&terms).ok_or_else(|| {
                Error::InvalidInput(format!("shift between subgraphs {} and {} is outside [-60, 60]", se.a, se.b))
            })?;
            Ok(((se.a, se.b), d))
        })
        .collect::<Result<Vec<_>>>()?;

    let w: Vec<f64> = supergraph
        .edges()
        .iter()
        .map(|se| match weights {
            CommunityWeights::Unit => 1.0,
            CommunityWeights::CrossEdgeCount => se.payload.len() as f64,
        })
        .collect();
    let m = supergraph.m();
    let mut x = vec![0.0; m];
    for (&((a, b), d), &wt) in deltas.iter().zip(&w) {
        x[a] += wt * d;
        x[b] -= wt * d;
    }
    let lap = LaplacianOperator::assemble(m, deltas.iter().zip(&w).map(|(&((a, b), _), &wt)| (a, b, wt)))?;
    let shifts = solve_shifts(lap, x)?;
    let theta = merge(graph.n(), &local, &shifts.c);
    Ok(DcCommunityOutput {
        theta,
        local,
        shifts,
        deltas,
    })
}
