//! Maximum-likelihood estimation and the spectral method.
//!
//! The loss is the negative log-likelihood
//! `ℒ(θ) = Σ_(i,j) w_ij L_ij (-y_ij (θ_i - θ_j) + log(1 + e^{θ_i - θ_j}))`
//! with optional per-edge weights `w_ij` (all one unless the problem is a
//! subproblem of projected gradient descent).

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{ComparisonGraph, Partition};
use crate::laplacian::{project_out_ones, DenseFactor, LaplacianOperator, SolveOptions};
use crate::model::{logit, sigmoid, sigmoid_prime, softplus, ComparisonData, ScoreVector};

/// One term of the loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemEdge {
    pub i: usize,
    pub j: usize,
    /// `w_ij L_ij`.
    pub weight: f64,
    /// `y_ij`.
    pub y: f64,
    /// Some comparison on this edge was won by `i`.
    pub i_won: bool,
    /// Some comparison on this edge was won by `j`.
    pub j_won: bool,
}

/// An MLE instance: graph, data and per-edge weights folded together.
#[derive(Debug, Clone)]
pub struct MleProblem {
    n: usize,
    edges: Vec<ProblemEdge>,
    connected: bool,
}

impl MleProblem {
    pub fn new(graph: &ComparisonGraph, data: &ComparisonData) -> Result<Self> {
        if data.n() != graph.n() || data.records().len() != graph.num_edges() {
            return Err(Error::InvalidInput("data does not match the graph".into()));
        }
        if !graph.is_connected() {
            return Err(Error::Disconnected);
        }
        let edges = data
            .records()
            .iter()
            .map(|r| ProblemEdge {
                i: r.i,
                j: r.j,
                weight: r.count as f64,
                y: r.y(),
                i_won: r.i_won(),
                j_won: r.j_won(),
            })
            .collect();
        Ok(Self {
            n: graph.n(),
            edges,
            connected: true,
        })
    }

    /// Builds a problem directly from loss terms.
    pub fn from_edges(n: usize, edges: Vec<ProblemEdge>) -> Result<Self> {
        for e in &edges {
            if e.i >= n || e.j >= n || e.i == e.j {
                return Err(Error::InvalidInput(format!("invalid edge ({}, {})", e.i, e.j)));
            }
            if !(e.weight > 0.0 && e.weight.is_finite()) {
                return Err(Error::NonPositiveWeight { i: e.i, j: e.j, weight: e.weight });
            }
        }
        let connected = crate::graph::is_connected(n, edges.iter().map(|e| (e.i, e.j)));
        if !connected {
            return Err(Error::Disconnected);
        }
        Ok(Self { n, edges, connected })
    }

    /// Like [`MleProblem::from_edges`] but allows disconnected or empty
    /// edge sets, for which only loss and gradient evaluation make sense.
    pub(crate) fn from_edges_unchecked(n: usize, edges: Vec<ProblemEdge>) -> Self {
        let connected = crate::graph::is_connected(n, edges.iter().map(|e| (e.i, e.j)));
        Self { n, edges, connected }
    }

    /// Multiplies each term by `w_ij > 0` (edge order).
    pub fn with_weights(mut self, weights: &[f64]) -> Result<Self> {
        if weights.len() != self.edges.len() {
            return Err(Error::InvalidInput(format!(
                "{} weights for {} edges",
                weights.len(),
                self.edges.len()
            )));
        }
        for (e, &w) in self.edges.iter_mut().zip(weights) {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::NonPositiveWeight { i: e.i, j: e.j, weight: w });
            }
            e.weight *= w;
        }
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[ProblemEdge] {
        &self.edges
    }

    pub fn is_connected(&self) -> bool {
        self.connected
    }

    /// `Σ w_ij L_ij`; equals `L_total` for unweighted problems.
    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    /// `Σ_ij weight_ij (e_i - e_j)(e_i - e_j)^T`, i.e. `L_G` for unweighted problems.
    pub fn surrogate_laplacian(&self, scale: f64) -> Result<LaplacianOperator> {
        LaplacianOperator::assemble(self.n, self.edges.iter().map(|e| (e.i, e.j, scale * e.weight)))
    }
}

pub fn loss(problem: &MleProblem, theta: &[f64]) -> f64 {
    problem
        .edges
        .iter()
        .map(|e| {
            let d = theta[e.i] - theta[e.j];
            e.weight * (softplus(d) - e.y * d)
        })
        .sum()
}

pub fn gradient(problem: &MleProblem, theta: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; problem.n];
    gradient_into(problem, theta, &mut g);
    g
}

fn gradient_into(problem: &MleProblem, theta: &[f64], g: &mut [f64]) {
    g.iter_mut().for_each(|v| *v = 0.0);
    for e in &problem.edges {
        let t = e.weight * (sigmoid(theta[e.i] - theta[e.j]) - e.y);
        g[e.i] += t;
        g[e.j] -= t;
    }
}

/// Hessian at `theta`, a Laplacian with weights `w_ij L_ij σ'(θ_i - θ_j)`.
/// Terms whose curvature underflows to zero are dropped.
pub fn hessian(problem: &MleProblem, theta: &[f64]) -> Result<LaplacianOperator> {
    LaplacianOperator::assemble(
        problem.n,
        problem.edges.iter().filter_map(|e| {
            let w = e.weight * sigmoid_prime(theta[e.i] - theta[e.j]);
            (w > 0.0).then_some((e.i, e.j, w))
        }),
    )
}

/// A set of nodes that never beats anything outside it, if one exists.
///
/// Builds the digraph with an arc `winner → loser` for every edge carrying at
/// least one win in that direction; the MLE is finite and unique iff this
/// digraph is strongly connected. When it is not, a sink component of the
/// condensation is returned.
pub fn existence_witness(problem: &MleProblem) -> Option<Vec<usize>> {
    let n = problem.n;
    if n <= 1 {
        return None;
    }
    let mut g: DiGraph<(), ()> = DiGraph::with_capacity(n, 2 * problem.edges.len());
    let nodes: Vec<_> = (0..n).map(|_| g.add_node(())).collect();
    for e in &problem.edges {
        if e.i_won {
            g.add_edge(nodes[e.i], nodes[e.j], ());
        }
        if e.j_won {
            g.add_edge(nodes[e.j], nodes[e.i], ());
        }
    }
    let sccs = tarjan_scc(&g);
    if sccs.len() == 1 {
        return None;
    }
    let mut comp = vec![0usize; n];
    for (c, members) in sccs.iter().enumerate() {
        for v in members {
            comp[v.index()] = c;
        }
    }
    let mut has_out = vec![false; sccs.len()];
    for e in g.raw_edges() {
        let (a, b) = (comp[e.source().index()], comp[e.target().index()]);
        if a != b {
            has_out[a] = true;
        }
    }
    let sink = (0..sccs.len()).find(|&c| !has_out[c]).unwrap_or(0);
    let mut members: Vec<usize> = sccs[sink].iter().map(|v| v.index()).collect();
    members.sort_unstable();
    Some(members)
}

/// Whether the loss has a unique finite minimizer.
pub fn mle_exists(problem: &MleProblem) -> bool {
    problem.connected && existence_witness(problem).is_none()
}

fn check_exists(problem: &MleProblem) -> Result<()> {
    match existence_witness(problem) {
        None => Ok(()),
        Some(component) => Err(Error::NonExistence { component }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Gd,
    Cd,
    PrecondGd,
    Pgd,
}

/// Laplacian whose pseudo-inverse preconditions gradient steps.
#[derive(Debug, Clone, PartialEq)]
pub enum Preconditioner {
    /// `L_z` at the given ground truth.
    Oracle(ScoreVector),
    /// `L_G`, weights `L_ij`.
    Surrogate,
    /// `L_G / 4`, i.e. `L_z` with every `z_ij` replaced by `σ'(0)`.
    QuarterSurrogate,
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub method: Method,
    /// Step size `η`.
    pub step: f64,
    pub max_iter: usize,
    /// Stop once the gradient 2-norm is at most this.
    pub tol: f64,
    /// Optional early stop once the loss drops to this value.
    pub target_loss: Option<f64>,
    pub preconditioner: Preconditioner,
    /// Required by [`Method::Pgd`].
    pub partition: Option<Partition>,
    /// Recorded in the trace as an `ℓ∞` distance (after gauging).
    pub reference: Option<Vec<f64>>,
}

/// Gradient tolerance `1e-8 · Σ w_ij L_ij`.
pub fn default_tol(problem: &MleProblem) -> f64 {
    1e-8 * problem.total_weight()
}

/// A conservative gradient step: `1 / max_i (½ Σ_j w_ij L_ij)`, which bounds
/// the Hessian's largest eigenvalue.
pub fn safe_step(problem: &MleProblem) -> f64 {
    let mut deg = vec![0.0; problem.n];
    for e in &problem.edges {
        deg[e.i] += e.weight;
        deg[e.j] += e.weight;
    }
    let max = deg.iter().copied().fold(0.0, f64::max);
    if max > 0.0 {
        2.0 / max
    } else {
        1.0
    }
}

impl SolverConfig {
    fn base(problem: &MleProblem, method: Method, step: f64, max_iter: usize) -> Self {
        Self {
            method,
            step,
            max_iter,
            tol: default_tol(problem),
            target_loss: None,
            preconditioner: Preconditioner::QuarterSurrogate,
            partition: None,
            reference: None,
        }
    }

    pub fn gd(problem: &MleProblem, step: f64) -> Self {
        Self::base(problem, Method::Gd, step, 100_000)
    }

    pub fn cd(problem: &MleProblem) -> Self {
        Self::base(problem, Method::Cd, 1.0, 100_000)
    }

    /// PrecondGD with `L_G / 4` and `η = 1`.
    pub fn precond_gd(problem: &MleProblem) -> Self {
        Self::base(problem, Method::PrecondGd, 1.0, 500)
    }

    pub fn pgd(problem: &MleProblem, partition: Partition, step: f64) -> Self {
        let mut c = Self::base(problem, Method::Pgd, step, 500);
        c.partition = Some(partition);
        c
    }

    pub fn with_preconditioner(mut self, p: Preconditioner) -> Self {
        self.preconditioner = p;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_target_loss(mut self, target: f64) -> Self {
        self.target_loss = Some(target);
        self
    }

    pub fn with_reference(mut self, reference: &[f64]) -> Self {
        self.reference = Some(reference.to_vec());
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub loss: f64,
    pub grad_norm: f64,
    pub linf_to_reference: Option<f64>,
}

/// Per-iteration record of a solver run. Entry 0 is the initial point.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTrace {
    pub records: Vec<TraceRecord>,
    pub converged: bool,
    pub diverged: bool,
}

impl ConvergenceTrace {
    pub fn iterations(&self) -> usize {
        self.records.last().map_or(0, |r| r.iteration)
    }

    /// First iteration whose loss is at most `threshold`.
    pub fn first_below(&self, threshold: f64) -> Option<usize> {
        self.records.iter().find(|r| r.loss <= threshold).map(|r| r.iteration)
    }

    pub fn final_loss(&self) -> Option<f64> {
        self.records.last().map(|r| r.loss)
    }
}

pub(crate) fn linf_gauged(a: &[f64], b: &[f64]) -> f64 {
    let mut d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    project_out_ones(&mut d);
    d.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Shared bookkeeping for the iterative solvers.
pub(crate) struct Tracker<'a> {
    problem: &'a MleProblem,
    tol: f64,
    target: Option<f64>,
    reference: Option<&'a [f64]>,
    initial_loss: f64,
    pub trace: ConvergenceTrace,
}

pub(crate) enum Status {
    Continue,
    Done,
}

impl<'a> Tracker<'a> {
    pub(crate) fn new(problem: &'a MleProblem, tol: f64, target: Option<f64>, reference: Option<&'a [f64]>, theta: &[f64]) -> Self {
        let mut t = Self {
            problem,
            tol,
            target,
            reference,
            initial_loss: 0.0,
            trace: ConvergenceTrace::default(),
        };
        t.initial_loss = loss(problem, theta);
        t
    }

    /// Records iteration `it` at `theta` given the gradient there.
    pub(crate) fn record(&mut self, it: usize, theta: &[f64], grad: &[f64]) -> Status {
        let l = loss(self.problem, theta);
        let gn = grad.iter().map(|v| v * v).sum::<f64>().sqrt();
        self.trace.records.push(TraceRecord {
            iteration: it,
            loss: l,
            grad_norm: gn,
            linf_to_reference: self.reference.map(|r| linf_gauged(theta, r)),
        });
        if !l.is_finite() || !gn.is_finite() || theta.iter().any(|v| !v.is_finite()) {
            self.trace.diverged = true;
            return Status::Done;
        }
        // A loss far above the starting point means the iteration is blowing up.
        if l > 10.0 * self.initial_loss.abs() + 1.0 {
            self.trace.diverged = true;
            return Status::Done;
        }
        if gn <= self.tol || self.target.is_some_and(|t| l <= t) {
            self.trace.converged = true;
            return Status::Done;
        }
        Status::Continue
    }
}

/// Minimizes the loss with the configured method. The returned scores are
/// in the zero-sum gauge; check `trace.converged`.
pub fn solve_mle(problem: &MleProblem, config: &SolverConfig, theta0: Option<&[f64]>) -> Result<(ScoreVector, ConvergenceTrace)> {
    check_exists(problem)?;
    if !(config.step > 0.0) || !(config.tol > 0.0) {
        return Err(Error::InvalidInput("step size and tolerance must be positive".into()));
    }
    let theta = match theta0 {
        Some(t) if t.len() != problem.n => {
            return Err(Error::InvalidInput(format!(
                "initial point has length {}, expected {}",
                t.len(),
                problem.n
            )))
        }
        Some(t) => t.to_vec(),
        None => vec![0.0; problem.n],
    };
    let (theta, trace) = match config.method {
        Method::Gd => run_gd(problem, config, theta),
        Method::Cd => run_cd(problem, config, theta)?,
        Method::PrecondGd => run_precond_gd(problem, config, theta)?,
        Method::Pgd => {
            let partition = config
                .partition
                .as_ref()
                .ok_or_else(|| Error::InvalidInput("projected gradient descent needs a partition".into()))?;
            crate::dc::pgd_core(problem, partition, config, theta)?
        }
    };
    Ok((ScoreVector::zero_sum(theta), trace))
}

fn run_gd(problem: &MleProblem, config: &SolverConfig, mut theta: Vec<f64>) -> (Vec<f64>, ConvergenceTrace) {
    let mut tracker = Tracker::new(problem, config.tol, config.target_loss, config.reference.as_deref(), &theta);
    let mut g = vec![0.0; problem.n];
    gradient_into(problem, &theta, &mut g);
    if let Status::Continue = tracker.record(0, &theta, &g) {
        for it in 1..=config.max_iter {
            theta.iter_mut().zip(&g).for_each(|(t, gi)| *t -= config.step * gi);
            gradient_into(problem, &theta, &mut g);
            if let Status::Done = tracker.record(it, &theta, &g) {
                break;
            }
        }
    }
    (theta, tracker.trace)
}

/// Per-node view of the loss terms: `(neighbour, weight, y_{k beats neighbour})`.
fn incident_terms(problem: &MleProblem) -> Vec<Vec<(usize, f64, f64)>> {
    let mut terms = vec![Vec::new(); problem.n];
    for e in &problem.edges {
        terms[e.i].push((e.j, e.weight, e.y));
        terms[e.j].push((e.i, e.weight, 1.0 - e.y));
    }
    terms
}

/// Exact minimization of the loss over coordinate `t`: finds the root of the
/// increasing function `Σ w (σ(t - θ_o) - y)` by Newton with a bisection
/// safeguard.
fn coordinate_minimize(terms: &[(usize, f64, f64)], theta: &[f64], start: f64) -> Option<f64> {
    let eval = |t: f64| {
        let mut g = 0.0;
        let mut h = 0.0;
        for &(o, w, y) in terms {
            let d = t - theta[o];
            g += w * (sigmoid(d) - y);
            h += w * sigmoid_prime(d);
        }
        (g, h)
    };
    let scale: f64 = terms.iter().map(|t| t.1).sum();
    let (g0, _) = eval(start);
    if g0 == 0.0 {
        return Some(start);
    }
    // Bracket the root.
    let (mut lo, mut hi);
    let mut width = 1.0;
    if g0 > 0.0 {
        hi = start;
        lo = start - width;
        while eval(lo).0 > 0.0 {
            width *= 2.0;
            lo = start - width;
            if width > 1e6 {
                return None;
            }
        }
    } else {
        lo = start;
        hi = start + width;
        while eval(hi).0 < 0.0 {
            width *= 2.0;
            hi = start + width;
            if width > 1e6 {
                return None;
            }
        }
    }
    let mut t = start;
    for _ in 0..200 {
        let (g, h) = eval(t);
        if g.abs() <= 1e-15 * scale {
            return Some(t);
        }
        if g > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        let newton = t - g / h;
        t = if h > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= 1e-15 * (1.0 + t.abs()) {
            break;
        }
    }
    Some(t)
}

fn run_cd(problem: &MleProblem, config: &SolverConfig, mut theta: Vec<f64>) -> Result<(Vec<f64>, ConvergenceTrace)> {
    let terms = incident_terms(problem);
    let mut tracker = Tracker::new(problem, config.tol, config.target_loss, config.reference.as_deref(), &theta);
    let mut g = gradient(problem, &theta);
    if let Status::Continue = tracker.record(0, &theta, &g) {
        for it in 1..=config.max_iter {
            for k in 0..problem.n {
                theta[k] = coordinate_minimize(&terms[k], &theta, theta[k]).ok_or_else(|| {
                    Error::NonExistence {
                        component: vec![k],
                    }
                })?;
            }
            gradient_into(problem, &theta, &mut g);
            if let Status::Done = tracker.record(it, &theta, &g) {
                break;
            }
        }
    }
    Ok((theta, tracker.trace))
}

/// Applies `L^†` either through a dense factorization or through CG.
pub(crate) enum PseudoInverse {
    Dense(DenseFactor),
    Iterative(LaplacianOperator),
}

/// Dense factorizations are used up to this dimension.
pub(crate) const DENSE_FACTOR_MAX_N: usize = 3000;

impl PseudoInverse {
    pub(crate) fn new(l: LaplacianOperator) -> Result<Self> {
        if !l.is_connected() {
            return Err(Error::Disconnected);
        }
        if l.n() <= DENSE_FACTOR_MAX_N {
            Ok(Self::Dense(l.factorize()?))
        } else {
            Ok(Self::Iterative(l))
        }
    }

    pub(crate) fn apply(&self, b: &[f64]) -> Result<Vec<f64>> {
        match self {
            Self::Dense(f) => Ok(f.solve(b)),
            Self::Iterative(l) => {
                let (v, report) = l.solve_orthogonal(b, &SolveOptions::default())?;
                if report.converged {
                    Ok(v)
                } else {
                    Err(Error::InvalidInput(format!(
                        "preconditioner solve did not converge (residual {:.3e})",
                        report.residual
                    )))
                }
            }
        }
    }
}

fn preconditioner_laplacian(problem: &MleProblem, p: &Preconditioner) -> Result<LaplacianOperator> {
    match p {
        Preconditioner::Surrogate => problem.surrogate_laplacian(1.0),
        Preconditioner::QuarterSurrogate => problem.surrogate_laplacian(0.25),
        Preconditioner::Oracle(truth) => {
            if truth.len() != problem.n {
                return Err(Error::InvalidInput("oracle scores have the wrong length".into()));
            }
            hessian(problem, truth.values())
        }
    }
}

fn run_precond_gd(problem: &MleProblem, config: &SolverConfig, mut theta: Vec<f64>) -> Result<(Vec<f64>, ConvergenceTrace)> {
    let pinv = PseudoInverse::new(preconditioner_laplacian(problem, &config.preconditioner)?)?;
    let mut tracker = Tracker::new(problem, config.tol, config.target_loss, config.reference.as_deref(), &theta);
    let mut g = gradient(problem, &theta);
    if let Status::Continue = tracker.record(0, &theta, &g) {
        for it in 1..=config.max_iter {
            let dir = pinv.apply(&g)?;
            theta.iter_mut().zip(&dir).for_each(|(t, d)| *t -= config.step * d);
            gradient_into(problem, &theta, &mut g);
            if let Status::Done = tracker.record(it, &theta, &g) {
                break;
            }
        }
    }
    Ok((theta, tracker.trace))
}

/// MLE on a path graph in closed form: consecutive gaps are logits of the
/// win fractions.
pub fn closed_form_line(problem: &MleProblem) -> Result<ScoreVector> {
    let n = problem.n;
    if problem.edges.len() + 1 != n {
        return Err(Error::InvalidInput("graph is not a path".into()));
    }
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (k, e) in problem.edges.iter().enumerate() {
        adj[e.i].push(k);
        adj[e.j].push(k);
    }
    if adj.iter().any(|a| a.len() > 2) {
        return Err(Error::InvalidInput("graph is not a path".into()));
    }
    let start = (0..n)
        .find(|&v| adj[v].len() <= 1)
        .ok_or_else(|| Error::InvalidInput("graph is not a path".into()))?;
    let mut theta = vec![0.0; n];
    let mut visited = vec![false; n];
    visited[start] = true;
    let (mut cur, mut prev_edge) = (start, usize::MAX);
    for _ in 1..n {
        let &k = adj[cur]
            .iter()
            .find(|&&k| k != prev_edge)
            .ok_or_else(|| Error::InvalidInput("graph is not a path".into()))?;
        let e = problem.edges[k];
        let (next, y_next) = if e.i == cur { (e.j, 1.0 - e.y) } else { (e.i, e.y) };
        if visited[next] {
            return Err(Error::InvalidInput("graph is not a path".into()));
        }
        let gap = logit(y_next).map_err(|_| Error::NonExistence {
            component: if y_next <= 0.0 { vec![next] } else { vec![cur] },
        })?;
        theta[next] = theta[cur] + gap;
        visited[next] = true;
        cur = next;
        prev_edge = k;
    }
    Ok(ScoreVector::zero_sum(theta))
}

/// Output of the spectral method.
#[derive(Debug, Clone)]
pub struct SpectralEstimate {
    /// Stationary distribution, summing to one.
    pub pi: Vec<f64>,
    /// `log π`: zero-sum gauged, or raw (possibly with `-∞`) on numerical failure.
    pub theta: ScoreVector,
    /// Some `π_i < 1e-300`: `log π` is unreliable or infinite there.
    pub numerical_failure: bool,
    pub converged: bool,
    pub iterations: usize,
    /// Final `‖π^T P - π^T‖_1`.
    pub residual: f64,
}

/// Entries of `π` below this are reported as a numerical failure.
pub const PI_UNDERFLOW: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralOptions {
    /// `d`; defaults to `1 + max degree`.
    pub d: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self {
            d: None,
            tol: 1e-13,
            max_iter: 2_000_000,
        }
    }
}

/// Rank Centrality: the stationary distribution of the comparison Markov
/// chain (`P_ij = y_ji / d` off the diagonal), computed by power iteration.
pub fn spectral_estimate(graph: &ComparisonGraph, data: &ComparisonData, opts: &SpectralOptions) -> Result<SpectralEstimate> {
    let problem = MleProblem::new(graph, data)?;
    if let Some(component) = existence_witness(&problem) {
        return Err(Error::SpectralFailure(format!(
            "Markov chain is reducible; nodes {component:?} form a closed class"
        )));
    }
    let n = graph.n();
    let d = opts.d.unwrap_or(1.0 + graph.max_degree() as f64);
    if !(d >= graph.max_degree() as f64) {
        return Err(Error::InvalidInput(format!(
            "d = {d} is too small for a stochastic matrix (max degree {})",
            graph.max_degree()
        )));
    }
    // Per edge (i, j): mass moves i -> j at rate y_ji / d and j -> i at rate y_ij / d.
    let flows: Vec<(usize, usize, f64, f64)> = problem
        .edges
        .iter()
        .map(|e| (e.i, e.j, (1.0 - e.y) / d, e.y / d))
        .collect();
    let mut pi = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        next.copy_from_slice(&pi);
        for &(i, j, to_j, to_i) in &flows {
            let f = pi[i] * to_j - pi[j] * to_i;
            next[i] -= f;
            next[j] += f;
        }
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|v| *v = v.max(0.0) / total);
        residual = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut pi, &mut next);
        if residual <= opts.tol {
            break;
        }
    }
    let converged = residual <= opts.tol;
    let numerical_failure = pi.iter().any(|&p| p < PI_UNDERFLOW);
    let logs: Vec<f64> = pi.iter().map(|p| p.ln()).collect();
    let theta = if numerical_failure {
        ScoreVector::raw(logs)
    } else {
        ScoreVector::zero_sum(logs)
    };
    Ok(SpectralEstimate {
        pi,
        theta,
        numerical_failure,
        converged,
        iterations,
        residual,
    })
}
