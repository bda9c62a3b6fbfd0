//! The BTL model: sigmoid helpers, ground-truth scores, comparison sampling
//! and the Hessian-weighted Laplacians built from them.

use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{exact_sqrt, ComparisonGraph};
use crate::laplacian::LaplacianOperator;
use crate::rng::Rng;

/// `σ(x) = 1 / (1 + e^{-x})`, evaluated through `e^{-|x|}` so it never overflows.
pub fn sigmoid(x: f64) -> f64 {
    let e = (-x.abs()).exp();
    if x >= 0.0 {
        1.0 / (1.0 + e)
    } else {
        e / (1.0 + e)
    }
}

/// `σ'(x) = σ(x)(1 - σ(x))`.
pub fn sigmoid_prime(x: f64) -> f64 {
    let e = (-x.abs()).exp();
    e / ((1.0 + e) * (1.0 + e))
}

/// `log(1 + e^x)`.
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Inverse sigmoid. Fails for `y ∉ (0, 1)`, where the logit is infinite.
pub fn logit(y: f64) -> Result<f64> {
    if y > 0.0 && y < 1.0 {
        Ok((y / (1.0 - y)).ln())
    } else {
        Err(Error::InfiniteLogit(y))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Gauge {
    ZeroSum,
    Raw,
}

/// A score vector; scores are identifiable only up to a common shift.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector {
    values: Vec<f64>,
    gauge: Gauge,
}

impl ScoreVector {
    /// Shifts `values` so that they sum to zero.
    pub fn zero_sum(mut values: Vec<f64>) -> Self {
        crate::laplacian::project_out_ones(&mut values);
        Self {
            values,
            gauge: Gauge::ZeroSum,
        }
    }

    pub fn raw(values: Vec<f64>) -> Self {
        Self {
            values,
            gauge: Gauge::Raw,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn gauge(&self) -> Gauge {
        self.gauge
    }

    pub fn gauged(&self) -> Self {
        Self::zero_sum(self.values.clone())
    }

    pub fn gap(&self, k: usize, l: usize) -> f64 {
        self.values[k] - self.values[l]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

impl std::ops::Index<usize> for ScoreVector {
    type Output = f64;
    fn index(&self, k: usize) -> &f64 {
        &self.values[k]
    }
}

/// Ground-truth score recipes. Indices are 1-based inside the formulas,
/// matching the usual `θ_i = i / r, 1 ≤ i ≤ n` convention.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreKind {
    /// `θ_i = sin(i / r)`.
    Sine,
    /// `θ_i = i / r`.
    Linear,
    /// `θ_(i1, i2) = (i1 + i2) / r` on a `sqrt(n) × sqrt(n)` grid.
    Linear2d,
    Custom(Vec<f64>),
}

/// Builds ground-truth scores in the zero-sum gauge.
pub fn make_scores(kind: &ScoreKind, n: usize, r: usize) -> Result<ScoreVector> {
    if n < 2 || r == 0 {
        return Err(Error::InvalidInput(format!("need n >= 2 and r >= 1, got n = {n}, r = {r}")));
    }
    let r = r as f64;
    let raw: Vec<f64> = match kind {
        ScoreKind::Sine => (1..=n).map(|i| (i as f64 / r).sin()).collect(),
        ScoreKind::Linear => (1..=n).map(|i| i as f64 / r).collect(),
        ScoreKind::Linear2d => {
            let side = exact_sqrt(n)
                .ok_or_else(|| Error::InvalidInput(format!("2D scores need a perfect-square n, got {n}")))?;
            (0..n)
                .map(|k| ((k / side + 1) + (k % side + 1)) as f64 / r)
                .collect()
        }
        ScoreKind::Custom(v) => {
            if v.len() != n {
                return Err(Error::InvalidInput(format!(
                    "custom scores have length {}, expected {n}",
                    v.len()
                )));
            }
            v.clone()
        }
    };
    Ok(ScoreVector::zero_sum(raw))
}

/// `(κ, κ_E)`: exponentials of the largest score gap over all pairs and over edges.
pub fn dynamic_range(graph: &ComparisonGraph, scores: &ScoreVector) -> (f64, f64) {
    let v = scores.values();
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let global = if v.is_empty() { 0.0 } else { hi - lo };
    let local = graph
        .edges()
        .iter()
        .map(|e| (v[e.i] - v[e.j]).abs())
        .fold(0.0, f64::max);
    (global.exp(), local.exp())
}

/// Wins of `i` over `j` on one edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Wins {
    /// Integer count of sampled wins.
    Observed(u64),
    /// Exact win fraction `y_ij`, e.g. the infinite-sample limit `σ(θ*_i - θ*_j)`.
    Expected(f64),
}

/// Outcome statistics on edge `(i, j)`, `i < j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeObservation {
    pub i: usize,
    pub j: usize,
    /// `L_ij`.
    pub count: u64,
    pub wins: Wins,
}

impl EdgeObservation {
    /// `y_ij`, the fraction of comparisons won by `i`.
    pub fn y(&self) -> f64 {
        match self.wins {
            Wins::Observed(w) => w as f64 / self.count as f64,
            Wins::Expected(y) => y,
        }
    }

    /// Wins of `i` as a real number (`y_ij L_ij`).
    pub fn wins_f64(&self) -> f64 {
        match self.wins {
            Wins::Observed(w) => w as f64,
            Wins::Expected(y) => y * self.count as f64,
        }
    }

    /// Whether `i` won at least one comparison.
    pub fn i_won(&self) -> bool {
        match self.wins {
            Wins::Observed(w) => w > 0,
            Wins::Expected(y) => y > 0.0,
        }
    }

    /// Whether `j` won at least one comparison.
    pub fn j_won(&self) -> bool {
        match self.wins {
            Wins::Observed(w) => w < self.count,
            Wins::Expected(y) => y < 1.0,
        }
    }
}

/// Observations aligned with a graph's edge list.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonData {
    n: usize,
    records: Vec<EdgeObservation>,
}

impl ComparisonData {
    /// Aligns `records` (in any order and orientation) with the edges of
    /// `graph`. A record given as `(j, i)` is flipped.
    pub fn for_graph(graph: &ComparisonGraph, records: impl IntoIterator<Item = EdgeObservation>) -> Result<Self> {
        let mut slots: Vec<Option<EdgeObservation>> = vec![None; graph.num_edges()];
        for rec in records {
            let k = graph.edge_index(rec.i, rec.j).ok_or_else(|| {
                Error::InvalidInput(format!("observation on ({}, {}) is not a graph edge", rec.i, rec.j))
            })?;
            let e = graph.edges()[k];
            if rec.count != e.count {
                return Err(Error::InvalidInput(format!(
                    "edge ({}, {}) has L = {} in the graph but {} in the data",
                    e.i, e.j, e.count, rec.count
                )));
            }
            let wins = match (rec.i == e.i, rec.wins) {
                (true, w) => w,
                (false, Wins::Observed(w)) => Wins::Observed(rec.count.checked_sub(w).unwrap_or(u64::MAX)),
                (false, Wins::Expected(y)) => Wins::Expected(1.0 - y),
            };
            match wins {
                Wins::Observed(w) if w > e.count => {
                    return Err(Error::InvalidInput(format!(
                        "edge ({}, {}) records {} wins out of {}",
                        e.i, e.j, w, e.count
                    )))
                }
                Wins::Expected(y) if !(0.0..=1.0).contains(&y) => {
                    return Err(Error::InvalidInput(format!(
                        "edge ({}, {}) has win fraction {y} outside [0, 1]",
                        e.i, e.j
                    )))
                }
                _ => {}
            }
            if slots[k].is_some() {
                return Err(Error::InvalidInput(format!("duplicate observation on ({}, {})", e.i, e.j)));
            }
            slots[k] = Some(EdgeObservation {
                i: e.i,
                j: e.j,
                count: e.count,
                wins,
            });
        }
        let records = slots
            .into_iter()
            .enumerate()
            .map(|(k, s)| {
                s.ok_or_else(|| {
                    let e = graph.edges()[k];
                    Error::InvalidInput(format!("no observation for edge ({}, {})", e.i, e.j))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { n: graph.n(), records })
    }

    /// Integer win counts, one per graph edge in edge order.
    pub fn from_wins(graph: &ComparisonGraph, wins: &[u64]) -> Result<Self> {
        if wins.len() != graph.num_edges() {
            return Err(Error::InvalidInput(format!(
                "{} win counts for {} edges",
                wins.len(),
                graph.num_edges()
            )));
        }
        Self::for_graph(
            graph,
            graph.edges().iter().zip(wins).map(|(e, &w)| EdgeObservation {
                i: e.i,
                j: e.j,
                count: e.count,
                wins: Wins::Observed(w),
            }),
        )
    }

    /// Exact win fractions, one per graph edge in edge order.
    pub fn from_fractions(graph: &ComparisonGraph, y: &[f64]) -> Result<Self> {
        if y.len() != graph.num_edges() {
            return Err(Error::InvalidInput(format!(
                "{} win fractions for {} edges",
                y.len(),
                graph.num_edges()
            )));
        }
        Self::for_graph(
            graph,
            graph.edges().iter().zip(y).map(|(e, &y)| EdgeObservation {
                i: e.i,
                j: e.j,
                count: e.count,
                wins: Wins::Expected(y),
            }),
        )
    }

    /// Infinite-sample data: `y_ij = σ(θ*_i - θ*_j)` on every edge.
    pub fn expected(graph: &ComparisonGraph, scores: &ScoreVector) -> Result<Self> {
        check_len(graph, scores)?;
        let y: Vec<f64> = graph
            .edges()
            .iter()
            .map(|e| sigmoid(scores[e.i] - scores[e.j]))
            .collect();
        Self::from_fractions(graph, &y)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn records(&self) -> &[EdgeObservation] {
        &self.records
    }
}

fn check_len(graph: &ComparisonGraph, scores: &ScoreVector) -> Result<()> {
    if scores.len() != graph.n() {
        return Err(Error::InvalidInput(format!(
            "scores have length {}, graph has {} nodes",
            scores.len(),
            graph.n()
        )));
    }
    Ok(())
}

/// Draws `wins_ij ~ Binomial(L_ij, σ(θ*_i - θ*_j))` independently per edge.
pub fn sample_comparisons(graph: &ComparisonGraph, scores: &ScoreVector, rng: &mut Rng) -> Result<ComparisonData> {
    check_len(graph, scores)?;
    let wins = graph
        .edges()
        .iter()
        .map(|e| {
            let p = sigmoid(scores[e.i] - scores[e.j]);
            let dist = Binomial::new(e.count, p)
                .map_err(|err| Error::InvalidInput(format!("binomial({}, {p}): {err}", e.count)))?;
            Ok(dist.sample(rng))
        })
        .collect::<Result<Vec<u64>>>()?;
    ComparisonData::from_wins(graph, &wins)
}

/// Per-edge `z_ij = σ'(θ*_i - θ*_j)`, in graph edge order.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelWeights {
    pub z: Vec<f64>,
}

pub fn model_weights(graph: &ComparisonGraph, scores: &ScoreVector) -> Result<ModelWeights> {
    check_len(graph, scores)?;
    Ok(ModelWeights {
        z: graph
            .edges()
            .iter()
            .map(|e| sigmoid_prime(scores[e.i] - scores[e.j]))
            .collect(),
    })
}

/// `L_z`, the Hessian of the loss at `scores`: weights `L_ij z_ij`.
pub fn oracle_laplacian(graph: &ComparisonGraph, scores: &ScoreVector) -> Result<LaplacianOperator> {
    if !graph.is_connected() {
        return Err(Error::Disconnected);
    }
    let w = model_weights(graph, scores)?;
    LaplacianOperator::assemble(
        graph.n(),
        graph
            .edges()
            .iter()
            .zip(&w.z)
            .map(|(e, z)| (e.i, e.j, e.count as f64 * z)),
    )
}

/// `scale · L_G` where `L_G` has weights `L_ij`. `scale = 0.25` replaces every
/// `z_ij` in `L_z` by `σ'(0)`.
pub fn surrogate_laplacian(graph: &ComparisonGraph, scale: f64) -> Result<LaplacianOperator> {
    if !graph.is_connected() {
        return Err(Error::Disconnected);
    }
    if !(scale > 0.0) {
        return Err(Error::InvalidInput(format!("surrogate scale must be positive, got {scale}")));
    }
    LaplacianOperator::assemble(
        graph.n(),
        graph.edges().iter().map(|e| (e.i, e.j, scale * e.count as f64)),
    )
}
