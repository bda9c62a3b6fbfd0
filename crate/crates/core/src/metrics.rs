//! Error metrics and the theoretical bound quantities.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{ComparisonGraph, GridKind};
use crate::laplacian::LaplacianOperator;
use crate::model::ScoreVector;

/// Estimation errors of `θ` against `θ*`, with `δ = θ - θ*` in the zero-sum gauge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseErrorReport {
    /// `|δ_k - δ_l|` for the requested pairs (empty when none were requested).
    pub pairs: Vec<(usize, usize, f64)>,
    /// `max_{k,l} |δ_k - δ_l|` over all pairs.
    pub max_pairwise: f64,
    /// `‖δ‖_∞`.
    pub linf: f64,
    /// `‖δ‖_2`, where `‖δ‖_2² = (1/n) Σ_{k<l} (δ_k - δ_l)²`.
    pub l2: f64,
}

pub fn error_report(theta: &ScoreVector, truth: &ScoreVector, pairs: Option<&[(usize, usize)]>) -> Result<PairwiseErrorReport> {
    if theta.len() != truth.len() || theta.is_empty() {
        return Err(Error::InvalidInput(format!(
            "score vectors have lengths {} and {}",
            theta.len(),
            truth.len()
        )));
    }
    let theta = theta.gauged();
    let truth = truth.gauged();
    let delta: Vec<f64> = theta.values().iter().zip(truth.values()).map(|(a, b)| a - b).collect();
    let max = delta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = delta.iter().copied().fold(f64::INFINITY, f64::min);
    let pairs = match pairs {
        None => Vec::new(),
        Some(list) => list
            .iter()
            .map(|&(k, l)| {
                if k >= delta.len() || l >= delta.len() {
                    Err(Error::InvalidInput(format!("pair ({k}, {l}) out of range")))
                } else {
                    Ok((k, l, (delta[k] - delta[l]).abs()))
                }
            })
            .collect::<Result<_>>()?,
    };
    Ok(PairwiseErrorReport {
        pairs,
        max_pairwise: max - min,
        linf: delta.iter().fold(0.0, |m, v| m.max(v.abs())),
        l2: delta.iter().map(|v| v * v).sum::<f64>().sqrt(),
    })
}

/// Per-pair bound quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundEntry {
    pub k: usize,
    pub l: usize,
    /// `Ω_kl(L_z)`.
    pub omega: f64,
    /// `C₀ √(Ω_kl κ_E log(n/δ))`.
    pub b: f64,
    /// `Σ_(i,j)∈E L_ij B_ij² |(e_k - e_l)^T L_z^† (e_i - e_j)|`.
    pub q: f64,
    /// `Σ_(i,j)∈E L_ij |(e_k - e_l)^T L_z^† (e_i - e_j)|`.
    pub v: f64,
    pub is_edge: bool,
    /// `B` on edges, `B/2 + Q/8` off edges.
    pub error_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundQuantities {
    pub c0: f64,
    pub delta: f64,
    pub kappa_e: f64,
    pub entries: Vec<BoundEntry>,
    /// Whether `Q_kl ≤ 4 B_kl` on every edge.
    pub condition_holds: bool,
}

/// Computes `B`, `Q`, `V` for the requested pairs (all pairs `k < l` by default).
pub fn bound_quantities(
    lz: &LaplacianOperator,
    graph: &ComparisonGraph,
    kappa_e: f64,
    delta: f64,
    c0: f64,
    pairs: Option<&[(usize, usize)]>,
) -> Result<BoundQuantities> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::InvalidInput(format!("delta must lie in (0, 0.5), got {delta}")));
    }
    if !(kappa_e >= 1.0) || !(c0 > 0.0) {
        return Err(Error::InvalidInput("need kappa_E >= 1 and C0 > 0".into()));
    }
    let n = graph.n();
    if lz.n() != n {
        return Err(Error::InvalidInput("Laplacian and graph sizes differ".into()));
    }
    let pinv = lz.pseudo_inverse()?;
    let omega = |k: usize, l: usize| (pinv[(k, k)] + pinv[(l, l)] - 2.0 * pinv[(k, l)]).max(0.0);
    let scale = c0 * (kappa_e * (n as f64 / delta).ln()).sqrt();
    let b_of = |om: f64| scale * om.sqrt();

    let edge_terms: Vec<(usize, usize, f64, f64)> = graph
        .edges()
        .iter()
        .map(|e| {
            let b = b_of(omega(e.i, e.j));
            (e.i, e.j, e.count as f64, b * b)
        })
        .collect();

    let requested: Vec<(usize, usize)> = match pairs {
        Some(list) => {
            for &(k, l) in list {
                if k >= n || l >= n {
                    return Err(Error::InvalidInput(format!("pair ({k}, {l}) out of range")));
                }
            }
            list.to_vec()
        }
        None => (0..n).flat_map(|k| (k + 1..n).map(move |l| (k, l))).collect(),
    };

    let entries: Vec<BoundEntry> = requested
        .par_iter()
        .map(|&(k, l)| {
            let (mut q, mut v) = (0.0, 0.0);
            for &(i, j, count, b2) in &edge_terms {
                let x = (pinv[(k, i)] - pinv[(k, j)] - pinv[(l, i)] + pinv[(l, j)]).abs();
                q += count * b2 * x;
                v += count * x;
            }
            let om = omega(k, l);
            let b = b_of(om);
            let is_edge = graph.edge_index(k, l).is_some();
            BoundEntry {
                k,
                l,
                omega: om,
                b,
                q,
                v,
                is_edge,
                error_bound: if is_edge { b } else { 0.5 * b + 0.125 * q },
            }
        })
        .collect();

    // The condition is about edges, so evaluate it on all of them even when
    // only some pairs were requested.
    let condition_holds = graph.edges().par_iter().all(|e| {
        let b = b_of(omega(e.i, e.j));
        let q: f64 = edge_terms
            .iter()
            .map(|&(i, j, count, b2)| {
                count * b2 * (pinv[(e.i, i)] - pinv[(e.i, j)] - pinv[(e.j, i)] + pinv[(e.j, j)]).abs()
            })
            .sum();
        q <= 4.0 * b
    });

    Ok(BoundQuantities {
        c0,
        delta,
        kappa_e,
        entries,
        condition_holds,
    })
}

/// Theory curve for grids: `constant · √(n/r² + 1) · √(1/(r p L))` (1D) or
/// `constant · √(ln n / r² + 1) · √(1/(r² p L))` (2D).
pub fn locality_bound(kind: GridKind, n: f64, r: f64, p: f64, l: f64, constant: f64) -> f64 {
    match kind {
        GridKind::Grid1D => constant * (n / (r * r) + 1.0).sqrt() * (1.0 / (r * p * l)).sqrt(),
        GridKind::Grid2D => constant * (n.ln() / (r * r) + 1.0).sqrt() * (1.0 / (r * r * p * l)).sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_special, SamplePolicy, SpecialGraph};
    use crate::model::{model_weights, oracle_laplacian};
    use crate::rng::seeded;

    #[test]
    fn hand_example() {
        let truth = ScoreVector::raw(vec![0.0; 3]);
        let theta = ScoreVector::raw(vec![1.0, -1.0, 0.0]);
        let r = error_report(&theta, &truth, Some(&[(0, 1), (1, 2)])).unwrap();
        assert_eq!(r.max_pairwise, 2.0);
        assert_eq!(r.linf, 1.0);
        assert!((r.l2 * r.l2 - 2.0).abs() < 1e-15);
        assert_eq!(r.pairs, vec![(0, 1, 2.0), (1, 2, 1.0)]);
    }

    #[test]
    fn shift_invariance() {
        let truth = ScoreVector::zero_sum(vec![0.3, -1.2, 0.9, 0.0]);
        let theta = ScoreVector::raw(truth.values().iter().map(|v| v + 7.0).collect());
        let r = error_report(&theta, &truth, None).unwrap();
        assert!(r.linf < 1e-14 && r.max_pairwise < 1e-14 && r.l2 < 1e-14);
    }

    #[test]
    fn two_node_bound() {
        let g = crate::graph::ComparisonGraph::new(2, [(0, 1, 1)]).unwrap();
        let lz = oracle_laplacian(&g, &ScoreVector::zero_sum(vec![0.0, 0.0])).unwrap();
        let delta = 0.1;
        let bq = bound_quantities(&lz, &g, 1.0, delta, 1.0, None).unwrap();
        let e = bq.entries[0];
        assert!((e.omega - 4.0).abs() < 1e-10);
        assert!((e.b - (4.0 * (2.0f64 / delta).ln()).sqrt()).abs() < 1e-9);
        // single edge: V = L Ω = 4, Q = B² Ω
        assert!((e.v - 4.0).abs() < 1e-9);
        assert!((e.q - e.b * e.b * 4.0).abs() < 1e-8);
        assert!(e.is_edge);
    }

    #[test]
    fn tree_v_is_inverse_z() {
        let g = generate_special(&SpecialGraph::Tree { n: 12 }, &SamplePolicy::Constant(3), &mut seeded(4)).unwrap();
        let truth = ScoreVector::zero_sum((0..12).map(|k| (k as f64 * 0.37).sin()).collect());
        let lz = oracle_laplacian(&g, &truth).unwrap();
        let z = model_weights(&g, &truth).unwrap().z;
        let pairs: Vec<(usize, usize)> = g.edges().iter().map(|e| (e.i, e.j)).collect();
        let bq = bound_quantities(&lz, &g, 2.0, 0.05, 1.0, Some(&pairs)).unwrap();
        for (entry, z) in bq.entries.iter().zip(&z) {
            assert!((entry.v - 1.0 / z).abs() <= 1e-8 / z, "{} vs {}", entry.v, 1.0 / z);
        }
    }

    #[test]
    fn doubling_samples_halves_b_squared() {
        let g1 = generate_special(&SpecialGraph::Ring { n: 7 }, &SamplePolicy::Constant(2), &mut seeded(0)).unwrap();
        let g2 = generate_special(&SpecialGraph::Ring { n: 7 }, &SamplePolicy::Constant(4), &mut seeded(0)).unwrap();
        let truth = ScoreVector::zero_sum(vec![0.1, 0.4, -0.3, 0.0, 0.2, -0.5, 0.6]);
        let a = bound_quantities(&oracle_laplacian(&g1, &truth).unwrap(), &g1, 1.5, 0.1, 1.0, None).unwrap();
        let b = bound_quantities(&oracle_laplacian(&g2, &truth).unwrap(), &g2, 1.5, 0.1, 1.0, None).unwrap();
        for (x, y) in a.entries.iter().zip(&b.entries) {
            assert!((x.b * x.b - 2.0 * y.b * y.b).abs() < 1e-9 * x.b * x.b);
        }
    }

    #[test]
    fn rejects_bad_delta() {
        let g = crate::graph::ComparisonGraph::new(2, [(0, 1, 1)]).unwrap();
        let lz = oracle_laplacian(&g, &ScoreVector::zero_sum(vec![0.0, 0.0])).unwrap();
        assert!(bound_quantities(&lz, &g, 1.0, 0.5, 1.0, None).is_err());
        assert!(bound_quantities(&lz, &g, 1.0, 0.0, 1.0, None).is_err());
    }

    #[test]
    fn locality_bound_examples() {
        let v = locality_bound(GridKind::Grid1D, 500.0, 20.0, 0.5, 30.0, 5.0);
        assert!((v - 0.433).abs() < 5e-4, "{v}");
        // n = r², r = p L = 1
        assert!((locality_bound(GridKind::Grid1D, 1.0, 1.0, 1.0, 1.0, 1.0) - 2f64.sqrt()).abs() < 1e-15);
        // n = r² p L with r = 4: the r factor survives as 1/√r
        assert!((locality_bound(GridKind::Grid1D, 16.0, 4.0, 0.5, 2.0, 1.0) - 2f64.sqrt() / 2.0).abs() < 1e-15);
        // r² = ln n, p = L = 1
        let r = 3.0f64;
        let v = locality_bound(GridKind::Grid2D, (r * r).exp(), r, 1.0, 1.0, 1.0);
        assert!((v - 2f64.sqrt() / r).abs() < 1e-12);
    }
}
