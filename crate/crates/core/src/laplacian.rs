//! Weighted graph Laplacians and solves on the subspace orthogonal to `1`.
//!
//! Operators are assembled from edge incidences, `L = Σ w_ij (e_i - e_j)(e_i - e_j)^T`,
//! and applied edge by edge so that `L·1 = 0` holds bit-exactly. Parallel edges
//! are merged by adding their conductances.

use std::collections::{BTreeMap, HashMap};

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Default relative residual for [`LaplacianOperator::solve_orthogonal`].
pub const DEFAULT_TOL: f64 = 1e-10;

/// Largest dimension for which a failed CG solve falls back to a dense factorization.
pub const DENSE_FALLBACK_MAX_N: usize = 200;

#[derive(Debug, Clone)]
pub struct LaplacianOperator {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
    diag: Vec<f64>,
    connected: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    ConjugateGradient,
    Dense,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    /// Final relative residual `‖Lv - b‖ / ‖b‖`.
    pub residual: f64,
    pub converged: bool,
    pub method: SolveMethod,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub tol: f64,
    /// Defaults to `10 n`.
    pub max_iter: Option<usize>,
    pub dense_fallback: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: None,
            dense_fallback: true,
        }
    }
}

/// Removes the mean so that `v ⟂ 1`.
pub fn project_out_ones(v: &mut [f64]) {
    if v.is_empty() {
        return;
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= mean);
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

impl LaplacianOperator {
    pub fn assemble(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let mut merged: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (i, j, w) in edges {
            if i >= n || j >= n || i == j {
                return Err(Error::InvalidInput(format!(
                    "invalid Laplacian edge ({i}, {j}) for n = {n}"
                )));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::NonPositiveWeight { i, j, weight: w });
            }
            *merged.entry((i.min(j), i.max(j))).or_insert(0.0) += w;
        }
        let edges: Vec<(usize, usize, f64)> = merged.into_iter().map(|((i, j), w)| (i, j, w)).collect();
        let mut diag = vec![0.0; n];
        for &(i, j, w) in &edges {
            diag[i] += w;
            diag[j] += w;
        }
        let connected = crate::graph::is_connected(n, edges.iter().map(|&(i, j, _)| (i, j)));
        Ok(Self {
            n,
            edges,
            diag,
            connected,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Merged edges `(i, j, w_ij)` with `i < j`.
    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    pub fn is_connected(&self) -> bool {
        self.connected
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        let key = (i.min(j), i.max(j));
        self.edges
            .binary_search_by(|&(a, b, _)| (a, b).cmp(&key))
            .map(|k| self.edges[k].2)
            .unwrap_or(0.0)
    }

    /// Multiplies every weight by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::assemble(self.n, self.edges.iter().map(|&(i, j, w)| (i, j, w * factor)))
    }

    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for &(i, j, w) in &self.edges {
            let t = w * (x[i] - x[j]);
            out[i] += t;
            out[j] -= t;
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.apply_into(x, &mut out);
        out
    }

    /// `x^T L x = Σ w_ij (x_i - x_j)^2`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.edges
            .iter()
            .map(|&(i, j, w)| w * (x[i] - x[j]).powi(2))
            .sum()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for &(i, j, w) in &self.edges {
            m[(i, i)] += w;
            m[(j, j)] += w;
            m[(i, j)] -= w;
            m[(j, i)] -= w;
        }
        m
    }

    /// Dense factorization of `L + α 11^T / n`, which inverts `L` on `1⟂`.
    pub fn factorize(&self) -> Result<DenseFactor> {
        if !self.connected {
            return Err(Error::Disconnected);
        }
        let n = self.n;
        let alpha = if n == 0 {
            1.0
        } else {
            (self.diag.iter().sum::<f64>() / n as f64).max(f64::MIN_POSITIVE)
        };
        let mut m = self.to_dense();
        m.add_scalar_mut(alpha / n as f64);
        let chol = Cholesky::new(m).ok_or_else(|| {
            Error::InvalidInput("Laplacian factorization failed (not positive definite on 1-perp)".into())
        })?;
        Ok(DenseFactor { n, chol })
    }

    /// Returns `v = L^† b`: `v ⟂ 1` and `‖Lv - b‖ ≤ tol ‖b‖` when converged.
    /// The right-hand side is projected onto `1⟂` first.
    pub fn solve_orthogonal(&self, b: &[f64], opts: &SolveOptions) -> Result<(Vec<f64>, SolveReport)> {
        if b.len() != self.n {
            return Err(Error::InvalidInput(format!(
                "right-hand side has length {}, expected {}",
                b.len(),
                self.n
            )));
        }
        if !self.connected {
            return Err(Error::Disconnected);
        }
        let mut rhs = b.to_vec();
        project_out_ones(&mut rhs);
        let bnorm = norm(&rhs);
        if bnorm == 0.0 {
            return Ok((
                vec![0.0; self.n],
                SolveReport {
                    iterations: 0,
                    residual: 0.0,
                    converged: true,
                    method: SolveMethod::ConjugateGradient,
                },
            ));
        }
        let budget = opts.max_iter.unwrap_or(10 * self.n).max(1);
        let mut x = vec![0.0; self.n];
        let mut used = 0;
        let mut residual = f64::INFINITY;
        // A few restarts from the true residual guard against drift of the
        // recurrence residual.
        for _ in 0..4 {
            if used >= budget {
                break;
            }
            let mut r = self.apply(&x);
            r.iter_mut().zip(&rhs).for_each(|(ri, bi)| *ri = bi - *ri);
            project_out_ones(&mut r);
            residual = norm(&r) / bnorm;
            if residual <= opts.tol {
                break;
            }
            used += self.pcg(&mut x, r, bnorm, opts.tol, budget - used);
            project_out_ones(&mut x);
            let lx = self.apply(&x);
            residual = lx.iter().zip(&rhs).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt() / bnorm;
            if residual <= opts.tol {
                break;
            }
        }
        if residual <= opts.tol {
            return Ok((
                x,
                SolveReport {
                    iterations: used,
                    residual,
                    converged: true,
                    method: SolveMethod::ConjugateGradient,
                },
            ));
        }
        if opts.dense_fallback && self.n <= DENSE_FALLBACK_MAX_N {
            let v = self.factorize()?.solve(&rhs);
            let lv = self.apply(&v);
            let res = lv.iter().zip(&rhs).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt() / bnorm;
            return Ok((
                v,
                SolveReport {
                    iterations: used,
                    residual: res,
                    converged: res <= opts.tol,
                    method: SolveMethod::Dense,
                },
            ));
        }
        Ok((
            x,
            SolveReport {
                iterations: used,
                residual,
                converged: false,
                method: SolveMethod::ConjugateGradient,
            },
        ))
    }

    /// Jacobi-preconditioned CG restricted to `1⟂`. Updates `x` in place and
    /// returns the iteration count.
    fn pcg(&self, x: &mut [f64], mut r: Vec<f64>, bnorm: f64, tol: f64, max_iter: usize) -> usize {
        let n = self.n;
        let precondition = |r: &[f64], z: &mut [f64]| {
            for k in 0..n {
                z[k] = if self.diag[k] > 0.0 { r[k] / self.diag[k] } else { r[k] };
            }
            project_out_ones(z);
        };
        let mut z = vec![0.0; n];
        precondition(&r, &mut z);
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let mut ap = vec![0.0; n];
        let mut it = 0;
        while it < max_iter {
            it += 1;
            self.apply_into(&p, &mut ap);
            let pap = dot(&p, &ap);
            if !(pap > 0.0) {
                break;
            }
            let alpha = rz / pap;
            for k in 0..n {
                x[k] += alpha * p[k];
                r[k] -= alpha * ap[k];
            }
            project_out_ones(&mut r);
            if norm(&r) <= tol * bnorm * 0.5 {
                break;
            }
            precondition(&r, &mut z);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for k in 0..n {
                p[k] = z[k] + beta * p[k];
            }
        }
        it
    }

    /// `Ω_kl = (e_k - e_l)^T L^† (e_k - e_l)`; zero when `k == l`.
    pub fn effective_resistance(&self, k: usize, l: usize) -> Result<f64> {
        if k >= self.n || l >= self.n {
            return Err(Error::InvalidInput(format!("node pair ({k}, {l}) out of range")));
        }
        if k == l {
            return Ok(0.0);
        }
        let mut b = vec![0.0; self.n];
        b[k] = 1.0;
        b[l] = -1.0;
        let (v, report) = self.solve_orthogonal(&b, &SolveOptions::default())?;
        if !report.converged {
            return Err(Error::InvalidInput(format!(
                "resistance solve did not converge (residual {:.3e})",
                report.residual
            )));
        }
        Ok(v[k] - v[l])
    }

    /// Columns of `L^†` computed with `n - 1` solves (the last column follows
    /// from `L^† 1 = 0`). Solves run in parallel.
    pub fn pseudo_inverse(&self) -> Result<DMatrix<f64>> {
        let n = self.n;
        if !self.connected {
            return Err(Error::Disconnected);
        }
        if n == 1 {
            return Ok(DMatrix::zeros(1, 1));
        }
        let columns: Vec<Vec<f64>> = (0..n - 1)
            .into_par_iter()
            .map(|k| {
                let mut b = vec![-1.0 / n as f64; n];
                b[k] += 1.0;
                let (v, report) = self.solve_orthogonal(&b, &SolveOptions::default())?;
                if report.converged {
                    Ok(v)
                } else {
                    Err(Error::InvalidInput(format!(
                        "column solve {k} did not converge (residual {:.3e})",
                        report.residual
                    )))
                }
            })
            .collect::<Result<_>>()?;
        let mut m = DMatrix::zeros(n, n);
        for (k, col) in columns.iter().enumerate() {
            for i in 0..n {
                m[(i, k)] = col[i];
                m[(i, n - 1)] -= col[i];
            }
        }
        Ok(m)
    }

    /// Effective resistances for the requested pairs, or for all pairs
    /// `k < l` when `pairs` is `None`.
    pub fn resistance_matrix(&self, pairs: Option<&[(usize, usize)]>) -> Result<ResistanceMatrix> {
        let entries = match pairs {
            None => {
                let x = self.pseudo_inverse()?;
                let mut out = Vec::with_capacity(self.n * (self.n.saturating_sub(1)) / 2);
                for k in 0..self.n {
                    for l in (k + 1)..self.n {
                        out.push((k, l, x[(k, k)] + x[(l, l)] - x[(k, l)] - x[(l, k)]));
                    }
                }
                out
            }
            Some(list) => list
                .par_iter()
                .map(|&(k, l)| Ok((k, l, self.effective_resistance(k, l)?)))
                .collect::<Result<Vec<_>>>()?,
        };
        Ok(ResistanceMatrix::new(entries))
    }
}

/// Cached dense factorization inverting a connected Laplacian on `1⟂`.
#[derive(Debug, Clone)]
pub struct DenseFactor {
    n: usize,
    chol: Cholesky<f64, Dyn>,
}

impl DenseFactor {
    /// `L^† b`, with `b` projected onto `1⟂`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut rhs = b.to_vec();
        project_out_ones(&mut rhs);
        let v = self.chol.solve(&DVector::from_vec(rhs));
        let mut out: Vec<f64> = v.iter().copied().collect();
        project_out_ones(&mut out);
        out
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// Pairwise effective resistances.
#[derive(Debug, Clone, PartialEq)]
pub struct ResistanceMatrix {
    entries: Vec<(usize, usize, f64)>,
    lookup: HashMap<(usize, usize), usize>,
}

impl ResistanceMatrix {
    fn new(entries: Vec<(usize, usize, f64)>) -> Self {
        let lookup = entries
            .iter()
            .enumerate()
            .map(|(x, &(k, l, _))| ((k.min(l), k.max(l)), x))
            .collect();
        Self { entries, lookup }
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    /// Symmetric lookup; `Some(0.0)` on the diagonal.
    pub fn get(&self, k: usize, l: usize) -> Option<f64> {
        if k == l {
            return Some(0.0);
        }
        self.lookup.get(&(k.min(l), k.max(l))).map(|&x| self.entries[x].2)
    }

    pub fn max(&self) -> f64 {
        self.entries.iter().map(|e| e.2).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(weights: &[f64]) -> LaplacianOperator {
        LaplacianOperator::assemble(
            weights.len() + 1,
            weights.iter().enumerate().map(|(k, &w)| (k, k + 1, w)),
        )
        .unwrap()
    }

    fn complete(n: usize) -> LaplacianOperator {
        let mut e = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                e.push((i, j, 1.0));
            }
        }
        LaplacianOperator::assemble(n, e).unwrap()
    }

    #[test]
    fn two_node_matrix() {
        let l = LaplacianOperator::assemble(2, [(0, 1, 2.0)]).unwrap();
        let m = l.to_dense();
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[2.0, -2.0, -2.0, 2.0]));
    }

    #[test]
    fn path_apply() {
        // L = [[1,-1,0],[-1,2,-1],[0,-1,1]], x = (1, 0, -1)
        let l = path(&[1.0, 1.0]);
        assert_eq!(l.apply(&[1.0, 0.0, -1.0]), vec![1.0, 0.0, -1.0]);
    }

    #[test]
    fn ones_in_kernel_exactly() {
        let l = LaplacianOperator::assemble(4, [(0, 1, 0.3), (1, 2, 1e7), (2, 3, 1e-9), (0, 3, 2.5)]).unwrap();
        assert!(l.apply(&[1.0; 4]).iter().all(|&v| v == 0.0));
        let l = LaplacianOperator::assemble(3, [(0, 1, 0.1), (1, 2, 0.7)]).unwrap();
        assert!(l.apply(&[3.3; 3]).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(matches!(
            LaplacianOperator::assemble(2, [(0, 1, 0.0)]),
            Err(Error::NonPositiveWeight { .. })
        ));
        assert!(LaplacianOperator::assemble(2, [(0, 1, -1.0)]).is_err());
        assert!(LaplacianOperator::assemble(2, [(0, 1, f64::NAN)]).is_err());
        assert!(LaplacianOperator::assemble(2, [(1, 1, 1.0)]).is_err());
    }

    #[test]
    fn parallel_edges_merge() {
        let l = LaplacianOperator::assemble(2, [(0, 1, 1.0), (1, 0, 3.0)]).unwrap();
        assert_eq!(l.edges(), &[(0, 1, 4.0)]);
        assert!((l.effective_resistance(0, 1).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn solve_two_nodes() {
        let l = LaplacianOperator::assemble(2, [(0, 1, 1.0)]).unwrap();
        let (v, rep) = l.solve_orthogonal(&[1.0, -1.0], &SolveOptions::default()).unwrap();
        assert!(rep.converged);
        assert!((v[0] - 0.5).abs() < 1e-12 && (v[1] + 0.5).abs() < 1e-12);
    }

    #[test]
    fn solve_zero_rhs() {
        let l = complete(5);
        let (v, rep) = l.solve_orthogonal(&[0.0; 5], &SolveOptions::default()).unwrap();
        assert!(v.iter().all(|&x| x == 0.0));
        assert_eq!(rep.iterations, 0);
        // constant right-hand sides project to zero too
        let (v, _) = l.solve_orthogonal(&[2.0; 5], &SolveOptions::default()).unwrap();
        assert!(v.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn complete_graph_resistance() {
        let l = complete(4);
        let (v, _) = l.solve_orthogonal(&[1.0, -1.0, 0.0, 0.0], &SolveOptions::default()).unwrap();
        assert!((v[0] - v[1] - 0.5).abs() < 1e-12);
        for k in 0..4 {
            for m in (k + 1)..4 {
                assert!((l.effective_resistance(k, m).unwrap() - 0.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn series_law() {
        let l = path(&[1.0, 0.5, 1.0 / 3.0]);
        assert!((l.effective_resistance(0, 3).unwrap() - 6.0).abs() < 1e-10);
        assert_eq!(l.effective_resistance(2, 2).unwrap(), 0.0);
    }

    #[test]
    fn ring_opposite_pair() {
        let l = LaplacianOperator::assemble(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (0, 3, 1.0)]).unwrap();
        let r = l.resistance_matrix(None).unwrap();
        assert!((r.get(0, 2).unwrap() - 1.0).abs() < 1e-10);
        assert!((r.get(1, 3).unwrap() - 1.0).abs() < 1e-10);
        assert!((r.get(0, 1).unwrap() - 0.75).abs() < 1e-10);
        assert_eq!(r.get(2, 0), r.get(0, 2));
    }

    #[test]
    fn resistance_pair_list_matches_full() {
        let l = path(&[1.0, 1.0]);
        let full = l.resistance_matrix(None).unwrap();
        let some = l.resistance_matrix(Some(&[(0, 2), (2, 1)])).unwrap();
        assert!((some.get(0, 2).unwrap() - 2.0).abs() < 1e-10);
        assert!((full.get(0, 2).unwrap() - 2.0).abs() < 1e-10);
        assert!((some.get(1, 2).unwrap() - full.get(1, 2).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn disconnected_errors() {
        let l = LaplacianOperator::assemble(4, [(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        assert!(!l.is_connected());
        assert!(matches!(
            l.solve_orthogonal(&[1.0, -1.0, 0.0, 0.0], &SolveOptions::default()),
            Err(Error::Disconnected)
        ));
        assert!(l.factorize().is_err());
    }

    #[test]
    fn dense_fallback_on_tiny_budget() {
        let l = path(&[1.0; 30]);
        let mut b = vec![0.0; 31];
        b[0] = 1.0;
        b[30] = -1.0;
        let opts = SolveOptions { max_iter: Some(2), ..Default::default() };
        let (v, rep) = l.solve_orthogonal(&b, &opts).unwrap();
        assert_eq!(rep.method, SolveMethod::Dense);
        assert!(rep.converged);
        assert!((v[0] - v[30] - 30.0).abs() < 1e-9);

        let opts = SolveOptions { max_iter: Some(2), dense_fallback: false, ..Default::default() };
        let (_, rep) = l.solve_orthogonal(&b, &opts).unwrap();
        assert!(!rep.converged);
        assert!(rep.residual > opts.tol);
    }

    #[test]
    fn factor_matches_cg() {
        let l = LaplacianOperator::assemble(5, [(0, 1, 2.0), (1, 2, 0.5), (2, 3, 1.5), (3, 4, 1.0), (0, 4, 0.25), (1, 3, 3.0)]).unwrap();
        let b = [0.3, -1.2, 0.4, 2.0, -1.5];
        let f = l.factorize().unwrap().solve(&b);
        let (v, _) = l.solve_orthogonal(&b, &SolveOptions::default()).unwrap();
        for k in 0..5 {
            assert!((f[k] - v[k]).abs() < 1e-9);
        }
    }
}
