//! Dense reference implementations.
//!
//! Everything here is O(n^3) and meant as ground truth for small graphs
//! (n <= [`DENSE_THRESHOLD`] by default). Eigenvalues of `P` are taken from
//! the symmetric similarity `D^{-1/2} A D^{-1/2}`, never from `P` itself.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::value::Extended;

/// Largest `n` accepted by the dense routes unless overridden.
pub const DENSE_THRESHOLD: usize = 2000;

fn check_size(n: usize, threshold: usize) -> Result<()> {
    if n > threshold {
        return Err(Error::TooLargeForDense { n, threshold });
    }
    if n == 0 {
        return Err(Error::InvalidArgument("empty graph".into()));
    }
    Ok(())
}

pub fn adjacency_matrix(g: &WeightedGraph) -> DMatrix<f64> {
    let n = g.node_count();
    let mut a = DMatrix::zeros(n, n);
    for (p, q, w) in g.edges() {
        a[(p, q)] = w;
        a[(q, p)] = w;
    }
    for (i, w) in g.loops() {
        a[(i, i)] = w;
    }
    a
}

/// `S = D - A + d d^T / ||d||_1`.
pub fn modified_laplacian(g: &WeightedGraph) -> DMatrix<f64> {
    let d = DVector::from_column_slice(g.degrees());
    let a = adjacency_matrix(g);
    DMatrix::from_diagonal(&d) - a + &d * d.transpose() / g.volume()
}

fn sorted(values: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.into_iter().collect();
    v.sort_by(f64::total_cmp);
    v
}

fn symmetric_eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
    let sym = (&m + m.transpose()) * 0.5;
    sorted(SymmetricEigen::new(sym).eigenvalues.iter().copied())
}

/// Eigenvalues of `P = D^{-1} A` in ascending order, via the symmetric
/// similarity `D^{-1/2} A D^{-1/2}`.
pub fn transition_eigenvalues(g: &WeightedGraph) -> Vec<f64> {
    let n = g.node_count();
    let a = adjacency_matrix(g);
    let s = DVector::from_iterator(n, g.degrees().iter().map(|d| 1.0 / d.sqrt()));
    let sym = DMatrix::from_fn(n, n, |i, j| s[i] * a[(i, j)] * s[j]);
    symmetric_eigenvalues(sym)
}

/// Dense matrices and spectra attached to a connected graph.
#[derive(Debug, Clone)]
pub struct DenseSpectralData {
    pub degrees: DVector<f64>,
    /// `P = D^{-1} A`.
    pub transition: DMatrix<f64>,
    /// `S = L + d d^T / ||d||_1`.
    pub modified_laplacian: DMatrix<f64>,
    /// `H = D^{-1/2} S D^{-1/2}`.
    pub similarity: DMatrix<f64>,
    pub s_inverse: DMatrix<f64>,
    /// `S^{-1} D S^{-1}`.
    pub sensitivity_matrix: DMatrix<f64>,
    /// Ascending eigenvalues of `P`; the last one is 1.
    pub eig_p: Vec<f64>,
    /// Ascending eigenvalues of `S`.
    pub eig_s: Vec<f64>,
    /// Ascending eigenvalues of `S^{-1} D S^{-1}`.
    pub eig_m: Vec<f64>,
}

impl DenseSpectralData {
    pub fn new(g: &WeightedGraph) -> Result<Self> {
        Self::with_threshold(g, DENSE_THRESHOLD)
    }

    pub fn with_threshold(g: &WeightedGraph, threshold: usize) -> Result<Self> {
        let n = g.node_count();
        check_size(n, threshold)?;
        g.check_connected()?;
        let d = DVector::from_column_slice(g.degrees());
        let a = adjacency_matrix(g);
        let transition = DMatrix::from_fn(n, n, |i, j| a[(i, j)] / d[i]);
        let s = modified_laplacian(g);
        let similarity = DMatrix::from_fn(n, n, |i, j| s[(i, j)] / (d[i] * d[j]).sqrt());
        let s_inverse = s
            .clone()
            .lu()
            .try_inverse()
            .ok_or_else(|| Error::Singular("modified Laplacian".into()))?;
        let sensitivity_matrix = &s_inverse * DMatrix::from_diagonal(&d) * &s_inverse;
        Ok(Self {
            eig_p: transition_eigenvalues(g),
            eig_s: symmetric_eigenvalues(s.clone()),
            eig_m: symmetric_eigenvalues(sensitivity_matrix.clone()),
            degrees: d,
            transition,
            modified_laplacian: s,
            similarity,
            s_inverse,
            sensitivity_matrix,
        })
    }

    pub fn node_count(&self) -> usize {
        self.degrees.len()
    }

    /// `trace(D^{1/2} S^{-1} D^{1/2}) - 1`.
    pub fn kemeny(&self) -> f64 {
        (0..self.node_count())
            .map(|i| self.degrees[i] * self.s_inverse[(i, i)])
            .sum::<f64>()
            - 1.0
    }

    /// `S^{-1} (e_p - e_q)`.
    pub fn solve_pair(&self, p: usize, q: usize) -> Vec<f64> {
        (0..self.node_count())
            .map(|r| self.s_inverse[(r, p)] - self.s_inverse[(r, q)])
            .collect()
    }

    /// `(alpha, beta)` for the pair: `w^T S^{-1} w` and `w^T S^{-1} D S^{-1} w`.
    pub fn pair_forms(&self, p: usize, q: usize) -> (f64, f64) {
        let si = &self.s_inverse;
        let alpha = si[(p, p)] + si[(q, q)] - si[(p, q)] - si[(q, p)];
        let x = self.solve_pair(p, q);
        let beta = x
            .iter()
            .zip(self.degrees.iter())
            .map(|(xi, di)| di * xi * xi)
            .sum();
        (alpha, beta)
    }

    /// `w^T S^{-1} D S^{-1} D S^{-1} w`.
    pub fn third_order_form(&self, p: usize, q: usize) -> f64 {
        let x = DVector::from_vec(self.solve_pair(p, q));
        let dx = x.component_mul(&self.degrees);
        (dx.transpose() * &self.s_inverse * &dx)[(0, 0)]
    }

    /// `(n trace(M) - 1^T M 1) / n^2` with `M = S^{-1} D S^{-1}`.
    pub fn global_sensitivity(&self) -> f64 {
        let n = self.node_count() as f64;
        let m = &self.sensitivity_matrix;
        (n * m.trace() - m.sum()) / (n * n)
    }
}

/// `trace((I - P + 1 v^T)^{-1}) - 1` for any `v >= 0` with `v^T 1 = 1`.
pub fn kemeny_via_trace(g: &WeightedGraph, v: &[f64]) -> Result<f64> {
    let n = g.node_count();
    check_size(n, DENSE_THRESHOLD)?;
    g.check_connected()?;
    if v.len() != n || v.iter().any(|&x| x < 0.0 || !x.is_finite()) {
        return Err(Error::InvalidArgument(
            "v must be a nonnegative n-vector".into(),
        ));
    }
    let total: f64 = v.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "v sums to {total}, expected 1"
        )));
    }
    let a = adjacency_matrix(g);
    let d = g.degrees();
    let m = DMatrix::from_fn(n, n, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        id - a[(i, j)] / d[i] + v[j]
    });
    let inv = m
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::Singular("I - P + 1 v^T".into()))?;
    Ok(inv.trace() - 1.0)
}

/// `trace(D^{1/2} S^{-1} D^{1/2}) - 1`.
pub fn kemeny_via_s(g: &WeightedGraph) -> Result<f64> {
    Ok(DenseSpectralData::new(g)?.kemeny())
}

/// `sum_{i < n} 1 / (1 - lambda_i)` over the sub-unit eigenvalues of `P`.
pub fn kemeny_via_eigs(g: &WeightedGraph) -> Result<f64> {
    check_size(g.node_count(), DENSE_THRESHOLD)?;
    g.check_connected()?;
    let eig = transition_eigenvalues(g);
    Ok(eig[..eig.len() - 1].iter().map(|l| 1.0 / (1.0 - l)).sum())
}

/// Kemeny's constant of `D^{-1}(A + c w w^T)` computed from scratch, with
/// `c = t a_pq` (weighted) or `c = t` (unweighted).
///
/// Returns [`Extended::Infinite`] when the perturbed chain is reducible
/// (e.g. `t = 1` on a cut-edge) or the system is singular.
pub fn perturbed_kemeny_direct(
    g: &WeightedGraph,
    p: usize,
    q: usize,
    t: f64,
    weighted: bool,
) -> Result<Extended> {
    let n = g.node_count();
    check_size(n, DENSE_THRESHOLD)?;
    g.check_connected()?;
    if p == q {
        return Err(Error::SameNode(p + 1));
    }
    if p >= n || q >= n {
        return Err(Error::NodeOutOfRange {
            id: p.max(q) + 1,
            n,
        });
    }
    if t.is_nan() || t < 0.0 || (weighted && t > 1.0) {
        return Err(Error::InvalidArgument(format!(
            "t = {t} outside the admissible range"
        )));
    }
    let c = if weighted { t * g.weight(p, q) } else { t };
    let mut a = adjacency_matrix(g);
    a[(p, p)] += c;
    a[(q, q)] += c;
    a[(p, q)] -= c;
    a[(q, p)] -= c;

    if a.iter().all(|&x| x >= 0.0) && !support_connected(&a) {
        return Ok(Extended::Infinite);
    }
    let d = g.degrees();
    let vol = g.volume();
    let m = DMatrix::from_fn(n, n, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        id - a[(i, j)] / d[i] + d[j] / vol
    });
    Ok(match m.lu().try_inverse() {
        Some(inv) => Extended::Finite(inv.trace() - 1.0),
        None => Extended::Infinite,
    })
}

fn support_connected(a: &DMatrix<f64>) -> bool {
    let n = a.nrows();
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for u in 0..n {
            if u != v && !seen[u] && a[(v, u)] > 0.0 {
                seen[u] = true;
                stack.push(u);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Closed interval `[lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn contains(&self, x: f64, rel_tol: f64) -> bool {
        let slack = rel_tol * self.upper.abs().max(1.0);
        x >= self.lower - slack && x <= self.upper + slack
    }
}

/// The three a-priori brackets on every `mu_bar(p, q)`: from the spectrum
/// of `S^{-1} D S^{-1}`, from degrees and the spectrum of `S`, and from
/// degrees and the spectrum of `P`.
pub fn mu_bar_bounds(g: &WeightedGraph) -> Result<[Interval; 3]> {
    let data = DenseSpectralData::new(g)?;
    let d = g.degrees();
    let d_min = d.iter().copied().fold(f64::INFINITY, f64::min);
    let d_max = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let zeta_min = data.eig_m[0];
    let zeta_max = *data.eig_m.last().expect("n >= 1");
    let inv_sq: Vec<f64> = data.eig_s.iter().map(|nu| 1.0 / (nu * nu)).collect();
    let inv_sq_min = inv_sq.iter().copied().fold(f64::INFINITY, f64::min);
    let inv_sq_max = inv_sq.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let eig = &data.eig_p;
    let n = eig.len();
    let (low_gamma, high_gamma) = if n >= 2 {
        (
            (1.0 / (1.0 - eig[0]).powi(2)).min(1.0),
            (1.0 / (1.0 - eig[n - 2]).powi(2)).max(1.0),
        )
    } else {
        (1.0, 1.0)
    };
    Ok([
        Interval {
            lower: 2.0 * zeta_min,
            upper: 2.0 * zeta_max,
        },
        Interval {
            lower: 2.0 * d_min * inv_sq_min,
            upper: 2.0 * d_max * inv_sq_max,
        },
        Interval {
            lower: 2.0 / d_max * low_gamma,
            upper: 2.0 / d_min * high_gamma,
        },
    ])
}
