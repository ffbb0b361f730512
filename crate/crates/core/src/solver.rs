//! Solves `S x = w` for the modified Laplacian `S = L + d d^T / ||d||_1`
//! without ever forming `S`.
//!
//! The graph is relabeled to a small half-bandwidth `b`, the leading
//! `(n-1) x (n-1)` block of `L` gets a banded Cholesky factor `R`, and
//! the last node is handled by bordering. For a zero-sum right-hand side
//! `u` every solution of `S x = u` satisfies `d^T x = 0`, which turns the
//! system into
//!
//! ```text
//! [ R  v ] [x']   [ y ]       R^T y = u' ,  R^T v = l_{:,n}
//! [ d' dn] [xn] = [ 0 ] ,     R^T z = d' ,  rho = z.v - dn
//! ```
//!
//! so `xn = z.y / rho` and `R x' = y - xn v`. Preprocessing is dominated by
//! the factorization (about `n b^2 / 3` flops); each solve costs `O(n b)`,
//! and the forward sweep starts at the first nonzero of `u`.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rayon::prelude::*;

use crate::band::{neumaier_add, BandFactor, BandMatrix};
use crate::error::{Error, Result};
use crate::graph::{NodePermutation, WeightedGraph};
use crate::oracle;

/// Columns handled together by the batched kernels.
pub const BLOCK: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BackendChoice {
    /// Banded unless `b > n/2` and `n` is within the dense threshold.
    #[default]
    Auto,
    Banded,
    Dense,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendKind {
    Banded,
    Dense,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverOptions {
    pub backend: BackendChoice,
    /// Recompute pivots from off-diagonal sums (GTH-style).
    pub gth: bool,
    /// Neumaier summation for `beta`.
    pub compensated: bool,
    /// Upper limit on `n` for the dense fallback.
    pub dense_threshold: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            backend: BackendChoice::Auto,
            gth: false,
            compensated: false,
            dense_threshold: oracle::DENSE_THRESHOLD,
        }
    }
}

impl SolverOptions {
    pub fn banded() -> Self {
        Self {
            backend: BackendChoice::Banded,
            ..Self::default()
        }
    }

    pub fn dense() -> Self {
        Self {
            backend: BackendChoice::Dense,
            ..Self::default()
        }
    }

    pub fn with_gth(mut self, gth: bool) -> Self {
        self.gth = gth;
        self
    }
}

enum Backend {
    Banded {
        factor: BandFactor,
        /// Last column of the factor of `L`; zero before `v_start`.
        v: Vec<f64>,
        v_start: usize,
        z: Vec<f64>,
        rho: f64,
    },
    Dense {
        chol: Cholesky<f64, Dyn>,
    },
}

/// Frozen preprocessing state; shareable across threads.
pub struct SolverContext {
    n: usize,
    bandwidth: usize,
    perm: NodePermutation,
    /// Relabeled graph (internal order).
    graph: WeightedGraph,
    volume: f64,
    backend: Backend,
    options: SolverOptions,
    shifted: Mutex<BTreeMap<u64, Arc<BandFactor>>>,
}

impl std::fmt::Debug for SolverContext {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SolverContext")
            .field("n", &self.n)
            .field("bandwidth", &self.bandwidth)
            .field("backend", &self.backend_kind())
            .finish_non_exhaustive()
    }
}

fn band_of_laplacian(g: &WeightedGraph, order: usize, width: usize, shift: f64) -> BandMatrix {
    let mut m = BandMatrix::zeros(order, width);
    for i in 0..order {
        // L_ii as a sum of positive off-diagonal weights: loops cancel in L.
        let offdiag: f64 = g.neighbors(i).iter().map(|&(_, w)| w).sum();
        m.set(i, i, offdiag + shift * g.degree(i));
        for &(j, w) in g.neighbors(i) {
            if j > i && j < order {
                m.set(i, j, -w);
            }
        }
    }
    m
}

impl SolverContext {
    /// Relabels, factors and computes `v`, `z`, `rho`.
    pub fn preprocess(g: &WeightedGraph, options: SolverOptions) -> Result<Self> {
        let n = g.node_count();
        if n < 2 {
            return Err(Error::InvalidArgument("need at least two nodes".into()));
        }
        g.check_connected()?;
        let (graph, perm, bandwidth) = g.reorder_for_bandwidth();
        let kind = match options.backend {
            BackendChoice::Banded => BackendKind::Banded,
            BackendChoice::Dense => BackendKind::Dense,
            BackendChoice::Auto => {
                if 2 * bandwidth > n && n <= options.dense_threshold {
                    BackendKind::Dense
                } else {
                    BackendKind::Banded
                }
            }
        };
        let backend = match kind {
            BackendKind::Banded => Self::banded_backend(&graph, bandwidth, options.gth)?,
            BackendKind::Dense => Self::dense_backend(&graph)?,
        };
        Ok(Self {
            n,
            bandwidth,
            perm,
            volume: graph.volume(),
            graph,
            backend,
            options,
            shifted: Mutex::new(BTreeMap::new()),
        })
    }

    fn banded_backend(g: &WeightedGraph, bandwidth: usize, gth: bool) -> Result<Backend> {
        let n = g.node_count();
        let order = n - 1;
        let last = n - 1;
        let matrix = band_of_laplacian(g, order, bandwidth, 0.0);
        // l_{i,n}; nonzero only within the band of the last node.
        let v_start = n.saturating_sub(bandwidth);
        let mut column = vec![0.0; order];
        for &(j, w) in g.neighbors(last) {
            column[j] = -w;
        }
        let (factor, v) = if gth {
            let factor = BandFactor::factorize(matrix, Some(&mut column), true)?;
            (factor, column)
        } else {
            let factor = BandFactor::factorize(matrix, None, false)?;
            factor.solve_transpose(&mut column, 1, v_start.min(order));
            (factor, column)
        };
        let mut z: Vec<f64> = g.degrees()[..order].to_vec();
        factor.solve_transpose(&mut z, 1, 0);
        let zv: f64 = (v_start..order).map(|i| z[i] * v[i]).sum();
        let rho = zv - g.degree(last);
        if rho == 0.0 || !rho.is_finite() {
            return Err(Error::Singular("bordered system (rho = 0)".into()));
        }
        Ok(Backend::Banded {
            factor,
            v,
            v_start,
            z,
            rho,
        })
    }

    fn dense_backend(g: &WeightedGraph) -> Result<Backend> {
        let s = oracle::modified_laplacian(g);
        let chol = Cholesky::new(s).ok_or(Error::NumericalBreakdown {
            step: 0,
            pivot: f64::NAN,
            threshold: 0.0,
        })?;
        Ok(Backend::Dense { chol })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    /// Half-bandwidth of the relabeled graph.
    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    pub fn permutation(&self) -> &NodePermutation {
        &self.perm
    }

    pub fn options(&self) -> &SolverOptions {
        &self.options
    }

    pub fn backend_kind(&self) -> BackendKind {
        match self.backend {
            Backend::Banded { .. } => BackendKind::Banded,
            Backend::Dense { .. } => BackendKind::Dense,
        }
    }

    /// Banded factor of the leading block of the relabeled Laplacian.
    pub fn factor(&self) -> Option<&BandFactor> {
        match &self.backend {
            Backend::Banded { factor, .. } => Some(factor),
            Backend::Dense { .. } => None,
        }
    }

    /// `v`, in internal order.
    pub fn tail_column(&self) -> Option<&[f64]> {
        match &self.backend {
            Backend::Banded { v, .. } => Some(v),
            Backend::Dense { .. } => None,
        }
    }

    /// `z` with `R^T z = d'`, in internal order.
    pub fn dual_vector(&self) -> Option<&[f64]> {
        match &self.backend {
            Backend::Banded { z, .. } => Some(z),
            Backend::Dense { .. } => None,
        }
    }

    pub fn rho(&self) -> Option<f64> {
        match &self.backend {
            Backend::Banded { rho, .. } => Some(*rho),
            Backend::Dense { .. } => None,
        }
    }

    /// The relabeled graph the factor was built from.
    pub fn internal_graph(&self) -> &WeightedGraph {
        &self.graph
    }

    fn check_pair(&self, p: usize, q: usize) -> Result<()> {
        if p >= self.n || q >= self.n {
            return Err(Error::NodeOutOfRange {
                id: p.max(q) + 1,
                n: self.n,
            });
        }
        if p == q {
            return Err(Error::SameNode(p + 1));
        }
        Ok(())
    }

    /// Runs the bordered solve on `cols <= BLOCK` interleaved zero-sum
    /// columns in internal order; rows before `start` must be zero. Returns
    /// `sum_i d_i x_i^2` per column, accumulated in descending row order.
    fn solve_block(&self, buf: &mut [f64], cols: usize, start: usize) -> [f64; BLOCK] {
        debug_assert!(cols <= BLOCK);
        let n = self.n;
        let d = self.graph.degrees();
        let mut sums = [0.0; BLOCK];
        let mut comp = [0.0; BLOCK];
        match &self.backend {
            Backend::Banded {
                factor,
                v,
                v_start,
                z,
                rho,
            } => {
                let order = n - 1;
                let start = start.min(order);
                let mut dots = [0.0; BLOCK];
                factor.solve_transpose_dot(&mut buf[..order * cols], cols, start, z, &mut dots);
                for c in 0..cols {
                    let xn = dots[c] / rho;
                    buf[order * cols + c] = xn;
                    for i in *v_start..order {
                        buf[i * cols + c] -= xn * v[i];
                    }
                    sums[c] = d[order] * xn * xn;
                }
                let comp = self.options.compensated.then_some(&mut comp[..]);
                factor.solve_weighted_square(&mut buf[..order * cols], cols, d, &mut sums, comp);
            }
            Backend::Dense { chol } => {
                for c in 0..cols {
                    let rhs = DVector::from_iterator(n, (0..n).map(|i| buf[i * cols + c]));
                    let x = chol.solve(&rhs);
                    for i in 0..n {
                        buf[i * cols + c] = x[i];
                    }
                    let (sum, corr) = self.weighted_square_sum_parts(buf, cols, c);
                    sums[c] = sum;
                    comp[c] = corr;
                }
            }
        }
        if self.options.compensated {
            for c in 0..cols {
                sums[c] += comp[c];
            }
        }
        sums
    }

    // (sum, Neumaier correction) in descending row order.
    fn weighted_square_sum_parts(&self, buf: &[f64], cols: usize, c: usize) -> (f64, f64) {
        let d = self.graph.degrees();
        let (mut sum, mut comp) = (0.0, 0.0);
        for i in (0..self.n).rev() {
            let x = buf[i * cols + c];
            if self.options.compensated {
                neumaier_add(&mut sum, &mut comp, d[i] * x * x);
            } else {
                sum += d[i] * x * x;
            }
        }
        (sum, comp)
    }

    fn weighted_square_sum(&self, buf: &[f64], cols: usize, c: usize) -> f64 {
        let (sum, comp) = self.weighted_square_sum_parts(buf, cols, c);
        if self.options.compensated {
            sum + comp
        } else {
            sum
        }
    }

    // Internal endpoints ordered so that p < q; the flag says whether the
    // caller's orientation was swapped.
    fn internal_pair(&self, p: usize, q: usize) -> (usize, usize, bool) {
        let (ip, iq) = (self.perm.new_index(p), self.perm.new_index(q));
        if ip < iq {
            (ip, iq, false)
        } else {
            (iq, ip, true)
        }
    }

    /// `x = S^{-1} (e_p - e_q)` in original node order.
    pub fn solve_pair(&self, p: usize, q: usize) -> Result<Vec<f64>> {
        self.check_pair(p, q)?;
        let (ip, iq, swapped) = self.internal_pair(p, q);
        let mut buf = vec![0.0; self.n];
        buf[ip] = 1.0;
        buf[iq] = -1.0;
        self.solve_block(&mut buf, 1, ip);
        let sign = if swapped { -1.0 } else { 1.0 };
        Ok((0..self.n)
            .map(|old| sign * buf[self.perm.new_index(old)])
            .collect())
    }

    /// `S^{-1} u` for a zero-sum `u` given in original node order.
    pub fn solve_zero_sum(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        if rhs.len() != self.n {
            return Err(Error::InvalidArgument("right-hand side length".into()));
        }
        let total: f64 = rhs.iter().sum();
        let scale: f64 = rhs.iter().map(|x| x.abs()).sum();
        if total.abs() > 1e-12 * scale.max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "right-hand side must sum to zero, sums to {total:e}"
            )));
        }
        let mut buf: Vec<f64> = (0..self.n)
            .map(|new| rhs[self.perm.old_index(new)])
            .collect();
        self.solve_block(&mut buf, 1, 0);
        Ok((0..self.n)
            .map(|old| buf[self.perm.new_index(old)])
            .collect())
    }

    /// `(alpha, beta) = (w^T S^{-1} w, w^T S^{-1} D S^{-1} w)` for
    /// `w = e_p - e_q`. Symmetric in `p, q` bit for bit.
    pub fn quadratic_forms(&self, p: usize, q: usize) -> Result<(f64, f64)> {
        self.check_pair(p, q)?;
        let (ip, iq, _) = self.internal_pair(p, q);
        let mut buf = vec![0.0; self.n];
        Ok(self.forms_block(&[(ip, iq)], &mut buf)[0])
    }

    fn forms_block(&self, pairs: &[(usize, usize)], buf: &mut [f64]) -> Vec<(f64, f64)> {
        let cols = pairs.len();
        let start = pairs.iter().map(|&(p, _)| p).min().unwrap_or(0);
        let buf = &mut buf[..self.n * cols];
        buf.fill(0.0);
        for (c, &(p, q)) in pairs.iter().enumerate() {
            buf[p * cols + c] = 1.0;
            buf[q * cols + c] = -1.0;
        }
        let betas = self.solve_block(buf, cols, start);
        pairs
            .iter()
            .enumerate()
            .map(|(c, &(p, q))| (buf[p * cols + c] - buf[q * cols + c], betas[c]))
            .collect()
    }

    /// [`quadratic_forms`](Self::quadratic_forms) for many pairs, fanned out
    /// over the current rayon pool. Output order follows `pairs`, and the
    /// values are bitwise identical to the single-pair call.
    pub fn quadratic_forms_batch(&self, pairs: &[(usize, usize)]) -> Result<Vec<(f64, f64)>> {
        for &(p, q) in pairs {
            self.check_pair(p, q)?;
        }
        let mut internal: Vec<(usize, usize, usize)> = pairs
            .iter()
            .enumerate()
            .map(|(k, &(p, q))| {
                let (ip, iq, _) = self.internal_pair(p, q);
                (ip, iq, k)
            })
            .collect();
        internal.sort_unstable();
        let n = self.n;
        let blocks: Vec<Vec<(f64, f64)>> = internal
            .par_chunks(BLOCK)
            .map_init(
                || vec![0.0; n * BLOCK],
                |buf, chunk| {
                    let pq: Vec<(usize, usize)> = chunk.iter().map(|&(p, q, _)| (p, q)).collect();
                    self.forms_block(&pq, buf)
                },
            )
            .collect();
        let mut out = vec![(0.0, 0.0); pairs.len()];
        for (chunk, values) in internal.chunks(BLOCK).zip(blocks) {
            for (&(_, _, k), value) in chunk.iter().zip(values) {
                out[k] = value;
            }
        }
        Ok(out)
    }

    /// Per-node column data of `S^{-1}`: for every node `i` (original
    /// order) returns `(S^{-1})_ii` and `(S^{-1} D S^{-1})_ii`, using
    /// `e_i = (e_i - d/||d||_1) + d/||d||_1` and `S^{-1} d = 1`.
    pub fn inverse_diagonals(&self) -> Vec<(f64, f64)> {
        let n = self.n;
        let shift = 1.0 / self.volume;
        let d = self.graph.degrees();
        let nodes: Vec<usize> = (0..n).collect();
        let blocks: Vec<Vec<(f64, f64)>> = nodes
            .par_chunks(BLOCK)
            .map_init(
                || vec![0.0; n * BLOCK],
                |buf, chunk| {
                    let cols = chunk.len();
                    let buf = &mut buf[..n * cols];
                    for r in 0..n {
                        for c in 0..cols {
                            buf[r * cols + c] = -d[r] * shift;
                        }
                    }
                    for (c, &i) in chunk.iter().enumerate() {
                        buf[i * cols + c] += 1.0;
                    }
                    self.solve_block(buf, cols, 0);
                    for x in buf.iter_mut() {
                        *x += shift;
                    }
                    chunk
                        .iter()
                        .enumerate()
                        .map(|(c, &i)| (buf[i * cols + c], self.weighted_square_sum(buf, cols, c)))
                        .collect()
                },
            )
            .collect();
        let internal: Vec<(f64, f64)> = blocks.into_iter().flatten().collect();
        (0..n)
            .map(|old| internal[self.perm.new_index(old)])
            .collect()
    }

    /// `S^{-1} 1` in original order.
    pub fn inverse_times_ones(&self) -> Vec<f64> {
        let n = self.n;
        let scale = n as f64 / self.volume;
        let mut buf: Vec<f64> = self
            .graph
            .degrees()
            .iter()
            .map(|d| 1.0 - scale * d)
            .collect();
        self.solve_block(&mut buf, 1, 0);
        (0..n)
            .map(|old| buf[self.perm.new_index(old)] + scale)
            .collect()
    }

    /// `sum_i d_i x_i^2` for a vector in original order.
    pub fn degree_weighted_norm(&self, x: &[f64]) -> f64 {
        let mut internal = vec![0.0; self.n];
        for (old, &xi) in x.iter().enumerate() {
            internal[self.perm.new_index(old)] = xi;
        }
        self.weighted_square_sum(&internal, 1, 0)
    }

    /// `w^T S^{-1} D S^{-1} D S^{-1} w`, from two bordered solves.
    pub fn third_order_form(&self, p: usize, q: usize) -> Result<f64> {
        self.check_pair(p, q)?;
        let (ip, iq, _) = self.internal_pair(p, q);
        let mut x = vec![0.0; self.n];
        x[ip] = 1.0;
        x[iq] = -1.0;
        self.solve_block(&mut x, 1, ip);
        let dx: Vec<f64> = x
            .iter()
            .zip(self.graph.degrees())
            .map(|(xi, di)| xi * di)
            .collect();
        let mut y = dx.clone();
        self.solve_block(&mut y, 1, 0);
        Ok(dx.iter().zip(&y).map(|(a, b)| a * b).sum())
    }

    /// Banded factor of `L + r D` (cached per `r`).
    fn shifted_factor(&self, r: f64) -> Result<Arc<BandFactor>> {
        if r <= 0.0 || !r.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "shift r = {r} must be positive"
            )));
        }
        let key = r.to_bits();
        if let Some(f) = self.shifted.lock().expect("cache lock").get(&key) {
            return Ok(Arc::clone(f));
        }
        let matrix = band_of_laplacian(&self.graph, self.n, self.bandwidth, r);
        let factor = Arc::new(BandFactor::factorize(matrix, None, false)?);
        self.shifted
            .lock()
            .expect("cache lock")
            .entry(key)
            .or_insert_with(|| Arc::clone(&factor));
        Ok(factor)
    }

    /// `(w^T S_r^{-1} w, w^T S_r^{-1} D S_r^{-1} w)` with `S_r = S + r D`.
    ///
    /// `(L + r D) 1 = r d` gives `S_r^{-1} w = (L + r D)^{-1} w` for every
    /// zero-sum `w`, so only the banded `L + r D` is factored.
    pub fn regularized_forms(&self, p: usize, q: usize, r: f64) -> Result<(f64, f64)> {
        self.check_pair(p, q)?;
        let factor = self.shifted_factor(r)?;
        let (ip, iq, _) = self.internal_pair(p, q);
        let mut x = vec![0.0; self.n];
        x[ip] = 1.0;
        x[iq] = -1.0;
        factor.solve_transpose(&mut x, 1, ip);
        factor.solve(&mut x, 1);
        Ok((x[ip] - x[iq], self.weighted_square_sum(&x, 1, 0)))
    }

    /// Dense `S` in original order (small graphs; used for residual checks).
    pub fn dense_modified_laplacian(&self) -> DMatrix<f64> {
        let s = oracle::modified_laplacian(&self.graph);
        let n = self.n;
        DMatrix::from_fn(n, n, |i, j| {
            s[(self.perm.new_index(i), self.perm.new_index(j))]
        })
    }
}
