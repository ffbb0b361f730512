//! Upper-triangular banded Cholesky factors and multi-column triangular
//! solves on them.

use crate::error::{Error, Result};

/// Upper-triangular factor `R` with `width - 1` superdiagonals, stored by
/// rows: `data[i * width + k] = R[i][i + k]`.
#[derive(Debug, Clone)]
pub struct BandFactor {
    order: usize,
    width: usize,
    data: Vec<f64>,
    inv_diag: Vec<f64>,
}

/// Symmetric banded matrix awaiting factorization, same layout as
/// [`BandFactor`] (upper triangle by rows).
#[derive(Debug, Clone)]
pub(crate) struct BandMatrix {
    pub order: usize,
    pub width: usize,
    pub data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(order: usize, width: usize) -> Self {
        Self {
            order,
            width,
            data: vec![0.0; order * width],
        }
    }

    /// Sets entry `(i, j)` with `i <= j < i + width`.
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        debug_assert!(i <= j && j - i < self.width && j < self.order);
        self.data[i * self.width + (j - i)] = value;
    }
}

/// One step of Neumaier (improved Kahan) summation.
#[inline]
pub fn neumaier_add(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}

/// Relative pivot threshold: a pivot at or below `PIVOT_TOL * max diag`
/// aborts the factorization.
pub const PIVOT_TOL: f64 = 1e-14;

impl BandFactor {
    /// Right-looking band Cholesky `A = R^T R`.
    ///
    /// With `tail = Some(c)`, `c` holds the off-band coupling column of one
    /// extra trailing node; it is eliminated alongside and returns as the
    /// last column of the factor of the bordered matrix. With `gth` every
    /// pivot is recomputed as minus the sum of the remaining off-diagonals of
    /// its row (tail included), which is exact for Laplacian Schur
    /// complements and free of cancellation; diagonal updates are skipped.
    pub(crate) fn factorize(
        matrix: BandMatrix,
        mut tail: Option<&mut [f64]>,
        gth: bool,
    ) -> Result<Self> {
        let BandMatrix {
            order,
            width: w,
            mut data,
        } = matrix;
        debug_assert!(!gth || tail.is_some());
        let threshold = PIVOT_TOL * data.chunks(w).map(|r| r[0]).fold(0.0, f64::max);
        let mut inv_diag = vec![0.0; order];
        for k in 0..order {
            let row = k * w;
            let m = (w - 1).min(order - 1 - k);
            let pivot = if gth {
                let mut s = 0.0;
                for j in 1..=m {
                    s -= data[row + j];
                }
                if let Some(t) = tail.as_deref() {
                    s -= t[k];
                }
                s
            } else {
                data[row]
            };
            if pivot.is_nan() || pivot <= threshold {
                return Err(Error::NumericalBreakdown {
                    step: k,
                    pivot,
                    threshold,
                });
            }
            let r = pivot.sqrt();
            data[row] = r;
            inv_diag[k] = 1.0 / r;
            for j in 1..=m {
                data[row + j] /= r;
            }
            if let Some(t) = tail.as_deref_mut() {
                t[k] /= r;
            }
            for i in 1..=m {
                let rki = data[row + i];
                if rki == 0.0 {
                    continue;
                }
                let target = (k + i) * w;
                let first = if gth { i + 1 } else { i };
                for j in first..=m {
                    data[target + (j - i)] -= rki * data[row + j];
                }
                if let Some(t) = tail.as_deref_mut() {
                    t[k + i] -= rki * t[k];
                }
            }
        }
        Ok(Self {
            order,
            width: w,
            data,
            inv_diag,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of stored diagonals (main diagonal included).
    pub fn width(&self) -> usize {
        self.width
    }

    /// Number of stored `f64` entries, `order * width`.
    pub fn storage_len(&self) -> usize {
        self.data.len()
    }

    /// `R[i][j]`; zero outside the band or below the diagonal.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j < i || j - i >= self.width || j >= self.order {
            0.0
        } else {
            self.data[i * self.width + (j - i)]
        }
    }

    /// Solves `R^T Y = B` in place for `cols` interleaved columns
    /// (`b[row * cols + c]`), assuming rows before `start` are zero.
    pub fn solve_transpose(&self, b: &mut [f64], cols: usize, start: usize) {
        let w = self.width;
        for i in start..self.order {
            let lo = i.saturating_sub(w - 1).max(start);
            let bi = i * cols;
            for k in lo..i {
                let r = self.data[k * w + (i - k)];
                if r == 0.0 {
                    continue;
                }
                let bk = k * cols;
                for c in 0..cols {
                    b[bi + c] -= r * b[bk + c];
                }
            }
            let inv = self.inv_diag[i];
            for c in 0..cols {
                b[bi + c] *= inv;
            }
        }
    }

    /// [`solve_transpose`](Self::solve_transpose) that also accumulates
    /// `dots[c] += z[i] * y[i][c]` over rows `start..order`, in row order.
    pub fn solve_transpose_dot(
        &self,
        b: &mut [f64],
        cols: usize,
        start: usize,
        z: &[f64],
        dots: &mut [f64],
    ) {
        if cols == 8 {
            self.forward_kernel(b, 8, start, z, dots);
        } else {
            self.forward_kernel(b, cols, start, z, dots);
        }
    }

    #[inline(always)]
    #[allow(clippy::needless_range_loop)]
    fn forward_kernel(
        &self,
        b: &mut [f64],
        cols: usize,
        start: usize,
        z: &[f64],
        dots: &mut [f64],
    ) {
        let w = self.width;
        let dots = &mut dots[..cols];
        for i in start..self.order {
            let lo = i.saturating_sub(w - 1).max(start);
            let (done, rest) = b.split_at_mut(i * cols);
            let row = &mut rest[..cols];
            for k in lo..i {
                let r = self.data[k * w + (i - k)];
                if r == 0.0 {
                    continue;
                }
                let src = &done[k * cols..k * cols + cols];
                for c in 0..cols {
                    row[c] -= r * src[c];
                }
            }
            let inv = self.inv_diag[i];
            let zi = z[i];
            for c in 0..cols {
                row[c] *= inv;
                dots[c] += zi * row[c];
            }
        }
    }

    /// [`solve`](Self::solve) that also accumulates `sums[c] += d[i] x[i][c]^2`
    /// in descending row order; `comp` switches on Neumaier compensation.
    pub fn solve_weighted_square(
        &self,
        b: &mut [f64],
        cols: usize,
        d: &[f64],
        sums: &mut [f64],
        comp: Option<&mut [f64]>,
    ) {
        if cols == 8 {
            self.backward_kernel(b, 8, d, sums, comp);
        } else {
            self.backward_kernel(b, cols, d, sums, comp);
        }
    }

    #[inline(always)]
    fn backward_kernel(
        &self,
        b: &mut [f64],
        cols: usize,
        d: &[f64],
        sums: &mut [f64],
        mut comp: Option<&mut [f64]>,
    ) {
        let w = self.width;
        let sums = &mut sums[..cols];
        for i in (0..self.order).rev() {
            let hi = (w - 1).min(self.order - 1 - i);
            let (head, below) = b.split_at_mut((i + 1) * cols);
            let row = &mut head[i * cols..];
            for j in 1..=hi {
                let r = self.data[i * w + j];
                if r == 0.0 {
                    continue;
                }
                let src = &below[(j - 1) * cols..j * cols];
                for c in 0..cols {
                    row[c] -= r * src[c];
                }
            }
            let inv = self.inv_diag[i];
            let di = d[i];
            match comp.as_deref_mut() {
                None => {
                    for c in 0..cols {
                        row[c] *= inv;
                        sums[c] += di * row[c] * row[c];
                    }
                }
                Some(comp) => {
                    for c in 0..cols {
                        row[c] *= inv;
                        neumaier_add(&mut sums[c], &mut comp[c], di * row[c] * row[c]);
                    }
                }
            }
        }
    }

    /// Solves `R X = B` in place for `cols` interleaved columns.
    pub fn solve(&self, b: &mut [f64], cols: usize) {
        let w = self.width;
        for i in (0..self.order).rev() {
            let hi = (w - 1).min(self.order - 1 - i);
            let bi = i * cols;
            for j in 1..=hi {
                let r = self.data[i * w + j];
                if r == 0.0 {
                    continue;
                }
                let bj = (i + j) * cols;
                for c in 0..cols {
                    b[bi + c] -= r * b[bj + c];
                }
            }
            let inv = self.inv_diag[i];
            for c in 0..cols {
                b[bi + c] *= inv;
            }
        }
    }
}
