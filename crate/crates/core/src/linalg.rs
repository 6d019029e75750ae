//! Dense row-major matrices and a one-sided Jacobi SVD.
//!
//! The SVD orthogonalises the shorter dimension's vectors by plane rotations
//! (Hestenes' method). It is slower than bidiagonalisation-based routines but
//! has high relative accuracy, so right vectors stay orthonormal even for
//! singular values many orders of magnitude below the largest one.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Panics if `data.len() != rows * cols`.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length");
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|x| x * x).sum())
    }

    /// `self += weight * left * right^T`.
    pub fn add_outer(&mut self, weight: f64, left: &[f64], right: &[f64]) {
        assert_eq!(left.len(), self.rows);
        assert_eq!(right.len(), self.cols);
        for (i, &u) in left.iter().enumerate() {
            let w = weight * u;
            for (x, &v) in self.row_mut(i).iter_mut().zip(right) {
                *x += w * v;
            }
        }
    }

    /// Sub-matrix made of columns `first..first + count`.
    pub fn columns(&self, first: usize, count: usize) -> Self {
        Self::from_fn(self.rows, count, |i, j| self[(i, first + j)])
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Thin SVD `A = sum_i s_i u_i v_i^T` with `min(rows, cols)` terms, sorted
/// by non-increasing singular value. Vectors belonging to exactly zero
/// singular values are zero.
#[derive(Debug, Clone)]
pub struct Svd {
    pub values: Vec<f64>,
    pub left: Vec<Vec<f64>>,
    pub right: Vec<Vec<f64>>,
}

const MAX_SWEEPS: usize = 80;

pub fn thin_svd(a: &Matrix) -> Result<Svd> {
    let (m, n) = (a.rows(), a.cols());
    if m == 0 || n == 0 {
        return Ok(Svd {
            values: Vec::new(),
            left: Vec::new(),
            right: Vec::new(),
        });
    }
    // Rotate the vectors of the shorter dimension. With rows <= cols the rows
    // of A are orthogonalised and the accumulated rotation is U; otherwise
    // the columns are and the rotation is V.
    let by_rows = m <= n;
    let (k, len, mut work) = if by_rows {
        (m, n, a.as_slice().to_vec())
    } else {
        (n, m, a.transpose().data)
    };
    let mut rot = vec![0.0; k * k];
    for i in 0..k {
        rot[i * k + i] = 1.0;
    }
    if !jacobi_sweeps(&mut work, k, len, &mut rot) {
        return Err(Error::SvdNoConvergence {
            rows: m,
            cols: n,
            sweeps: MAX_SWEEPS,
        });
    }

    let norms: Vec<f64> = work.chunks_exact(len).map(|w| libm::sqrt(dot(w, w))).collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));

    let mut values = Vec::with_capacity(k);
    let mut short_vecs = Vec::with_capacity(k);
    let mut long_vecs = Vec::with_capacity(k);
    for &i in &order {
        let s = norms[i];
        values.push(s);
        short_vecs.push(rot[i * k..(i + 1) * k].to_vec());
        let w = &work[i * len..(i + 1) * len];
        long_vecs.push(if s > 0.0 { w.iter().map(|x| x / s).collect() } else { vec![0.0; len] });
    }
    let (left, right) = if by_rows { (short_vecs, long_vecs) } else { (long_vecs, short_vecs) };
    Ok(Svd { values, left, right })
}

/// Cyclic one-sided Jacobi on `k` contiguous vectors of length `len`.
/// Returns `false` if the sweep budget runs out.
fn jacobi_sweeps(work: &mut [f64], k: usize, len: usize, rot: &mut [f64]) -> bool {
    let tol = f64::EPSILON * libm::sqrt(len as f64);
    // Vectors whose squared norm falls below this are rounding residue of a
    // rank-deficient input; rotating them only chases noise.
    let total: f64 = work.iter().map(|x| x * x).sum();
    let negligible = f64::EPSILON * f64::EPSILON * total;
    let mut norms = vec![0.0; k];
    for _ in 0..MAX_SWEEPS {
        for (i, w) in work.chunks_exact(len).enumerate() {
            norms[i] = dot(w, w);
        }
        let mut rotated = false;
        for p in 0..k {
            for q in p + 1..k {
                let (alpha, beta) = (norms[p], norms[q]);
                if alpha <= negligible || beta <= negligible {
                    continue;
                }
                let (head, tail) = work.split_at_mut(q * len);
                let wp = &mut head[p * len..(p + 1) * len];
                let wq = &mut tail[..len];
                let gamma = dot(wp, wq);
                if libm::fabs(gamma) <= tol * libm::sqrt(alpha) * libm::sqrt(beta) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = libm::copysign(1.0, zeta) / (libm::fabs(zeta) + libm::sqrt(1.0 + zeta * zeta));
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = c * t;
                rotate(wp, wq, c, s);
                norms[p] = alpha - t * gamma;
                norms[q] = beta + t * gamma;
                let (rh, rt) = rot.split_at_mut(q * k);
                rotate(&mut rh[p * k..(p + 1) * k], &mut rt[..k], c, s);
            }
        }
        if !rotated {
            return true;
        }
    }
    false
}

#[inline]
fn rotate(x: &mut [f64], y: &mut [f64], c: f64, s: f64) {
    for (a, b) in x.iter_mut().zip(y.iter_mut()) {
        let (xa, yb) = (*a, *b);
        *a = c * xa - s * yb;
        *b = s * xa + c * yb;
    }
}

/// Dot product with four independent accumulators so the loop vectorises.
#[inline]
pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let xs = x.chunks_exact(4);
    let ys = y.chunks_exact(4);
    let tail: f64 = xs.remainder().iter().zip(ys.remainder()).map(|(a, b)| a * b).sum();
    for (a, b) in xs.zip(ys) {
        acc[0] += a[0] * b[0];
        acc[1] += a[1] * b[1];
        acc[2] += a[2] * b[2];
        acc[3] += a[3] * b[3];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reconstruct(svd: &Svd, rows: usize, cols: usize) -> Matrix {
        let mut m = Matrix::zeros(rows, cols);
        for ((s, u), v) in svd.values.iter().zip(&svd.left).zip(&svd.right) {
            m.add_outer(*s, u, v);
        }
        m
    }

    fn lcg_matrix(rows: usize, cols: usize, mut state: u64) -> Matrix {
        Matrix::from_fn(rows, cols, |_, _| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
    }

    #[test]
    fn wide_and_tall_matrices_reconstruct() {
        for &(r, c) in &[(3, 7), (7, 3), (5, 5), (1, 4), (4, 1)] {
            let a = lcg_matrix(r, c, (r * 31 + c) as u64);
            let svd = thin_svd(&a).unwrap();
            assert_eq!(svd.values.len(), r.min(c));
            let err = reconstruct(&svd, r, c).sub(&a).frobenius_norm() / a.frobenius_norm();
            assert!(err < 1e-13, "{r}x{c}: {err}");
            assert!(svd.values.windows(2).all(|w| w[0] >= w[1]));
            for (i, u) in svd.left.iter().enumerate() {
                for (j, v) in svd.left.iter().enumerate() {
                    let d = dot(u, v) - if i == j { 1.0 } else { 0.0 };
                    assert!(d.abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn diagonal_matrix_singular_values() {
        let a = Matrix::from_fn(3, 3, |i, j| if i == j { [2.0, 5.0, 1.0][i] } else { 0.0 });
        let svd = thin_svd(&a).unwrap();
        assert_eq!(svd.values, vec![5.0, 2.0, 1.0]);
    }

    #[test]
    fn zero_matrix_has_zero_vectors() {
        let svd = thin_svd(&Matrix::zeros(2, 3)).unwrap();
        assert_eq!(svd.values, vec![0.0, 0.0]);
        assert!(svd.right.iter().all(|v| v.iter().all(|&x| x == 0.0)));
    }

    #[test]
    fn dot_matches_naive_sum() {
        let x: Vec<f64> = (0..11).map(|i| i as f64).collect();
        let y: Vec<f64> = (0..11).map(|i| (i * i) as f64).collect();
        let naive: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        assert_eq!(dot(&x, &y), naive);
    }
}
