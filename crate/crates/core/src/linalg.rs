//! Complex vectors and small dense matrices used by the receiver chain.
//!
//! Antenna counts are tiny (tens at most), so everything here is a plain
//! column-major `Vec<Complex64>` with no blocking or SIMD.  The one
//! non-trivial routine is [`principal_eigenpair`], the power iteration that
//! the receiver uses to recover signal directions from sample covariances.

use crate::{Error, Result, C64};

/// Column-major complex matrix.  For sample blocks, rows index antennas and
/// columns index snapshots.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    /// Builds a matrix from column slices; all columns must share one length.
    pub fn from_cols(cols: &[Vec<C64>]) -> Self {
        let rows = cols.first().map_or(0, Vec::len);
        let mut m = CMat::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), rows, "ragged columns");
            m.col_mut(j).copy_from_slice(c);
        }
        m
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn col(&self, j: usize) -> &[C64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [C64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[j * self.rows + i]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[j * self.rows + i] = v;
    }

    /// Copies a contiguous range of columns into a new matrix.
    pub fn col_range(&self, start: usize, end: usize) -> CMat {
        assert!(start <= end && end <= self.cols);
        CMat {
            rows: self.rows,
            cols: end - start,
            data: self.data[start * self.rows..end * self.rows].to_vec(),
        }
    }

    /// Concatenates matrices with equal row counts along the column axis.
    pub fn hcat(parts: &[&CMat]) -> CMat {
        let rows = parts.first().map_or(0, |m| m.rows);
        let cols = parts.iter().map(|m| m.cols).sum();
        let mut data = Vec::with_capacity(rows * cols);
        for m in parts {
            assert_eq!(m.rows, rows, "row count mismatch in hcat");
            data.extend_from_slice(&m.data);
        }
        CMat { rows, cols, data }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// self += coef * x * yᴴ
    pub fn add_dyad(&mut self, coef: C64, x: &[C64], y: &[C64]) {
        assert_eq!(x.len(), self.rows);
        assert_eq!(y.len(), self.cols);
        for (j, yv) in y.iter().enumerate() {
            let yj = yv.conj() * coef;
            let col = self.col_mut(j);
            for (ci, xi) in col.iter_mut().zip(x) {
                *ci += xi * yj;
            }
        }
    }

    /// Matrix-vector product self * v.
    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.cols);
        let mut out = vec![C64::new(0.0, 0.0); self.rows];
        for (j, &vj) in v.iter().enumerate() {
            for (oi, mij) in out.iter_mut().zip(self.col(j)) {
                *oi += mij * vj;
            }
        }
        out
    }

    pub fn matmul(&self, rhs: &CMat) -> CMat {
        assert_eq!(self.cols, rhs.rows);
        let mut out = CMat::zeros(self.rows, rhs.cols);
        for j in 0..rhs.cols {
            let col = self.matvec(rhs.col(j));
            out.col_mut(j).copy_from_slice(&col);
        }
        out
    }

    /// Conjugate transpose.
    pub fn hermitian_transpose(&self) -> CMat {
        let mut out = CMat::zeros(self.cols, self.rows);
        for j in 0..self.cols {
            for i in 0..self.rows {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }
}

/// Hermitian inner product Σ conj(x_i)·y_i.
pub fn inner(x: &[C64], y: &[C64]) -> C64 {
    assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm_sqr(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum()
}

pub fn norm(x: &[C64]) -> f64 {
    norm_sqr(x).sqrt()
}

pub fn scale(x: &[C64], s: C64) -> Vec<C64> {
    x.iter().map(|z| z * s).collect()
}

/// y − a·(aᴴy): projection of `y` onto the orthogonal complement of the unit
/// vector `a`.
pub fn project_out(a: &[C64], y: &[C64]) -> Vec<C64> {
    let coef = inner(a, y);
    y.iter().zip(a).map(|(yi, ai)| yi - ai * coef).collect()
}

/// (1/M)·Y·Yᴴ over the columns of `block`.
pub fn sample_covariance(block: &CMat) -> CMat {
    let n = block.rows();
    let m = block.cols();
    assert!(m > 0, "covariance of an empty block");
    let mut r = CMat::zeros(n, n);
    let w = C64::new(1.0 / m as f64, 0.0);
    for j in 0..m {
        let y = block.col(j).to_vec();
        r.add_dyad(w, &y, &y);
    }
    r
}

/// Real part of the quadratic form yᴴ·M·y.
pub fn quad_form_re(m: &CMat, y: &[C64]) -> f64 {
    inner(y, &m.matvec(y)).re
}

/// Dominant eigenpair of a Hermitian PSD matrix by power iteration.
///
/// The start vector is deterministic: e_k + 1e-3·e_{k+1} for the first basis
/// index k whose image under the matrix is nonnegligible, so repeated runs on
/// the same input give bit-identical output.  Convergence is declared when
/// the eigen-residual ‖Rv − λv‖ drops below `tol`·λ; hitting `max_iter`
/// first reports the achieved relative residual as an error.  The returned
/// vector has unit norm and its largest-magnitude entry is rotated to the
/// positive real axis, which pins the free global phase.
pub fn principal_eigenpair(r: &CMat, tol: f64, max_iter: usize) -> Result<(f64, Vec<C64>)> {
    let n = r.rows();
    assert_eq!(r.cols(), n, "matrix must be square");
    let fro = r.frobenius_norm();
    if fro == 0.0 || n == 0 {
        return Err(Error::Receiver(
            "principal direction of a zero matrix".into(),
        ));
    }

    let mut v = start_vector(r, fro)
        .ok_or_else(|| Error::Receiver("no usable start vector for power iteration".into()))?;
    let mut rel_residual = f64::INFINITY;
    for _ in 0..max_iter {
        let w = r.matvec(&v);
        let wn = norm(&w);
        if wn == 0.0 {
            return Err(Error::PowerIteration {
                residual: rel_residual,
            });
        }
        v = scale(&w, C64::new(1.0 / wn, 0.0));
        let rv = r.matvec(&v);
        let lambda = inner(&v, &rv).re;
        let residual: f64 = rv
            .iter()
            .zip(&v)
            .map(|(ri, vi)| (ri - vi * lambda).norm_sqr())
            .sum::<f64>()
            .sqrt();
        rel_residual = residual / lambda.max(f64::MIN_POSITIVE);
        if residual <= tol * lambda.max(f64::MIN_POSITIVE) {
            return Ok((lambda.max(0.0), fix_phase(v)));
        }
    }
    Err(Error::PowerIteration {
        residual: rel_residual,
    })
}

/// First deterministic basis start with a nonnegligible image under `r`.
fn start_vector(r: &CMat, fro: f64) -> Option<Vec<C64>> {
    let n = r.rows();
    for k in 0..n {
        let mut v = vec![C64::new(0.0, 0.0); n];
        v[k] = C64::new(1.0, 0.0);
        v[(k + 1) % n] += C64::new(1e-3, 0.0);
        if norm(&r.matvec(&v)) > 1e-14 * fro {
            let vn = norm(&v);
            return Some(scale(&v, C64::new(1.0 / vn, 0.0)));
        }
    }
    None
}

/// Rotates the global phase so the largest-magnitude entry is real positive;
/// ties pick the lowest index.
fn fix_phase(v: Vec<C64>) -> Vec<C64> {
    let mut best = 0;
    for (i, z) in v.iter().enumerate() {
        if z.norm_sqr() > v[best].norm_sqr() + 0.0 {
            best = i;
        }
    }
    let m = v[best].norm();
    if m == 0.0 {
        return v;
    }
    let rot = v[best].conj() / m;
    scale(&v, rot)
}
