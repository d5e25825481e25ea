//! Dense matrix storage.
//!
//! [`SymmetricMatrix`] keeps the full `n × n` row-major array so that matvecs
//! stream through contiguous rows; every mutator writes both mirrored entries,
//! which keeps `a[i][j] == a[j][i]` exact.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};

/// Symmetric input entries may differ by this much (relative) before they are
/// rejected as non-symmetric.
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymmetricMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// The all-ones matrix `J_n`.
    pub fn ones(n: usize) -> Self {
        Self { n, data: vec![1.0; n * n] }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * n + i] = d;
        }
        m
    }

    /// Builds the matrix from `f(i, j)` evaluated on the upper triangle (`i <= j`).
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                m.data[i * n + j] = v;
                m.data[j * n + i] = v;
            }
        }
        m
    }

    /// Accepts a full row-major array. Mirrored entries must agree to
    /// [`SYMMETRY_TOL`] relative; the upper triangle wins.
    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, found: data.len() });
        }
        let mut m = Self { n, data };
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (m.data[i * n + j], m.data[j * n + i]);
                let scale = a.abs().max(b.abs()).max(1.0);
                if (a - b).abs() > SYMMETRY_TOL * scale || a.is_nan() != b.is_nan() {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
                m.data[j * n + i] = a;
            }
        }
        Ok(m)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Sets both `(i, j)` and `(j, i)`.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|x| x * x).sum())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, x| acc.max(x.abs()))
    }

    /// Entrywise ℓ1 norm `Σ |a_ij|`.
    pub fn entrywise_l1(&self) -> f64 {
        self.data.iter().map(|x| x.abs()).sum()
    }

    /// Fails on the first negative (or NaN) diagonal entry.
    pub fn check_nonnegative_diagonal(&self) -> Result<()> {
        for i in 0..self.n {
            let d = self.get(i, i);
            if !(d >= 0.0) {
                return Err(Error::NegativeDiagonal { index: i, value: d });
            }
        }
        Ok(())
    }

    /// `out = self · x`.
    pub fn matvec_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(out.len(), self.n);
        for (i, o) in out.iter_mut().enumerate() {
            *o = dot(self.row(i), x);
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.matvec_into(x, &mut out);
        out
    }

    /// `xᵀ · self · x`.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        (0..self.n).map(|i| x[i] * dot(self.row(i), x)).sum()
    }

    /// Frobenius inner product `⟨self, other⟩`.
    pub fn inner(&self, other: &SymmetricMatrix) -> f64 {
        debug_assert_eq!(self.n, other.n);
        dot(&self.data, &other.data)
    }

    pub fn add_scaled_diagonal(&mut self, d: &[f64], scale: f64) {
        for (i, &di) in d.iter().enumerate() {
            self.data[i * self.n + i] += scale * di;
        }
    }

    /// `diag(y) − self`.
    pub fn diagonal_minus(&self, y: &[f64]) -> SymmetricMatrix {
        let mut out = self.clone();
        for v in out.data.iter_mut() {
            *v = -*v;
        }
        out.add_scaled_diagonal(y, 1.0);
        out
    }

    /// `self += scale · v vᵀ`.
    pub fn rank_one_update(&mut self, v: &[f64], scale: f64) {
        let n = self.n;
        for i in 0..n {
            let si = scale * v[i];
            let row = &mut self.data[i * n..(i + 1) * n];
            for (r, &vj) in row.iter_mut().zip(v) {
                *r += si * vj;
            }
        }
    }

    pub fn scale(&mut self, s: f64) {
        for v in self.data.iter_mut() {
            *v *= s;
        }
    }

    /// `(I − P) self (I − P)` where `P = Σ bᵢ bᵢᵀ` for the orthonormal columns `basis`.
    pub fn project_out(&self, basis: &[Vec<f64>]) -> SymmetricMatrix {
        let mut out = self.clone();
        for b in basis {
            out = out.deflate(b);
        }
        out
    }

    /// `(I − vvᵀ) self (I − vvᵀ)` for unit `v`.
    pub fn deflate(&self, v: &[f64]) -> SymmetricMatrix {
        let n = self.n;
        let sv = self.matvec(v);
        let c = dot(v, &sv);
        // (I−vvᵀ)S(I−vvᵀ) = S − v(Sv)ᵀ − (Sv)vᵀ + c vvᵀ
        SymmetricMatrix::from_fn(n, |i, j| {
            self.get(i, j) - v[i] * sv[j] - sv[i] * v[j] + c * v[i] * v[j]
        })
    }
}

/// General row-major `rows × cols` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, found: data.len() });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch { expected: cols, found: r.len() });
            }
            data.extend_from_slice(r);
        }
        Ok(Self { rows: rows.len(), cols, data })
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

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch { expected: self.cols, found: other.rows });
        }
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `selfᵀ · self`, symmetric by construction.
    pub fn gram(&self) -> SymmetricMatrix {
        let n = self.cols;
        let mut g = SymmetricMatrix::zeros(n);
        for r in 0..self.rows {
            let row = self.row(r);
            for i in 0..n {
                let ri = row[i];
                if ri == 0.0 {
                    continue;
                }
                for j in i..n {
                    g.data[i * n + j] += ri * row[j];
                }
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                g.data[j * n + i] = g.data[i * n + j];
            }
        }
        g
    }

    /// Returns the matrix as a [`SymmetricMatrix`] if it is square and
    /// symmetric to `tol` (absolute, scaled by the largest entry).
    pub fn to_symmetric(&self, tol: f64) -> Option<SymmetricMatrix> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let scale = self.data.iter().fold(1.0f64, |a, x| a.max(x.abs()));
        for i in 0..n {
            for j in (i + 1)..n {
                if (self.get(i, j) - self.get(j, i)).abs() > tol * scale {
                    return None;
                }
            }
        }
        Some(SymmetricMatrix::from_fn(n, |i, j| 0.5 * (self.get(i, j) + self.get(j, i))))
    }
}

impl From<&SymmetricMatrix> for DenseMatrix {
    fn from(m: &SymmetricMatrix) -> Self {
        Self { rows: m.n, cols: m.n, data: m.data.clone() }
    }
}

/// Square matrix with orthonormal rows.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthogonalBasis {
    matrix: DenseMatrix,
}

impl OrthogonalBasis {
    /// Wraps `matrix` after checking `‖OOᵀ − I‖_max ≤ tol`.
    pub fn new(matrix: DenseMatrix, tol: f64) -> Result<Self> {
        if matrix.rows() != matrix.cols() {
            return Err(Error::InvalidDimension("orthogonal basis must be square"));
        }
        let basis = Self { matrix };
        if basis.orthogonality_defect() > tol {
            return Err(Error::InvalidParameter("matrix is not orthogonal"));
        }
        Ok(basis)
    }

    pub fn n(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    /// `O · x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.matrix.matvec(x)
    }

    /// `Oᵀ · x`, the inverse transform.
    pub fn apply_transpose(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n();
        let mut out = vec![0.0; n];
        for (k, &xk) in x.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.matrix.row(k)) {
                *o += a * xk;
            }
        }
        out
    }

    /// `‖OOᵀ − I‖_max`.
    pub fn orthogonality_defect(&self) -> f64 {
        let n = self.n();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let target = if i == j { 1.0 } else { 0.0 };
                let v = dot(self.matrix.row(i), self.matrix.row(j));
                worst = worst.max((v - target).abs());
            }
        }
        worst
    }
}

/// Orthonormal DCT-II matrix, `O[k][j] = c_k cos(π(2j+1)k / 2n)`.
pub fn dct_basis(n: usize) -> Result<OrthogonalBasis> {
    if n == 0 {
        return Err(Error::InvalidDimension("DCT basis needs n >= 1"));
    }
    let nf = n as f64;
    let c0 = libm::sqrt(1.0 / nf);
    let ck = libm::sqrt(2.0 / nf);
    let matrix = DenseMatrix::from_fn(n, n, |k, j| {
        if k == 0 {
            c0
        } else {
            ck * libm::cos(PI * (2 * j + 1) as f64 * k as f64 / (2.0 * nf))
        }
    });
    Ok(OrthogonalBasis { matrix })
}

/// `D^{-1/2} M D^{-1/2}` with `D = diag(w)`, computed entrywise as
/// `M_ij / √(w_i w_j)`.
pub fn scaled_matrix(m: &SymmetricMatrix, w: &[f64]) -> Result<SymmetricMatrix> {
    if w.len() != m.n() {
        return Err(Error::DimensionMismatch { expected: m.n(), found: w.len() });
    }
    for (index, &value) in w.iter().enumerate() {
        if !(value > 0.0) {
            return Err(Error::NonPositiveWeight { index, value });
        }
    }
    Ok(SymmetricMatrix::from_fn(m.n(), |i, j| m.get(i, j) / libm::sqrt(w[i] * w[j])))
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let k = 4 * c;
        acc[0] += a[k] * b[k];
        acc[1] += a[k + 1] * b[k + 1];
        acc[2] += a[k + 2] * b[k + 2];
        acc[3] += a[k + 3] * b[k + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for k in 4 * chunks..a.len() {
        s += a[k] * b[k];
    }
    s
}

#[inline]
pub(crate) fn norm2(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaled_matrix_hand_example() {
        let m = SymmetricMatrix::from_row_major(2, vec![4.0, 2.0, 2.0, 4.0]).unwrap();
        let s = scaled_matrix(&m, &[4.0, 1.0]).unwrap();
        assert_eq!(s.as_slice(), &[1.0, 1.0, 1.0, 4.0]);
    }

    #[test]
    fn scaled_matrix_identity_weights() {
        let m = SymmetricMatrix::identity(5);
        assert_eq!(scaled_matrix(&m, &[1.0; 5]).unwrap(), m);
    }

    #[test]
    fn scaled_matrix_rejects_nonpositive_weight() {
        let m = SymmetricMatrix::identity(3);
        let err = scaled_matrix(&m, &[1.0, 0.0, 2.0]).unwrap_err();
        assert!(matches!(err, Error::NonPositiveWeight { index: 1, .. }));
        assert!(scaled_matrix(&m, &[1.0, -1.0, 2.0]).is_err());
        assert!(scaled_matrix(&m, &[1.0, f64::NAN, 2.0]).is_err());
    }

    #[test]
    fn dct_small_cases() {
        assert!(dct_basis(0).is_err());
        let o1 = dct_basis(1).unwrap();
        assert_eq!(o1.matrix().as_slice(), &[1.0]);
        let o2 = dct_basis(2).unwrap();
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let m = o2.matrix();
        assert!((m.get(0, 0) - h).abs() < 1e-15 && (m.get(0, 1) - h).abs() < 1e-15);
        assert!((m.get(1, 0) - h).abs() < 1e-15);
        assert!((m.get(1, 1) + h).abs() < 1e-15);
    }

    #[test]
    fn dct_maps_constant_to_dc() {
        let n = 16;
        let o = dct_basis(n).unwrap();
        let y = o.apply(&vec![1.0; n]);
        assert!((y[0] - libm::sqrt(n as f64)).abs() < 1e-10);
        assert!(y[1..].iter().all(|v| v.abs() < 1e-10));
        let back = o.apply_transpose(&y);
        assert!(back.iter().all(|v| (v - 1.0).abs() < 1e-10));
    }

    #[test]
    fn from_row_major_rejects_asymmetry() {
        let err = SymmetricMatrix::from_row_major(2, vec![1.0, 2.0, 2.5, 1.0]).unwrap_err();
        assert!(matches!(err, Error::NotSymmetric { row: 0, col: 1 }));
        assert!(SymmetricMatrix::from_row_major(2, vec![1.0; 3]).is_err());
    }

    #[test]
    fn deflate_removes_direction() {
        let m = SymmetricMatrix::from_fn(3, |i, j| (i + j + 1) as f64);
        let s = core::f64::consts::FRAC_1_SQRT_2;
        let v = [s, s, 0.0];
        let d = m.deflate(&v);
        let dv = d.matvec(&v);
        assert!(dv.iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn gram_matches_transpose_product() {
        let a = DenseMatrix::from_fn(4, 3, |i, j| (i as f64) - 0.5 * j as f64 + 0.25);
        let g = a.gram();
        let g2 = a.transpose().matmul(&a).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((g.get(i, j) - g2.get(i, j)).abs() < 1e-12);
            }
        }
    }
}
