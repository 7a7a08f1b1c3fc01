//! Dense complex-matrix kernel.
//!
//! Every operator in the crate (Choi operators, states, unitaries) is a
//! [`CMatrix`]: row-major, immutable after construction. Composite spaces are
//! described by a list of factor dimensions with the last factor varying
//! fastest, so `kron(a, b)` has `a` as factor 0 and `b` as factor 1.
//!
//! Sums are accumulated serially in a fixed order, so repeated runs are
//! bit-identical.

use std::fmt;
use std::ops::{Add, Index, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Shorthand for the complex scalar type used everywhere.
pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("entry count {got} does not match {rows}x{cols}")]
    BadShape { rows: usize, cols: usize, got: usize },
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("factor {factor} is out of range for {count} factors")]
    FactorOutOfRange { factor: usize, count: usize },
    #[error("side {side} != product of factor dims {product} (offending factor {factor})")]
    FactorDims { side: usize, product: usize, factor: usize },
    #[error("matrix is not Hermitian (asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },
}

/// Numerical tolerances threaded through every check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Absolute threshold below which a value counts as zero.
    pub zero_abs: f64,
    /// Relative threshold for equality checks.
    pub eq_rel: f64,
    /// Relative threshold for positive-semidefiniteness.
    pub psd_rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { zero_abs: 1e-12, eq_rel: 1e-9, psd_rel: 1e-9 }
    }
}

impl Tolerances {
    pub fn is_valid(&self) -> bool {
        self.zero_abs >= 0.0 && self.eq_rel >= 0.0 && self.psd_rel >= 0.0
    }

    /// `|a - b| <= eq_rel * max(1, |a|, |b|)`.
    pub fn close(&self, a: f64, b: f64) -> bool {
        (a - b).abs() <= self.eq_rel * 1f64.max(a.abs()).max(b.abs())
    }
}

/// Dense complex matrix, row-major.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:>9.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.cols + c]
    }
}

impl CMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::BadShape { rows, cols, got: data.len() });
        }
        Ok(CMatrix { rows, cols, data })
    }

    /// Square matrix from a row-major list; the side is inferred.
    pub fn square(data: Vec<C64>) -> Result<Self, LinalgError> {
        let n = (data.len() as f64).sqrt().round() as usize;
        CMatrix::new(n, n, data)
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self, LinalgError> {
        CMatrix::new(rows, cols, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        CMatrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        CMatrix::from_fn(n, n, |r, c| if r == c { ONE } else { ZERO })
    }

    pub fn diag(entries: &[C64]) -> Self {
        let n = entries.len();
        CMatrix::from_fn(n, n, |r, c| if r == c { entries[r] } else { ZERO })
    }

    pub fn diag_real(entries: &[f64]) -> Self {
        let v: Vec<C64> = entries.iter().map(|&x| C64::new(x, 0.0)).collect();
        CMatrix::diag(&v)
    }

    /// `|v><v|` for a column vector `v`.
    pub fn outer(v: &[C64], w: &[C64]) -> Self {
        CMatrix::from_fn(v.len(), w.len(), |r, c| v[r] * w[c].conj())
    }

    pub fn scalar(z: C64) -> Self {
        CMatrix { rows: 1, cols: 1, data: vec![z] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        CMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&z| f(z)).collect() }
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.map(|z| z * s)
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn transpose(&self) -> Self {
        CMatrix::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn adjoint(&self) -> Self {
        CMatrix::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn trace(&self) -> C64 {
        let n = self.rows.min(self.cols);
        let mut acc = ZERO;
        for i in 0..n {
            acc += self[(i, i)];
        }
        acc
    }

    /// Largest absolute entry.
    pub fn max_norm(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Max-norm of `self - other`; infinite when the shapes differ.
    pub fn max_diff(&self, other: &CMatrix) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data.iter().zip(&other.data).fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    /// Equality within `eq_rel`, relative to the larger of the two max-norms (floored at 1).
    pub fn approx_eq(&self, other: &CMatrix, tol: &Tolerances) -> bool {
        let scale = 1f64.max(self.max_norm()).max(other.max_norm());
        self.max_diff(other) <= tol.eq_rel * scale
    }

    /// Max-norm of `self - self^dagger`.
    pub fn hermitian_asymmetry(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut m: f64 = 0.0;
        for r in 0..self.rows {
            for c in r..self.cols {
                m = m.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        m
    }

    pub fn hermitian_part(&self) -> CMatrix {
        CMatrix::from_fn(self.rows, self.cols, |r, c| (self[(r, c)] + self[(c, r)].conj()) * 0.5)
    }

    pub fn matmul(&self, other: &CMatrix) -> Result<CMatrix, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let (n, k, m) = (self.rows, self.cols, other.cols);
        let mut out = vec![ZERO; n * m];
        for i in 0..n {
            let row = &self.data[i * k..(i + 1) * k];
            let dst = &mut out[i * m..(i + 1) * m];
            for (l, &a) in row.iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                let src = &other.data[l * m..(l + 1) * m];
                for (d, &b) in dst.iter_mut().zip(src) {
                    *d += a * b;
                }
            }
        }
        Ok(CMatrix { rows: n, cols: m, data: out })
    }

    /// `tr(self^dagger * other)`, the Hilbert-Schmidt pairing.
    pub fn hs_inner(&self, other: &CMatrix) -> C64 {
        let mut acc = ZERO;
        for (a, b) in self.data.iter().zip(&other.data) {
            acc += a.conj() * b;
        }
        acc
    }

    fn zip_with(&self, other: &CMatrix, f: impl Fn(C64, C64) -> C64) -> Result<CMatrix, LinalgError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(LinalgError::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn try_add(&self, other: &CMatrix) -> Result<CMatrix, LinalgError> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn try_sub(&self, other: &CMatrix) -> Result<CMatrix, LinalgError> {
        self.zip_with(other, |a, b| a - b)
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        self.try_add(rhs).expect("matrix shapes must agree")
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        self.try_sub(rhs).expect("matrix shapes must agree")
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs).expect("inner dimensions must agree")
    }
}

/// Kronecker product: entry `(i*rb + k, j*cb + l) = a(i,j) * b(k,l)`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (rb, cb) = (b.rows, b.cols);
    CMatrix::from_fn(a.rows * rb, a.cols * cb, |r, c| a[(r / rb, c / cb)] * b[(r % rb, c % cb)])
}

pub fn kron_all<'a>(mats: impl IntoIterator<Item = &'a CMatrix>) -> CMatrix {
    mats.into_iter().fold(CMatrix::scalar(ONE), |acc, m| kron(&acc, m))
}

fn check_factor_dims(a: &CMatrix, dims: &[usize]) -> Result<(), LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare { rows: a.rows, cols: a.cols });
    }
    let mut product = 1usize;
    for (i, &d) in dims.iter().enumerate() {
        if d == 0 {
            return Err(LinalgError::FactorDims { side: a.rows, product: 0, factor: i });
        }
        product *= d;
        if product > a.rows {
            return Err(LinalgError::FactorDims { side: a.rows, product, factor: i });
        }
    }
    if product != a.rows {
        return Err(LinalgError::FactorDims { side: a.rows, product, factor: dims.len().saturating_sub(1) });
    }
    Ok(())
}

/// Row-major strides for a list of factor dimensions.
pub fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

/// Trace out every factor not listed in `keep`. Kept factors stay in their
/// original relative order.
pub fn partial_trace(a: &CMatrix, dims: &[usize], keep: &[usize]) -> Result<CMatrix, LinalgError> {
    check_factor_dims(a, dims)?;
    let mut kept = vec![false; dims.len()];
    for &k in keep {
        if k >= dims.len() {
            return Err(LinalgError::FactorOutOfRange { factor: k, count: dims.len() });
        }
        kept[k] = true;
    }
    let st = strides(dims);
    let keep_idx: Vec<usize> = (0..dims.len()).filter(|&i| kept[i]).collect();
    let trace_idx: Vec<usize> = (0..dims.len()).filter(|&i| !kept[i]).collect();
    let offsets = |idx: &[usize]| -> Vec<usize> {
        let sub: Vec<usize> = idx.iter().map(|&i| dims[i]).collect();
        let total: usize = sub.iter().product();
        let sub_st = strides(&sub);
        (0..total)
            .map(|flat| idx.iter().enumerate().map(|(p, &f)| ((flat / sub_st[p]) % sub[p]) * st[f]).sum())
            .collect()
    };
    let kept_off = offsets(&keep_idx);
    let tr_off = offsets(&trace_idx);
    let n = kept_off.len();
    let mut out = vec![ZERO; n * n];
    for (r, &ro) in kept_off.iter().enumerate() {
        for (c, &co) in kept_off.iter().enumerate() {
            let mut acc = ZERO;
            for &t in &tr_off {
                acc += a[(ro + t, co + t)];
            }
            out[r * n + c] = acc;
        }
    }
    Ok(CMatrix { rows: n, cols: n, data: out })
}

/// Reorder the tensor factors of a square operator: new factor `k` is old
/// factor `perm[k]`.
pub fn permute_factors(a: &CMatrix, dims: &[usize], perm: &[usize]) -> Result<CMatrix, LinalgError> {
    check_factor_dims(a, dims)?;
    if perm.len() != dims.len() {
        return Err(LinalgError::DimensionMismatch(format!(
            "permutation of length {} for {} factors",
            perm.len(),
            dims.len()
        )));
    }
    let mut seen = vec![false; dims.len()];
    for &p in perm {
        if p >= dims.len() || seen[p] {
            return Err(LinalgError::FactorOutOfRange { factor: p, count: dims.len() });
        }
        seen[p] = true;
    }
    let map = permutation_index_map(dims, perm);
    let n = a.rows;
    Ok(CMatrix::from_fn(n, n, |r, c| a[(map[r], map[c])]))
}

/// For each flat index in the permuted layout, the flat index in the original layout.
pub fn permutation_index_map(dims: &[usize], perm: &[usize]) -> Vec<usize> {
    let old_st = strides(dims);
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let new_st = strides(&new_dims);
    let total: usize = dims.iter().product();
    (0..total)
        .map(|flat| {
            perm.iter()
                .enumerate()
                .map(|(k, &p)| ((flat / new_st[k]) % new_dims[k]) * old_st[p])
                .sum()
        })
        .collect()
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn eigenvalues_hermitian(a: &CMatrix, tol: &Tolerances) -> Result<Vec<f64>, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare { rows: a.rows, cols: a.cols });
    }
    let asym = a.hermitian_asymmetry();
    if asym > tol.eq_rel * 1f64.max(a.max_norm()) {
        return Err(LinalgError::NotHermitian { asymmetry: asym });
    }
    let h = a.hermitian_part();
    let n = h.rows;
    if n == 1 {
        return Ok(vec![h[(0, 0)].re]);
    }
    let m = nalgebra::DMatrix::from_row_slice(n, n, &h.data);
    let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    Ok(ev)
}

/// Smallest eigenvalue of the Hermitian part of `a`.
pub fn min_eigenvalue_hermitian(a: &CMatrix, tol: &Tolerances) -> Result<f64, LinalgError> {
    Ok(eigenvalues_hermitian(a, tol)?[0])
}

/// Positive semidefinite within `psd_rel` relative to the matrix scale.
pub fn is_psd(a: &CMatrix, tol: &Tolerances) -> Result<bool, LinalgError> {
    let lam = min_eigenvalue_hermitian(a, tol)?;
    Ok(lam >= -tol.psd_rel * 1f64.max(a.max_norm()) - tol.zero_abs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn kron_of_identities() {
        assert_eq!(kron(&CMatrix::identity(2), &CMatrix::identity(2)), CMatrix::identity(4));
    }

    #[test]
    fn kron_of_diagonals() {
        let a = CMatrix::diag_real(&[1.0, 0.0]);
        let b = CMatrix::diag_real(&[0.0, 1.0]);
        assert_eq!(kron(&a, &b), CMatrix::diag_real(&[0.0, 1.0, 0.0, 0.0]));
    }

    #[test]
    fn kron_matches_four_index_loop() {
        let a = CMatrix::new(2, 2, vec![c(0.3, -1.0), c(2.0, 0.5), c(-0.7, 0.0), c(0.1, 0.9)]).unwrap();
        let b = CMatrix::new(2, 2, vec![c(1.5, 0.2), c(0.0, -2.0), c(0.4, 0.4), c(-1.1, 0.3)]).unwrap();
        let k = kron(&a, &b);
        for i in 0..2 {
            for j in 0..2 {
                for p in 0..2 {
                    for q in 0..2 {
                        assert_eq!(k[(i * 2 + p, j * 2 + q)], a[(i, j)] * b[(p, q)]);
                    }
                }
            }
        }
    }

    #[test]
    fn partial_trace_cases() {
        let tol = Tolerances::default();
        let pt = partial_trace(&CMatrix::identity(4), &[2, 2], &[0]).unwrap();
        assert!(pt.approx_eq(&CMatrix::identity(2).scale_real(2.0), &tol));

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bell = CMatrix::outer(&[c(h, 0.0), ZERO, ZERO, c(h, 0.0)], &[c(h, 0.0), ZERO, ZERO, c(h, 0.0)]);
        let red = partial_trace(&bell, &[2, 2], &[0]).unwrap();
        assert!(red.approx_eq(&CMatrix::identity(2).scale_real(0.5), &tol));

        let a = CMatrix::from_fn(6, 6, |r, c| C64::new((r * 7 + c) as f64, r as f64 - c as f64));
        assert_eq!(partial_trace(&a, &[2, 3], &[0, 1]).unwrap(), a);
        let full = partial_trace(&a, &[2, 3], &[]).unwrap();
        assert_eq!(full[(0, 0)], a.trace());
    }

    #[test]
    fn partial_trace_rejects_bad_dims() {
        let err = partial_trace(&CMatrix::identity(4), &[2, 3], &[0]).unwrap_err();
        assert!(matches!(err, LinalgError::FactorDims { factor: 1, .. }));
        let err = partial_trace(&CMatrix::identity(4), &[2, 2], &[5]).unwrap_err();
        assert!(matches!(err, LinalgError::FactorOutOfRange { factor: 5, .. }));
    }

    #[test]
    fn permute_swaps_kron_order() {
        let a = CMatrix::new(2, 2, vec![c(1.0, 0.0), c(2.0, 1.0), c(3.0, 0.0), c(4.0, -1.0)]).unwrap();
        let b = CMatrix::from_fn(3, 3, |r, c| C64::new(r as f64, c as f64));
        let ab = kron(&a, &b);
        let ba = permute_factors(&ab, &[2, 3], &[1, 0]).unwrap();
        assert_eq!(ba, kron(&b, &a));
    }

    #[test]
    fn min_eigenvalue_basic() {
        let tol = Tolerances::default();
        assert!((min_eigenvalue_hermitian(&CMatrix::identity(2), &tol).unwrap() - 1.0).abs() < 1e-14);
        let d = CMatrix::diag_real(&[3.0, -1.0]);
        assert!((min_eigenvalue_hermitian(&d, &tol).unwrap() + 1.0).abs() < 1e-14);
    }

    #[test]
    fn min_eigenvalue_rejects_non_hermitian() {
        let tol = Tolerances::default();
        let a = CMatrix::from_real(2, 2, &[1.0, 2.0, 0.0, 1.0]).unwrap();
        match min_eigenvalue_hermitian(&a, &tol) {
            Err(LinalgError::NotHermitian { asymmetry }) => assert!((asymmetry - 2.0).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }
}
