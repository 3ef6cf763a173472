//! Dense complex linear algebra.
//!
//! [`ComplexMatrix`] is the square carrier used for Hamiltonians, density
//! matrices and Kraus elements. The Hermitian eigensolver is backed by
//! nalgebra; the generalized problem uses canonical orthogonalization so that
//! singular overlap matrices (linearly dependent expansion vectors) are
//! handled by discarding null directions instead of failing.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

/// Complex state vector.
pub type StateVector = DVector<Complex64>;

/// Relative threshold used when none is supplied to [`generalized_eigensolve`].
pub const DEFAULT_METRIC_CUTOFF: f64 = 1e-10;

/// Inputs whose anti-Hermitian part exceeds this are rejected.
pub const HERMITIAN_REJECT_TOL: f64 = 1e-8;

/// Metric eigenvalues below `-NEGATIVE_METRIC_TOL * max_eig` indicate a broken overlap.
pub const NEGATIVE_METRIC_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("matrix is not Hermitian (max asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("metric has eigenvalue {min_eig:.3e} below -{NEGATIVE_METRIC_TOL:e} * {max_eig:.3e}")]
    NegativeMetric { min_eig: f64, max_eig: f64 },
    #[error("all metric eigenvalues fell below the cutoff; empty subspace")]
    EmptySubspace,
    #[error("matrix dimension {0} exceeds the supported maximum of 4096")]
    TooLarge(usize),
}

/// Dense square complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "ComplexMatrix({}x{}) {:?}",
            self.dim(),
            self.dim(),
            self.0
        )
    }
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        Self(DMatrix::from_fn(dim, dim, f))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, |i, j| {
            if i == j {
                Complex64::new(diag[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// Builds from row-major entries; `entries.len()` must be a perfect square.
    pub fn from_row_major(entries: &[Complex64]) -> Result<Self, LinalgError> {
        let dim = (entries.len() as f64).sqrt().round() as usize;
        if dim * dim != entries.len() {
            return Err(LinalgError::NotSquare {
                rows: entries.len(),
                cols: 1,
            });
        }
        let m = Self(DMatrix::from_row_slice(dim, dim, entries));
        if !m.is_finite() {
            return Err(LinalgError::NonFinite);
        }
        Ok(m)
    }

    /// Real row-major convenience constructor used heavily in tests.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self, LinalgError> {
        let entries: Vec<Complex64> = rows
            .iter()
            .flat_map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)))
            .collect();
        if rows.iter().any(|r| r.len() != rows.len()) {
            return Err(LinalgError::NotSquare {
                rows: rows.len(),
                cols: rows.first().map_or(0, |r| r.len()),
            });
        }
        Self::from_row_major(&entries)
    }

    pub fn from_dmatrix(m: DMatrix<Complex64>) -> Result<Self, LinalgError> {
        if m.nrows() != m.ncols() {
            return Err(LinalgError::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        Ok(Self(m))
    }

    /// Projector `|v><v|`.
    pub fn outer(v: &StateVector) -> Self {
        Self(v * v.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_dmatrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.0[(row, col)] = value;
    }

    /// Row-major copy of the entries.
    pub fn to_row_major(&self) -> Vec<Complex64> {
        let n = self.dim();
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self(&self.0 * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self(&self.0 * Complex64::new(s, 0.0))
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    /// `Tr[self * other]` without forming the product.
    pub fn trace_product(&self, other: &ComplexMatrix) -> Complex64 {
        let n = self.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for k in 0..n {
                acc += self.0[(i, k)] * other.0[(k, i)];
            }
        }
        acc
    }

    /// Kronecker product `self ⊗ other`; `self` occupies the most significant index.
    pub fn kron(&self, other: &ComplexMatrix) -> Self {
        Self(self.0.kronecker(&other.0))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        (&self.0 - &other.0)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest `|A_ij - conj(A_ji)|`.
    pub fn hermitian_asymmetry(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_asymmetry() <= tol
    }

    /// `(A + A†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self((&self.0 + self.0.adjoint()) * Complex64::new(0.5, 0.0))
    }

    /// True when Hermitian within `tol` and the smallest eigenvalue is `>= -tol`.
    pub fn is_psd(&self, tol: f64) -> bool {
        if !self.is_hermitian(tol) {
            return false;
        }
        match hermitian_eigensolve(&self.hermitian_part()) {
            Ok(spec) => spec.eigenvalues.first().is_none_or(|&e| e >= -tol),
            Err(_) => false,
        }
    }

    pub fn mul_vec(&self, v: &StateVector) -> StateVector {
        &self.0 * v
    }

    /// Real part of `<v|A|v>`.
    pub fn expectation(&self, v: &StateVector) -> f64 {
        v.dotc(&(&self.0 * v)).re
    }

    /// `M† A M` for a rectangular `M`; returns the `cols x cols` result.
    pub fn congruence(&self, m: &DMatrix<Complex64>) -> Self {
        Self(m.adjoint() * &self.0 * m)
    }

    fn check_same_dim(&self, other: &ComplexMatrix) -> Result<(), LinalgError> {
        if self.dim() != other.dim() {
            return Err(LinalgError::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &ComplexMatrix) -> Result<Self, LinalgError> {
        self.check_same_dim(other)?;
        Ok(Self(&self.0 + &other.0))
    }

    pub fn try_mul(&self, other: &ComplexMatrix) -> Result<Self, LinalgError> {
        self.check_same_dim(other)?;
        Ok(Self(&self.0 * &other.0))
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

/// Eigenpairs sorted by ascending eigenvalue.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// One eigenvector per column (`dim x retained_dim`).
    pub eigenvectors: DMatrix<Complex64>,
    /// Dimension that survived metric truncation; equals `dim` for ordinary problems.
    pub retained_dim: usize,
}

impl Spectrum {
    pub fn eigenvector(&self, k: usize) -> StateVector {
        self.eigenvectors.column(k).into_owned()
    }

    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// Indices of the eigenvalues within `tol` of the lowest one.
    pub fn ground_block(&self, tol: f64) -> usize {
        let e0 = self.eigenvalues[0];
        self.eigenvalues
            .iter()
            .take_while(|&&e| (e - e0).abs() <= tol)
            .count()
    }
}

fn check_input(a: &ComplexMatrix) -> Result<(), LinalgError> {
    if a.dim() > 4096 {
        return Err(LinalgError::TooLarge(a.dim()));
    }
    if !a.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let scale = a.max_abs().max(1.0);
    let asym = a.hermitian_asymmetry();
    if asym > HERMITIAN_REJECT_TOL * scale {
        return Err(LinalgError::NotHermitian { asymmetry: asym });
    }
    Ok(())
}

fn sorted_eigen(a: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let n = a.nrows();
    if n == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    let eig = a.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Eigendecomposition of a Hermitian matrix (symmetrized internally).
pub fn hermitian_eigensolve(a: &ComplexMatrix) -> Result<Spectrum, LinalgError> {
    check_input(a)?;
    let sym = a.hermitian_part();
    let (eigenvalues, eigenvectors) = sorted_eigen(&sym.0);
    Ok(Spectrum {
        retained_dim: eigenvalues.len(),
        eigenvalues,
        eigenvectors,
    })
}

/// Solves `H c = λ S c` by canonical orthogonalization.
///
/// Metric eigenvectors with eigenvalue `<= metric_cutoff * max_eig(S)` are
/// discarded; the returned eigenvectors are `S`-orthonormal.
pub fn generalized_eigensolve(
    h: &ComplexMatrix,
    s: &ComplexMatrix,
    metric_cutoff: f64,
) -> Result<Spectrum, LinalgError> {
    h.check_same_dim(s)?;
    check_input(h)?;
    check_input(s)?;
    let (s_vals, s_vecs) = sorted_eigen(&s.hermitian_part().0);
    let max_eig = s_vals.last().copied().unwrap_or(0.0);
    if max_eig <= 0.0 {
        return Err(LinalgError::EmptySubspace);
    }
    let min_eig = s_vals[0];
    if min_eig < -NEGATIVE_METRIC_TOL * max_eig {
        return Err(LinalgError::NegativeMetric { min_eig, max_eig });
    }
    let threshold = metric_cutoff * max_eig;
    let kept: Vec<usize> = (0..s_vals.len())
        .filter(|&k| s_vals[k] > threshold)
        .collect();
    if kept.is_empty() {
        return Err(LinalgError::EmptySubspace);
    }
    let n = h.dim();
    let x = DMatrix::from_fn(n, kept.len(), |r, c| {
        s_vecs[(r, kept[c])] / s_vals[kept[c]].sqrt()
    });
    let projected = h.hermitian_part().congruence(&x);
    let (eigenvalues, c) = sorted_eigen(&projected.hermitian_part().0);
    Ok(Spectrum {
        retained_dim: kept.len(),
        eigenvalues,
        eigenvectors: x * c,
    })
}
