//! Dense Hermitian matrices, their spectral calculus and the Loewner order.

use std::ops::{Add, Mul, Sub};
use std::sync::OnceLock;

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::positive_power;

pub type C64 = Complex<f64>;

/// Relative eigenvalue threshold below which a matrix is treated as singular.
pub const PD_THRESHOLD: f64 = 1e-12;

/// Allowed `||A - A*||_2 / (1 + ||A||_2)` before input is rejected as non-Hermitian.
pub const HERMITIAN_TOLERANCE: f64 = 1e-8;

const EIGEN_RESIDUAL_BOUND: f64 = 1e-12;
const EIGEN_MAX_SWEEPS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Positivity {
    Indefinite,
    Psd,
    Pd,
}

/// A square complex matrix equal to its conjugate transpose.
///
/// The eigendecomposition is computed on first use and cached.
#[derive(Debug, Clone)]
pub struct HermitianMatrix {
    data: DMatrix<C64>,
    eigen: OnceLock<EigenDecomposition>,
}

impl PartialEq for HermitianMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.data == other.data
    }
}

/// `A = V diag(λ) V*` with `λ` ascending and `V` unitary.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub eigenvalues: DVector<f64>,
    pub vectors: DMatrix<C64>,
}

impl EigenDecomposition {
    /// `V diag(values) V*`.
    pub fn assemble(&self, values: &[f64]) -> HermitianMatrix {
        let mut scaled = self.vectors.clone();
        for (mut column, &v) in scaled.column_iter_mut().zip(values) {
            column *= C64::from(v);
        }
        HermitianMatrix::symmetrized(&scaled * self.vectors.adjoint())
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    /// Largest absolute eigenvalue, i.e. the spectral norm.
    pub fn spectral_radius(&self) -> f64 {
        self.min_eigenvalue().abs().max(self.max_eigenvalue().abs())
    }
}

fn check_square(m: &DMatrix<C64>) -> Result<()> {
    if m.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(())
}

impl HermitianMatrix {
    /// Validates and symmetrizes `(A + A*)/2`; rejects inputs whose
    /// anti-Hermitian part exceeds [`HERMITIAN_TOLERANCE`].
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        check_square(&m)?;
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFiniteEntry);
        }
        let asymmetry = (&m - m.adjoint()).norm();
        let bound = HERMITIAN_TOLERANCE * (1.0 + m.norm());
        if asymmetry > bound {
            return Err(Error::NotHermitian { asymmetry, bound });
        }
        Ok(Self::symmetrized(m))
    }

    pub fn from_real(m: DMatrix<f64>) -> Result<Self> {
        Self::new(m.map(C64::from))
    }

    pub fn from_diagonal(values: &[f64]) -> Self {
        let d = DVector::from_iterator(values.len(), values.iter().map(|&v| C64::from(v)));
        Self::symmetrized(DMatrix::from_diagonal(&d))
    }

    pub fn identity(n: usize) -> Self {
        Self::symmetrized(DMatrix::identity(n, n))
    }

    /// Hermitian part of a square matrix, without validation.
    pub(crate) fn symmetrized(m: DMatrix<C64>) -> Self {
        let adj = m.adjoint();
        Self {
            data: (m + adj) * C64::from(0.5),
            eigen: OnceLock::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<C64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.data
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.data[(i, j)]
    }

    /// `self · inner · self`, Hermitian because `self` is.
    pub fn congruence(&self, inner: &HermitianMatrix) -> HermitianMatrix {
        Self::symmetrized(&self.data * &inner.data * &self.data)
    }

    pub fn scaled(&self, c: f64) -> HermitianMatrix {
        Self::symmetrized(&self.data * C64::from(c))
    }

    /// Cached eigendecomposition.
    pub fn eigen(&self) -> Result<&EigenDecomposition> {
        if let Some(e) = self.eigen.get() {
            return Ok(e);
        }
        let e = decompose(&self.data)?;
        Ok(self.eigen.get_or_init(|| e))
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigen()?.min_eigenvalue())
    }

    pub fn spectral_norm(&self) -> Result<f64> {
        Ok(self.eigen()?.spectral_radius())
    }

    /// Classification with the relative threshold [`PD_THRESHOLD`].
    pub fn classification(&self) -> Result<Positivity> {
        let e = self.eigen()?;
        let threshold = PD_THRESHOLD * e.spectral_radius();
        let min = e.min_eigenvalue();
        Ok(if min > threshold {
            Positivity::Pd
        } else if min >= -threshold {
            Positivity::Psd
        } else {
            Positivity::Indefinite
        })
    }

    /// Errors unless the matrix is positive definite.
    pub fn require_pd(&self, which: &'static str) -> Result<()> {
        match self.classification()? {
            Positivity::Pd => Ok(()),
            _ => Err(Error::NotPositiveDefinite {
                which,
                min_eigenvalue: self.min_eigenvalue()?,
            }),
        }
    }

    /// Errors unless the matrix is positive semidefinite.
    pub fn require_psd(&self, which: &'static str) -> Result<()> {
        match self.classification()? {
            Positivity::Indefinite => Err(Error::NotPositiveSemidefinite {
                which,
                min_eigenvalue: self.min_eigenvalue()?,
            }),
            _ => Ok(()),
        }
    }

    fn check_same_dim(&self, other: &HermitianMatrix) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(())
    }
}

impl Add for &HermitianMatrix {
    type Output = HermitianMatrix;

    fn add(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix::symmetrized(&self.data + &rhs.data)
    }
}

impl Sub for &HermitianMatrix {
    type Output = HermitianMatrix;

    fn sub(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix::symmetrized(&self.data - &rhs.data)
    }
}

impl Mul<f64> for &HermitianMatrix {
    type Output = HermitianMatrix;

    fn mul(self, c: f64) -> HermitianMatrix {
        self.scaled(c)
    }
}

fn decompose(m: &DMatrix<C64>) -> Result<EigenDecomposition> {
    let n = m.nrows();
    let iterations = EIGEN_MAX_SWEEPS * n.max(1);
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, iterations)
        .ok_or(Error::EigenNoConvergence { iterations })?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let vectors = DMatrix::from_columns(
        &order
            .iter()
            .map(|&i| eig.eigenvectors.column(i).into_owned())
            .collect::<Vec<_>>(),
    );

    let mut scaled = vectors.clone();
    for (mut column, &v) in scaled.column_iter_mut().zip(eigenvalues.iter()) {
        column *= C64::from(v);
    }
    let norm = eigenvalues.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let reconstruction = (&scaled * vectors.adjoint() - m).norm();
    let orthogonality = (vectors.adjoint() * &vectors - DMatrix::identity(n, n)).norm();
    let bound = EIGEN_RESIDUAL_BOUND * (1.0 + norm);
    if reconstruction > bound || orthogonality > EIGEN_RESIDUAL_BOUND {
        return Err(Error::EigenInaccurate {
            residual: reconstruction.max(orthogonality),
            bound,
        });
    }
    Ok(EigenDecomposition {
        eigenvalues,
        vectors,
    })
}

/// Ascending eigenvalues and unitary eigenvectors of `a`.
pub fn eigh(a: &HermitianMatrix) -> Result<EigenDecomposition> {
    a.eigen().cloned()
}

/// `f(A) = V diag(f(λ_i)) V*`.
///
/// A non-finite `f(λ_i)` is reported as a domain error at `λ_i`.
pub fn matrix_function(a: &HermitianMatrix, f: impl Fn(f64) -> f64) -> Result<HermitianMatrix> {
    let e = a.eigen()?;
    let values = e
        .eigenvalues
        .iter()
        .map(|&l| {
            let v = f(l);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Domain { eigenvalue: l })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(e.assemble(&values))
}

/// `A^t` through the spectral calculus.
///
/// For `t >= 0` a positive semidefinite `A` suffices (eigenvalues within
/// `-PD_THRESHOLD·||A||` are clamped to zero, and `0^t = 0` for `t > 0`,
/// `A^0 = I`). Negative `t` requires `A` positive definite.
pub fn fractional_power(a: &HermitianMatrix, t: f64) -> Result<HermitianMatrix> {
    let e = a.eigen()?;
    let threshold = PD_THRESHOLD * e.spectral_radius();
    let min = e.min_eigenvalue();
    if t < 0.0 && min <= threshold {
        return Err(Error::Domain { eigenvalue: min });
    }
    if min < -threshold {
        return Err(Error::Domain { eigenvalue: min });
    }
    let values: Vec<f64> = e
        .eigenvalues
        .iter()
        .map(|&l| positive_power(l.max(0.0), t))
        .collect();
    Ok(e.assemble(&values))
}

/// Numerical realization of `L <= R` in the Loewner order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LoewnerVerdict {
    pub holds: bool,
    /// `λ_min(R - L)`.
    pub margin: f64,
    /// `max(||L||, ||R||)` in the spectral norm.
    pub scale: f64,
}

impl LoewnerVerdict {
    /// `|margin| <= tol·(1 + scale)`.
    pub fn is_equality(&self, tol: f64) -> bool {
        self.margin.abs() <= tol * (1.0 + self.scale)
    }
}

/// Checks `L <= R`: holds iff `λ_min(R - L) >= -tol·(1 + scale)`.
pub fn loewner_compare(
    l: &HermitianMatrix,
    r: &HermitianMatrix,
    tol: f64,
) -> Result<LoewnerVerdict> {
    l.check_same_dim(r)?;
    let margin = (r - l).min_eigenvalue()?;
    let scale = l.spectral_norm()?.max(r.spectral_norm()?);
    Ok(LoewnerVerdict {
        holds: margin >= -tol * (1.0 + scale),
        margin,
        scale,
    })
}

/// `(Σ |m_ij|²)^{1/2}` for any rectangular complex matrix.
pub fn hs_norm(m: &DMatrix<C64>) -> f64 {
    m.norm()
}
