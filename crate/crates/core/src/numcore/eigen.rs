//! Hermitian and general eigendecompositions and the spectral functions
//! built on them.
//!
//! The decompositions themselves are delegated to `faer`; everything this
//! module promises is checked on the way out (orthonormality for the
//! Hermitian case, per-pair residuals and eigenvector independence for the
//! general case).

use faer::{Mat, Side};
use num_complex::Complex64;

use super::matrix::{ComplexMatrix, ComplexVector};
use crate::error::{Error, Result};

/// Tolerances for the eigensolvers. All are relative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenTolerances {
    /// Allowed `‖A − A†‖_F / ‖A‖_F` for Hermitian input.
    pub hermiticity: f64,
    /// Allowed `‖Av − λv‖ / (‖A‖_F ‖v‖)` for each eigenpair.
    pub residual: f64,
    /// Smallest admissible `σ_min / σ_max` of the unit-column eigenvector matrix.
    pub defect: f64,
}

impl Default for EigenTolerances {
    fn default() -> Self {
        Self {
            hermiticity: 1e-10,
            residual: 1e-8,
            defect: 1e-12,
        }
    }
}

/// Eigendecomposition of a Hermitian matrix: ascending real eigenvalues
/// and orthonormal eigenvector columns.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `V · diag(f(λ)) · V†`
    pub fn map(&self, f: impl Fn(f64) -> Complex64) -> ComplexMatrix {
        let weights: Vec<Complex64> = self.values.iter().map(|&l| f(l)).collect();
        let scaled = ComplexMatrix::from_fn(self.dim(), self.dim(), |i, j| {
            self.vectors[(i, j)] * weights[j]
        });
        &scaled * &self.vectors.adjoint()
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map(|l| Complex64::new(l, 0.0))
    }
}

/// Right eigenpairs of a general square matrix, ordered by ascending real
/// part with ties broken by ascending imaginary part. Columns of `vectors`
/// have unit Euclidean norm with the largest entry real and positive.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralEigen {
    pub values: Vec<Complex64>,
    pub vectors: ComplexMatrix,
    /// Largest `‖Av − λv‖ / (‖A‖_F ‖v‖)` over all pairs.
    pub max_residual: f64,
    /// `σ_min / σ_max` of `vectors`; zero means the eigenvectors do not span.
    pub independence: f64,
}

pub fn hermitian_eigen(a: &ComplexMatrix) -> Result<HermitianEigen> {
    hermitian_eigen_with(a, &EigenTolerances::default())
}

pub fn hermitian_eigen_with(a: &ComplexMatrix, tol: &EigenTolerances) -> Result<HermitianEigen> {
    let n = a.require_square()?;
    let residual = a.hermiticity_residual()?;
    if residual > tol.hermiticity {
        return Err(Error::NotHermitian {
            residual,
            tol: tol.hermiticity,
        });
    }
    if n == 0 {
        return Ok(HermitianEigen {
            values: Vec::new(),
            vectors: ComplexMatrix::zeros(0, 0),
        });
    }

    // Hermitian part only; the residual check above bounds what is dropped.
    let sym = Mat::from_fn(n, n, |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5);
    let evd = sym
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::ConvergenceFailure(format!("{e:?}")))?;

    let s = evd.S().column_vector();
    let values: Vec<f64> = (0..n).map(|i| s[i].re).collect();
    let mut columns = ComplexMatrix::from_faer_ref(evd.U()).columns();
    for c in &mut columns {
        c.fix_phase();
    }
    Ok(HermitianEigen {
        values,
        vectors: ComplexMatrix::from_columns(&columns)?,
    })
}

pub fn general_eigen(a: &ComplexMatrix) -> Result<GeneralEigen> {
    general_eigen_with(a, &EigenTolerances::default())
}

pub fn general_eigen_with(a: &ComplexMatrix, tol: &EigenTolerances) -> Result<GeneralEigen> {
    let n = a.require_square()?;
    if n == 0 {
        return Ok(GeneralEigen {
            values: Vec::new(),
            vectors: ComplexMatrix::zeros(0, 0),
            max_residual: 0.0,
            independence: 1.0,
        });
    }
    if a.entries().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidParameter("matrix has non-finite entries".into()));
    }

    let evd = a
        .to_faer()
        .eigen()
        .map_err(|e| Error::ConvergenceFailure(format!("{e:?}")))?;
    let s = evd.S().column_vector();
    let u = ComplexMatrix::from_faer_ref(evd.U());

    let mut pairs: Vec<(Complex64, ComplexVector)> = (0..n)
        .map(|j| {
            let mut v = u.column(j);
            let norm = v.norm();
            if norm > 0.0 {
                v = v.scale(Complex64::new(1.0 / norm, 0.0));
            }
            v.fix_phase();
            (s[j], v)
        })
        .collect();
    pairs.sort_by(|(x, _), (y, _)| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));

    let scale = a.frobenius_norm();
    let mut max_residual: f64 = 0.0;
    for (k, (lambda, v)) in pairs.iter().enumerate() {
        let mut r = a.apply(v);
        r.axpy(-lambda, v);
        let rel = if scale == 0.0 { r.norm() } else { r.norm() / (scale * v.norm()) };
        if !(rel <= tol.residual) {
            return Err(Error::DefectiveMatrix {
                reason: format!(
                    "eigenpair {k} (λ = {:.6e}{:+.6e}i) has relative residual {rel:.3e} above {:.3e}",
                    lambda.re, lambda.im, tol.residual
                ),
            });
        }
        max_residual = max_residual.max(rel);
    }

    let (values, cols): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
    let vectors = ComplexMatrix::from_columns(&cols)?;
    let independence = eigenvector_independence(&vectors)?;
    if !(independence > tol.defect) {
        return Err(Error::DefectiveMatrix {
            reason: format!(
                "eigenvectors are numerically dependent (σ_min/σ_max = {independence:.3e}, threshold {:.3e})",
                tol.defect
            ),
        });
    }

    Ok(GeneralEigen {
        values,
        vectors,
        max_residual,
        independence,
    })
}

fn eigenvector_independence(v: &ComplexMatrix) -> Result<f64> {
    let sv = v
        .to_faer()
        .singular_values()
        .map_err(|e| Error::ConvergenceFailure(format!("{e:?}")))?;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(if max > 0.0 { min / max } else { 0.0 })
}

/// The unique Hermitian positive-definite square root of `a`.
///
/// Every eigenvalue must lie strictly above `floor`; nothing is clamped.
pub fn positive_sqrt(a: &ComplexMatrix, floor: f64) -> Result<ComplexMatrix> {
    let eig = hermitian_eigen(a)?;
    check_floor(&eig, floor)?;
    Ok(eig.map(|l| Complex64::new(l.sqrt(), 0.0)))
}

pub(crate) fn check_floor(eig: &HermitianEigen, floor: f64) -> Result<()> {
    if !(floor > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "eigenvalue floor must be positive, got {floor}"
        )));
    }
    if let Some(&min) = eig.values.first() {
        if !(min > floor) {
            return Err(Error::NotPositiveDefinite {
                eigenvalue: min,
                floor,
            });
        }
    }
    Ok(())
}

/// `V · diag(e^{−iλt}) · V†` for a Hermitian decomposition. Exactly the
/// identity at `t = 0`.
pub fn spectral_propagator(eig: &HermitianEigen, t: f64) -> ComplexMatrix {
    if t == 0.0 {
        return ComplexMatrix::identity(eig.dim());
    }
    eig.map(|l| Complex64::from_polar(1.0, -l * t))
}

/// `V · diag(e^{−iE_n t}) · V⁻¹` for an arbitrary complete eigenbasis with
/// real energies; `inverse` must be `V⁻¹`.
pub fn spectral_propagator_in_basis(
    energies: &[f64],
    vectors: &ComplexMatrix,
    inverse: &ComplexMatrix,
    t: f64,
) -> Result<ComplexMatrix> {
    let n = vectors.require_square()?;
    if energies.len() != n {
        return Err(Error::ShapeMismatch {
            context: "propagator energies",
            expected: n,
            found: energies.len(),
        });
    }
    if inverse.rows() != n || inverse.cols() != n {
        return Err(Error::ShapeMismatch {
            context: "propagator inverse basis",
            expected: n,
            found: inverse.rows(),
        });
    }
    if t == 0.0 {
        return Ok(ComplexMatrix::identity(n));
    }
    let phased = ComplexMatrix::from_fn(n, n, |i, j| {
        vectors[(i, j)] * Complex64::from_polar(1.0, -energies[j] * t)
    });
    phased.checked_mul(inverse)
}

pub fn frobenius_norm(a: &ComplexMatrix) -> f64 {
    a.frobenius_norm()
}

/// `max(d) / min(d)` for a strictly positive sequence.
pub fn condition_number_diag(d: &[f64]) -> Result<f64> {
    if let Some((index, &value)) = d.iter().enumerate().find(|(_, v)| !(**v > 0.0) || !v.is_finite()) {
        return Err(Error::NotPositive { index, value });
    }
    if d.is_empty() {
        return Ok(1.0);
    }
    let max = d.iter().cloned().fold(f64::MIN, f64::max);
    let min = d.iter().cloned().fold(f64::MAX, f64::min);
    Ok(max / min)
}
