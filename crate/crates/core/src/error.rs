use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failures of the numerical pipeline.
///
/// Every variant carries the quantity that tripped the check so that the
/// CLI can surface it verbatim.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },

    #[error("shape mismatch in {context}: expected {expected}, found {found}")]
    ShapeMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("matrix is not Hermitian: relative residual {residual:.3e} exceeds {tol:.3e}")]
    NotHermitian { residual: f64, tol: f64 },

    #[error("eigensolver did not converge: {0}")]
    ConvergenceFailure(String),

    #[error("matrix is defective: {reason}")]
    DefectiveMatrix { reason: String },

    #[error("operator is not positive definite: eigenvalue {eigenvalue:.6e} is not above floor {floor:.6e}")]
    NotPositiveDefinite { eigenvalue: f64, floor: f64 },

    #[error("entry {index} must be strictly positive, found {value}")]
    NotPositive { index: usize, value: f64 },

    #[error("metric condition number {condition:.6e} exceeds cap {cap:.6e}")]
    ConditionCapExceeded { condition: f64, cap: f64 },

    #[error("vector {index} is linearly dependent on its predecessors in the metric inner product")]
    LinearlyDependent { index: usize },

    #[error("spectrum is not real: {} eigenvalue(s) with significant imaginary part, first {}", .eigenvalues.len(), fmt_first(.eigenvalues))]
    ComplexSpectrum { eigenvalues: Vec<Complex64> },

    #[error("Hamiltonian is not pseudo-Hermitian for this metric: residual {residual:.3e} exceeds {tol:.3e}")]
    NotAdmissible { residual: f64, tol: f64 },

    #[error("physical basis is not orthonormal: Gram deviation {deviation:.3e} exceeds {tol:.3e}")]
    NotOrthonormal { deviation: f64, tol: f64 },

    #[error("index {index} out of range for basis of size {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("initial state is not in the span of the basis: projection residual {residual:.3e} exceeds {tol:.3e}")]
    NotInSpan { residual: f64, tol: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

fn fmt_first(values: &[Complex64]) -> String {
    values
        .first()
        .map(|z| format!("{:.6e}{:+.6e}i", z.re, z.im))
        .unwrap_or_default()
}
