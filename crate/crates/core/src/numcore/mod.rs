//! Dense complex linear algebra.

mod eigen;
mod matrix;

pub use eigen::{
    condition_number_diag, frobenius_norm, general_eigen, general_eigen_with, hermitian_eigen,
    hermitian_eigen_with, positive_sqrt, spectral_propagator, spectral_propagator_in_basis,
    EigenTolerances, GeneralEigen, HermitianEigen,
};
pub(crate) use eigen::check_floor;
pub use matrix::{ComplexMatrix, ComplexVector};

/// Caps the threads used inside the dense kernels. `None` or `Some(0 | 1)`
/// runs everything on the calling thread.
pub fn set_threads(threads: Option<usize>) {
    let par = match threads {
        Some(n) if n > 1 => faer::Par::rayon(n),
        _ => faer::Par::Seq,
    };
    faer::set_global_parallelism(par);
}
