//! Dense and sparse complex linear algebra.

mod banded;
mod expm;
mod jacobi;
mod lu;
mod matrix;
mod qr;
mod schur;
mod sparse;

pub use banded::{factor_component, rcm_components, BandLu};
pub use expm::expm;
pub use jacobi::{hermitian_eigen, hermitian_eigenvalues, trace_norm, HermitianEigen};
pub use lu::Lu;
pub use matrix::CMatrix;
pub use qr::least_squares;
pub use schur::eigenvalues;
pub use sparse::CsrMatrix;
