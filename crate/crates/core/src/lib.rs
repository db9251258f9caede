//! Lindblad dynamics of a driven subsystem coupled to a dissipative bystander:
//! generators, excitation sectors, eigensystems, steady states and evolution.

pub mod error;
pub mod evolve;
pub mod figures;
pub mod hilbert;
pub mod liouvillian;
pub mod linalg;
pub mod models;
pub mod moments;
pub mod ode;
pub mod scalar;
pub mod sectors;
pub mod spectral;
pub mod steady;
pub mod verify;

pub use error::{Error, Result};
pub use models::{build_model, ModelConfig};

pub type C64 = num_complex::Complex<f64>;
pub type Matrix64 = linalg::CMatrix<f64>;
pub type Operator64 = hilbert::Operator<f64>;
pub type Liouvillian64 = liouvillian::Liouvillian<f64>;
pub type Model64 = models::Model<f64>;
pub type ExcitationStructure64 = sectors::ExcitationStructure<f64>;
pub type SteadyReport64 = steady::SteadyReport<f64>;
pub type TrajectoryRecord64 = evolve::TrajectoryRecord<f64>;
