//! Hamiltonians, propagation speeds and positivity experiments for the
//! reactive kinetic and reactive-telegraph models of front propagation.

pub mod discrete2d;
pub mod error;
pub mod extended;
pub mod fit;
pub mod hamiltonian;
pub mod kinetic1d;
pub mod optimize;
pub mod quadrature;
pub mod speed;
pub mod sphere;
pub mod telegraph;

pub use error::{Error, Result};
pub use extended::Extended;
pub use hamiltonian::{HamiltonianEval, ModelParams};
pub use sphere::SphereDim;
