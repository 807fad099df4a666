//! Simulator for the quantum query model and the multilevel quantum
//! algorithm for integrating functions from Sobolev classes on `[0,1]^d`.

pub mod error;
pub mod experiment;
pub mod mean;
pub mod multilevel;
pub mod scalar;
pub mod query;
pub mod statevec;
pub mod stats;
pub mod testbed;

pub use error::{Error, Result};
pub use scalar::Real;

/// Double-precision state vector.
pub type StateVec = statevec::StateVector<f64>;
/// Double-precision structured unitary.
pub type Unitary = statevec::StructuredUnitary<f64>;
/// Double-precision quadrature rule.
pub type Quadrature = multilevel::Quadrature<f64>;
