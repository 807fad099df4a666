//! Exact complex state-vector engine.
//!
//! Basis index convention: qubit 0 is the most significant bit, so the basis
//! state `|i⟩` of an `m`-qubit register has `i = Σ_k j_k 2^{m-1-k}`.

mod distribution;
mod register;
mod state;
mod unitary;

pub use distribution::OutcomeDistribution;
pub use register::Register;
pub use state::{StateSampler, StateVector};
pub use unitary::{Permutation, Predicate, StructuredUnitary};

/// Largest register the engine will allocate.
pub const MAX_QUBITS: usize = 26;

/// Largest number of target qubits of a dense block.
pub const MAX_DENSE_TARGETS: usize = 12;
