//! The quantum query model: queries `Q_f`, algorithms with and without
//! measurements, their output laws, and the composition machinery
//! (summing algorithms, median boosting, simulating a query on `Γ(f)`).

mod algorithm;
mod gamma;
mod oracle;
mod spec;

pub use algorithm::{probabilistic_error, MeasuredAlgorithm, NoMeasureAlgorithm, OutputMap, StagedAlgorithm, StartRule};
pub use gamma::{reduce_via_gamma, Eta, GammaReduction, ReductionLayout};
pub use oracle::OracleFunction;
pub use spec::QuerySpec;

/// Failure probability at which errors are measured unless stated otherwise.
pub const DEFAULT_THETA: f64 = 0.25;

/// Default cap on enumerated outcome tuples for exact output laws.
pub const DEFAULT_ENUMERATION_BUDGET: usize = 1 << 20;

/// Per-run counters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct QueryTally {
    /// Applications of `Q_f`.
    pub queries: u64,
    /// Measured stages executed.
    pub stages: u64,
    /// Widest register allocated.
    pub max_qubits: usize,
}

impl QueryTally {
    pub fn merge(&mut self, other: &QueryTally) {
        self.queries += other.queries;
        self.stages += other.stages;
        self.max_qubits = self.max_qubits.max(other.max_qubits);
    }
}
