//! Quantum mean estimation: amplitude estimation for bounded sequences and
//! band-splitting estimators for unit balls of `L_p^N`. Each estimator runs
//! either on the full state vector or by sampling the closed-form output law
//! of amplitude estimation (semantic mode).

mod ae;
mod bounded;
mod circuit;
mod lp;
mod sequence;

use std::fmt;
use std::str::FromStr;

pub use ae::{ae_exact_distribution, ae_success_radius, ae_value, AeLaw};
pub use bounded::{estimate_mean_bounded, grover_budget};
pub use circuit::{ae_statevec, ae_statevec_distribution, AeCircuit};
pub use lp::{estimate_mean_lp, LpPlan, LpSummary};
pub use sequence::{truncated_sums, LpBallCert, SequenceOracle};

use crate::error::{domain, Error};

/// How quantum subroutines are executed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Sample the closed-form output law.
    #[default]
    Semantic,
    /// Simulate the circuit on the state vector.
    Statevec,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Semantic => "semantic",
            Mode::Statevec => "statevec",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "semantic" => Ok(Mode::Semantic),
            "statevec" => Ok(Mode::Statevec),
            other => Err(domain!("unknown mode '{other}'")),
        }
    }
}

/// Knobs shared by the mean estimators.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimatorConfig {
    pub mode: Mode,
    /// Median repetitions `ν` of the bounded estimator.
    pub reps: usize,
    /// Multiply amplitudes by a random `s ∈ [1/2, 1]` before estimation and divide afterwards.
    pub dither: bool,
    /// Width of the value register in state-vector mode.
    pub value_bits: usize,
    /// Constant `c_0` in the tail cutoff.
    pub c0: f64,
    /// Lowest dyadic band; it also absorbs everything below `2^{min_band}`, so
    /// the default `-1` makes `[0, 1)` a single band.
    pub min_band: i32,
    /// Sweep `f` and reject an invalid norm certificate.
    pub verify_cert: bool,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self { mode: Mode::Semantic, reps: 1, dither: false, value_bits: 8, c0: 1.0, min_band: -1, verify_cert: false }
    }
}

/// Portion of the value range handled by one sub-estimate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Band {
    /// The bounded estimator's single band.
    Whole,
    /// `|g| ∈ [2^j, 2^{j+1})`; the lowest band extends down to 0.
    Dyadic(i32),
    /// `|g| ≥ 2^k`, summed exactly.
    Tail,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BandRecord {
    pub sign: i8,
    pub band: Band,
    /// Grover resolution `M`; 0 when the band is not estimated.
    pub grover: usize,
    pub queries: u64,
    pub estimate: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeanEstimate {
    pub value: f64,
    /// Charged queries: one per Grover iterate, plus the tail charge.
    pub queries_used: u64,
    /// Raw applications of `Q_f` in state-vector mode (0 in semantic mode).
    pub oracle_applications: u64,
    pub mode: Mode,
    /// Whether an exactly summed tail contributed.
    pub semantic_tail: bool,
    pub bands: Vec<BandRecord>,
}
