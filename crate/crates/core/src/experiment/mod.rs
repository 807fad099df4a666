//! Experiment drivers behind the command-line tool: configuration, seeded
//! parallel trials, CSV and `.dat` emission, rate fits and validation suites.

mod config;
mod output;
mod runner;
mod validate;

use std::path::PathBuf;

pub use config::ExperimentConfig;
pub use output::{dat_path, write_compare, write_cost, write_rows};
pub use runner::{
    run_compare, run_convergence, run_cost, CompareReport, ComparePoint, ConvergenceReport, CostPoint, CostReport, PointSummary,
    ResultRow,
};
pub use validate::{run_suites, SuiteOutcome, ValidateOptions};

/// CSV header of per-trial rows.
pub const ROW_HEADER: [&str; 8] = ["n_target", "n_realized", "trial", "estimate", "reference", "abs_error", "queries", "wall_ms"];

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("config error: {0}")]
    Config(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Sim(#[from] crate::Error),
}

impl ExperimentError {
    /// Process exit status: 2 for configuration problems, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Config(_) => 2,
            _ => 1,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of one trial, a hash of the master seed, the budget and the trial index.
pub fn trial_seed(master: u64, n: u64, trial: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ n) ^ trial)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_differ_and_repeat() {
        let a = trial_seed(1, 128, 0);
        assert_eq!(a, trial_seed(1, 128, 0));
        assert_ne!(a, trial_seed(1, 128, 1));
        assert_ne!(a, trial_seed(1, 256, 0));
        assert_ne!(a, trial_seed(2, 128, 0));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(ExperimentError::Config("x".into()).exit_code(), 2);
        assert_eq!(ExperimentError::Sim(crate::Error::Domain("x".into())).exit_code(), 1);
    }
}
