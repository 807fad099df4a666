//! The multilevel quantum integration algorithm: composite Newton–Cotes
//! rules, their level differences, the fixed-point discretization of each
//! level into a finite sequence, parameter planning and the estimator.

mod codec;
mod integrate;
mod level;
mod plan;
mod quadrature;

pub use codec::FixedPointCodec;
pub use integrate::{IntegralEstimate, Integrator, IntegratorConfig, LevelRecord, PreparedIntegral, PreparedLevel, STATEVEC_MAX_QUBITS};
pub use level::{gamma_level, Integrand, LevelDiscretization};
pub use plan::{delta_limit, median_reps, LevelPlan, MultilevelPlan};
pub use quadrature::{
    base_quadrature, composed_apply, difference_quadrature, newton_cotes_1d, CubePartition, Quadrature,
    MAX_NODES_PER_AXIS,
};
