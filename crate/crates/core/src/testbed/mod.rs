//! Test integrands, bump-based hard instances and classical baselines.

mod baseline;
mod bump;
mod functions;
pub mod reference;

pub use baseline::{composite_nodes, det_baseline, mc_baseline, plain_mc, BaselineResult, Method};
pub use bump::{bump, bump_1d, bump_integral_gauss, bump_integral_romberg, hard_instance, Bump, BumpFamily, HardInstance};
pub use functions::{constant, family_member, smooth_family, sobolev_norm, SobolevNorm, TestFunction};
