use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use super::reference::{composite_gauss, romberg};
use super::TestFunction;
use crate::error::{domain, Result};
use crate::multilevel::{CubePartition, FixedPointCodec};

/// `exp(−1/(x(1−x)))` on `(0,1)`, `0` elsewhere.
pub fn bump_1d(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        (-1.0 / (x * (1.0 - x))).exp()
    }
}

/// `∫_0^1 bump_1d` by composite Gauss–Legendre.
pub fn bump_integral_gauss() -> f64 {
    composite_gauss(bump_1d, 0.0, 1.0, 64, 20)
}

/// `∫_0^1 bump_1d` by Romberg extrapolation.
pub fn bump_integral_romberg() -> f64 {
    romberg(bump_1d, 0.0, 1.0, 14)
}

/// The base bump `ψ(t) = Π_j exp(−1/(t_j(1−t_j)))` on `(0,1)^d` and `σ1 = I_d ψ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bump {
    pub d: usize,
    pub sigma1: f64,
}

pub fn bump(d: usize) -> Result<Bump> {
    if d == 0 || d > 3 {
        return Err(domain!("dimension d = {d} outside [1, 3]"));
    }
    Ok(Bump { d, sigma1: bump_integral_gauss().powi(d as i32) })
}

impl Bump {
    pub fn eval(&self, t: &[f64]) -> f64 {
        t.iter().map(|&x| bump_1d(x)).product()
    }

    /// Scaled copies `ψ_i(t) = ψ(2^k(t − s_i))` on the level-`k` partition.
    pub fn family(&self, k: usize) -> BumpFamily {
        BumpFamily { bump: *self, k }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BumpFamily {
    pub bump: Bump,
    pub k: usize,
}

impl BumpFamily {
    pub fn partition(&self) -> CubePartition {
        CubePartition::new(self.bump.d, self.k)
    }

    /// `N = 2^{dk}`.
    pub fn len(&self) -> usize {
        self.partition().len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn psi(&self, i: usize, t: &[f64]) -> f64 {
        let scale = (1u64 << self.k) as f64;
        let s = self.partition().corner::<f64>(i);
        t.iter().zip(&s).map(|(&x, &si)| bump_1d(scale * (x - si))).product()
    }

    /// `I_d ψ_i = σ1 / N`.
    pub fn integral(&self, _i: usize) -> f64 {
        self.bump.sigma1 / self.len() as f64
    }

    /// `η(s) = min{i | s ∈ D_{ki}}` over closed cubes.
    pub fn eta(&self, t: &[f64]) -> usize {
        let cells = 1usize << self.k;
        t.iter().fold(0, |acc, &x| {
            let y = x.clamp(0.0, 1.0) * cells as f64;
            let mut j = y.floor() as usize;
            if j > 0 && y == j as f64 {
                j -= 1;
            }
            (acc << self.k) | j.min(cells - 1)
        })
    }
}

/// `Γ(f) = Σ_i γ(β(f(i))) ψ_i` with a counter of bump evaluations.
#[derive(Clone, Debug)]
pub struct HardInstance {
    pub function: TestFunction,
    pub family: BumpFamily,
    /// `γ(β(f(i)))`.
    pub coded: Vec<f64>,
    counter: Arc<AtomicU64>,
}

impl HardInstance {
    pub fn bump_evaluations(&self) -> u64 {
        self.counter.load(Ordering::Relaxed)
    }

    pub fn reset_counter(&self) {
        self.counter.store(0, Ordering::Relaxed);
    }
}

/// Builds `Γ(f)` for coefficients `f: Z[0, 2^{dk}) → R` within the codec range.
pub fn hard_instance(d: usize, k: usize, coefficients: &[f64], codec: &FixedPointCodec) -> Result<HardInstance> {
    let family = bump(d)?.family(k);
    if coefficients.len() != family.len() {
        return Err(domain!("expected 2^(dk) = {} coefficients, got {}", family.len(), coefficients.len()));
    }
    if let Some((i, v)) = coefficients.iter().enumerate().find(|(_, v)| !(v.abs() <= codec.range())) {
        return Err(domain!("coefficient f({i}) = {v} outside the codec range ±{}", codec.range()));
    }
    let coded: Vec<f64> = coefficients.iter().map(|&v| codec.round_trip(v)).collect();
    let reference = family.bump.sigma1 * coded.iter().sum::<f64>() / coded.len() as f64;
    let counter = Arc::new(AtomicU64::new(0));
    let (g, c) = (Arc::new(coded.clone()), counter.clone());
    let f = Arc::new(move |t: &[f64]| {
        let i = family.eta(t);
        c.fetch_add(1, Ordering::Relaxed);
        g[i] * family.psi(i, t)
    });
    let function = TestFunction::new(format!("hard(d={d},k={k})"), d, f, reference);
    Ok(HardInstance { function, family, coded, counter })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testbed::reference::composite_gauss_cube;

    #[test]
    fn bump_values() {
        let b = bump(1).unwrap();
        assert_eq!(b.eval(&[0.0]), 0.0);
        assert_eq!(b.eval(&[1.0]), 0.0);
        assert!((b.eval(&[0.5]) - (-4.0f64).exp()).abs() < 1e-16);
        assert!((b.eval(&[0.5]) - 0.018316).abs() < 1e-6);
        assert!(b.sigma1 > 0.0);
    }

    #[test]
    fn sigma1_two_oracles() {
        assert!((bump_integral_gauss() - bump_integral_romberg()).abs() < 1e-8);
    }

    #[test]
    fn eta_takes_smallest_cube() {
        let fam = bump(2).unwrap().family(2);
        assert_eq!(fam.eta(&[0.0, 0.0]), 0);
        assert_eq!(fam.eta(&[0.25, 0.25]), 0);
        assert_eq!(fam.eta(&[0.3, 0.1]), 4);
        assert_eq!(fam.eta(&[1.0, 1.0]), 15);
    }

    #[test]
    fn zero_coefficients() {
        let codec = FixedPointCodec::new(8).unwrap();
        let h = hard_instance(1, 3, &[0.0; 8], &codec).unwrap();
        assert!(h.function.reference.abs() <= h.family.bump.sigma1 * codec.resolution());
    }

    #[test]
    fn single_coefficient_matches_quadrature() {
        let codec = FixedPointCodec::new(8).unwrap();
        let h = hard_instance(1, 2, &[1.0, 0.0, 0.0, 0.0], &codec).unwrap();
        let want = h.family.bump.sigma1 * codec.round_trip(1.0) / 4.0;
        assert!((h.function.reference - want).abs() < 1e-15);
        let direct = composite_gauss_cube(|t| h.function.eval(t), 1, 0.0, 1.0, 64, 20);
        assert!((direct - want).abs() < 1e-12, "{direct} vs {want}");
        assert!(h.bump_evaluations() > 0);
    }

    #[test]
    fn out_of_range_coefficient() {
        let codec = FixedPointCodec::new(4).unwrap();
        assert!(hard_instance(1, 1, &[0.0, 3.0], &codec).is_err());
        assert!(hard_instance(1, 1, &[0.0], &codec).is_err());
    }
}
