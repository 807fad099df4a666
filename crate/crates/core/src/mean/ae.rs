use std::f64::consts::PI;

use rand::Rng;

use crate::error::{domain, Result};
use crate::statevec::OutcomeDistribution;

const WINDOW: i64 = 64;

/// Estimate `sin²(π y / M)` attached to phase-register outcome `y`.
///
/// `y` and `M − y` give the same estimate; both map through `min(y, M − y)` so
/// the floating-point value is bitwise identical.
pub fn ae_value(y: usize, m: usize) -> f64 {
    let y = y % m;
    let y = y.min(m - y);
    let s = (PI * y as f64 / m as f64).sin();
    s * s
}

/// Output law of amplitude estimation with `M` Grover iterations on amplitude `a`.
///
/// The phase register reads `y` with probability `½F(Mθ/π − y) + ½F(Mθ/π + y)`
/// where `sin²θ = a` and `F` is the normalized Fejér kernel of order `M`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AeLaw {
    m: usize,
    center: f64,
    sin2: f64,
}

impl AeLaw {
    pub fn new(a: f64, m: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&a) {
            return Err(domain!("amplitude {a} outside [0, 1]"));
        }
        if m < 2 || !m.is_power_of_two() {
            return Err(domain!("M = {m} must be a power of two ≥ 2"));
        }
        let theta = a.sqrt().asin();
        let mut center = m as f64 * theta / PI;
        if (center - center.round()).abs() < 1e-10 {
            center = center.round();
        }
        let s = (PI * center.fract()).sin();
        Ok(Self { m, center, sin2: if center.fract() == 0.0 { 0.0 } else { s * s } })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    fn kernel(&self, delta: f64) -> f64 {
        if self.sin2 == 0.0 {
            let r = delta.rem_euclid(self.m as f64);
            return if r < 0.5 || r > self.m as f64 - 0.5 { 1.0 } else { 0.0 };
        }
        let s = (PI * delta / self.m as f64).sin();
        self.sin2 / ((self.m * self.m) as f64 * s * s)
    }

    /// `P(y)`.
    pub fn prob(&self, y: usize) -> f64 {
        let y = y as f64;
        0.5 * self.kernel(self.center - y) + 0.5 * self.kernel(self.center + y)
    }

    /// Samples the phase-register outcome `y`.
    pub fn sample_outcome<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let m = self.m as i64;
        let center = if rng.gen::<bool>() { self.center } else { m as f64 - self.center };
        if self.sin2 == 0.0 {
            return (center.round() as i64).rem_euclid(m) as usize;
        }
        let u: f64 = rng.gen();
        let base = center.floor() as i64;
        let mut cum = 0.0;
        let (lo, hi) = if 2 * WINDOW >= m { (base - m / 2 + 1, base + m / 2) } else { (base - WINDOW + 1, base + WINDOW) };
        for y in lo..=hi {
            cum += self.kernel(center - y as f64);
            if u < cum {
                return y.rem_euclid(m) as usize;
            }
        }
        // rare tail outside the window
        let mut last = base;
        for y in hi + 1..lo + m {
            cum += self.kernel(center - y as f64);
            last = y;
            if u < cum {
                break;
            }
        }
        last.rem_euclid(m) as usize
    }

    /// Samples the estimate `ã`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        ae_value(self.sample_outcome(rng), self.m)
    }

    pub fn distribution(&self) -> OutcomeDistribution {
        let mut d = OutcomeDistribution::new();
        for y in 0..self.m {
            d.add(ae_value(y, self.m), self.prob(y));
        }
        d
    }
}

/// Exact law of the amplitude-estimation output `ã` for true amplitude `a`.
pub fn ae_exact_distribution(a: f64, m: usize) -> Result<OutcomeDistribution> {
    Ok(AeLaw::new(a, m)?.distribution())
}

/// Window `2π√(a(1−a))/M + π²/M²` inside which the estimate lands with probability ≥ 8/π².
pub fn ae_success_radius(a: f64, m: usize) -> f64 {
    let m = m as f64;
    2.0 * PI * (a * (1.0 - a)).max(0.0).sqrt() / m + PI * PI / (m * m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn eigenphase_point_masses() {
        assert_eq!(ae_exact_distribution(0.0, 16).unwrap().prob(0.0), 1.0);
        assert_eq!(ae_exact_distribution(1.0, 16).unwrap().prob(1.0), 1.0);
        assert_eq!(ae_exact_distribution(0.5, 16).unwrap().prob(ae_value(4, 16)), 1.0);
    }

    #[test]
    fn law_is_normalized() {
        for &a in &[0.01, 0.3, 0.77, 0.999] {
            for &m in &[2, 8, 64, 1024] {
                assert!((ae_exact_distribution(a, m).unwrap().total() - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn success_window_mass() {
        for i in 0..=10 {
            let a = i as f64 / 10.0;
            for &m in &[8, 16, 32] {
                let mass = ae_exact_distribution(a, m).unwrap().mass_within(a, ae_success_radius(a, m));
                assert!(mass >= 8.0 / (PI * PI) - 1e-12, "a={a} M={m} mass={mass}");
            }
        }
    }

    #[test]
    fn sampler_matches_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for &(a, m) in &[(0.3, 16usize), (0.123, 256), (0.9, 4)] {
            let law = AeLaw::new(a, m).unwrap();
            let draws = 200_000;
            let mut emp = OutcomeDistribution::new();
            for _ in 0..draws {
                emp.add(law.sample(&mut rng), 1.0 / draws as f64);
            }
            assert!(emp.tv_distance(&law.distribution()) < 0.01, "a={a} M={m}");
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(AeLaw::new(1.5, 8).is_err());
        assert!(AeLaw::new(0.5, 6).is_err());
        assert!(AeLaw::new(0.5, 1).is_err());
    }
}
