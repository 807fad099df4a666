use std::fmt::Write as _;

use num_complex::Complex;
use rand::Rng;

use super::distribution::OutcomeDistribution;
use super::unitary::StructuredUnitary;
use super::MAX_QUBITS;
use crate::error::{capacity, domain, Result};
use crate::scalar::Real;

/// Pure state of an `m`-qubit register.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector<T> {
    m: usize,
    amps: Vec<Complex<T>>,
}

impl<T: Real> StateVector<T> {
    /// Computational basis state `|b⟩`.
    pub fn basis_state(m: usize, b: usize) -> Result<Self> {
        check_qubits(m)?;
        if b >= 1 << m {
            return Err(domain!("basis index {b} out of range for {m} qubits"));
        }
        let mut amps = vec![Complex::new(T::zero(), T::zero()); 1 << m];
        amps[b] = Complex::new(T::one(), T::zero());
        Ok(Self { m, amps })
    }

    /// Wraps raw amplitudes; the length must be a power of two and the state normalized.
    pub fn from_amplitudes(amps: Vec<Complex<T>>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(domain!("amplitude vector length {len} is not 2^m with m ≥ 1"));
        }
        let m = len.trailing_zeros() as usize;
        check_qubits(m)?;
        let s = Self { m, amps };
        let norm = s.norm_sqr();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(domain!("state not normalized: Σ|a|² = {norm}"));
        }
        Ok(s)
    }

    /// Haar-like random state (normalized complex Gaussian vector).
    pub fn random<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Result<Self> {
        check_qubits(m)?;
        let mut amps: Vec<Complex<T>> = (0..1usize << m)
            .map(|_| Complex::new(T::of(gaussian(rng)), T::of(gaussian(rng))))
            .collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).fold(T::zero(), |s, x| s + x).sqrt();
        for a in amps.iter_mut() {
            *a = *a / norm;
        }
        Ok(Self { m, amps })
    }

    pub fn qubits(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    pub fn amplitude(&self, idx: usize) -> Complex<T> {
        self.amps[idx]
    }

    pub fn probability(&self, idx: usize) -> f64 {
        self.amps[idx].norm_sqr().f64()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr().f64()).sum()
    }

    /// Returns `U|ψ⟩`, leaving `self` untouched.
    pub fn apply(&self, u: &StructuredUnitary<T>) -> Result<Self> {
        let mut out = self.clone();
        out.apply_mut(u)?;
        Ok(out)
    }

    pub fn apply_mut(&mut self, u: &StructuredUnitary<T>) -> Result<()> {
        u.apply_to(&mut self.amps, self.m)
    }

    pub fn apply_all<'a, I>(&mut self, ops: I) -> Result<()>
    where
        I: IntoIterator<Item = &'a StructuredUnitary<T>>,
    {
        for u in ops {
            self.apply_mut(u)?;
        }
        Ok(())
    }

    /// Samples a basis index with probability `|a_i|²`.
    pub fn measure<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen::<f64>() * self.norm_sqr();
        let mut cum = 0.0;
        let mut last = 0;
        for (i, a) in self.amps.iter().enumerate() {
            let p = a.norm_sqr().f64();
            if p > 0.0 {
                cum += p;
                last = i;
                if u < cum {
                    return i;
                }
            }
        }
        last
    }

    /// Precomputed inverse-CDF sampler for repeated measurement of the same state.
    pub fn sampler(&self) -> StateSampler {
        let mut cdf = Vec::with_capacity(self.amps.len());
        let mut cum = 0.0;
        for a in &self.amps {
            cum += a.norm_sqr().f64();
            cdf.push(cum);
        }
        StateSampler { cdf }
    }

    /// Law of `output_map(i)` for `i` measured in the computational basis.
    pub fn exact_distribution(&self, output_map: impl Fn(usize) -> f64) -> OutcomeDistribution {
        let mut d = OutcomeDistribution::new();
        for (i, a) in self.amps.iter().enumerate() {
            let p = a.norm_sqr().f64();
            if p > 0.0 {
                d.add(output_map(i), p);
            }
        }
        d
    }

    /// Inner product `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Complex<T> {
        self.amps.iter().zip(&other.amps).fold(Complex::new(T::zero(), T::zero()), |s, (a, b)| s + a.conj() * *b)
    }

    /// Largest amplitudewise distance `max_i |a_i − b_i|`.
    pub fn max_distance(&self, other: &Self) -> f64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| (*a - *b).norm().f64()).fold(0.0, f64::max)
    }

    /// Text dump, one line per basis index: `index re im`.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for (i, a) in self.amps.iter().enumerate() {
            let _ = writeln!(s, "{i} {:e} {:e}", a.re.f64(), a.im.f64());
        }
        s
    }
}

/// Repeated sampling from a fixed measurement law.
#[derive(Clone, Debug)]
pub struct StateSampler {
    cdf: Vec<f64>,
}

impl StateSampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = *self.cdf.last().unwrap_or(&1.0);
        let u = rng.gen::<f64>() * total;
        self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1)
    }
}

fn check_qubits(m: usize) -> Result<()> {
    if m == 0 {
        return Err(domain!("a register needs at least one qubit"));
    }
    if m > MAX_QUBITS {
        return Err(capacity!("{m} qubits exceeds the simulator cap of {MAX_QUBITS}"));
    }
    Ok(())
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // Box–Muller
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}
