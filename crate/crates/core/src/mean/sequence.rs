use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{contract, domain, Result};
use crate::query::OracleFunction;

const CHUNK: usize = 1 << 13;

/// Oracle access to a finite sequence `f: Z[0, N) → R`.
#[derive(Clone)]
pub struct SequenceOracle {
    len: usize,
    eval: Arc<dyn Fn(usize) -> f64 + Send + Sync>,
    evaluations: Arc<AtomicU64>,
}

impl fmt::Debug for SequenceOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SequenceOracle(N={}, evaluations={})", self.len, self.evaluations())
    }
}

impl SequenceOracle {
    pub fn new(len: usize, eval: impl Fn(usize) -> f64 + Send + Sync + 'static) -> Result<Self> {
        if len == 0 {
            return Err(domain!("a sequence needs N ≥ 1"));
        }
        Ok(Self { len, eval: Arc::new(eval), evaluations: Arc::new(AtomicU64::new(0)) })
    }

    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        let values = Arc::new(values);
        Self::new(values.len(), move |i| values[i])
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, i: usize) -> f64 {
        self.evaluations.fetch_add(1, Ordering::Relaxed);
        (self.eval)(i)
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluations.load(Ordering::Relaxed)
    }

    /// Applies `g` to every entry and combines with `reduce`.
    ///
    /// Work is split into fixed chunks combined left to right, so floating-point
    /// results do not depend on thread scheduling.
    pub fn fold<A, G, R>(&self, identity: impl Fn() -> A + Send + Sync, g: G, reduce: R) -> A
    where
        A: Send,
        G: Fn(A, usize, f64) -> A + Send + Sync,
        R: Fn(A, A) -> A + Send + Sync,
    {
        self.evaluations.fetch_add(self.len as u64, Ordering::Relaxed);
        let eval = &self.eval;
        let chunks = self.len.div_ceil(CHUNK);
        let partials: Vec<A> = (0..chunks)
            .into_par_iter()
            .map(|c| (c * CHUNK..((c + 1) * CHUNK).min(self.len)).fold(identity(), |acc, i| g(acc, i, eval(i))))
            .collect();
        partials.into_iter().fold(identity(), reduce)
    }

    pub fn values(&self) -> Vec<f64> {
        self.evaluations.fetch_add(self.len as u64, Ordering::Relaxed);
        (0..self.len).into_par_iter().map(|i| (self.eval)(i)).collect()
    }

    /// `S_N f = (1/N) Σ f(i)`.
    pub fn mean(&self) -> f64 {
        self.fold(|| 0.0, |s, _, v| s + v, |a, b| a + b) / self.len as f64
    }

    /// `‖f‖_{L_p^N}`.
    pub fn lp_norm(&self, p: f64) -> f64 {
        (self.fold(|| 0.0, |s, _, v| s + v.abs().powf(p), |a, b| a + b) / self.len as f64).powf(1.0 / p)
    }

    pub fn sup_norm(&self) -> f64 {
        self.fold(|| 0.0f64, |s, _, v| s.max(v.abs()), f64::max)
    }

    /// The same sequence as a query-model oracle on `Z[0, N)`.
    pub fn as_oracle(&self) -> OracleFunction<usize, f64> {
        let this = self.clone();
        OracleFunction::new(move |i: &usize| if *i < this.len { this.get(*i) } else { 0.0 })
    }

    /// `i ↦ g(f(i))`, sharing the evaluation counter.
    pub fn map(&self, g: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        let eval = self.eval.clone();
        Self { len: self.len, eval: Arc::new(move |i| g(eval(i))), evaluations: self.evaluations.clone() }
    }
}

/// Claim `‖f‖_{L_p^N} ≤ B`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LpBallCert {
    pub p: f64,
    pub bound: f64,
}

impl LpBallCert {
    pub fn new(p: f64, bound: f64) -> Result<Self> {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(domain!("p = {p} outside [1, ∞)"));
        }
        if !(bound > 0.0 && bound.is_finite()) {
            return Err(domain!("norm bound must be positive and finite, got {bound}"));
        }
        Ok(Self { p, bound })
    }

    /// Verifies the claim by a full sweep.
    pub fn check(&self, f: &SequenceOracle) -> Result<()> {
        let n = f.len() as f64;
        let power = f.fold(|| 0.0, |s, _, v| s + v.abs().powf(self.p), |a, b| a + b) / n;
        if power > self.bound.powf(self.p) * (1.0 + 1e-9) + 1e-300 {
            return Err(contract!("‖f‖_p = {} exceeds certified bound {}", power.powf(1.0 / self.p), self.bound));
        }
        Ok(())
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { p: self.p, bound: self.bound * c }
    }
}

/// `(S_{N,M} f, S'_{N,M} f)`: the mean of the entries with `|f(i)| < M` and of the rest.
pub fn truncated_sums(f: &SequenceOracle, cutoff: f64) -> Result<(f64, f64)> {
    if !(cutoff >= 1.0) {
        return Err(domain!("truncation level M = {cutoff} must be ≥ 1"));
    }
    let (lo, hi) = f.fold(
        || (0.0, 0.0),
        |(lo, hi), _, v| if v.abs() < cutoff { (lo + v, hi) } else { (lo, hi + v) },
        |a, b| (a.0 + b.0, a.1 + b.1),
    );
    let n = f.len() as f64;
    Ok((lo / n, hi / n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn truncated_sum_examples() {
        let f = SequenceOracle::from_values(vec![3.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(truncated_sums(&f, 2.0).unwrap(), (0.0, 0.75));
        assert_eq!(truncated_sums(&f, 4.0).unwrap().1, 0.0);
        assert!(truncated_sums(&f, 0.5).is_err());
    }

    #[test]
    fn truncated_sums_add_up() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let vals: Vec<f64> = (0..1000).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let f = SequenceOracle::from_values(vals).unwrap();
        let (a, b) = truncated_sums(&f, 3.0).unwrap();
        assert!((a + b - f.mean()).abs() < 1e-12);
    }

    #[test]
    fn cert_check() {
        let f = SequenceOracle::from_values(vec![2.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(LpBallCert::new(2.0, 1.0).unwrap().check(&f).is_ok());
        assert!(matches!(LpBallCert::new(2.0, 0.9).unwrap().check(&f), Err(crate::Error::Contract(_))));
        assert!(LpBallCert::new(0.5, 1.0).is_err());
    }
}
