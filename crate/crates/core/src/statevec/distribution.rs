use std::collections::BTreeMap;

use ordered_float::OrderedFloat;
use rand::Rng;

/// A finitely supported probability measure on the reals.
///
/// Values are keyed exactly; callers that produce the same mathematical value
/// along different floating-point paths must canonicalize before inserting.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct OutcomeDistribution {
    support: BTreeMap<OrderedFloat<f64>, f64>,
}

impl OutcomeDistribution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn point(value: f64) -> Self {
        let mut d = Self::new();
        d.add(value, 1.0);
        d
    }

    pub fn from_pairs<I: IntoIterator<Item = (f64, f64)>>(pairs: I) -> Self {
        let mut d = Self::new();
        for (v, p) in pairs {
            d.add(v, p);
        }
        d
    }

    /// Adds `mass` at `value`; zero masses are not stored.
    pub fn add(&mut self, value: f64, mass: f64) {
        if mass != 0.0 {
            *self.support.entry(OrderedFloat(value)).or_insert(0.0) += mass;
        }
    }

    pub fn prob(&self, value: f64) -> f64 {
        self.support.get(&OrderedFloat(value)).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.support.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.support.iter().map(|(v, p)| (v.0, *p))
    }

    pub fn mean(&self) -> f64 {
        self.iter().map(|(v, p)| v * p).sum()
    }

    /// `P(X ≤ value)`.
    pub fn cdf(&self, value: f64) -> f64 {
        self.support.range(..=OrderedFloat(value)).map(|(_, p)| *p).sum()
    }

    /// Mass of values satisfying `pred`.
    pub fn mass_where(&self, pred: impl Fn(f64) -> bool) -> f64 {
        self.iter().filter(|(v, _)| pred(*v)).map(|(_, p)| p).sum()
    }

    /// Mass within the closed window `[center - radius, center + radius]`.
    pub fn mass_within(&self, center: f64, radius: f64) -> f64 {
        self.mass_where(|v| (v - center).abs() <= radius)
    }

    /// Total variation distance `½ Σ |p(v) − q(v)|`.
    pub fn tv_distance(&self, other: &Self) -> f64 {
        let mut sum = 0.0;
        for (v, p) in self.iter() {
            sum += (p - other.prob(v)).abs();
        }
        for (v, q) in other.iter() {
            if !self.support.contains_key(&OrderedFloat(v)) {
                sum += q.abs();
            }
        }
        0.5 * sum
    }

    /// Pushes the measure forward through `f`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_pairs(self.iter().map(|(v, p)| (f(v), p)))
    }

    /// Law of `X + Y` for independent `X ~ self`, `Y ~ other`.
    pub fn convolve(&self, other: &Self) -> Self {
        let mut out = Self::new();
        for (a, p) in self.iter() {
            for (b, q) in other.iter() {
                out.add(a + b, p * q);
            }
        }
        out
    }

    /// Law of the lower median (the `⌈ν/2⌉`-th smallest) of `reps` independent draws.
    pub fn median_of(&self, reps: usize) -> Self {
        assert!(reps >= 1);
        let rank = reps.div_ceil(2);
        let mut out = Self::new();
        let mut prev = 0.0;
        let mut cum = 0.0;
        for (v, p) in self.iter() {
            cum += p;
            let at_most = binomial_upper_tail(reps, rank, cum.min(1.0));
            out.add(v, at_most - prev);
            prev = at_most;
        }
        out
    }

    /// Draws one value by inverse-CDF sampling.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.gen::<f64>() * self.total();
        let mut cum = 0.0;
        let mut last = f64::NAN;
        for (v, p) in self.iter() {
            cum += p;
            last = v;
            if u < cum {
                return v;
            }
        }
        last
    }
}

/// `P(Binomial(n, q) ≥ k)`.
pub(crate) fn binomial_upper_tail(n: usize, k: usize, q: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if q >= 1.0 {
        return 1.0;
    }
    if q <= 0.0 {
        return 0.0;
    }
    // Σ_{i≥k} C(n,i) q^i (1-q)^{n-i}, accumulated in log space for stability.
    let ln_q = q.ln();
    let ln_1q = (1.0 - q).ln();
    let mut ln_binom = 0.0f64; // ln C(n, 0)
    let mut total = 0.0;
    for i in 0..=n {
        if i > 0 {
            ln_binom += ((n - i + 1) as f64).ln() - (i as f64).ln();
        }
        if i >= k {
            total += (ln_binom + i as f64 * ln_q + (n - i) as f64 * ln_1q).exp();
        }
    }
    total.min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convolution_of_coins() {
        let coin = OutcomeDistribution::from_pairs([(0.0, 0.5), (1.0, 0.5)]);
        let two = coin.convolve(&coin);
        assert_eq!(two.prob(0.0), 0.25);
        assert_eq!(two.prob(1.0), 0.5);
        assert_eq!(two.prob(2.0), 0.25);
    }

    #[test]
    fn median_of_one_is_identity() {
        let d = OutcomeDistribution::from_pairs([(0.0, 0.3), (1.0, 0.2), (5.0, 0.5)]);
        assert!(d.median_of(1).tv_distance(&d) < 1e-15);
    }

    #[test]
    fn median_of_three_bernoulli() {
        // P(median = 1) = P(at least 2 of 3 ones) = 3 p^2 (1-p) + p^3
        let p = 0.75;
        let d = OutcomeDistribution::from_pairs([(0.0, 1.0 - p), (1.0, p)]);
        let m = d.median_of(3);
        let expected = 3.0 * p * p * (1.0 - p) + p * p * p;
        assert!((m.prob(1.0) - expected).abs() < 1e-12);
    }

    #[test]
    fn binomial_tail_matches_direct_sum() {
        let (n, q) = (10usize, 0.3f64);
        let choose = |n: usize, k: usize| -> f64 { (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64) };
        for k in 0..=n {
            let direct: f64 = (k..=n).map(|i| choose(n, i) * q.powi(i as i32) * (1.0 - q).powi((n - i) as i32)).sum();
            assert!((binomial_upper_tail(n, k, q) - direct).abs() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn tv_distance_disjoint_supports() {
        let a = OutcomeDistribution::point(0.0);
        let b = OutcomeDistribution::point(1.0);
        assert_eq!(a.tv_distance(&b), 1.0);
        assert_eq!(a.tv_distance(&a), 0.0);
    }
}
