use std::fmt::Write as _;

use crate::error::{capacity, domain, Result};

use super::FixedPointCodec;

/// Budgets of one quantum level `l`.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelPlan {
    pub l: usize,
    /// `N_l = 2^{dl}`.
    pub len: u64,
    /// Query budget `n_l` of one mean estimate.
    pub budget: u64,
    /// Median repetitions `ν_l`.
    pub reps: usize,
}

/// Balanced parameters of the multilevel algorithm for a target budget `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct MultilevelPlan {
    pub n: u64,
    pub d: usize,
    pub r: usize,
    pub p: f64,
    pub kappa: usize,
    pub kappa_prime: usize,
    pub k0: usize,
    pub k: usize,
    pub delta: f64,
    pub levels: Vec<LevelPlan>,
    pub m_star: u32,
    /// `ñ = n + 2κ' Σ ν_l n_l`.
    pub n_tilde: u64,
}

/// Supremum of admissible `δ`.
pub fn delta_limit(d: usize, r: usize, p: f64) -> f64 {
    let (d, r) = (d as f64, r as f64);
    r.min(p / 2.0 * (r - (2.0 / p - 1.0) * d))
}

/// `ν_l = ⌈8(2 ln(l − k0 + 1) + ln 8)⌉`.
pub fn median_reps(offset: usize) -> usize {
    (8.0 * (2.0 * ((offset + 1) as f64).ln() + 8f64.ln())).ceil() as usize
}

impl MultilevelPlan {
    /// Builds the plan; `sup_norm` bounds `‖f‖_∞` for the codec range and
    /// `delta` overrides the default `δ = ½ sup`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        n: u64,
        d: usize,
        r: usize,
        p: f64,
        kappa: usize,
        kappa_prime: usize,
        sup_norm: f64,
        delta: Option<f64>,
    ) -> Result<Self> {
        if d == 0 || r == 0 {
            return Err(domain!("d and r must be positive"));
        }
        if !(p >= 1.0) {
            return Err(domain!("p = {p} must be at least 1"));
        }
        if r as f64 / d as f64 <= 1.0 / p {
            return Err(domain!("need r/d > 1/p, got r={r}, d={d}, p={p}"));
        }
        if n < (kappa as u64).max(5) {
            return Err(domain!("budget n = {n} below max(κ, 5) = {}", kappa.max(5)));
        }
        let limit = delta_limit(d, r, p);
        let delta = match delta {
            Some(x) if x > 0.0 && x < limit => x,
            Some(x) => return Err(domain!("δ = {x} outside (0, {limit})")),
            None => 0.5 * limit,
        };
        let mut k0 = 0;
        while (kappa as u128) << (d * (k0 + 1)) <= n as u128 {
            k0 += 1;
        }
        let k = ((r + d) * k0).div_ceil(r).max(k0 + 1);
        if d * (k - 1) > 40 {
            return Err(capacity!("finest level 2^{} cubes is out of reach", d * (k - 1)));
        }
        let levels: Vec<LevelPlan> = (k0..k)
            .map(|l| LevelPlan {
                l,
                len: 1u64 << (d * l),
                budget: 2f64.powf(d as f64 * k0 as f64 - delta * (l - k0) as f64).ceil() as u64,
                reps: median_reps(l - k0),
            })
            .collect();
        let precision = (r * k) as f64 + (k as f64).log2();
        let mut half = precision.ceil().max(1.0) as u32;
        while 2f64.powi(half as i32 - 1) < sup_norm {
            half += 1;
        }
        let m_star = 2 * half;
        if m_star > FixedPointCodec::MAX_WIDTH {
            return Err(capacity!("codec width m* = {m_star} exceeds {}", FixedPointCodec::MAX_WIDTH));
        }
        let n_tilde = n + 2 * kappa_prime as u64 * levels.iter().map(|lv| lv.reps as u64 * lv.budget).sum::<u64>();
        Ok(Self { n, d, r, p, kappa, kappa_prime, k0, k, delta, levels, m_star, n_tilde })
    }

    pub fn codec(&self) -> FixedPointCodec {
        FixedPointCodec::new(self.m_star).expect("validated at plan time")
    }

    /// `Σ_l e^{−ν_l/8}`, the total failure budget of the boosted levels.
    pub fn failure_budget(&self) -> f64 {
        self.levels.iter().map(|lv| (-(lv.reps as f64) / 8.0).exp()).sum()
    }

    /// `ñ / n`.
    pub fn overhead(&self) -> f64 {
        self.n_tilde as f64 / self.n as f64
    }

    /// Line-oriented `key=value` record.
    pub fn to_record(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "n={}", self.n);
        let _ = writeln!(s, "d={}", self.d);
        let _ = writeln!(s, "r={}", self.r);
        let _ = writeln!(s, "p={}", self.p);
        let _ = writeln!(s, "kappa={}", self.kappa);
        let _ = writeln!(s, "kappa_prime={}", self.kappa_prime);
        let _ = writeln!(s, "k0={}", self.k0);
        let _ = writeln!(s, "k={}", self.k);
        let _ = writeln!(s, "delta={}", self.delta);
        let _ = writeln!(s, "m_star={}", self.m_star);
        let _ = writeln!(s, "n_tilde={}", self.n_tilde);
        for lv in &self.levels {
            let _ = writeln!(s, "level.{}=N:{} n:{} nu:{}", lv.l, lv.len, lv.budget, lv.reps);
        }
        s
    }
}
