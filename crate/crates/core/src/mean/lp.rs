use rand::Rng;

use super::bounded::{estimate_mean_bounded, grover_budget, semantic_draw};
use super::{Band, BandRecord, EstimatorConfig, LpBallCert, MeanEstimate, Mode, SequenceOracle};
use crate::error::{domain, Result};

/// Query allocation of the `L_p^N` estimator; identical for both signs.
#[derive(Clone, Debug, PartialEq)]
pub struct LpPlan {
    pub len: usize,
    pub budget: u64,
    /// Cutoff exponent `k`: entries with `|g| ≥ 2^k` form the tail.
    pub cutoff: i32,
    pub min_band: i32,
    pub per_sign: u64,
    pub tail_charge: u64,
    /// `(j, M_j)` for `j ∈ [min_band, cutoff)`; `M_j = 0` marks a band left unestimated.
    pub bands: Vec<(i32, usize)>,
}

impl LpPlan {
    /// Width of the phase register of the widest estimated band.
    pub fn phase_bits(&self) -> usize {
        self.bands.iter().filter(|&&(_, m)| m > 0).map(|&(_, m)| m.trailing_zeros() as usize).max().unwrap_or(0)
    }

    pub fn new(len: usize, n: u64, p: f64, cfg: &EstimatorConfig) -> Result<Self> {
        if n < 2 {
            return Err(domain!("query budget n = {n} is below 2"));
        }
        if !(cfg.c0 > 0.0) {
            return Err(domain!("cutoff constant c0 = {} must be positive", cfg.c0));
        }
        let (nf, lf) = (n as f64, len as f64);
        let target = cfg.c0 * lf / nf * (nf / lf.sqrt()).log2().max(1.0);
        let mut cutoff = target.log2().ceil().max(2.0) as i32;
        while cutoff > 2 && 2f64.powi(cutoff - 1) >= target {
            cutoff -= 1;
        }
        while 2f64.powi(cutoff) < target {
            cutoff += 1;
        }
        let min_band = cfg.min_band.min(cutoff - 1);
        let per_sign = n / 2;
        // |g(i)| ≤ N^{1/p} on the unit ball, so a cutoff above that leaves the tail empty
        let tail_empty = 2f64.powi(cutoff) > lf.powf(1.0 / p);
        let tail_charge = if tail_empty { 0 } else { per_sign / 4 };
        let avail = (per_sign - tail_charge) as f64;
        let weight = |j: i32| 2f64.powf(-(j.abs() as f64) / 2.0);
        let total: f64 = (min_band..cutoff).map(weight).sum();
        let bands = (min_band..cutoff)
            .map(|j| {
                let b = (avail * weight(j) / total).floor() as u64;
                (j, grover_budget(b, 1).unwrap_or(0))
            })
            .collect();
        Ok(Self { len, budget: n, cutoff, min_band, per_sign, tail_charge, bands })
    }

    /// Queries charged by one run.
    pub fn queries(&self) -> u64 {
        2 * (self.tail_charge + self.bands.iter().map(|&(_, m)| m as u64).sum::<u64>())
    }

    /// Band of a normalized magnitude `v ≥ 0`; `None` for the tail.
    pub fn band_of(&self, v: f64) -> Option<usize> {
        if v >= 2f64.powi(self.cutoff) {
            return None;
        }
        if v < 2f64.powi(self.min_band + 1) {
            return Some(0);
        }
        let mut j = v.log2().floor() as i32;
        if 2f64.powi(j) > v {
            j -= 1;
        }
        if 2f64.powi(j + 1) <= v {
            j += 1;
        }
        Some((j.clamp(self.min_band, self.cutoff - 1) - self.min_band) as usize)
    }
}

/// Everything a semantic run of the estimator needs from one sweep of `f`.
#[derive(Clone, Debug, PartialEq)]
pub struct LpSummary {
    pub plan: LpPlan,
    pub scale: f64,
    /// Per sign, per band: mean over `Z[0, N)` of the band-masked `|g|/2^{j+1}`.
    pub amplitudes: [Vec<f64>; 2],
    /// Per sign: `(1/N) Σ_{tail} |g|`.
    pub tail: [f64; 2],
    /// `S_N f`.
    pub exact: f64,
    /// `‖f‖_{L_p^N}` for the certificate's `p`.
    pub norm: f64,
    pub p: f64,
}

impl LpSummary {
    pub fn build(f: &SequenceOracle, cert: &LpBallCert, plan: LpPlan) -> Self {
        let nb = plan.bands.len();
        let scale = cert.bound;
        let inv = 1.0 / scale;
        let p = cert.p;
        #[derive(Clone)]
        struct Acc {
            bands: [Vec<f64>; 2],
            tail: [f64; 2],
            sum: f64,
            pow: f64,
        }
        let empty = || Acc { bands: [vec![0.0; nb], vec![0.0; nb]], tail: [0.0; 2], sum: 0.0, pow: 0.0 };
        let acc = f.fold(
            empty,
            |mut acc, _, v| {
                acc.sum += v;
                acc.pow += v.abs().powf(p);
                let g = v * inv;
                if g != 0.0 {
                    let sign = usize::from(g < 0.0);
                    let mag = g.abs();
                    match plan.band_of(mag) {
                        Some(b) => acc.bands[sign][b] += mag / 2f64.powi(plan.bands[b].0 + 1),
                        None => acc.tail[sign] += mag,
                    }
                }
                acc
            },
            |mut a, b| {
                for s in 0..2 {
                    for (x, y) in a.bands[s].iter_mut().zip(&b.bands[s]) {
                        *x += y;
                    }
                    a.tail[s] += b.tail[s];
                }
                a.sum += b.sum;
                a.pow += b.pow;
                a
            },
        );
        let n = f.len() as f64;
        let norm = (acc.pow / n).powf(1.0 / p);
        let [pos, neg] = acc.bands;
        Self {
            plan,
            scale,
            amplitudes: [pos.into_iter().map(|x| x / n).collect(), neg.into_iter().map(|x| x / n).collect()],
            tail: [acc.tail[0] / n, acc.tail[1] / n],
            exact: acc.sum / n,
            norm,
            p,
        }
    }

    /// Whether the certificate used for scaling actually holds.
    pub fn cert_holds(&self) -> bool {
        self.norm <= self.scale * (1.0 + 1e-9)
    }

    /// One estimate and its charged queries, without band records.
    pub fn sample_value<R: Rng + ?Sized>(&self, dither: bool, rng: &mut R) -> (f64, u64) {
        let pad = self.plan.len.next_power_of_two() as f64 / self.plan.len as f64;
        let mut total = 0.0;
        for (s, sign) in [(0usize, 1.0), (1, -1.0)] {
            let mut part = self.tail[s];
            for (b, &(j, m)) in self.plan.bands.iter().enumerate() {
                if m > 0 {
                    part += 2f64.powi(j + 1) * semantic_draw(self.amplitudes[s][b], pad, m, dither, rng);
                }
            }
            total += sign * part;
        }
        (self.scale * total, self.plan.queries())
    }

    pub fn sample<R: Rng + ?Sized>(&self, dither: bool, rng: &mut R) -> MeanEstimate {
        let pad = self.plan.len.next_power_of_two() as f64 / self.plan.len as f64;
        let mut bands = Vec::new();
        let mut total = 0.0;
        for (s, sign) in [(0usize, 1i8), (1, -1)] {
            for (b, &(j, m)) in self.plan.bands.iter().enumerate() {
                let est = if m > 0 { 2f64.powi(j + 1) * semantic_draw(self.amplitudes[s][b], pad, m, dither, rng) } else { 0.0 };
                let est = self.scale * est;
                total += sign as f64 * est;
                bands.push(BandRecord { sign, band: Band::Dyadic(j), grover: m, queries: m as u64, estimate: est });
            }
            let tail = self.scale * self.tail[s];
            total += sign as f64 * tail;
            bands.push(BandRecord { sign, band: Band::Tail, grover: 0, queries: self.plan.tail_charge, estimate: tail });
        }
        MeanEstimate {
            value: total,
            queries_used: self.plan.queries(),
            oracle_applications: 0,
            mode: Mode::Semantic,
            semantic_tail: true,
            bands,
        }
    }
}

/// Quantum estimate of `S_N f` for `f` in the certified ball `{‖f‖_{L_p^N} ≤ B}` using at most `n` queries.
///
/// `f` is split into positive and negative parts, each normalized by `B` and cut
/// into dyadic magnitude bands below the cutoff `2^k`; every band is estimated by
/// amplitude estimation with a budget decaying like `2^{−|j|/2}`. Entries above
/// the cutoff are summed exactly (semantic tail).
pub fn estimate_mean_lp<R: Rng + ?Sized>(
    f: &SequenceOracle,
    cert: &LpBallCert,
    n: u64,
    cfg: &EstimatorConfig,
    rng: &mut R,
) -> Result<MeanEstimate> {
    let plan = LpPlan::new(f.len(), n, cert.p, cfg)?;
    if cfg.verify_cert {
        cert.check(f)?;
    }
    match cfg.mode {
        Mode::Semantic => Ok(LpSummary::build(f, cert, plan).sample(cfg.dither, rng)),
        Mode::Statevec => statevec_lp(f, cert, plan, cfg, rng),
    }
}

fn statevec_lp<R: Rng + ?Sized>(
    f: &SequenceOracle,
    cert: &LpBallCert,
    plan: LpPlan,
    cfg: &EstimatorConfig,
    rng: &mut R,
) -> Result<MeanEstimate> {
    let inner = EstimatorConfig { reps: 1, ..cfg.clone() };
    let scale = cert.bound;
    let mut bands = Vec::new();
    let mut total = 0.0;
    let mut raw = 0;
    for sign in [1i8, -1] {
        for (b, &(j, m)) in plan.bands.iter().enumerate() {
            let mut est = 0.0;
            if m > 0 {
                let pl = plan.clone();
                let width = 2f64.powi(j + 1);
                let band = f.map(move |v| {
                    let g = sign as f64 * v / scale;
                    if g > 0.0 && pl.band_of(g) == Some(b) {
                        (g / width).min(1.0)
                    } else {
                        0.0
                    }
                });
                let e = estimate_mean_bounded(&band, m as u64, &inner, rng)?;
                raw += e.oracle_applications;
                est = scale * width * e.value;
            }
            total += sign as f64 * est;
            bands.push(BandRecord { sign, band: Band::Dyadic(j), grover: m, queries: m as u64, estimate: est });
        }
        let tail = f.fold(
            || 0.0,
            |s, _, v| {
                let g = sign as f64 * v / scale;
                if g > 0.0 && plan.band_of(g).is_none() {
                    s + g
                } else {
                    s
                }
            },
            |a, b| a + b,
        ) / f.len() as f64
            * scale;
        total += sign as f64 * tail;
        bands.push(BandRecord { sign, band: Band::Tail, grover: 0, queries: plan.tail_charge, estimate: tail });
    }
    Ok(MeanEstimate {
        value: total,
        queries_used: plan.queries(),
        oracle_applications: raw,
        mode: Mode::Statevec,
        semantic_tail: true,
        bands,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn plan_respects_budget() {
        let cfg = EstimatorConfig::default();
        for &(len, n) in &[(256usize, 64u64), (1 << 10, 1 << 7), (1 << 20, 100), (16, 1 << 12), (1, 2)] {
            for p in [1.0, 1.5, 2.0, 4.0] {
                let plan = LpPlan::new(len, n, p, &cfg).unwrap();
                assert!(plan.queries() <= n, "N={len} n={n} p={p}");
                assert!(plan.cutoff >= 2);
            }
        }
    }

    #[test]
    fn band_lookup() {
        let plan = LpPlan::new(256, 64, 2.0, &EstimatorConfig::default()).unwrap();
        assert_eq!(plan.cutoff, 3);
        assert_eq!(plan.band_of(0.0), Some(0));
        assert_eq!(plan.band_of(0.2), Some(0));
        assert_eq!(plan.band_of(0.999), Some(0));
        assert_eq!(plan.band_of(1.0), Some(1));
        assert_eq!(plan.band_of(2.0), Some(2));
        assert_eq!(plan.band_of(7.99), Some(3));
        assert_eq!(plan.band_of(8.0), None);
    }

    #[test]
    fn spike_lands_in_tail() {
        let n_len = 256;
        let f = SequenceOracle::new(n_len, |i| if i == 17 { 16.0 } else { 0.0 }).unwrap();
        let cert = LpBallCert::new(2.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let est = estimate_mean_lp(&f, &cert, 64, &EstimatorConfig::default(), &mut rng).unwrap();
        let tail = est.bands.iter().find(|b| b.band == Band::Tail && b.sign == 1).unwrap();
        assert!((tail.estimate - 1.0 / 16.0).abs() < 1e-15);
        assert!((est.value - 1.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn scale_equivariance() {
        let f = SequenceOracle::new(512, |i| ((i as f64) * 0.37).sin() * 0.8).unwrap();
        let cert = LpBallCert::new(2.0, 1.0).unwrap();
        let cfg = EstimatorConfig { dither: true, ..EstimatorConfig::default() };
        for c in [0.5, 3.0, 1e-6] {
            let g = f.map(move |v| c * v);
            let a = estimate_mean_lp(&f, &cert, 256, &cfg, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
            let b = estimate_mean_lp(&g, &cert.scaled(c), 256, &cfg, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
            assert!((b.value - c * a.value).abs() <= 1e-12 * c.max(1.0), "c={c}");
        }
    }

    #[test]
    fn invalid_cert_detected_when_verifying() {
        let f = SequenceOracle::new(16, |_| 2.0).unwrap();
        let cert = LpBallCert::new(2.0, 1.0).unwrap();
        let cfg = EstimatorConfig { verify_cert: true, ..EstimatorConfig::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        assert!(matches!(estimate_mean_lp(&f, &cert, 64, &cfg, &mut rng), Err(crate::Error::Contract(_))));
    }

    #[test]
    fn small_values_single_band_pair() {
        let f = SequenceOracle::new(64, |i| if i % 2 == 0 { 0.75 } else { -0.25 }).unwrap();
        let cert = LpBallCert::new(2.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut errs: Vec<f64> = (0..200)
            .map(|_| (estimate_mean_lp(&f, &cert, 1 << 12, &EstimatorConfig::default(), &mut rng).unwrap().value - 0.25).abs())
            .collect();
        assert!(crate::stats::lower_median(&mut errs) < 0.01);
    }

    #[test]
    fn statevec_matches_semantic_on_dyadic_values() {
        // every band amplitude is an eigenphase, so both modes are deterministic
        let t = 2.0 / 3.0;
        let f = SequenceOracle::from_values(vec![t, t, t, 0.0]).unwrap();
        let cert = LpBallCert::new(2.0, 1.0).unwrap();
        let sem = estimate_mean_lp(&f, &cert, 64, &EstimatorConfig::default(), &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let cfg = EstimatorConfig { mode: Mode::Statevec, value_bits: 2, ..EstimatorConfig::default() };
        let sv = estimate_mean_lp(&f, &cert, 64, &cfg, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(sem.queries_used, sv.queries_used);
        assert!((sem.value - sv.value).abs() < 1e-12);
        assert!((sv.value - 0.5).abs() < 1e-12);
    }
}
