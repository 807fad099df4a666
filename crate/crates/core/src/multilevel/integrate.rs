use std::sync::Arc;

use rand::Rng;

use super::level::{Integrand, LevelDiscretization};
use super::plan::{LevelPlan, MultilevelPlan};
use super::quadrature::{base_quadrature, composed_apply, difference_quadrature, CubePartition, Quadrature};
use crate::error::{domain, Result};
use crate::mean::{estimate_mean_lp, EstimatorConfig, LpBallCert, LpPlan, LpSummary, Mode};
use crate::stats::lower_median;

/// Levels whose sequences have at most this many entries are used to measure the norm constant.
const PROBE_ENTRIES: usize = 1 << 12;

#[derive(Clone, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub d: usize,
    pub r: usize,
    pub p: f64,
    pub mode: Mode,
    /// Overrides the default `δ`.
    pub delta: Option<f64>,
    /// Tail cutoff constant of the mean estimator.
    pub c0: f64,
    /// Amplitude-scale dither in the mean estimator.
    pub dither: bool,
    /// Safety factor applied to the measured level-norm constant.
    pub cert_margin: f64,
    /// Value register width for state-vector amplitude estimation.
    pub value_bits: usize,
}

/// Widest circuit the state-vector mode will simulate.
pub const STATEVEC_MAX_QUBITS: usize = 20;

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { d: 1, r: 1, p: 2.0, mode: Mode::Semantic, delta: None, c0: 1.0, dither: true, cert_margin: 2.0, value_bits: 8 }
    }
}

/// Per-level outcome of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelRecord {
    pub l: usize,
    pub len: u64,
    pub budget: u64,
    pub reps: usize,
    pub estimate: f64,
    /// Queries on `f`: `ν_l · 2κ' ·` (queries of one mean estimate).
    pub queries: u64,
    /// Qubits of the largest amplitude-estimation register at this level.
    pub qubits: usize,
    /// `qubits` plus the ancillas that simulate a query on `Γ_l(f)` by queries on `f`.
    pub qubits_with_ancilla: usize,
    /// Amplitude-estimation measurements.
    pub measurements: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntegralEstimate {
    pub value: f64,
    /// `J_{k0} f`, computed classically.
    pub classical: f64,
    /// Realized `ñ`: `n` for the classical level plus all level queries.
    pub queries_used: u64,
    pub levels: Vec<LevelRecord>,
    pub mode: Mode,
}

impl IntegralEstimate {
    pub fn max_qubits(&self) -> usize {
        self.levels.iter().map(|l| l.qubits).max().unwrap_or(0)
    }

    pub fn max_qubits_with_ancilla(&self) -> usize {
        self.levels.iter().map(|l| l.qubits_with_ancilla).max().unwrap_or(0)
    }

    pub fn measurements(&self) -> u64 {
        self.levels.iter().map(|l| l.measurements).sum()
    }

    /// `Σ_l ν_l`.
    pub fn stages(&self) -> usize {
        self.levels.iter().map(|l| l.reps).sum()
    }
}

/// Everything about one level that does not depend on the random seed.
#[derive(Clone, Debug)]
pub struct PreparedLevel {
    pub plan: LevelPlan,
    pub cert: LpBallCert,
    pub lp_plan: LpPlan,
    pub discretization: LevelDiscretization,
    /// Band summary of `Γ_l(f)` (semantic mode).
    pub summary: Option<LpSummary>,
    /// `S_{N_l} Γ_l(f)` when known.
    pub coded_mean: Option<f64>,
    pub cert_ok: bool,
}

/// Deterministic part of an integration: plan, classical level and level sweeps.
#[derive(Clone, Debug)]
pub struct PreparedIntegral {
    pub plan: MultilevelPlan,
    pub classical: f64,
    pub levels: Vec<PreparedLevel>,
    /// Measured `sup_l 2^{rl} ‖J'_l f‖_{L_p}` over the probe levels.
    pub norm_constant: f64,
    pub sup_norm: f64,
    estimator: EstimatorConfig,
}

impl PreparedIntegral {
    pub fn cert_violations(&self) -> usize {
        self.levels.iter().filter(|l| !l.cert_ok).count()
    }

    pub fn clamped_evaluations(&self) -> u64 {
        self.levels.iter().map(|l| l.discretization.clamped()).sum()
    }

    /// `J_{k0} f + Σ_l S_{N_l} Γ_l(f)`: the output if every mean estimate were exact.
    pub fn noiseless_value(&self) -> Option<f64> {
        self.levels.iter().try_fold(self.classical, |s, l| l.coded_mean.map(|m| s + m))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<IntegralEstimate> {
        let kp = self.plan.kappa_prime as u64;
        let ancilla = self.plan.kappa_prime.next_power_of_two().trailing_zeros() as usize
            + self.plan.kappa_prime * self.plan.m_star as usize;
        let mut value = self.classical;
        let mut queries = self.plan.n;
        let mut records = Vec::with_capacity(self.levels.len());
        for lv in &self.levels {
            let reps = lv.plan.reps;
            let mut draws = Vec::with_capacity(reps);
            let mut lp_queries = 0;
            match &lv.summary {
                Some(summary) => {
                    for _ in 0..reps {
                        let (v, q) = summary.sample_value(self.estimator.dither, rng);
                        draws.push(v);
                        lp_queries += q;
                    }
                }
                None => {
                    let seq = lv.discretization.sequence();
                    for _ in 0..reps {
                        let est = estimate_mean_lp(&seq, &lv.cert, lv.plan.budget, &self.estimator, rng)?;
                        draws.push(est.value);
                        lp_queries += est.queries_used;
                    }
                }
            }
            let estimate = lower_median(&mut draws);
            let level_queries = 2 * kp * lp_queries;
            let phase_bits = lv.lp_plan.phase_bits();
            let active = lv.lp_plan.bands.iter().filter(|&&(_, m)| m > 0).count() as u64;
            let qubits = self.plan.d * lv.plan.l + self.estimator.value_bits + 1 + phase_bits;
            value += estimate;
            queries += level_queries;
            records.push(LevelRecord {
                l: lv.plan.l,
                len: lv.plan.len,
                budget: lv.plan.budget,
                reps,
                estimate,
                queries: level_queries,
                qubits,
                qubits_with_ancilla: qubits + ancilla,
                measurements: reps as u64 * 2 * active,
            });
        }
        Ok(IntegralEstimate { value, classical: self.classical, queries_used: queries, levels: records, mode: self.estimator.mode })
    }
}

/// The multilevel quantum integration algorithm for a fixed `(d, r, p)`.
#[derive(Clone, Debug)]
pub struct Integrator {
    pub config: IntegratorConfig,
    pub base: Quadrature<f64>,
    pub diff: Arc<Quadrature<f64>>,
}

impl Integrator {
    pub fn new(config: IntegratorConfig) -> Result<Self> {
        let base = base_quadrature::<f64>(config.d, config.r)?;
        let diff = Arc::new(difference_quadrature(&base, config.r));
        if !(config.cert_margin >= 1.0) {
            return Err(domain!("certificate margin {} must be at least 1", config.cert_margin));
        }
        Ok(Self { config, base, diff })
    }

    pub fn kappa(&self) -> usize {
        self.base.len()
    }

    pub fn kappa_prime(&self) -> usize {
        self.diff.len()
    }

    pub fn plan(&self, n: u64, sup_norm: f64) -> Result<MultilevelPlan> {
        let c = &self.config;
        MultilevelPlan::new(n, c.d, c.r, c.p, self.kappa(), self.kappa_prime(), sup_norm, c.delta)
    }

    fn estimator(&self) -> EstimatorConfig {
        EstimatorConfig {
            mode: self.config.mode,
            reps: 1,
            dither: self.config.dither,
            value_bits: self.config.value_bits,
            c0: self.config.c0,
            ..EstimatorConfig::default()
        }
    }

    fn probe_levels(&self) -> usize {
        let mut l = 0;
        while 1usize << (self.config.d * (l + 1)) <= PROBE_ENTRIES {
            l += 1;
        }
        l
    }

    /// Measured `sup|f|` on the nodes of the difference rule at the deepest probe level.
    pub fn sup_norm(&self, f: &Integrand) -> f64 {
        let part = CubePartition::new(self.config.d, self.probe_levels());
        (0..part.len())
            .map(|i| {
                let worst = std::cell::Cell::new(0.0f64);
                self.diff.apply_local(&part, i, |x| {
                    worst.set(worst.get().max(f(x).abs()));
                    0.0
                });
                worst.get()
            })
            .fold(0.0, f64::max)
    }

    /// `max_l 2^{rl} ‖(J'_{li} f)_i‖_{L_p}` over the probe levels.
    pub fn norm_constant(&self, f: &Integrand) -> f64 {
        let (d, r, p) = (self.config.d, self.config.r, self.config.p);
        (0..=self.probe_levels())
            .map(|l| {
                let part = CubePartition::new(d, l);
                let pow: f64 = (0..part.len()).map(|i| self.diff.apply_local(&part, i, |x| f(x)).abs().powf(p)).sum();
                (pow / part.len() as f64).powf(1.0 / p) * 2f64.powi((r * l) as i32)
            })
            .fold(0.0, f64::max)
    }

    /// Largest circuit width of a plan: index, value, flag and phase registers.
    pub fn max_qubits(&self, plan: &MultilevelPlan) -> Result<usize> {
        let estimator = self.estimator();
        plan.levels.iter().try_fold(0, |acc, lp| {
            let bands = LpPlan::new(lp.len as usize, lp.budget, self.config.p, &estimator)?;
            let phase = bands.phase_bits();
            Ok(acc.max(self.config.d * lp.l + self.config.value_bits + 1 + phase))
        })
    }

    /// Rejects plans the state-vector simulator cannot hold.
    pub fn check_statevec(&self, plan: &MultilevelPlan) -> Result<()> {
        if self.config.d != 1 {
            return Err(domain!("state-vector mode supports d = 1 only"));
        }
        let q = self.max_qubits(plan)?;
        if q > STATEVEC_MAX_QUBITS {
            return Err(domain!("state-vector mode needs {q} qubits at n = {}, cap is {STATEVEC_MAX_QUBITS}", plan.n));
        }
        Ok(())
    }

    /// Plans the run, computes the classical level and sweeps every quantum level once.
    pub fn prepare(&self, f: &Integrand, n: u64) -> Result<PreparedIntegral> {
        let sup_norm = self.sup_norm(f);
        let plan = self.plan(n, sup_norm)?;
        let estimator = self.estimator();
        if self.config.mode == Mode::Statevec {
            self.check_statevec(&plan)?;
        }
        let codec = plan.codec();
        let classical = composed_apply(&self.base, plan.k0, |x| f(x));
        let norm_constant = self.norm_constant(f);
        let floor = self.config.cert_margin * codec.resolution() * self.diff.abs_weight();
        let mut levels = Vec::with_capacity(plan.levels.len());
        for lp in &plan.levels {
            let bound = (self.config.cert_margin * norm_constant * 2f64.powi(-((self.config.r * lp.l) as i32))).max(floor);
            let cert = LpBallCert::new(self.config.p, bound)?;
            let disc = LevelDiscretization::new(f.clone(), self.config.d, lp.l, codec, self.diff.clone());
            let lp_plan = LpPlan::new(lp.len as usize, lp.budget, self.config.p, &estimator)?;
            let (summary, coded_mean, cert_ok) = match self.config.mode {
                Mode::Semantic => {
                    let s = LpSummary::build(&disc.sequence(), &cert, lp_plan.clone());
                    let (mean, ok) = (s.exact, s.cert_holds());
                    (Some(s), Some(mean), ok)
                }
                Mode::Statevec => {
                    let seq = disc.sequence();
                    let ok = cert.check(&seq).is_ok();
                    (None, Some(seq.mean()), ok)
                }
            };
            levels.push(PreparedLevel { plan: lp.clone(), cert, lp_plan, discretization: disc, summary, coded_mean, cert_ok });
        }
        Ok(PreparedIntegral { plan, classical, levels, norm_constant, sup_norm, estimator })
    }

    pub fn integrate<R: Rng + ?Sized>(&self, f: &Integrand, n: u64, rng: &mut R) -> Result<IntegralEstimate> {
        self.prepare(f, n)?.sample(rng)
    }
}
