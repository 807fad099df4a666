use std::fmt;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{trial_seed, ExperimentConfig, ExperimentError};
use crate::mean::Mode;
use crate::multilevel::{Integrator, IntegratorConfig, LevelRecord};
use crate::stats::{log2_slope, median};
use crate::testbed::{constant, det_baseline, family_member, mc_baseline, plain_mc, TestFunction};

/// One trial of a convergence run.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub n_target: u64,
    pub n_realized: u64,
    pub trial: u64,
    pub estimate: f64,
    pub reference: f64,
    pub abs_error: f64,
    pub queries: u64,
    pub wall_ms: u64,
}

/// Median error at one budget.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSummary {
    pub n_target: u64,
    pub n_realized: u64,
    pub median_abs_error: f64,
}

#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub config: ExperimentConfig,
    pub rows: Vec<ResultRow>,
    pub points: Vec<PointSummary>,
    /// Least-squares slope of `log2(median error)` against `log2(n_realized)`.
    pub slope: f64,
    /// Same fit against `log2(n_target)`.
    pub slope_vs_target: f64,
    /// `−(r/d + 1)`.
    pub theory: f64,
    /// `max n_realized / n_target` over the grid.
    pub overhead: f64,
    pub cert_violations: usize,
}

impl fmt::Display for ConvergenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = &self.config;
        writeln!(f, "# convergence d={} r={} p={} mode={} function={} trials={} seed={}", c.d, c.r, c.p, c.mode, c.function, c.trials, c.seed)?;
        writeln!(f, "# accounting: one Grover iterate = 1 query; ñ includes the classical level")?;
        writeln!(f, "{:>10} {:>12} {:>14}", "n_target", "n_realized", "median_error")?;
        for p in &self.points {
            writeln!(f, "{:>10} {:>12} {:>14.6e}", p.n_target, p.n_realized, p.median_abs_error)?;
        }
        writeln!(f, "slope vs n_realized: {:.4}", self.slope)?;
        writeln!(f, "slope vs n_target:   {:.4}", self.slope_vs_target)?;
        writeln!(f, "theoretical slope:   {:.4}", self.theory)?;
        writeln!(f, "max n_realized/n_target: {:.2}", self.overhead)?;
        write!(f, "certificate violations: {}", self.cert_violations)
    }
}

fn integrator(cfg: &ExperimentConfig) -> Result<Integrator, ExperimentError> {
    Ok(Integrator::new(IntegratorConfig {
        d: cfg.d,
        r: cfg.r,
        p: cfg.p,
        mode: cfg.mode,
        delta: cfg.delta,
        c0: cfg.c0.unwrap_or(1.0),
        dither: cfg.dither,
        ..IntegratorConfig::default()
    })?)
}

fn integrand(cfg: &ExperimentConfig) -> Result<TestFunction, ExperimentError> {
    let f = match cfg.function.as_str() {
        "const" => constant(cfg.d, 1.0),
        name => family_member(cfg.d, name),
    };
    f.map_err(|e| ExperimentError::Config(e.to_string()))
}

/// Rejects state-vector grids that exceed the simulator caps before any work starts.
fn check_caps(cfg: &ExperimentConfig, integ: &Integrator, f: &TestFunction) -> Result<(), ExperimentError> {
    if cfg.mode != Mode::Statevec {
        return Ok(());
    }
    let sup = integ.sup_norm(&f.f);
    for &n in &cfg.grid {
        integ.check_statevec(&integ.plan(n, sup)?).map_err(|e| ExperimentError::Config(e.to_string()))?;
    }
    Ok(())
}

pub fn run_convergence(cfg: &ExperimentConfig) -> Result<ConvergenceReport, ExperimentError> {
    cfg.validate()?;
    let integ = integrator(cfg)?;
    let f = integrand(cfg)?;
    check_caps(cfg, &integ, &f)?;
    let mut rows = Vec::with_capacity(cfg.grid.len() * cfg.trials);
    let mut points = Vec::with_capacity(cfg.grid.len());
    let mut cert_violations = 0;
    for &n in &cfg.grid {
        let prep = integ.prepare(&f.f, n)?;
        cert_violations += prep.cert_violations();
        let n_realized = prep.plan.n_tilde;
        let batch: Vec<ResultRow> = (0..cfg.trials as u64)
            .into_par_iter()
            .map(|trial| {
                let start = Instant::now();
                let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(cfg.seed, n, trial));
                let est = prep.sample(&mut rng)?;
                let wall_ms = if cfg.wall_time { start.elapsed().as_millis() as u64 } else { 0 };
                Ok(ResultRow {
                    n_target: n,
                    n_realized,
                    trial,
                    estimate: est.value,
                    reference: f.reference,
                    abs_error: (est.value - f.reference).abs(),
                    queries: est.queries_used,
                    wall_ms,
                })
            })
            .collect::<Result<_, crate::Error>>()?;
        let errs: Vec<f64> = batch.iter().map(|r| r.abs_error).collect();
        points.push(PointSummary { n_target: n, n_realized, median_abs_error: median(&errs) });
        rows.extend(batch);
    }
    let xs: Vec<f64> = points.iter().map(|p| p.n_realized as f64).collect();
    let xt: Vec<f64> = points.iter().map(|p| p.n_target as f64).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.median_abs_error).collect();
    let overhead = points.iter().map(|p| p.n_realized as f64 / p.n_target as f64).fold(0.0, f64::max);
    Ok(ConvergenceReport {
        config: cfg.clone(),
        slope: fit(&xs, &ys),
        slope_vs_target: fit(&xt, &ys),
        theory: -(cfg.r as f64 / cfg.d as f64 + 1.0),
        overhead,
        cert_violations,
        rows,
        points,
    })
}

/// Slope fit that tolerates a single point or exact zeros.
fn fit(xs: &[f64], ys: &[f64]) -> f64 {
    if xs.len() < 2 || ys.iter().any(|&y| y <= 0.0) {
        return f64::NAN;
    }
    log2_slope(xs, ys)
}

/// Median errors of the three method families at one budget `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct ComparePoint {
    pub n: u64,
    pub quantum_n_realized: u64,
    pub deterministic: f64,
    pub residual_mc: f64,
    pub plain_mc: f64,
    pub quantum: f64,
}

#[derive(Clone, Debug)]
pub struct CompareReport {
    pub config: ExperimentConfig,
    pub points: Vec<ComparePoint>,
    /// Slopes against `n` (classical) and `n_realized` (quantum).
    pub slope_deterministic: f64,
    pub slope_residual_mc: f64,
    pub slope_plain_mc: f64,
    pub slope_quantum: f64,
    /// quantum < residual MC < deterministic at the largest `n`.
    pub ordering_holds: bool,
}

impl fmt::Display for CompareReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = &self.config;
        writeln!(f, "# compare d={} r={} p={} mode={} function={} trials={} seed={}", c.d, c.r, c.p, c.mode, c.function, c.trials, c.seed)?;
        writeln!(f, "# classical methods spend n evaluations; quantum spends ñ = n_realized queries for target n")?;
        writeln!(f, "{:>8} {:>12} {:>14} {:>14} {:>14} {:>14}", "n", "quantum_ñ", "deterministic", "residual_mc", "plain_mc", "quantum")?;
        for p in &self.points {
            writeln!(
                f,
                "{:>8} {:>12} {:>14.6e} {:>14.6e} {:>14.6e} {:>14.6e}",
                p.n, p.quantum_n_realized, p.deterministic, p.residual_mc, p.plain_mc, p.quantum
            )?;
        }
        writeln!(
            f,
            "slopes: deterministic {:.4} (theory {:.2}), residual_mc {:.4} (theory {:.2}), plain_mc {:.4} (theory -0.50), quantum {:.4} (theory {:.2})",
            self.slope_deterministic,
            -(c.r as f64 / c.d as f64),
            self.slope_residual_mc,
            -(c.r as f64 / c.d as f64 + 0.5),
            self.slope_plain_mc,
            self.slope_quantum,
            -(c.r as f64 / c.d as f64 + 1.0)
        )?;
        write!(f, "ordering quantum < residual_mc < deterministic at largest n: {}", self.ordering_holds)
    }
}

pub fn run_compare(cfg: &ExperimentConfig) -> Result<CompareReport, ExperimentError> {
    cfg.validate()?;
    let integ = integrator(cfg)?;
    let f = integrand(cfg)?;
    check_caps(cfg, &integ, &f)?;
    // separate stream for classical Monte Carlo
    let mc_seed = cfg.seed ^ 0x6D63_5F62_6173_656C;
    let mut points = Vec::with_capacity(cfg.grid.len());
    for &n in &cfg.grid {
        let prep = integ.prepare(&f.f, n)?;
        let quantum: Vec<f64> = (0..cfg.trials as u64)
            .into_par_iter()
            .map(|trial| {
                let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(cfg.seed, n, trial));
                Ok((prep.sample(&mut rng)?.value - f.reference).abs())
            })
            .collect::<Result<_, crate::Error>>()?;
        let classical: Vec<(f64, f64)> = (0..cfg.trials as u64)
            .into_par_iter()
            .map(|trial| {
                let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(mc_seed, n, trial));
                let res = mc_baseline(&f, cfg.r, n, &mut rng)?;
                let plain = plain_mc(&f, n, &mut rng)?;
                Ok((res.error, plain.error))
            })
            .collect::<Result<_, crate::Error>>()?;
        let det = det_baseline(&f, cfg.r, n)?;
        points.push(ComparePoint {
            n,
            quantum_n_realized: prep.plan.n_tilde,
            deterministic: det.error,
            residual_mc: median(&classical.iter().map(|c| c.0).collect::<Vec<_>>()),
            plain_mc: median(&classical.iter().map(|c| c.1).collect::<Vec<_>>()),
            quantum: median(&quantum),
        });
    }
    let ns: Vec<f64> = points.iter().map(|p| p.n as f64).collect();
    let nq: Vec<f64> = points.iter().map(|p| p.quantum_n_realized as f64).collect();
    let col = |g: fn(&ComparePoint) -> f64| points.iter().map(g).collect::<Vec<f64>>();
    let last = points.last().expect("grid is nonempty");
    Ok(CompareReport {
        config: cfg.clone(),
        slope_deterministic: fit(&ns, &col(|p| p.deterministic)),
        slope_residual_mc: fit(&ns, &col(|p| p.residual_mc)),
        slope_plain_mc: fit(&ns, &col(|p| p.plain_mc)),
        slope_quantum: fit(&nq, &col(|p| p.quantum)),
        ordering_holds: last.quantum < last.residual_mc && last.residual_mc < last.deterministic,
        points,
    })
}

/// Resource use of one run at target budget `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct CostPoint {
    pub n: u64,
    pub n_realized: u64,
    pub k0: usize,
    pub k: usize,
    pub m_star: u32,
    pub max_qubits: usize,
    pub max_qubits_with_ancilla: usize,
    pub measurements: u64,
    /// `Σ_l ν_l`.
    pub stages: usize,
    pub levels: Vec<LevelRecord>,
}

impl CostPoint {
    pub fn overhead(&self) -> f64 {
        self.n_realized as f64 / self.n as f64
    }

    pub fn qubits_per_log2n(&self) -> f64 {
        self.max_qubits as f64 / (self.n as f64).log2()
    }

    pub fn measurements_per_log2n_sq(&self) -> f64 {
        self.measurements as f64 / (self.n as f64).log2().powi(2)
    }
}

#[derive(Clone, Debug)]
pub struct CostReport {
    pub config: ExperimentConfig,
    pub points: Vec<CostPoint>,
}

impl CostReport {
    /// `max ñ/n` over the grid.
    pub fn max_overhead(&self) -> f64 {
        self.points.iter().map(CostPoint::overhead).fold(0.0, f64::max)
    }

    /// Spread `max/min` of `ñ/n` over the grid.
    pub fn overhead_spread(&self) -> f64 {
        let min = self.points.iter().map(CostPoint::overhead).fold(f64::INFINITY, f64::min);
        self.max_overhead() / min
    }

    pub fn max_qubits_per_log2n(&self) -> f64 {
        self.points.iter().map(CostPoint::qubits_per_log2n).fold(0.0, f64::max)
    }
}

impl fmt::Display for CostReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = &self.config;
        writeln!(f, "# cost d={} r={} p={} mode={} function={}", c.d, c.r, c.p, c.mode, c.function)?;
        writeln!(f, "# queries: one Grover iterate = 1 query; qubits = d·l + value + flag + phase (ancilla column adds the Γ_l simulation registers)")?;
        for p in &self.points {
            writeln!(
                f,
                "n={} ñ={} ñ/n={:.2} k0={} k={} m*={} max_qubits={} (with ancilla {}) qubits/log2(n)={:.3} measurements={} stages={} measurements/log2(n)^2={:.3}",
                p.n,
                p.n_realized,
                p.overhead(),
                p.k0,
                p.k,
                p.m_star,
                p.max_qubits,
                p.max_qubits_with_ancilla,
                p.qubits_per_log2n(),
                p.measurements,
                p.stages,
                p.measurements_per_log2n_sq()
            )?;
            for l in &p.levels {
                writeln!(
                    f,
                    "    level {:>2}: N_l={} n_l={} ν_l={} queries={} qubits={} measurements={}",
                    l.l, l.len, l.budget, l.reps, l.queries, l.qubits, l.measurements
                )?;
            }
        }
        writeln!(f, "max ñ/n: {:.2}; spread of ñ/n across grid: {:.3}", self.max_overhead(), self.overhead_spread())?;
        write!(f, "max qubits/log2(n): {:.3}", self.max_qubits_per_log2n())
    }
}

pub fn run_cost(cfg: &ExperimentConfig) -> Result<CostReport, ExperimentError> {
    cfg.validate()?;
    let integ = integrator(cfg)?;
    let f = integrand(cfg)?;
    check_caps(cfg, &integ, &f)?;
    let mut points = Vec::with_capacity(cfg.grid.len());
    for &n in &cfg.grid {
        let prep = integ.prepare(&f.f, n)?;
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(cfg.seed, n, 0));
        let est = prep.sample(&mut rng)?;
        points.push(CostPoint {
            n,
            n_realized: est.queries_used,
            k0: prep.plan.k0,
            k: prep.plan.k,
            m_star: prep.plan.m_star,
            max_qubits: est.max_qubits(),
            max_qubits_with_ancilla: est.max_qubits_with_ancilla(),
            measurements: est.measurements(),
            stages: est.stages(),
            levels: est.levels,
        });
    }
    Ok(CostReport { config: cfg.clone(), points })
}
