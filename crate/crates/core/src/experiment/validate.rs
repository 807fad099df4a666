use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::mean::{
    ae_exact_distribution, ae_statevec_distribution, ae_success_radius, estimate_mean_bounded, estimate_mean_lp, truncated_sums,
    EstimatorConfig, LpBallCert, SequenceOracle,
};
use crate::multilevel::{
    base_quadrature, composed_apply, difference_quadrature, FixedPointCodec, Integrand, Integrator, IntegratorConfig, MultilevelPlan,
};
use crate::query::{reduce_via_gamma, Eta, GammaReduction, OracleFunction, QuerySpec, QueryTally};
use crate::statevec::{OutcomeDistribution, Permutation, Register};
use crate::stats::median;
use crate::testbed::{bump_integral_gauss, bump_integral_romberg, family_member, hard_instance, reference::composite_gauss_cube};
use crate::{StateVec, Unitary};

#[derive(Clone, Debug, Default)]
pub struct ValidateOptions {
    pub seed: u64,
    /// Run the codec suite with a codec two bits narrower than declared.
    pub codec_fault: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub millis: u128,
}

type SuiteResult = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn sim<T>(r: crate::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

/// Runs every invariant suite, in a fixed order.
pub fn run_suites(opts: &ValidateOptions) -> Vec<SuiteOutcome> {
    let suites: Vec<(&'static str, Box<dyn Fn(&ValidateOptions) -> SuiteResult>)> = vec![
        ("statevec", Box::new(suite_statevec)),
        ("query-model", Box::new(suite_query)),
        ("reduction", Box::new(suite_reduction)),
        ("boosting", Box::new(suite_boosting)),
        ("amplitude-estimation", Box::new(suite_ae)),
        ("mean-estimation", Box::new(suite_mean)),
        ("quadrature", Box::new(suite_quadrature)),
        ("codec", Box::new(suite_codec)),
        ("plan", Box::new(suite_plan)),
        ("testbed", Box::new(suite_testbed)),
        ("integrator", Box::new(suite_integrator)),
    ];
    suites
        .into_iter()
        .map(|(name, run)| {
            let start = Instant::now();
            let res = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| run(opts)))
                .unwrap_or_else(|_| Err("suite panicked".into()));
            let millis = start.elapsed().as_millis();
            match res {
                Ok(detail) => SuiteOutcome { name, passed: true, detail, millis },
                Err(detail) => SuiteOutcome { name, passed: false, detail, millis },
            }
        })
        .collect()
}

fn suite_statevec(opts: &ValidateOptions) -> SuiteResult {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 1);
    let m = 6;
    let reg = Register::new(1, 4);
    let ops = [
        Unitary::qft(reg),
        Unitary::hadamard(Register::new(0, m)),
        Unitary::add_constant(reg, 5),
        Unitary::negate(reg),
        Unitary::phase(|b| b % 3 == 0, 0.7),
        Unitary::permutation(Permutation::new("affine", |i| (i * 5 + 3) % 64, |j| ((j + 61) * 13) % 64)),
    ];
    for _ in 0..10 {
        let psi = sim(StateVec::random(m, &mut rng))?;
        for u in &ops {
            let out = sim(psi.apply(u))?;
            ensure((out.norm_sqr() - 1.0).abs() < 1e-12, || format!("{u:?} does not preserve the norm"))?;
            let back = sim(out.apply(&u.adjoint()))?;
            ensure(back.max_distance(&psi) < 1e-12, || format!("{u:?}: U†U ≠ I"))?;
        }
    }
    Ok(format!("{} structured unitaries × 10 random states", ops.len()))
}

fn suite_query(opts: &ValidateOptions) -> SuiteResult {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 2);
    let specs = 20;
    for _ in 0..specs {
        let m = rng.gen_range(2..=6);
        let idx = rng.gen_range(1..m);
        let val = rng.gen_range(1..=m - idx);
        let z: Vec<usize> = (0..1usize << idx).filter(|_| rng.gen_bool(0.6)).collect();
        let z = if z.is_empty() { vec![0] } else { z };
        let table: Vec<u64> = (0..1 << idx).map(|_| rng.gen()).collect();
        let spec = sim(QuerySpec::new(m, idx, val, z.clone(), move |i| i, |k: &u64| *k))?;
        let f = OracleFunction::new(move |i: &usize| table[*i]);
        let mask = (1u64 << val) - 1;
        for b in 0..1usize << m {
            let psi = sim(StateVec::basis_state(m, b))?;
            let out = sim(spec.apply(&f, &psi, &mut QueryTally::default()))?;
            let i = b >> (m - idx);
            let x = (b >> (m - idx - val)) & mask as usize;
            let want = if z.contains(&i) {
                let nx = (x as u64 + (f.eval(&i) & mask)) & mask;
                (b & !((mask as usize) << (m - idx - val))) | ((nx as usize) << (m - idx - val))
            } else {
                b
            };
            ensure((out.probability(want) - 1.0).abs() < 1e-15, || format!("m={m} m'={idx} m''={val} basis {b}"))?;
        }
    }
    Ok(format!("{specs} random queries, every basis state"))
}

fn suite_reduction(opts: &ValidateOptions) -> SuiteResult {
    type G = GammaReduction<usize, u64, usize, u64>;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 3);
    let cases: Vec<(QuerySpec<usize, u64>, G)> = vec![
        (
            sim(QuerySpec::new(4, 2, 2, [0, 2, 3], |i| i, |k: &u64| *k))?,
            sim(G::new(2, vec![Arc::new(|s: &usize| *s) as Eta<usize, usize>], |k: &u64| *k, |_, z| 3 * z[0] + 1))?,
        ),
        (
            sim(QuerySpec::new(4, 2, 2, [1, 3], |i| i, |k: &u64| *k))?,
            sim(G::new(
                2,
                vec![Arc::new(|s: &usize| *s) as Eta<usize, usize>, Arc::new(|s: &usize| s + 1)],
                |k: &u64| *k,
                |s, z| z[0] + 2 * z[1] + *s as u64,
            ))?,
        ),
    ];
    let mut checked = 0;
    for (q, g) in &cases {
        let (b, layout) = sim(reduce_via_gamma(q, g))?;
        ensure(b.n_queries() == 2 * g.kappa(), || "n_q(B) ≠ 2κ".into())?;
        let shift = layout.m - layout.m_tilde;
        for _ in 0..5 {
            let table: Vec<u64> = (0..8).map(|_| rng.gen_range(0..4)).collect();
            let f = OracleFunction::new(move |s: &usize| table[*s % 8]);
            let gf = g.apply(&f);
            for x in 0..1usize << layout.m_tilde {
                let out = sim(b.run(&f, x << shift, &mut QueryTally::default()))?;
                let want = sim(q.apply(&gf, &sim(StateVec::basis_state(layout.m_tilde, x))?, &mut QueryTally::default()))?;
                let target = want.amplitudes().iter().position(|a| a.norm_sqr() > 0.5).unwrap_or(0);
                ensure((out.amplitude(target << shift).re - 1.0).abs() < 1e-10, || format!("κ={} x={x}", g.kappa()))?;
                checked += 1;
            }
        }
    }
    Ok(format!("κ ∈ {{1, 2}}, {checked} basis inputs"))
}

fn suite_boosting(_: &ValidateOptions) -> SuiteResult {
    let base = OutcomeDistribution::from_pairs([(-1.0, 0.125), (0.0, 0.75), (1.0, 0.125)]);
    for nu in [8, 16, 24] {
        let fail = 1.0 - base.median_of(nu).prob(0.0);
        let bound = (-(nu as f64) / 8.0).exp();
        ensure(fail <= bound, || format!("ν={nu}: failure {fail:.4} > e^(-ν/8) = {bound:.4}"))?;
    }
    Ok("exact median laws for ν ∈ {8, 16, 24}".into())
}

fn suite_ae(_: &ValidateOptions) -> SuiteResult {
    let mut worst: f64 = 0.0;
    for len in [4usize, 8, 16] {
        for m in [4usize, 8, 16] {
            for ones in [0, 1, len / 2, len - 1, len] {
                let f = sim(SequenceOracle::new(len, move |i| if i < ones { 1.0 } else { 0.0 }))?;
                let sv = sim(ae_statevec_distribution(&f, m, 1))?;
                let exact = sim(ae_exact_distribution(ones as f64 / len as f64, m))?;
                worst = worst.max(sv.tv_distance(&exact));
            }
        }
    }
    ensure(worst < 1e-8, || format!("state-vector vs closed-form TV {worst:e}"))?;
    let floor = 8.0 / PI.powi(2);
    for m in [8usize, 16, 32] {
        for k in 0..=10 {
            let a = k as f64 / 10.0;
            let mass = sim(ae_exact_distribution(a, m))?.mass_within(a, ae_success_radius(a, m));
            ensure(mass >= floor, || format!("a={a} M={m}: success mass {mass:.4} < 8/π²"))?;
        }
    }
    Ok(format!("max TV {worst:.1e}; success mass ≥ 8/π² on the a-grid"))
}

fn suite_mean(opts: &ValidateOptions) -> SuiteResult {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 4);
    let f = sim(SequenceOracle::new(64, |i| i as f64 / 63.0))?;
    let cfg = EstimatorConfig::default();
    let trials = 2000;
    let hits = (0..trials)
        .filter(|_| estimate_mean_bounded(&f, 64, &cfg, &mut rng).map(|e| (e.value - 0.5).abs() <= 0.05).unwrap_or(false))
        .count();
    ensure(hits * 4 >= trials * 3, || format!("bounded: only {hits}/{trials} within 0.05"))?;
    let spike = sim(SequenceOracle::new(256, |i| if i == 3 { 16.0 } else { 0.0 }))?;
    let est = sim(estimate_mean_lp(&spike, &sim(LpBallCert::new(2.0, 1.0))?, 64, &cfg, &mut rng))?;
    ensure((est.value - 1.0 / 16.0).abs() < 1e-15, || format!("spike estimate {}", est.value))?;
    let g = sim(SequenceOracle::new(1000, |i| ((i * 7919) % 1000) as f64 / 100.0 - 5.0))?;
    let (s, t) = sim(truncated_sums(&g, 2.5))?;
    ensure((s + t - g.mean()).abs() < 1e-12, || "truncated sums do not add up".into())?;
    Ok(format!("bounded {hits}/{trials} within 0.05; spike exact; S+S' = S"))
}

fn suite_quadrature(_: &ValidateOptions) -> SuiteResult {
    for d in 1..=3 {
        for r in 1..=4 {
            let rule = sim(base_quadrature::<f64>(d, r))?;
            // every monomial of per-axis degree < r
            for code in 0..r.pow(d as u32) {
                let mut rest = code;
                let exps: Vec<i32> = (0..d)
                    .map(|_| {
                        let e = (rest % r) as i32;
                        rest /= r;
                        e
                    })
                    .collect();
                let want: f64 = exps.iter().map(|&e| 1.0 / (e + 1) as f64).product();
                let got = rule.apply(|t| t.iter().zip(&exps).map(|(x, &e)| x.powi(e)).product());
                ensure((got - want).abs() < 1e-10, || format!("d={d} r={r} exps={exps:?}: {got} vs {want}"))?;
            }
        }
    }
    let f = sim(family_member(2, "exp"))?;
    for r in 1..=3 {
        let base = sim(base_quadrature::<f64>(2, r))?;
        let diff = difference_quadrature(&base, r);
        let (k0, k) = (1, 5);
        let direct = composed_apply(&base, k, |t: &[f64]| f.eval(t));
        let tele = composed_apply(&base, k0, |t: &[f64]| f.eval(t))
            + (k0..k).map(|l| composed_apply(&diff, l, |t: &[f64]| f.eval(t))).sum::<f64>();
        ensure((direct - tele).abs() < 1e-12, || format!("telescoping r={r}: {direct} vs {tele}"))?;
    }
    Ok("exactness d ≤ 3, r ≤ 4; telescoping to 1e-12".into())
}

fn suite_codec(opts: &ValidateOptions) -> SuiteResult {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 5);
    let samples = 100_000;
    for declared in [8u32, 16, 32] {
        let width = if opts.codec_fault { declared - 2 } else { declared };
        let codec = sim(FixedPointCodec::new(width))?;
        let range = 2f64.powi(declared as i32 / 2 - 1);
        let resolution = 2f64.powi(-(declared as i32) / 2);
        for _ in 0..samples / 3 {
            let z = rng.gen_range(-range..range) * 0.999;
            let y = codec.round_trip(z);
            ensure(y <= z && z - y < resolution, || format!("m*={declared}: z={z} γ(β(z))={y}, bound {resolution:e}"))?;
        }
    }
    Ok(format!("{samples} samples over m* ∈ {{8, 16, 32}}"))
}

fn suite_plan(_: &ValidateOptions) -> SuiteResult {
    let mut worst: f64 = 0.0;
    for &(d, r, p) in &[(1usize, 1usize, 2.0f64), (1, 2, 2.0), (2, 2, 2.0), (1, 1, 4.0), (1, 1, 1.5)] {
        let integ = sim(Integrator::new(IntegratorConfig { d, r, p, ..IntegratorConfig::default() }))?;
        for e in 6..=16 {
            let n = 1u64 << e;
            let plan: MultilevelPlan = sim(integ.plan(n, 3.0))?;
            let total = plan.n + 2 * plan.kappa_prime as u64 * plan.levels.iter().map(|l| l.reps as u64 * l.budget).sum::<u64>();
            ensure(total == plan.n_tilde, || format!("({d},{r},{p}) n={n}: ñ bookkeeping"))?;
            ensure(plan.k > plan.k0 && plan.m_star % 2 == 0, || format!("({d},{r},{p}) n={n}: k/m* invariants"))?;
            ensure(plan.levels.windows(2).all(|w| w[0].budget >= w[1].budget), || "level budgets increase".into())?;
            worst = worst.max(plan.n_tilde as f64 / n as f64);
        }
    }
    Ok(format!("ñ bookkeeping exact; max ñ/n = {worst:.1}"))
}

fn suite_testbed(opts: &ValidateOptions) -> SuiteResult {
    let (g, r) = (bump_integral_gauss(), bump_integral_romberg());
    ensure((g - r).abs() < 1e-8, || format!("σ1 oracles disagree: {g} vs {r}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 6);
    let codec = sim(FixedPointCodec::new(16))?;
    let coeffs: Vec<f64> = (0..16).map(|_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 }).collect();
    let h = sim(hard_instance(1, 4, &coeffs, &codec))?;
    let direct = composite_gauss_cube(|t| h.function.eval(t), 1, 0.0, 1.0, 256, 20);
    ensure((direct - h.function.reference).abs() < 1e-10, || format!("hard instance: {direct} vs {}", h.function.reference))?;
    h.reset_counter();
    for i in 0..100 {
        h.function.eval(&[i as f64 / 100.0]);
    }
    ensure(h.bump_evaluations() == 100, || "hard instance touches more than one bump per point".into())?;
    Ok("σ1 dual oracle; Rademacher identity; one bump per evaluation".into())
}

fn suite_integrator(opts: &ValidateOptions) -> SuiteResult {
    let f = sim(family_member(1, "exp"))?;
    let integ = sim(Integrator::new(IntegratorConfig::default()))?;
    let prep = sim(integ.prepare(&f.f, 256))?;
    ensure(prep.cert_violations() == 0, || "norm certificate violated".into())?;
    let errs: Vec<f64> = (0..40)
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(super::trial_seed(opts.seed, 256, t));
            prep.sample(&mut rng).map(|e| (e.value - f.reference).abs())
        })
        .collect::<crate::Result<_>>()
        .map_err(|e| e.to_string())?;
    let med = median(&errs);
    ensure(med < 1e-3, || format!("median error {med:e} at n = 256"))?;
    let g: Integrand = f.f.clone();
    let sv = sim(Integrator::new(IntegratorConfig { mode: crate::mean::Mode::Statevec, ..IntegratorConfig::default() }))?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 7);
    let est = sim(sv.integrate(&g, 16, &mut rng))?;
    let plan = sim(sv.prepare(&g, 16))?.plan;
    ensure(est.queries_used > plan.n && est.queries_used <= plan.n_tilde, || format!("state-vector run charged {} outside (n, ñ]", est.queries_used))?;
    ensure((est.value - f.reference).abs() < 0.5, || format!("state-vector estimate {}", est.value))?;
    Ok(format!("semantic median error {med:.2e} at n=256; state-vector run at n=16"))
}
