//! One PASS/FAIL line per acceptance criterion.
//!
//! Runs as a plain binary (`harness = false`). A failing criterion is reported
//! but the process exits 0 unless `ACCEPTANCE_STRICT=1` is set.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::{Duration, Instant};

use qmlint::experiment::{run_compare, run_convergence, run_cost, write_compare, write_cost, write_rows, ExperimentConfig};
use qmlint::mean::{
    ae_exact_distribution, ae_statevec_distribution, ae_success_radius, estimate_mean_bounded, EstimatorConfig, SequenceOracle,
};
use qmlint::multilevel::{base_quadrature, composed_apply, difference_quadrature, FixedPointCodec};
use qmlint::query::{reduce_via_gamma, Eta, GammaReduction, MeasuredAlgorithm, NoMeasureAlgorithm, OracleFunction, QuerySpec, QueryTally};
use qmlint::statevec::Register;
use qmlint::stats::{log2_slope, median};
use qmlint::{StateVec, Unitary};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = (bool, String);

fn minutes(m: u64) -> Duration {
    Duration::from_secs(60 * m)
}

fn grid(lo: u32, hi: u32) -> Vec<u64> {
    (lo..=hi).map(|e| 1u64 << e).collect()
}

fn slope(xs: &[u64], ys: &[f64]) -> f64 {
    log2_slope(&xs.iter().map(|&x| x as f64).collect::<Vec<_>>(), ys)
}

fn random_spec(rng: &mut ChaCha8Rng, m_max: usize) -> (usize, usize, usize, Vec<usize>) {
    let m = rng.gen_range(2..=m_max);
    let idx = rng.gen_range(1..m);
    let val = rng.gen_range(1..=m - idx);
    let mut z: Vec<usize> = (0..1usize << idx).filter(|_| rng.gen_bool(0.6)).collect();
    if z.is_empty() {
        z.push(rng.gen_range(0..1 << idx));
    }
    (m, idx, val, z)
}

fn query_model() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let specs = 60;
    let mut states = 0usize;
    for s in 0..specs {
        let (m, idx, val, z) = random_spec(&mut rng, 8);
        let mut perm: Vec<usize> = (0..1 << idx).collect();
        perm.shuffle(&mut rng);
        let table: Vec<u64> = (0..1 << idx).map(|_| rng.gen()).collect();
        let (mul, add) = (rng.gen::<u64>() | 1, rng.gen::<u64>());
        let tau_table = perm.clone();
        let spec = QuerySpec::new(m, idx, val, z.clone(), move |i| tau_table[i], move |k: &u64| k.wrapping_mul(mul).wrapping_add(add))
            .expect("valid spec");
        let f = OracleFunction::new(move |i: &usize| table[*i]);
        let mask = (1usize << val) - 1;
        let shift = m - idx - val;
        for b in 0..1usize << m {
            let out = spec.apply(&f, &StateVec::basis_state(m, b).unwrap(), &mut QueryTally::default()).unwrap();
            let i = b >> (m - idx);
            let want = if z.contains(&i) {
                let x = (b >> shift) & mask;
                let add = f.eval(&perm[i]).wrapping_mul(mul).wrapping_add(add) as usize;
                (b & !(mask << shift)) | (((x + add) & mask) << shift)
            } else {
                b
            };
            if out.probability(want) != 1.0 || out.amplitude(want).re != 1.0 {
                return (false, format!("spec {s} (m={m}, m'={idx}, m''={val}) basis {b}"));
            }
            states += 1;
        }
    }
    (true, format!("{specs} random specs with m ≤ 8, {states} basis states, exact"))
}

fn reduction() -> Outcome {
    type G = GammaReduction<usize, u64, usize, u64>;
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let cases = 48;
    let mut worst: f64 = 0.0;
    let mut kappas = [0usize; 2];
    for c in 0..cases {
        let (m_tilde, idx, val, z) = random_spec(&mut rng, 6);
        let q_tilde = QuerySpec::new(m_tilde, idx, val, z, |i| i, |k: &u64| *k).unwrap();
        let kappa = 1 + c % 2;
        let m_star = rng.gen_range(1..=3);
        let etas: Vec<Eta<usize, usize>> = (0..kappa)
            .map(|_| {
                let t: Vec<usize> = (0..1 << idx).map(|_| rng.gen_range(0..16)).collect();
                Arc::new(move |s: &usize| t[*s]) as Eta<usize, usize>
            })
            .collect();
        let coeffs: Vec<u64> = (0..kappa).map(|_| rng.gen_range(1..8)).collect();
        let g = G::new(m_star, etas, |k: &u64| *k, move |s, zs| zs.iter().zip(&coeffs).map(|(a, b)| a * b).sum::<u64>() + *s as u64)
            .unwrap();
        let (b, layout) = match reduce_via_gamma(&q_tilde, &g) {
            Ok(x) => x,
            Err(e) => return (false, format!("case {c}: {e}")),
        };
        if b.n_queries() != 2 * kappa {
            return (false, format!("case {c}: n_q(B) = {} for κ = {kappa}", b.n_queries()));
        }
        kappas[kappa - 1] += 1;
        let table: Vec<u64> = (0..16).map(|_| rng.gen_range(0..1 << m_star)).collect();
        let f = OracleFunction::new(move |s: &usize| table[*s]);
        let gf = g.apply(&f);
        let shift = layout.m - layout.m_tilde;
        for x in 0..1usize << m_tilde {
            let out = b.run(&f, x << shift, &mut QueryTally::default()).unwrap();
            let want = q_tilde.apply(&gf, &StateVec::basis_state(m_tilde, x).unwrap(), &mut QueryTally::default()).unwrap();
            for (idx, a) in out.amplitudes().iter().enumerate() {
                let w = if idx & ((1 << shift) - 1) == 0 { want.amplitude(idx >> shift) } else { Default::default() };
                worst = worst.max((a - w).norm());
            }
        }
    }
    (worst <= 1e-10, format!("{cases} cases (κ=1: {}, κ=2: {}), m̃ ≤ 6, m* ≤ 3, max amplitude gap {worst:.1e} (tol 1e-10)", kappas[0], kappas[1]))
}

fn ae_fidelity() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut laws = 0;
    for len in [2usize, 4, 8, 16, 32] {
        for m in [2usize, 4, 8, 16, 32] {
            for ones in 0..=len {
                let f = SequenceOracle::new(len, move |i| if i < ones { 1.0 } else { 0.0 }).unwrap();
                let sv = ae_statevec_distribution(&f, m, 1).unwrap();
                let exact = ae_exact_distribution(ones as f64 / len as f64, m).unwrap();
                worst = worst.max(sv.tv_distance(&exact));
                laws += 1;
            }
        }
    }
    let floor = 8.0 / PI.powi(2);
    let mut least = f64::INFINITY;
    for m in [8usize, 16, 32] {
        for k in 0..=10 {
            let a = k as f64 / 10.0;
            least = least.min(ae_exact_distribution(a, m).unwrap().mass_within(a, ae_success_radius(a, m)));
        }
    }
    (
        worst < 1e-8 && least >= floor,
        format!("{laws} laws with N, M ≤ 32: max TV {worst:.1e} (tol 1e-8); min success mass {least:.4} (floor {floor:.4})"),
    )
}

fn boosting() -> Outcome {
    let trials = 100_000;
    let m = 3;
    let spec = QuerySpec::new(m, 1, 1, [0usize], |i| i, |k: &u64| *k).unwrap();
    let stage = NoMeasureAlgorithm::new(spec, vec![vec![Unitary::hadamard(Register::new(0, m))]]).unwrap();
    // outcomes 0 and 7 are wrong answers on either side, the rest are correct
    let base = MeasuredAlgorithm::single(stage, 0, |b| match b {
        0 => -1.0,
        7 => 1.0,
        _ => 0.0,
    })
    .unwrap();
    let f = OracleFunction::new(|_: &usize| 0u64);
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let rate = |alg: &MeasuredAlgorithm<usize, u64>, rng: &mut ChaCha8Rng| {
        let fails = (0..trials).filter(|_| alg.run(&f, rng, &mut QueryTally::default()).unwrap() != 0.0).count();
        fails as f64 / trials as f64
    };
    let base_fail = rate(&base, &mut rng);
    let mut ok = (base_fail - 0.25).abs() < 0.01;
    let mut parts = vec![format!("base failure {base_fail:.4}")];
    for nu in [8, 16, 24] {
        let boosted = base.clone().median_boost(nu).unwrap();
        let fail = rate(&boosted, &mut rng);
        let bound = (-(nu as f64) / 8.0).exp() + 0.02;
        ok &= fail <= bound;
        parts.push(format!("ν={nu}: {fail:.5} ≤ {bound:.4}"));
    }
    (ok, format!("{trials} trials; {}", parts.join(", ")))
}

fn summation_rate() -> Outcome {
    let len = 1 << 12;
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    let f = SequenceOracle::new(len, move |i| (i as f64 * golden).fract()).unwrap();
    let exact = f.mean();
    let cfg = EstimatorConfig { dither: true, ..EstimatorConfig::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let ns = grid(5, 10);
    let meds: Vec<f64> = ns
        .iter()
        .map(|&n| {
            let errs: Vec<f64> =
                (0..200).map(|_| (estimate_mean_bounded(&f, n, &cfg, &mut rng).unwrap().value - exact).abs()).collect();
            median(&errs)
        })
        .collect();
    let s = slope(&ns, &meds);
    ((s + 1.0).abs() <= 0.2, format!("N=2^12, n=2^5..2^10, 200 trials: slope {s:.3} (target -1 ± 0.2)"))
}

fn bump(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        let s = 2.0 * t - 1.0;
        (-1.0 / (1.0 - s * s)).exp()
    }
}

fn quadrature() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    let mut exact_gap: f64 = 0.0;
    for d in 1..=3 {
        for r in 1..=4 {
            let base = base_quadrature::<f64>(d, r).unwrap();
            let mut expo = vec![0usize; d];
            loop {
                if expo.iter().sum::<usize>() <= r - 1 {
                    let e = expo.clone();
                    let q = composed_apply(&base, 0, |x: &[f64]| x.iter().zip(&e).map(|(v, &k)| v.powi(k as i32)).product());
                    let want: f64 = expo.iter().map(|&k| 1.0 / (k + 1) as f64).product();
                    exact_gap = exact_gap.max((q - want).abs());
                }
                let mut j = 0;
                while j < d && expo[j] == r - 1 {
                    expo[j] = 0;
                    j += 1;
                }
                if j == d {
                    break;
                }
                expo[j] += 1;
            }
        }
    }

    let mut tele_gap: f64 = 0.0;
    for d in 1..=3 {
        for r in 1..=4 {
            let base = base_quadrature::<f64>(d, r).unwrap();
            let diff = difference_quadrature(&base, r);
            let w: Vec<f64> = (0..d).map(|_| rng.gen_range(0.5..3.0)).collect();
            let ph = rng.gen_range(0.0..6.0);
            let f = |x: &[f64]| (x.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() + ph).cos();
            for l in 0..=(6 / d).min(4) {
                let lhs = composed_apply(&base, l + 1, f) - composed_apply(&base, l, f);
                tele_gap = tele_gap.max((lhs - composed_apply(&diff, l, f)).abs());
            }
        }
    }

    // worst case over a smooth integrand and a node-avoiding oscillation h^r ψ(x/h)
    let mut decay = Vec::new();
    let mut decay_ok = true;
    for d in 1..=2 {
        for r in 1..=4 {
            let base = base_quadrature::<f64>(d, r).unwrap();
            let mut ts: Vec<f64> = base.nodes.iter().map(|x| x[0]).chain([0.0, 1.0]).collect();
            ts.sort_by(f64::total_cmp);
            ts.dedup();
            let (a, b) = ts.windows(2).map(|w| (w[0], w[1])).max_by(|x, y| (x.1 - x.0).total_cmp(&(y.1 - y.0))).unwrap();
            let psi = move |t: f64| bump((t - a) / (b - a));
            let psi_int = qmlint::testbed::reference::composite_gauss_cube(|x| psi(x[0]), 1, 0.0, 1.0, 64, 20);
            let smooth = |x: &[f64]| x.iter().map(|v| (v * 1.3).exp()).product::<f64>();
            let smooth_ref = ((1.3f64).exp() - 1.0) / 1.3;
            let levels: Vec<usize> = if d == 1 { (2..=7).collect() } else { (2..=5).collect() };
            let mut worst = Vec::new();
            let mut smooth_err = Vec::new();
            for &l in &levels {
                let h = 2f64.powi(-(l as i32));
                let es = (composed_apply(&base, l, smooth) - smooth_ref.powi(d as i32)).abs();
                let osc = |x: &[f64]| h.powi(r as i32) * x.iter().map(|v| psi((v / h).fract())).product::<f64>();
                let eo = (composed_apply(&base, l, osc) - h.powi(r as i32) * psi_int.powi(d as i32)).abs();
                smooth_err.push(es);
                worst.push(es.max(eo));
            }
            let ns: Vec<u64> = levels.iter().map(|&l| 1u64 << l).collect();
            let s = slope(&ns, &worst);
            let ss = slope(&ns, &smooth_err);
            decay_ok &= (s + r as f64).abs() <= 0.2;
            decay.push(format!("d{d}r{r} {s:.2} (smooth {ss:.2})"));
        }
    }

    let mut sandwich_bad = 0;
    for _ in 0..100_000 {
        let codec = FixedPointCodec::new(2 * rng.gen_range(1..=30)).unwrap();
        let z = rng.gen_range(-1.0..1.0) * codec.range();
        let y = codec.round_trip(z);
        if !(y <= z && z <= y + codec.resolution()) {
            sandwich_bad += 1;
        }
    }
    (
        exact_gap <= 1e-10 && tele_gap <= 1e-12 && decay_ok && sandwich_bad == 0,
        format!(
            "exactness gap {exact_gap:.1e} (tol 1e-10); telescoping gap {tele_gap:.1e} (tol 1e-12); decay slope vs -r ± 0.2 per 2^l: [{}]; codec sandwich violations {sandwich_bad}/100000",
            decay.join(", ")
        ),
    )
}

const HEADLINE: [(usize, usize, f64); 5] = [(1, 1, 2.0), (1, 2, 2.0), (2, 2, 2.0), (1, 1, 4.0), (1, 1, 1.5)];

fn headline_cfg(d: usize, r: usize, p: f64) -> ExperimentConfig {
    ExperimentConfig { d, r, p, grid: grid(7, 13), trials: 100, function: "exp".into(), ..ExperimentConfig::default() }
}

fn headline_rate() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (d, r, p) in HEADLINE {
        let rep = match run_convergence(&headline_cfg(d, r, p)) {
            Ok(rep) => rep,
            Err(e) => return (false, format!("({d},{r},{p}): {e}")),
        };
        let pass = (rep.slope - rep.theory).abs() <= 0.25;
        ok &= pass;
        parts.push(format!(
            "({d},{r},{p}) {:.3} vs {:.1} [target-n fit {:.3}]{}",
            rep.slope,
            rep.theory,
            rep.slope_vs_target,
            if pass { "" } else { " ✗" }
        ));
    }
    (ok, format!("semantic, exp integrand, 100 trials, n=2^7..2^13, slope vs n_realized ± 0.25: {}", parts.join("; ")))
}

fn comparison() -> Outcome {
    let rep = match run_compare(&headline_cfg(1, 1, 2.0)) {
        Ok(rep) => rep,
        Err(e) => return (false, e.to_string()),
    };
    let checks = [
        ("deterministic", rep.slope_deterministic, -1.0),
        ("residual_mc", rep.slope_residual_mc, -1.5),
        ("plain_mc", rep.slope_plain_mc, -0.5),
        ("quantum", rep.slope_quantum, -2.0),
    ];
    let slopes_ok = checks.iter().all(|(_, s, t)| (s - t).abs() <= 0.25);
    let last = rep.points.last().unwrap();
    (
        slopes_ok && rep.ordering_holds,
        format!(
            "(1,1,2): {}; at n={}: quantum {:.2e} < residual_mc {:.2e} < deterministic {:.2e}: {}",
            checks.iter().map(|(n, s, t)| format!("{n} {s:.3} vs {t}")).collect::<Vec<_>>().join(", "),
            last.n,
            last.quantum,
            last.residual_mc,
            last.deterministic,
            rep.ordering_holds
        ),
    )
}

fn accounting() -> Outcome {
    let mut max_overhead: f64 = 0.0;
    let mut qubits_ok = true;
    let mut parts = Vec::new();
    for (d, r, p) in HEADLINE {
        let rep = match run_cost(&headline_cfg(d, r, p)) {
            Ok(rep) => rep,
            Err(e) => return (false, format!("({d},{r},{p}): {e}")),
        };
        max_overhead = max_overhead.max(rep.max_overhead());
        let first = rep.points[0].qubits_per_log2n();
        let peak = rep.max_qubits_per_log2n();
        // O(log n): the ratio must not grow across the grid
        qubits_ok &= peak <= 1.25 * first;
        parts.push(format!("({d},{r},{p}) ñ/n ≤ {:.1}, qubits/log2 n ≤ {peak:.2}", rep.max_overhead()));
    }
    (
        max_overhead <= 8.0 && qubits_ok,
        format!("max ñ/n {max_overhead:.1} (limit 8); qubits/log2 n non-growing: {qubits_ok}; {}", parts.join("; ")),
    )
}

fn reproducibility() -> Outcome {
    let dir = tempfile::tempdir().expect("temp dir");
    let cfg = ExperimentConfig { grid: grid(7, 10), trials: 20, seed: 7, ..ExperimentConfig::default() };
    let mut files = Vec::new();
    for run in 0..2 {
        let conv = run_convergence(&cfg).unwrap();
        let cmp = run_compare(&cfg).unwrap();
        let cost = run_cost(&cfg).unwrap();
        let paths = [dir.path().join(format!("conv{run}.csv")), dir.path().join(format!("cmp{run}.csv")), dir.path().join(format!("cost{run}.csv"))];
        write_rows(&paths[0], &conv.rows, &conv.points).unwrap();
        write_compare(&paths[1], &cmp).unwrap();
        write_cost(&paths[2], &cost).unwrap();
        files.push(paths.map(|p| std::fs::read(p).unwrap()));
    }
    let same = files[0] == files[1];
    let bytes: usize = files[0].iter().map(Vec::len).sum();
    (same, format!("convergence, compare and cost CSVs from two runs with seed 7: bit-identical {same} ({bytes} bytes)"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Duration); 10] = [
        ("query-model", query_model, minutes(1)),
        ("reduction", reduction, minutes(5)),
        ("ae-fidelity", ae_fidelity, minutes(10)),
        ("boosting", boosting, minutes(2)),
        ("summation-rate", summation_rate, minutes(5)),
        ("quadrature", quadrature, minutes(5)),
        ("headline-rate", headline_rate, minutes(30)),
        ("comparison", comparison, minutes(15)),
        ("accounting", accounting, Duration::MAX),
        ("reproducibility", reproducibility, Duration::MAX),
    ];
    let mut failed = 0;
    for (no, (name, run, limit)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = std::panic::catch_unwind(run).unwrap_or_else(|_| (false, "panicked".into()));
        let took = start.elapsed();
        let in_time = took <= limit;
        let pass = ok && in_time;
        if !pass {
            failed += 1;
        }
        let budget = if limit == Duration::MAX { String::new() } else { format!(" / {}s", limit.as_secs()) };
        println!(
            "{} {:>2} {name}: {detail} [{:.1}s{budget}{}]",
            if pass { "PASS" } else { "FAIL" },
            no + 1,
            took.as_secs_f64(),
            if in_time { "" } else { ", over time" }
        );
    }
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed > 0 && std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
