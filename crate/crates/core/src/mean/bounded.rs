use rand::Rng;

use super::ae::AeLaw;
use super::circuit::AeCircuit;
use super::{Band, BandRecord, EstimatorConfig, MeanEstimate, Mode, SequenceOracle};
use crate::error::{domain, Result};
use crate::query::QueryTally;

/// Largest power of two `M` with `reps · M ≤ n`, or `None` below `M = 2`.
pub fn grover_budget(n: u64, reps: usize) -> Option<usize> {
    let per = n / reps.max(1) as u64;
    (per >= 2).then(|| 1usize << (63 - per.leading_zeros()).min(40))
}

/// One amplitude-estimation draw for the mean `a` of a `[0,1]`-valued sequence
/// whose padded length is `pad` times its length.
pub(crate) fn semantic_draw<R: Rng + ?Sized>(a: f64, pad: f64, m: usize, dither: bool, rng: &mut R) -> f64 {
    let padded = (a / pad).clamp(0.0, 1.0);
    if padded == 0.0 {
        return 0.0;
    }
    let s = if dither { rng.gen_range(0.5..=1.0) } else { 1.0 };
    let law = AeLaw::new(s * padded, m).expect("amplitude and M validated");
    law.sample(rng) / s * pad
}

/// Quantum estimate of `S_N f` for `f` with values in `[0, 1]` using at most `n` queries.
///
/// Runs `reps` independent amplitude estimations with the largest power-of-two
/// `M` that fits the budget and returns their lower median.
pub fn estimate_mean_bounded<R: Rng + ?Sized>(
    f: &SequenceOracle,
    n: u64,
    cfg: &EstimatorConfig,
    rng: &mut R,
) -> Result<MeanEstimate> {
    if n < 2 {
        return Err(domain!("query budget n = {n} is below 2"));
    }
    if cfg.reps == 0 {
        return Err(domain!("need at least one repetition"));
    }
    let m = grover_budget(n, cfg.reps)
        .ok_or_else(|| domain!("budget n = {n} cannot fund {} repetitions with M ≥ 2", cfg.reps))?;
    let pad = f.len().next_power_of_two() as f64 / f.len() as f64;
    let mut draws = Vec::with_capacity(cfg.reps);
    let mut raw = QueryTally::default();
    match cfg.mode {
        Mode::Semantic => {
            let (sum, lo, hi) = f.fold(|| (0.0, 0.0f64, 0.0f64), |(s, lo, hi), _, v| (s + v, lo.min(v), hi.max(v)), |a, b| {
                (a.0 + b.0, a.1.min(b.1), a.2.max(b.2))
            });
            if lo < 0.0 || hi > 1.0 {
                return Err(domain!("entries must lie in [0, 1], found range [{lo}, {hi}]"));
            }
            let a = sum / f.len() as f64;
            for _ in 0..cfg.reps {
                draws.push(semantic_draw(a, pad, m, cfg.dither, rng));
            }
        }
        Mode::Statevec => {
            let vals = f.values();
            if vals.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(domain!("entries must lie in [0, 1]"));
            }
            let mut cached = None;
            for _ in 0..cfg.reps {
                let s = if cfg.dither { rng.gen_range(0.5..=1.0) } else { 1.0 };
                if cfg.dither || cached.is_none() {
                    let circuit = AeCircuit::new(f.len(), m, cfg.value_bits, s)?;
                    let psi = circuit.run(f, &mut raw)?;
                    cached = Some((psi.sampler(), circuit.phase, circuit.qubits()));
                }
                let (sampler, phase, q) = cached.as_ref().expect("circuit prepared");
                let y = phase.get(sampler.sample(rng), *q);
                draws.push(super::ae::ae_value(y, m) / s * pad);
            }
        }
    }
    let value = crate::stats::lower_median(&mut draws);
    let queries = (cfg.reps * m) as u64;
    Ok(MeanEstimate {
        value,
        queries_used: queries,
        oracle_applications: raw.queries,
        mode: cfg.mode,
        semantic_tail: false,
        bands: vec![BandRecord { sign: 1, band: Band::Whole, grover: m, queries, estimate: value }],
    })
}
