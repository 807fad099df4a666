use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use super::{CubePartition, FixedPointCodec, Quadrature};
use crate::error::{contract, Result};
use crate::mean::SequenceOracle;

/// Real-valued integrand on `[0,1]^d`.
pub type Integrand = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// The map `Γ_l`: `i ↦ Σ_j a'_j γ(β(f(s_{li} + 2^{-l} t'_j)))` for `i ∈ Z[0, 2^{dl})`.
#[derive(Clone)]
pub struct LevelDiscretization {
    f: Integrand,
    part: CubePartition,
    diff: Arc<Quadrature<f64>>,
    codec: FixedPointCodec,
    clamped: Arc<AtomicU64>,
}

impl std::fmt::Debug for LevelDiscretization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "LevelDiscretization(d={}, l={}, m*={})", self.part.d, self.part.l, self.codec.width())
    }
}

impl LevelDiscretization {
    pub fn new(f: Integrand, d: usize, l: usize, codec: FixedPointCodec, diff: Arc<Quadrature<f64>>) -> Self {
        Self { f, part: CubePartition::new(d, l), diff, codec, clamped: Arc::new(AtomicU64::new(0)) }
    }

    pub fn len(&self) -> usize {
        self.part.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn level(&self) -> usize {
        self.part.l
    }

    /// `J'_{li} f = J'(E_{li} f)`, uncoded.
    pub fn exact(&self, i: usize) -> f64 {
        self.diff.apply_local(&self.part, i, |x| (self.f)(x))
    }

    /// `Γ_l(f)(i)`.
    pub fn coded(&self, i: usize) -> f64 {
        let range = self.codec.range();
        self.diff.apply_local(&self.part, i, |x| {
            let v = (self.f)(x);
            if !(v.abs() < range) {
                self.clamped.fetch_add(1, Ordering::Relaxed);
            }
            self.codec.round_trip(v)
        })
    }

    /// Number of evaluations so far that fell outside the codec range.
    pub fn clamped(&self) -> u64 {
        self.clamped.load(Ordering::Relaxed)
    }

    /// `Γ_l(f)` as a sequence oracle.
    pub fn sequence(&self) -> SequenceOracle {
        let this = self.clone();
        SequenceOracle::new(self.len(), move |i| this.coded(i)).expect("nonempty partition")
    }

    /// `(J'_{li} f)_i` as a sequence oracle.
    pub fn exact_sequence(&self) -> SequenceOracle {
        let this = self.clone();
        SequenceOracle::new(self.len(), move |i| this.exact(i)).expect("nonempty partition")
    }

    /// Per-entry bound `2^{-m*/2} Σ_j |a'_j|` on `|J'_{li} f − Γ_l(f)(i)|`.
    pub fn coding_error_bound(&self) -> f64 {
        self.codec.resolution() * self.diff.abs_weight()
    }
}

/// `Γ_l(f)` after checking `‖f‖_∞ ≤ 2^{m*/2−1}` on a probe grid of at most `4096` cubes.
pub fn gamma_level(
    f: Integrand,
    d: usize,
    l: usize,
    codec: FixedPointCodec,
    diff: Arc<Quadrature<f64>>,
) -> Result<SequenceOracle> {
    let probe_level = l.min(12 / d);
    let probe = CubePartition::new(d, probe_level);
    let range = codec.range();
    for i in 0..probe.len() {
        let worst = std::cell::Cell::new(0.0f64);
        diff.apply_local(&probe, i, |x| {
            worst.set(worst.get().max(f(x).abs()));
            0.0
        });
        let worst = worst.get();
        if !(worst < range) {
            return Err(contract!("|f| = {worst} reaches the codec range {range}"));
        }
    }
    Ok(LevelDiscretization::new(f, d, l, codec, diff).sequence())
}
