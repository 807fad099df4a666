use std::fmt;
use std::sync::Arc;

use num_complex::Complex;

use super::register::Register;
use super::MAX_DENSE_TARGETS;
use crate::error::{domain, Result};
use crate::scalar::Real;

type IndexMap = Arc<dyn Fn(usize) -> usize + Send + Sync>;

/// A bijection on basis indices together with its inverse.
#[derive(Clone)]
pub struct Permutation {
    label: String,
    forward: IndexMap,
    inverse: IndexMap,
}

impl Permutation {
    pub fn new(
        label: impl Into<String>,
        forward: impl Fn(usize) -> usize + Send + Sync + 'static,
        inverse: impl Fn(usize) -> usize + Send + Sync + 'static,
    ) -> Self {
        Self { label: label.into(), forward: Arc::new(forward), inverse: Arc::new(inverse) }
    }

    /// A permutation that is its own inverse (swaps, negations).
    pub fn involution(label: impl Into<String>, map: impl Fn(usize) -> usize + Send + Sync + 'static) -> Self {
        let map: IndexMap = Arc::new(map);
        Self { label: label.into(), forward: map.clone(), inverse: map }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    #[inline]
    pub fn forward(&self, idx: usize) -> usize {
        (self.forward)(idx)
    }

    #[inline]
    pub fn inverse(&self, idx: usize) -> usize {
        (self.inverse)(idx)
    }

    pub fn inverted(&self) -> Self {
        Self { label: format!("{}^-1", self.label), forward: self.inverse.clone(), inverse: self.forward.clone() }
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation({})", self.label)
    }
}

/// Predicate on basis indices.
#[derive(Clone)]
pub struct Predicate(Arc<dyn Fn(usize) -> bool + Send + Sync>);

impl Predicate {
    pub fn new(pred: impl Fn(usize) -> bool + Send + Sync + 'static) -> Self {
        Self(Arc::new(pred))
    }

    #[inline]
    pub fn holds(&self, idx: usize) -> bool {
        (self.0)(idx)
    }
}

impl fmt::Debug for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Predicate(..)")
    }
}

/// The unitaries the engine applies without materializing `2^m × 2^m` matrices.
#[derive(Clone, Debug)]
pub enum StructuredUnitary<T> {
    /// `|i⟩ ↦ |σ(i)⟩`.
    BasisPermutation(Permutation),
    /// `|x⟩ ↦ |x + c mod 2^w⟩` on a register of width `w`.
    ModularAddConstant { reg: Register, constant: u64 },
    /// `|x⟩ ↦ |0 − x mod 2^w⟩`.
    ModularNegate { reg: Register },
    /// Hadamard on every qubit of the register.
    HadamardLayer { reg: Register },
    /// `|x⟩ ↦ 2^{-w/2} Σ_y e^{±2πixy/2^w} |y⟩` (`+` forward, `−` inverse).
    Qft { reg: Register, inverse: bool },
    /// Multiplies the amplitude of every basis state satisfying the predicate by `e^{iθ}`.
    ControlledPhase { predicate: Predicate, angle: T },
    /// Dense unitary on a few target qubits, row-major `2^t × 2^t`; the first
    /// target is the most significant bit of the local index.
    SmallDenseBlock { targets: Vec<usize>, matrix: Vec<Complex<T>> },
}

impl<T: Real> StructuredUnitary<T> {
    pub fn permutation(p: Permutation) -> Self {
        Self::BasisPermutation(p)
    }

    pub fn add_constant(reg: Register, constant: u64) -> Self {
        Self::ModularAddConstant { reg, constant }
    }

    pub fn negate(reg: Register) -> Self {
        Self::ModularNegate { reg }
    }

    pub fn hadamard(reg: Register) -> Self {
        Self::HadamardLayer { reg }
    }

    pub fn qft(reg: Register) -> Self {
        Self::Qft { reg, inverse: false }
    }

    pub fn inverse_qft(reg: Register) -> Self {
        Self::Qft { reg, inverse: true }
    }

    pub fn phase(predicate: impl Fn(usize) -> bool + Send + Sync + 'static, angle: T) -> Self {
        Self::ControlledPhase { predicate: Predicate::new(predicate), angle }
    }

    pub fn dense(targets: Vec<usize>, matrix: Vec<Complex<T>>) -> Self {
        Self::SmallDenseBlock { targets, matrix }
    }

    /// Checks that the unitary is well formed for an `m`-qubit register.
    pub fn validate(&self, m: usize) -> Result<()> {
        let reg_ok = |reg: &Register| {
            if reg.fits(m) {
                Ok(())
            } else {
                Err(domain!("register [{}, {}) exceeds {m} qubits", reg.start, reg.end()))
            }
        };
        match self {
            Self::BasisPermutation(_) | Self::ControlledPhase { .. } => Ok(()),
            Self::ModularAddConstant { reg, .. }
            | Self::ModularNegate { reg }
            | Self::HadamardLayer { reg }
            | Self::Qft { reg, .. } => reg_ok(reg),
            Self::SmallDenseBlock { targets, matrix } => {
                let t = targets.len();
                if t > MAX_DENSE_TARGETS {
                    return Err(domain!("dense block on {t} qubits exceeds cap {MAX_DENSE_TARGETS}"));
                }
                if targets.iter().any(|&q| q >= m) {
                    return Err(domain!("dense block target out of range for {m} qubits"));
                }
                let mut seen = targets.clone();
                seen.sort_unstable();
                seen.dedup();
                if seen.len() != t {
                    return Err(domain!("dense block targets must be distinct"));
                }
                if matrix.len() != 1 << (2 * t) {
                    return Err(domain!("dense block matrix has {} entries, expected {}", matrix.len(), 1usize << (2 * t)));
                }
                Ok(())
            }
        }
    }

    /// The adjoint `U†`.
    pub fn adjoint(&self) -> Self {
        match self {
            Self::BasisPermutation(p) => Self::BasisPermutation(p.inverted()),
            Self::ModularAddConstant { reg, constant } => {
                let modulus = 1u128 << reg.width;
                let c = (*constant as u128) % modulus;
                Self::ModularAddConstant { reg: *reg, constant: ((modulus - c) % modulus) as u64 }
            }
            Self::ModularNegate { reg } => Self::ModularNegate { reg: *reg },
            Self::HadamardLayer { reg } => Self::HadamardLayer { reg: *reg },
            Self::Qft { reg, inverse } => Self::Qft { reg: *reg, inverse: !inverse },
            Self::ControlledPhase { predicate, angle } => Self::ControlledPhase { predicate: predicate.clone(), angle: -*angle },
            Self::SmallDenseBlock { targets, matrix } => {
                let dim = 1 << targets.len();
                let mut adj = vec![Complex::new(T::zero(), T::zero()); dim * dim];
                for r in 0..dim {
                    for c in 0..dim {
                        adj[c * dim + r] = matrix[r * dim + c].conj();
                    }
                }
                Self::SmallDenseBlock { targets: targets.clone(), matrix: adj }
            }
        }
    }

    /// Applies the unitary in place. `amps.len()` must be `2^m`.
    pub(crate) fn apply_to(&self, amps: &mut Vec<Complex<T>>, m: usize) -> Result<()> {
        self.validate(m)?;
        let dim = amps.len();
        match self {
            Self::BasisPermutation(p) => {
                let mut out = vec![Complex::new(T::zero(), T::zero()); dim];
                let mut hit = vec![false; dim];
                for (i, a) in amps.iter().enumerate() {
                    let j = p.forward(i);
                    if j >= dim || hit[j] {
                        return Err(domain!("permutation {} is not a bijection on {m} qubits", p.label()));
                    }
                    hit[j] = true;
                    out[j] = *a;
                }
                *amps = out;
            }
            Self::ModularAddConstant { reg, constant } => {
                if reg.width == 0 {
                    return Ok(());
                }
                let c = (*constant as u128 % (1u128 << reg.width)) as usize;
                permute(amps, |i| reg.set(i, m, reg.get(i, m).wrapping_add(c)));
            }
            Self::ModularNegate { reg } => {
                if reg.width == 0 {
                    return Ok(());
                }
                permute(amps, |i| reg.set(i, m, reg.get(i, m).wrapping_neg()));
            }
            Self::HadamardLayer { reg } => {
                let h = T::FRAC_1_SQRT_2();
                for q in reg.start..reg.end() {
                    let stride = 1 << (m - 1 - q);
                    for base in 0..dim {
                        if base & stride == 0 {
                            let a = amps[base];
                            let b = amps[base | stride];
                            amps[base] = (a + b) * h;
                            amps[base | stride] = (a - b) * h;
                        }
                    }
                }
            }
            Self::Qft { reg, inverse } => {
                if reg.width == 0 {
                    return Ok(());
                }
                let size = reg.size();
                let sign = if *inverse { -T::one() } else { T::one() };
                let tau = T::TAU() / T::from_usize(size).unwrap();
                let twiddle: Vec<Complex<T>> =
                    (0..size).map(|k| Complex::from_polar(T::one(), sign * tau * T::from_usize(k).unwrap())).collect();
                let norm = T::one() / T::from_usize(size).unwrap().sqrt();
                let mut local = vec![Complex::new(T::zero(), T::zero()); size];
                for base in 0..dim {
                    if reg.get(base, m) != 0 {
                        continue;
                    }
                    for (x, slot) in local.iter_mut().enumerate() {
                        *slot = amps[reg.set(base, m, x)];
                    }
                    for y in 0..size {
                        let mut acc = Complex::new(T::zero(), T::zero());
                        for (x, a) in local.iter().enumerate() {
                            acc += *a * twiddle[(x * y) & (size - 1)];
                        }
                        amps[reg.set(base, m, y)] = acc * norm;
                    }
                }
            }
            Self::ControlledPhase { predicate, angle } => {
                let w = Complex::from_polar(T::one(), *angle);
                for (i, a) in amps.iter_mut().enumerate() {
                    if predicate.holds(i) {
                        *a *= w;
                    }
                }
            }
            Self::SmallDenseBlock { targets, matrix } => {
                let t = targets.len();
                let local_dim = 1 << t;
                let bits: Vec<usize> = targets.iter().map(|&q| 1 << (m - 1 - q)).collect();
                let target_mask: usize = bits.iter().sum();
                let spread = |local: usize| -> usize {
                    bits.iter().enumerate().filter(|(k, _)| local >> (t - 1 - k) & 1 == 1).map(|(_, b)| *b).sum()
                };
                let offsets: Vec<usize> = (0..local_dim).map(spread).collect();
                let mut local = vec![Complex::new(T::zero(), T::zero()); local_dim];
                for base in 0..dim {
                    if base & target_mask != 0 {
                        continue;
                    }
                    for (k, slot) in local.iter_mut().enumerate() {
                        *slot = amps[base | offsets[k]];
                    }
                    for r in 0..local_dim {
                        let row = &matrix[r * local_dim..(r + 1) * local_dim];
                        let acc = row.iter().zip(&local).fold(Complex::new(T::zero(), T::zero()), |s, (u, a)| s + *u * *a);
                        amps[base | offsets[r]] = acc;
                    }
                }
            }
        }
        Ok(())
    }
}

fn permute<T: Copy + Default>(amps: &mut Vec<T>, map: impl Fn(usize) -> usize) {
    let mut out = vec![T::default(); amps.len()];
    for (i, a) in amps.iter().enumerate() {
        out[map(i)] = *a;
    }
    *amps = out;
}
