use std::f64::consts::PI;

use num_complex::Complex;
use rand::Rng;

use super::ae::ae_value;
use super::SequenceOracle;
use crate::error::{capacity, domain, Result};
use crate::query::{NoMeasureAlgorithm, QuerySpec, QueryTally};
use crate::statevec::{OutcomeDistribution, Register, MAX_QUBITS};
use crate::{StateVec, Unitary};

/// Amplitude estimation as a query-model algorithm without measurement.
///
/// Register layout `|index⟩|value⟩|flag⟩|phase⟩`. The query writes the
/// `w`-bit quantized entry into `value`; a block rotation moves amplitude
/// `√(s·q/(2^w − 1))` onto `flag = 1`; controlled Grover powers and an
/// inverse Fourier transform on `phase` follow.
#[derive(Debug)]
pub struct AeCircuit {
    pub algorithm: NoMeasureAlgorithm<usize, f64>,
    pub len: usize,
    pub index: Register,
    pub value: Register,
    pub flag: usize,
    pub phase: Register,
}

enum Op {
    U(Unitary),
    Query,
}

impl AeCircuit {
    /// Circuit for a sequence of length `len` (padded to a power of two),
    /// `M = 2^t` phase outcomes, `w` value bits and amplitude scale `s ∈ (0, 1]`.
    pub fn new(len: usize, m: usize, value_bits: usize, scale: f64) -> Result<Self> {
        if len == 0 {
            return Err(domain!("empty sequence"));
        }
        if m < 2 || !m.is_power_of_two() {
            return Err(domain!("M = {m} must be a power of two ≥ 2"));
        }
        if value_bits == 0 || value_bits > 11 {
            return Err(domain!("value register width {value_bits} outside [1, 11]"));
        }
        if !(scale > 0.0 && scale <= 1.0) {
            return Err(domain!("amplitude scale {scale} outside (0, 1]"));
        }
        let n = len.next_power_of_two().trailing_zeros() as usize;
        let t = m.trailing_zeros() as usize;
        let total = n + value_bits + 1 + t;
        if total > MAX_QUBITS {
            return Err(capacity!("amplitude estimation needs {total} qubits, cap is {MAX_QUBITS}"));
        }
        let index = Register::new(0, n);
        let value = index.next(value_bits);
        let flag = value.end();
        let phase = Register::new(flag + 1, t);

        let levels = ((1u64 << value_bits) - 1) as f64;
        let query = QuerySpec::new(total, n, value_bits, 0..len, |i| i, move |v: &f64| (v.clamp(0.0, 1.0) * levels).round() as u64)?;

        let rot = rotation(value, flag, value_bits, scale);
        let rot_inv = rot.adjoint();
        let neg = Unitary::negate(value);
        let h_idx = Unitary::hadamard(index);

        let bit = |q: usize| 1usize << (total - 1 - q);
        let flag_bit = bit(flag);
        let work_mask = ((1usize << (n + value_bits + 1)) - 1) << t;

        let mut ops = vec![Op::U(Unitary::hadamard(phase)), Op::U(h_idx.clone())];
        let push_a = |ops: &mut Vec<Op>| {
            ops.extend([Op::Query, Op::U(rot.clone()), Op::U(neg.clone()), Op::Query]);
        };
        let push_a_inv = |ops: &mut Vec<Op>| {
            ops.extend([
                Op::U(neg.clone()),
                Op::Query,
                Op::U(rot_inv.clone()),
                Op::U(neg.clone()),
                Op::Query,
                Op::U(neg.clone()),
                Op::U(h_idx.clone()),
            ]);
        };
        push_a(&mut ops);
        for q in 0..t {
            let ctrl = bit(phase.start + q);
            let s_chi = Unitary::phase(move |b| b & ctrl != 0 && b & flag_bit != 0, PI);
            let s_zero = Unitary::phase(move |b| b & ctrl != 0 && b & work_mask != 0, PI);
            for _ in 0..1usize << (t - 1 - q) {
                ops.push(Op::U(s_chi.clone()));
                push_a_inv(&mut ops);
                ops.push(Op::U(s_zero.clone()));
                ops.push(Op::U(h_idx.clone()));
                push_a(&mut ops);
            }
        }
        ops.push(Op::U(Unitary::inverse_qft(phase)));

        let mut programs = vec![Vec::new()];
        for op in ops {
            match op {
                Op::U(u) => programs.last_mut().expect("nonempty").push(u),
                Op::Query => programs.push(Vec::new()),
            }
        }
        let algorithm = NoMeasureAlgorithm::new(query, programs)?;
        Ok(Self { algorithm, len, index, value, flag, phase })
    }

    pub fn qubits(&self) -> usize {
        self.algorithm.qubits()
    }

    pub fn phase_outcomes(&self) -> usize {
        self.phase.size()
    }

    /// Final state before measurement.
    pub fn run(&self, f: &SequenceOracle, tally: &mut QueryTally) -> Result<StateVec> {
        if f.len() != self.len {
            return Err(domain!("sequence length {} differs from circuit length {}", f.len(), self.len));
        }
        self.algorithm.run(&f.as_oracle(), 0, tally)
    }

    /// Law of `sin²(πy/M)` read from the phase register.
    pub fn output_law(&self, psi: &StateVec) -> OutcomeDistribution {
        let (phase, m, size) = (self.phase, self.qubits(), self.phase_outcomes());
        psi.exact_distribution(|b| ae_value(phase.get(b, m), size))
    }
}

/// `R_y` on `flag` conditioned on the value register: `|q⟩|0⟩ ↦ |q⟩(√(1−s q/L)|0⟩ + √(s q/L)|1⟩)`.
fn rotation(value: Register, flag: usize, w: usize, scale: f64) -> Unitary {
    let dim = 1usize << (w + 1);
    let levels = ((1u64 << w) - 1) as f64;
    let mut mat = vec![Complex::new(0.0, 0.0); dim * dim];
    for q in 0..1usize << w {
        let p = (scale * q as f64 / levels).clamp(0.0, 1.0);
        let (c, s) = ((1.0 - p).sqrt(), p.sqrt());
        let (r0, r1) = (2 * q, 2 * q + 1);
        mat[r0 * dim + r0] = Complex::new(c, 0.0);
        mat[r0 * dim + r1] = Complex::new(-s, 0.0);
        mat[r1 * dim + r0] = Complex::new(s, 0.0);
        mat[r1 * dim + r1] = Complex::new(c, 0.0);
    }
    let mut targets: Vec<usize> = (value.start..value.end()).collect();
    targets.push(flag);
    Unitary::dense(targets, mat)
}

/// Exact output law of the state-vector amplitude-estimation circuit on a sequence with entries in `[0, 1]`.
pub fn ae_statevec_distribution(f: &SequenceOracle, m: usize, value_bits: usize) -> Result<OutcomeDistribution> {
    let circuit = AeCircuit::new(f.len(), m, value_bits, 1.0)?;
    let psi = circuit.run(f, &mut QueryTally::default())?;
    Ok(circuit.output_law(&psi))
}

/// One run of amplitude estimation on a Boolean sequence, simulated on the state vector.
///
/// Returns `ã` rescaled to the mean of `f` and the tally of oracle applications.
pub fn ae_statevec<R: Rng + ?Sized>(f: &SequenceOracle, m: usize, rng: &mut R) -> Result<(f64, QueryTally)> {
    if f.values().iter().any(|v| *v != 0.0 && *v != 1.0) {
        return Err(domain!("amplitude estimation on the state vector expects a Boolean sequence"));
    }
    let circuit = AeCircuit::new(f.len(), m, 1, 1.0)?;
    let mut tally = QueryTally::default();
    let psi = circuit.run(f, &mut tally)?;
    let y = circuit.phase.get(psi.measure(rng), circuit.qubits());
    let pad = f.len().next_power_of_two() as f64 / f.len() as f64;
    Ok((ae_value(y, m) * pad, tally))
}
