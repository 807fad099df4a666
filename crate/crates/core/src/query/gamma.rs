use std::fmt;
use std::sync::Arc;

use super::{NoMeasureAlgorithm, OracleFunction, QuerySpec};
use crate::error::{capacity, domain, Result};
use crate::statevec::{Permutation, Register, MAX_QUBITS};
use crate::Unitary;

/// One of the maps `η_j` of a reduction.
pub type Eta<Dt, D> = Arc<dyn Fn(&Dt) -> D + Send + Sync>;
type Rho<Dt, Kt> = Arc<dyn Fn(&Dt, &[u64]) -> Kt + Send + Sync>;

/// A map `Γ: F → F̃` of the form
/// `Γ(f)(s) = ρ(s, β(f(η_0(s))), …, β(f(η_{κ−1}(s))))`.
pub struct GammaReduction<D, K, Dt, Kt> {
    m_star: usize,
    etas: Vec<Eta<Dt, D>>,
    beta: Arc<dyn Fn(&K) -> u64 + Send + Sync>,
    rho: Rho<Dt, Kt>,
}

impl<D, K, Dt, Kt> Clone for GammaReduction<D, K, Dt, Kt> {
    fn clone(&self) -> Self {
        Self { m_star: self.m_star, etas: self.etas.clone(), beta: self.beta.clone(), rho: self.rho.clone() }
    }
}

impl<D, K, Dt, Kt> fmt::Debug for GammaReduction<D, K, Dt, Kt> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GammaReduction").field("kappa", &self.etas.len()).field("m_star", &self.m_star).finish()
    }
}

impl<D: 'static, K: 'static, Dt: 'static, Kt: 'static> GammaReduction<D, K, Dt, Kt> {
    pub fn new(
        m_star: usize,
        etas: Vec<Eta<Dt, D>>,
        beta: impl Fn(&K) -> u64 + Send + Sync + 'static,
        rho: impl Fn(&Dt, &[u64]) -> Kt + Send + Sync + 'static,
    ) -> Result<Self> {
        if etas.is_empty() {
            return Err(domain!("κ must be at least 1"));
        }
        if m_star == 0 || m_star > 63 {
            return Err(domain!("m* = {m_star} outside [1, 63]"));
        }
        Ok(Self { m_star, etas, beta: Arc::new(beta), rho: Arc::new(rho) })
    }

    pub fn kappa(&self) -> usize {
        self.etas.len()
    }

    pub fn m_star(&self) -> usize {
        self.m_star
    }

    fn encode(&self, k: &K) -> u64 {
        (self.beta)(k) & ((1u64 << self.m_star) - 1)
    }

    /// `Γ(f)`.
    pub fn apply(&self, f: &OracleFunction<D, K>) -> OracleFunction<Dt, Kt> {
        let g = self.clone();
        let f = f.clone();
        OracleFunction::new(move |s: &Dt| {
            let zs: Vec<u64> = g.etas.iter().map(|eta| g.encode(&f.eval(&eta(s)))).collect();
            (g.rho)(s, &zs)
        })
    }
}

/// Register layout of the simulating algorithm `B`.
///
/// Callers address `B` in the original order `|i⟩|x⟩|y⟩|j⟩|z_0⟩…|z_{κ−1}⟩`;
/// between the first and last unitary the state lives in the working order
/// `|i⟩|j⟩|z_0⟩…|z_{κ−1}⟩|x⟩|y⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReductionLayout {
    pub m: usize,
    pub m_tilde: usize,
    pub index_bits: usize,
    pub value_bits: usize,
    pub kappa: usize,
    pub kappa0: usize,
    pub m_star: usize,
}

impl ReductionLayout {
    fn rest_bits(&self) -> usize {
        self.m_tilde - self.index_bits - self.value_bits
    }

    /// `i`, shared by both orders.
    pub fn index(&self) -> Register {
        Register::new(0, self.index_bits)
    }

    /// `x` in the original order.
    pub fn value(&self) -> Register {
        self.index().next(self.value_bits)
    }

    /// `y` in the original order.
    pub fn rest(&self) -> Register {
        self.value().next(self.rest_bits())
    }

    /// The `m − m̃` ancilla qubits in the original order.
    pub fn ancilla(&self) -> Register {
        Register::new(self.m_tilde, self.m - self.m_tilde)
    }

    fn orig_counter(&self) -> Register {
        self.rest().next(self.kappa0)
    }

    fn orig_slot(&self, j: usize) -> Register {
        Register::new(self.orig_counter().end() + j * self.m_star, self.m_star)
    }

    /// `j` in the working order.
    pub fn counter(&self) -> Register {
        self.index().next(self.kappa0)
    }

    /// `z_j` in the working order.
    pub fn slot(&self, j: usize) -> Register {
        Register::new(self.counter().end() + j * self.m_star, self.m_star)
    }

    fn work_value(&self) -> Register {
        Register::new(self.slot(self.kappa - 1).end(), self.value_bits)
    }

    fn work_rest(&self) -> Register {
        self.work_value().next(self.rest_bits())
    }

    fn to_working(&self, b: usize) -> usize {
        let m = self.m;
        let mut out = self.index().set(0, m, self.index().get(b, m));
        out = self.counter().set(out, m, self.orig_counter().get(b, m));
        for j in 0..self.kappa {
            out = self.slot(j).set(out, m, self.orig_slot(j).get(b, m));
        }
        out = self.work_value().set(out, m, self.value().get(b, m));
        self.work_rest().set(out, m, self.rest().get(b, m))
    }

    fn to_original(&self, b: usize) -> usize {
        let m = self.m;
        let mut out = self.index().set(0, m, self.index().get(b, m));
        out = self.orig_counter().set(out, m, self.counter().get(b, m));
        for j in 0..self.kappa {
            out = self.orig_slot(j).set(out, m, self.slot(j).get(b, m));
        }
        out = self.value().set(out, m, self.work_value().get(b, m));
        self.rest().set(out, m, self.work_rest().get(b, m))
    }
}

/// Builds `B` on `F` with `n_q(B) = 2κ` such that
/// `B_f |x⟩|0⟩ = (Q̃_{Γ(f)} |x⟩)|0⟩` for every basis state `x` of `Q̃`'s register.
pub fn reduce_via_gamma<D, K, Dt, Kt>(
    q_tilde: &QuerySpec<Dt, Kt>,
    gamma: &GammaReduction<D, K, Dt, Kt>,
) -> Result<(NoMeasureAlgorithm<D, K>, ReductionLayout)>
where
    D: 'static,
    K: 'static,
    Dt: 'static,
    Kt: 'static,
{
    let kappa = gamma.kappa();
    let kappa0 = kappa.next_power_of_two().trailing_zeros() as usize;
    let m_star = gamma.m_star();
    let m_tilde = q_tilde.qubits();
    let m = m_tilde + kappa0 + kappa * m_star;
    if m > MAX_QUBITS {
        return Err(capacity!("simulating algorithm needs {m} qubits, cap is {MAX_QUBITS}"));
    }
    let layout = ReductionLayout {
        m,
        m_tilde,
        index_bits: q_tilde.index_bits(),
        value_bits: q_tilde.value_bits(),
        kappa,
        kappa0,
        m_star,
    };

    let z: Vec<usize> =
        q_tilde.members().flat_map(|i| (0..kappa).map(move |j| (i << kappa0) | j)).collect();
    let tau = {
        let (qt, etas) = (q_tilde.clone(), gamma.etas.clone());
        move |ij: usize| etas[ij & ((1 << kappa0) - 1)](&qt.tau(ij >> kappa0))
    };
    let beta = {
        let g = gamma.clone();
        move |k: &K| g.encode(k)
    };
    let query = QuerySpec::new(m, layout.index_bits + kappa0, m_star, z, tau, beta)?;

    let p0 = Unitary::permutation(Permutation::new("P0", move |b| layout.to_working(b), move |b| layout.to_original(b)));
    let p0_inv = p0.adjoint();
    let c = Unitary::add_constant(layout.counter(), 1);
    let c_inv = c.adjoint();
    let c0 = Unitary::add_constant(layout.counter(), kappa as u64);
    let c0_inv = c0.adjoint();
    let j_neg = Unitary::negate(layout.slot(0));
    let p = Unitary::permutation(Permutation::involution("P", move |b| {
        let j = layout.counter().get(b, m);
        if j == 0 || j >= kappa {
            return b;
        }
        let (s0, sj) = (layout.slot(0), layout.slot(j));
        let (z0, zj) = (s0.get(b, m), sj.get(b, m));
        sj.set(s0.set(b, m, zj), m, z0)
    }));
    let t = {
        let forward = t_map(q_tilde, gamma, layout, false);
        let inverse = t_map(q_tilde, gamma, layout, true);
        Unitary::permutation(Permutation::new("T", forward, inverse))
    };

    let mut unitaries = Vec::with_capacity(2 * kappa + 1);
    unitaries.push(vec![p0, c0, c_inv.clone()]);
    for _ in 1..kappa {
        unitaries.push(vec![p.clone(), c_inv.clone()]);
    }
    unitaries.push(vec![p.clone(), t, p.clone(), j_neg.clone()]);
    for _ in kappa + 1..2 * kappa {
        unitaries.push(vec![c.clone(), p.clone(), j_neg.clone()]);
    }
    unitaries.push(vec![c, c0_inv, p0_inv]);

    Ok((NoMeasureAlgorithm::new(query, unitaries)?, layout))
}

fn t_map<D, K, Dt, Kt>(
    q_tilde: &QuerySpec<Dt, Kt>,
    gamma: &GammaReduction<D, K, Dt, Kt>,
    layout: ReductionLayout,
    inverse: bool,
) -> impl Fn(usize) -> usize + Send + Sync + 'static
where
    D: 'static,
    K: 'static,
    Dt: 'static,
    Kt: 'static,
{
    let (qt, rho) = (q_tilde.clone(), gamma.rho.clone());
    let m = layout.m;
    move |b| {
        let i = layout.index().get(b, m);
        if !qt.contains(i) {
            return b;
        }
        let zs: Vec<u64> = (0..layout.kappa).map(|j| layout.slot(j).get(b, m) as u64).collect();
        let shift = qt.beta(&rho(&qt.tau(i), &zs)) as usize;
        let x = layout.work_value();
        let v = x.get(b, m);
        x.set(b, m, if inverse { v.wrapping_sub(shift) } else { v.wrapping_add(shift) })
    }
}
