use std::fmt;
use std::sync::Arc;

use super::{OracleFunction, QueryTally};
use crate::error::{domain, Result};
use crate::statevec::{Permutation, Register, MAX_QUBITS};
use crate::{StateVec, Unitary};

/// A quantum query `Q = (m, m', m'', Z, τ, β)`.
///
/// `Q_f |i⟩|x⟩|y⟩ = |i⟩|x ⊕ β(f(τ(i)))⟩|y⟩` for `i ∈ Z` and the identity
/// otherwise, where `i` occupies the first `m'` qubits, `x` the next `m''`
/// and `⊕` is addition modulo `2^{m''}`.
pub struct QuerySpec<D, K> {
    m: usize,
    index_bits: usize,
    value_bits: usize,
    members: Arc<Vec<bool>>,
    tau: Arc<dyn Fn(usize) -> D + Send + Sync>,
    beta: Arc<dyn Fn(&K) -> u64 + Send + Sync>,
}

impl<D, K> Clone for QuerySpec<D, K> {
    fn clone(&self) -> Self {
        Self {
            m: self.m,
            index_bits: self.index_bits,
            value_bits: self.value_bits,
            members: self.members.clone(),
            tau: self.tau.clone(),
            beta: self.beta.clone(),
        }
    }
}

impl<D, K> fmt::Debug for QuerySpec<D, K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QuerySpec")
            .field("m", &self.m)
            .field("m'", &self.index_bits)
            .field("m''", &self.value_bits)
            .field("|Z|", &self.members.iter().filter(|b| **b).count())
            .finish()
    }
}

impl<D: 'static, K: 'static> QuerySpec<D, K> {
    pub fn new(
        m: usize,
        index_bits: usize,
        value_bits: usize,
        z: impl IntoIterator<Item = usize>,
        tau: impl Fn(usize) -> D + Send + Sync + 'static,
        beta: impl Fn(&K) -> u64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if m == 0 || m > MAX_QUBITS {
            return Err(domain!("query register of {m} qubits is outside [1, {MAX_QUBITS}]"));
        }
        if index_bits + value_bits > m {
            return Err(domain!("m' + m'' = {} exceeds m = {m}", index_bits + value_bits));
        }
        let mut members = vec![false; 1 << index_bits];
        let mut any = false;
        for i in z {
            if i >= members.len() {
                return Err(domain!("Z element {i} outside [0, 2^{index_bits})"));
            }
            members[i] = true;
            any = true;
        }
        if !any {
            return Err(domain!("Z must be nonempty"));
        }
        Ok(Self { m, index_bits, value_bits, members: Arc::new(members), tau: Arc::new(tau), beta: Arc::new(beta) })
    }

    /// Qubit count `m(Q)`.
    pub fn qubits(&self) -> usize {
        self.m
    }

    pub fn index_bits(&self) -> usize {
        self.index_bits
    }

    pub fn value_bits(&self) -> usize {
        self.value_bits
    }

    pub fn index_register(&self) -> Register {
        Register::new(0, self.index_bits)
    }

    pub fn value_register(&self) -> Register {
        Register::new(self.index_bits, self.value_bits)
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members.get(i).copied().unwrap_or(false)
    }

    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| i)
    }

    pub fn tau(&self, i: usize) -> D {
        (self.tau)(i)
    }

    pub fn beta(&self, k: &K) -> u64 {
        (self.beta)(k)
    }

    /// `β(f(τ(i))) mod 2^{m''}` for each `i ∈ Z`, `None` outside `Z`.
    pub fn shifts(&self, f: &OracleFunction<D, K>) -> Vec<Option<u64>> {
        let modulus_mask = if self.value_bits >= 64 { u64::MAX } else { (1u64 << self.value_bits) - 1 };
        self.members
            .iter()
            .enumerate()
            .map(|(i, &inside)| inside.then(|| self.beta(&f.eval(&self.tau(i))) & modulus_mask))
            .collect()
    }

    /// `Q_f` as a basis permutation.
    pub fn unitary(&self, f: &OracleFunction<D, K>) -> Unitary {
        let shifts = Arc::new(self.shifts(f));
        let (m, idx, val) = (self.m, self.index_register(), self.value_register());
        let fwd = shifts.clone();
        Unitary::permutation(Permutation::new(
            "Q_f",
            move |b| match fwd[idx.get(b, m)] {
                Some(s) => val.set(b, m, val.get(b, m).wrapping_add(s as usize)),
                None => b,
            },
            move |b| match shifts[idx.get(b, m)] {
                Some(s) => val.set(b, m, val.get(b, m).wrapping_sub(s as usize)),
                None => b,
            },
        ))
    }

    /// Applies `Q_f` to `ψ`, charging one query.
    pub fn apply(&self, f: &OracleFunction<D, K>, psi: &StateVec, tally: &mut QueryTally) -> Result<StateVec> {
        if psi.qubits() != self.m {
            return Err(domain!("state has {} qubits, query expects {}", psi.qubits(), self.m));
        }
        let out = psi.apply(&self.unitary(f))?;
        tally.queries += 1;
        tally.max_qubits = tally.max_qubits.max(self.m);
        Ok(out)
    }
}
