use std::fmt;
use std::sync::Arc;

use rand::Rng;

use super::{OracleFunction, QuerySpec, QueryTally};
use crate::error::{capacity, domain, Result};
use crate::statevec::OutcomeDistribution;
use crate::{StateVec, Unitary};

/// A quantum algorithm without measurement, `A = (Q, (U_j)_{j=0}^n)`.
///
/// Each `U_j` is given as a program: a sequence of structured unitaries applied
/// left to right.
pub struct NoMeasureAlgorithm<D, K> {
    pub query: QuerySpec<D, K>,
    pub unitaries: Vec<Vec<Unitary>>,
}

impl<D, K> Clone for NoMeasureAlgorithm<D, K> {
    fn clone(&self) -> Self {
        Self { query: self.query.clone(), unitaries: self.unitaries.clone() }
    }
}

impl<D, K> fmt::Debug for NoMeasureAlgorithm<D, K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NoMeasureAlgorithm").field("query", &self.query).field("n_q", &self.unitaries.len().saturating_sub(1)).finish()
    }
}

impl<D: 'static, K: 'static> NoMeasureAlgorithm<D, K> {
    pub fn new(query: QuerySpec<D, K>, unitaries: Vec<Vec<Unitary>>) -> Result<Self> {
        if unitaries.is_empty() {
            return Err(domain!("an algorithm needs at least U_0"));
        }
        let m = query.qubits();
        for u in unitaries.iter().flatten() {
            u.validate(m)?;
        }
        Ok(Self { query, unitaries })
    }

    /// Number of query slots `n_q(A)`.
    pub fn n_queries(&self) -> usize {
        self.unitaries.len() - 1
    }

    pub fn qubits(&self) -> usize {
        self.query.qubits()
    }

    /// `A_f |b0⟩`.
    pub fn run(&self, f: &OracleFunction<D, K>, b0: usize, tally: &mut QueryTally) -> Result<StateVec> {
        let psi = StateVec::basis_state(self.qubits(), b0)?;
        self.run_from(f, psi, tally)
    }

    /// `A_f |ψ⟩` for an arbitrary initial state.
    pub fn run_from(&self, f: &OracleFunction<D, K>, mut psi: StateVec, tally: &mut QueryTally) -> Result<StateVec> {
        if psi.qubits() != self.qubits() {
            return Err(domain!("state has {} qubits, algorithm expects {}", psi.qubits(), self.qubits()));
        }
        let q_f = self.query.unitary(f);
        psi.apply_all(&self.unitaries[0])?;
        for program in &self.unitaries[1..] {
            psi.apply_mut(&q_f)?;
            tally.queries += 1;
            psi.apply_all(program)?;
        }
        tally.max_qubits = tally.max_qubits.max(self.qubits());
        Ok(psi)
    }
}

/// Start rule `b_ℓ(x_0, …, x_{ℓ-1})`; called with the stage index and the outcomes so far.
pub type StartRule = Arc<dyn Fn(usize, &[usize]) -> usize + Send + Sync>;
/// Output map `φ(x_0, …, x_{k-1})`.
pub type OutputMap = Arc<dyn Fn(&[usize]) -> f64 + Send + Sync>;

/// `A = ((A_ℓ), (b_ℓ), φ)`: `k` no-measurement stages, each measured in the
/// computational basis, with classical control between stages.
pub struct StagedAlgorithm<D, K> {
    pub stages: Vec<NoMeasureAlgorithm<D, K>>,
    pub start: StartRule,
    pub output: OutputMap,
}

impl<D, K> Clone for StagedAlgorithm<D, K> {
    fn clone(&self) -> Self {
        Self { stages: self.stages.clone(), start: self.start.clone(), output: self.output.clone() }
    }
}

/// An algorithm with measurements and real output.
pub enum MeasuredAlgorithm<D, K> {
    Staged(StagedAlgorithm<D, K>),
    /// Sum of independent runs of each part.
    Sum(Vec<MeasuredAlgorithm<D, K>>),
    /// Lower median of `reps` independent runs.
    Median { inner: Box<MeasuredAlgorithm<D, K>>, reps: usize },
}

impl<D, K> Clone for MeasuredAlgorithm<D, K> {
    fn clone(&self) -> Self {
        match self {
            Self::Staged(s) => Self::Staged(s.clone()),
            Self::Sum(parts) => Self::Sum(parts.clone()),
            Self::Median { inner, reps } => Self::Median { inner: inner.clone(), reps: *reps },
        }
    }
}

impl<D, K> fmt::Debug for MeasuredAlgorithm<D, K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Staged(s) => write!(f, "Staged(k={})", s.stages.len()),
            Self::Sum(parts) => f.debug_tuple("Sum").field(parts).finish(),
            Self::Median { inner, reps } => write!(f, "Median({reps} × {inner:?})"),
        }
    }
}

impl<D: 'static, K: 'static> MeasuredAlgorithm<D, K> {
    pub fn staged(
        stages: Vec<NoMeasureAlgorithm<D, K>>,
        start: impl Fn(usize, &[usize]) -> usize + Send + Sync + 'static,
        output: impl Fn(&[usize]) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if stages.is_empty() {
            return Err(domain!("an algorithm with measurements needs k ≥ 1 stages"));
        }
        Ok(Self::Staged(StagedAlgorithm { stages, start: Arc::new(start), output: Arc::new(output) }))
    }

    /// One measured stage started in `|b0⟩` with output `φ`.
    pub fn single(stage: NoMeasureAlgorithm<D, K>, b0: usize, output: impl Fn(usize) -> f64 + Send + Sync + 'static) -> Result<Self> {
        Self::staged(vec![stage], move |_, _| b0, move |xs| output(xs[0]))
    }

    /// `Σ_l A_l`: independent runs of each part, outputs added.
    pub fn compose_sum(parts: Vec<Self>) -> Self {
        Self::Sum(parts)
    }

    /// Median of `reps` independent runs (lower median for even `reps`).
    pub fn median_boost(self, reps: usize) -> Result<Self> {
        if reps == 0 {
            return Err(domain!("median boosting needs at least one repetition"));
        }
        Ok(Self::Median { inner: Box::new(self), reps })
    }

    /// Number of queries `n_q(A)`.
    pub fn n_queries(&self) -> usize {
        match self {
            Self::Staged(s) => s.stages.iter().map(NoMeasureAlgorithm::n_queries).sum(),
            Self::Sum(parts) => parts.iter().map(Self::n_queries).sum(),
            Self::Median { inner, reps } => reps * inner.n_queries(),
        }
    }

    /// Number of measurements performed by one run.
    pub fn n_measurements(&self) -> usize {
        match self {
            Self::Staged(s) => s.stages.len(),
            Self::Sum(parts) => parts.iter().map(Self::n_measurements).sum(),
            Self::Median { inner, reps } => reps * inner.n_measurements(),
        }
    }

    /// Samples one output of `A(f)`, simulating stage by stage.
    pub fn run<R: Rng + ?Sized>(&self, f: &OracleFunction<D, K>, rng: &mut R, tally: &mut QueryTally) -> Result<f64> {
        match self {
            Self::Staged(s) => {
                let mut outcomes = Vec::with_capacity(s.stages.len());
                for (l, stage) in s.stages.iter().enumerate() {
                    let b = (s.start)(l, &outcomes);
                    let psi = stage.run(f, b, tally)?;
                    tally.stages += 1;
                    outcomes.push(psi.measure(rng));
                }
                Ok((s.output)(&outcomes))
            }
            Self::Sum(parts) => {
                let mut total = 0.0;
                for p in parts {
                    total += p.run(f, rng, tally)?;
                }
                Ok(total)
            }
            Self::Median { inner, reps } => {
                let mut xs = Vec::with_capacity(*reps);
                for _ in 0..*reps {
                    xs.push(inner.run(f, rng, tally)?);
                }
                Ok(crate::stats::lower_median(&mut xs))
            }
        }
    }

    /// The exact output law `A(f)`, refusing beyond `budget` enumerated outcome tuples.
    pub fn exact_output_distribution(&self, f: &OracleFunction<D, K>, budget: usize) -> Result<OutcomeDistribution> {
        match self {
            Self::Staged(s) => {
                let mut out = OutcomeDistribution::new();
                let mut visited = 0usize;
                let mut prefix = Vec::with_capacity(s.stages.len());
                enumerate_stages(s, f, &mut prefix, 1.0, &mut out, &mut visited, budget)?;
                Ok(out)
            }
            Self::Sum(parts) => {
                let mut acc = OutcomeDistribution::point(0.0);
                for p in parts {
                    acc = acc.convolve(&p.exact_output_distribution(f, budget)?);
                    if acc.len() > budget {
                        return Err(capacity!("convolved support {} exceeds budget {budget}", acc.len()));
                    }
                }
                Ok(acc)
            }
            Self::Median { inner, reps } => Ok(inner.exact_output_distribution(f, budget)?.median_of(*reps)),
        }
    }
}

fn enumerate_stages<D: 'static, K: 'static>(
    s: &StagedAlgorithm<D, K>,
    f: &OracleFunction<D, K>,
    prefix: &mut Vec<usize>,
    mass: f64,
    out: &mut OutcomeDistribution,
    visited: &mut usize,
    budget: usize,
) -> Result<()> {
    let l = prefix.len();
    if l == s.stages.len() {
        *visited += 1;
        if *visited > budget {
            return Err(capacity!("more than {budget} outcome tuples"));
        }
        out.add((s.output)(prefix), mass);
        return Ok(());
    }
    let b = (s.start)(l, prefix);
    let psi = s.stages[l].run(f, b, &mut QueryTally::default())?;
    for x in 0..psi.dim() {
        let p = psi.probability(x);
        if p > 0.0 {
            prefix.push(x);
            enumerate_stages(s, f, prefix, mass * p, out, visited, budget)?;
            prefix.pop();
        }
    }
    Ok(())
}

/// `e(S, A, f, θ) = inf{ε ≥ 0 : P(|S(f) − ζ| > ε) ≤ θ}` for `ζ ~ law`.
pub fn probabilistic_error(law: &OutcomeDistribution, exact: f64, theta: f64) -> f64 {
    let mut devs: Vec<(f64, f64)> = law.iter().map(|(v, p)| ((v - exact).abs(), p)).collect();
    devs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut tail: f64 = devs.iter().map(|(_, p)| p).sum();
    // candidate ε = 0 first, then each deviation in increasing order
    let mut candidate = 0.0;
    let mut i = 0;
    loop {
        while i < devs.len() && devs[i].0 <= candidate {
            tail -= devs[i].1;
            i += 1;
        }
        if tail <= theta + 1e-15 || i == devs.len() {
            return candidate;
        }
        candidate = devs[i].0;
    }
}
