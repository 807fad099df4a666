use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

/// Oracle access to an input function `f: D → K`.
///
/// Clones share the evaluation counter, which is diagnostic only; query cost
/// is counted by the algorithms that call `Q_f`.
pub struct OracleFunction<D, K> {
    eval: Arc<dyn Fn(&D) -> K + Send + Sync>,
    evaluations: Arc<AtomicU64>,
}

impl<D, K> Clone for OracleFunction<D, K> {
    fn clone(&self) -> Self {
        Self { eval: self.eval.clone(), evaluations: self.evaluations.clone() }
    }
}

impl<D, K> fmt::Debug for OracleFunction<D, K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "OracleFunction(evaluations={})", self.evaluations())
    }
}

impl<D, K> OracleFunction<D, K> {
    pub fn new(eval: impl Fn(&D) -> K + Send + Sync + 'static) -> Self {
        Self { eval: Arc::new(eval), evaluations: Arc::new(AtomicU64::new(0)) }
    }

    pub fn eval(&self, x: &D) -> K {
        self.evaluations.fetch_add(1, Ordering::Relaxed);
        (self.eval)(x)
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluations.load(Ordering::Relaxed)
    }

    /// Same function with a fresh, independent counter.
    pub fn fresh(&self) -> Self {
        Self { eval: self.eval.clone(), evaluations: Arc::new(AtomicU64::new(0)) }
    }
}
