use std::fmt;

use rand::Rng;

use super::TestFunction;
use crate::error::{domain, Result};
use crate::multilevel::{base_quadrature, composed_apply, CubePartition};

/// Classical comparison method.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Deterministic,
    /// `J_l f` plus plain Monte Carlo on the interpolation residual.
    ResidualMc,
    PlainMc,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Deterministic => "deterministic",
            Method::ResidualMc => "residual-mc",
            Method::PlainMc => "plain-mc",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BaselineResult {
    pub method: Method,
    pub n: u64,
    pub estimate: f64,
    pub error: f64,
    /// Distinct function evaluations spent.
    pub evaluations: u64,
}

/// Distinct nodes of the level-`l` composite rule with `r` nodes per axis.
pub fn composite_nodes(d: usize, r: usize, l: usize) -> u64 {
    axis_points(r, l).pow(d as u32) as u64
}

fn axis_points(r: usize, l: usize) -> usize {
    if r == 1 {
        1 << l
    } else {
        (1 << l) * (r - 1) + 1
    }
}

fn largest_level(d: usize, r: usize, n: u64) -> Option<usize> {
    if composite_nodes(d, r, 0) > n {
        return None;
    }
    let mut l = 0;
    while composite_nodes(d, r, l + 1) <= n {
        l += 1;
    }
    Some(l)
}

fn check(f: &TestFunction, n: u64) -> Result<()> {
    if n == 0 {
        return Err(domain!("budget n must be at least 1"));
    }
    if f.d == 0 {
        return Err(domain!("dimension must be positive"));
    }
    Ok(())
}

/// `J_l f` at the largest level with at most `n` nodes (level 0 when even that is too many).
pub fn det_baseline(f: &TestFunction, r: usize, n: u64) -> Result<BaselineResult> {
    check(f, n)?;
    let rule = base_quadrature::<f64>(f.d, r)?;
    let l = largest_level(f.d, r, n).unwrap_or(0);
    let g = f.integrand();
    let estimate = composed_apply(&rule, l, |t: &[f64]| g(t));
    Ok(BaselineResult {
        method: Method::Deterministic,
        n,
        estimate,
        error: (estimate - f.reference).abs(),
        evaluations: composite_nodes(f.d, r, l),
    })
}

/// Plain Monte Carlo with `n` uniform points.
pub fn plain_mc<R: Rng + ?Sized>(f: &TestFunction, n: u64, rng: &mut R) -> Result<BaselineResult> {
    check(f, n)?;
    let mut t = vec![0.0; f.d];
    let mut s = 0.0;
    for _ in 0..n {
        t.iter_mut().for_each(|x| *x = rng.gen());
        s += f.eval(&t);
    }
    let estimate = s / n as f64;
    Ok(BaselineResult { method: Method::PlainMc, n, estimate, error: (estimate - f.reference).abs(), evaluations: n })
}

/// Residual Monte Carlo: at most `n/2` nodes build the piecewise interpolant `P_l f`
/// (whose integral is `J_l f`), the rest sample `f − P_l f`. Falls back to plain
/// Monte Carlo when no level fits.
pub fn mc_baseline<R: Rng + ?Sized>(f: &TestFunction, r: usize, n: u64, rng: &mut R) -> Result<BaselineResult> {
    check(f, n)?;
    let Some(l) = largest_level(f.d, r, n / 2) else {
        return plain_mc(f, n, rng);
    };
    let interp = Interpolant::new(f, r, l);
    let samples = n - interp.nodes();
    let mut t = vec![0.0; f.d];
    let mut s = 0.0;
    for _ in 0..samples {
        t.iter_mut().for_each(|x| *x = rng.gen());
        s += f.eval(&t) - interp.eval(&t);
    }
    let estimate = interp.integral + s / samples as f64;
    Ok(BaselineResult { method: Method::ResidualMc, n, estimate, error: (estimate - f.reference).abs(), evaluations: n })
}

/// Tensor piecewise Lagrange interpolant on the level-`l` grid of the `r`-node rule.
struct Interpolant {
    d: usize,
    r: usize,
    l: usize,
    side: usize,
    values: Vec<f64>,
    integral: f64,
}

impl Interpolant {
    fn new(f: &TestFunction, r: usize, l: usize) -> Self {
        let (d, side) = (f.d, axis_points(r, l));
        let step = if r == 1 { 1.0 / (1u64 << l) as f64 } else { 1.0 / ((1u64 << l) as f64 * (r - 1) as f64) };
        let mut t = vec![0.0; d];
        let values: Vec<f64> = (0..side.pow(d as u32))
            .map(|idx| {
                let mut rest = idx;
                for slot in t.iter_mut().rev() {
                    *slot = (rest % side) as f64 * step;
                    rest /= side;
                }
                f.eval(&t)
            })
            .collect();
        let mut me = Self { d, r, l, side, values, integral: 0.0 };
        let rule = base_quadrature::<f64>(d, r).expect("validated by the caller");
        let part = CubePartition::new(d, l);
        let mut total = 0.0;
        for cube in 0..part.len() {
            let corner: Vec<usize> = part.digits(cube).collect();
            for (node, w) in rule.nodes.iter().zip(&rule.weights) {
                let local: Vec<usize> = node.iter().map(|&x| (x * (r.max(2) - 1) as f64).round() as usize).collect();
                total += w * me.value(&corner, &local);
            }
        }
        me.integral = total / part.len() as f64;
        me
    }

    fn nodes(&self) -> u64 {
        self.values.len() as u64
    }

    fn value(&self, corner: &[usize], local: &[usize]) -> f64 {
        let stride = self.r.max(2) - 1;
        let idx = corner.iter().zip(local).fold(0, |acc, (&c, &m)| {
            let g = if self.r == 1 { c } else { c * stride + m };
            acc * self.side + g
        });
        self.values[idx]
    }

    fn eval(&self, t: &[f64]) -> f64 {
        let part = CubePartition::new(self.d, self.l);
        let cube = part.locate(t);
        let corner: Vec<usize> = part.digits(cube).collect();
        if self.r == 1 {
            return self.value(&corner, &vec![0; self.d]);
        }
        let scale = (1u64 << self.l) as f64;
        let basis: Vec<Vec<f64>> = t
            .iter()
            .zip(&corner)
            .map(|(&x, &c)| lagrange(self.r, scale * x - c as f64))
            .collect();
        let mut local = vec![0; self.d];
        let mut s = 0.0;
        for idx in 0..self.r.pow(self.d as u32) {
            let mut rest = idx;
            let mut w = 1.0;
            for j in (0..self.d).rev() {
                local[j] = rest % self.r;
                rest /= self.r;
                w *= basis[j][local[j]];
            }
            s += w * self.value(&corner, &local);
        }
        s
    }
}

/// Lagrange basis on `r` equispaced nodes of `[0,1]`, evaluated at `u`.
fn lagrange(r: usize, u: f64) -> Vec<f64> {
    let node = |k: usize| k as f64 / (r - 1) as f64;
    (0..r)
        .map(|m| (0..r).filter(|&k| k != m).map(|k| (u - node(k)) / (node(m) - node(k))).product())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testbed::{constant, family_member};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for d in 1..=2 {
            let f = constant(d, 0.7).unwrap();
            for r in 1..=3 {
                assert!(det_baseline(&f, r, 100).unwrap().error < 1e-12);
                assert!(mc_baseline(&f, r, 100, &mut rng).unwrap().error < 1e-12);
            }
        }
    }

    #[test]
    fn budget_respected() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = family_member(2, "exp").unwrap();
        for n in [1u64, 5, 9, 100, 1000] {
            let det = det_baseline(&f, 2, n).unwrap();
            assert!(det.evaluations <= n.max(4));
            assert!(mc_baseline(&f, 2, n, &mut rng).unwrap().evaluations <= n);
        }
    }

    #[test]
    fn interpolant_integral_is_composite_rule() {
        let f = family_member(2, "sin").unwrap();
        for r in 1..=3 {
            let ip = Interpolant::new(&f, r, 3);
            let rule = base_quadrature::<f64>(2, r).unwrap();
            let j = composed_apply(&rule, 3, |t: &[f64]| f.eval(t));
            assert!((ip.integral - j).abs() < 1e-13, "r={r}");
        }
    }

    #[test]
    fn interpolant_reproduces_nodes_and_polynomials() {
        let f = family_member(1, "prod").unwrap();
        let ip = Interpolant::new(&f, 2, 2);
        for x in [0.0, 0.1, 0.33, 0.8, 0.99] {
            assert!((ip.eval(&[x]) - x).abs() < 1e-14);
        }
    }
}
