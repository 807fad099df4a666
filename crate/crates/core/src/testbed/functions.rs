use std::f64::consts::{E, PI};
use std::fmt;
use std::sync::Arc;

use crate::error::{domain, Result};
use crate::multilevel::Integrand;

/// Numerically estimated Sobolev norm `‖f‖_{W_p^r}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SobolevNorm {
    pub r: usize,
    pub p: f64,
    pub value: f64,
}

/// An integrand on `[0,1]^d` with its reference integral.
#[derive(Clone)]
pub struct TestFunction {
    pub name: String,
    pub d: usize,
    pub f: Integrand,
    pub reference: f64,
    /// Total degree when `f` is a polynomial.
    pub poly_degree: Option<usize>,
    pub norm: Option<SobolevNorm>,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("name", &self.name)
            .field("d", &self.d)
            .field("reference", &self.reference)
            .field("poly_degree", &self.poly_degree)
            .field("norm", &self.norm)
            .finish()
    }
}

impl TestFunction {
    pub fn new(name: impl Into<String>, d: usize, f: Integrand, reference: f64) -> Self {
        Self { name: name.into(), d, f, reference, poly_degree: None, norm: None }
    }

    pub fn eval(&self, t: &[f64]) -> f64 {
        (self.f)(t)
    }

    pub fn integrand(&self) -> Integrand {
        self.f.clone()
    }

    /// `c·f`, reference and norm scaled along.
    pub fn scaled(&self, c: f64) -> Self {
        let g = self.f.clone();
        Self {
            name: format!("{}*{c}", self.name),
            d: self.d,
            f: Arc::new(move |t: &[f64]| c * g(t)),
            reference: c * self.reference,
            poly_degree: self.poly_degree,
            norm: self.norm.map(|n| SobolevNorm { value: c.abs() * n.value, ..n }),
        }
    }

    /// Attaches the estimated `W_p^r` norm.
    pub fn with_norm(mut self, r: usize, p: f64) -> Self {
        self.norm = Some(SobolevNorm { r, p, value: sobolev_norm(&self.f, self.d, r, p) });
        self
    }

    /// Scaled to approximately unit `W_p^r` norm.
    pub fn normalized(&self, r: usize, p: f64) -> Self {
        let v = match self.norm {
            Some(n) if n.r == r && n.p == p => n.value,
            _ => sobolev_norm(&self.f, self.d, r, p),
        };
        let mut g = self.scaled(1.0 / v);
        g.norm = Some(SobolevNorm { r, p, value: 1.0 });
        g
    }
}

/// `Π sin(π t_j)`, `exp(Σ t_j)` and `Π t_j` on `[0,1]^d`.
pub fn smooth_family(d: usize) -> Result<Vec<TestFunction>> {
    check_dim(d)?;
    let di = d as i32;
    let sin: Integrand = Arc::new(|t: &[f64]| t.iter().map(|x| (PI * x).sin()).product());
    let exp: Integrand = Arc::new(|t: &[f64]| t.iter().sum::<f64>().exp());
    let prod: Integrand = Arc::new(|t: &[f64]| t.iter().product());
    let mut prod = TestFunction::new("prod", d, prod, 0.5f64.powi(di));
    prod.poly_degree = Some(d);
    Ok(vec![
        TestFunction::new("sin", d, sin, (2.0 / PI).powi(di)),
        TestFunction::new("exp", d, exp, (E - 1.0).powi(di)),
        prod,
    ])
}

/// Family member by name.
pub fn family_member(d: usize, name: &str) -> Result<TestFunction> {
    smooth_family(d)?
        .into_iter()
        .find(|t| t.name == name)
        .ok_or_else(|| domain!("unknown test function '{name}' (expected sin, exp or prod)"))
}

/// `f ≡ c`.
pub fn constant(d: usize, c: f64) -> Result<TestFunction> {
    check_dim(d)?;
    let mut t = TestFunction::new("const", d, Arc::new(move |_: &[f64]| c), c);
    t.poly_degree = Some(0);
    Ok(t)
}

fn check_dim(d: usize) -> Result<()> {
    if d == 0 || d > 3 {
        return Err(domain!("dimension d = {d} outside [1, 3]"));
    }
    Ok(())
}

/// `(Σ_{|α| ≤ r} ∫ |∂^α f|^p)^{1/p}` by central differences on a midpoint grid.
pub fn sobolev_norm(f: &Integrand, d: usize, r: usize, p: f64) -> f64 {
    let g: usize = match d {
        1 => 256,
        2 => 48,
        _ => 16,
    };
    let cells = g.pow(d as u32);
    let mut total = 0.0;
    for alpha in multi_indices(d, r) {
        let order: usize = alpha.iter().sum();
        let h = 1.0 / (4.0 * g as f64 * order.max(1) as f64);
        let mut acc = 0.0;
        let mut t = vec![0.0; d];
        for c in 0..cells {
            let mut rest = c;
            for slot in t.iter_mut().rev() {
                *slot = ((rest % g) as f64 + 0.5) / g as f64;
                rest /= g;
            }
            acc += mixed_difference(f, &t, &alpha, h).abs().powf(p);
        }
        total += acc / cells as f64;
    }
    total.powf(1.0 / p)
}

fn multi_indices(d: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|a: Vec<usize>| {
                let used: usize = a.iter().sum();
                (0..=r - used).map(move |k| {
                    let mut b = a.clone();
                    b.push(k);
                    b
                })
            })
            .collect();
    }
    out
}

fn mixed_difference(f: &Integrand, t: &[f64], alpha: &[usize], h: f64) -> f64 {
    // tensor product of k-th central differences Σ_i (−1)^i C(k,i) f(t + (k/2 − i)h) / h^k
    let stencils: Vec<Vec<(f64, f64)>> = alpha
        .iter()
        .map(|&k| {
            let mut binom = 1.0;
            (0..=k)
                .map(|i| {
                    let c = if i % 2 == 0 { binom } else { -binom };
                    binom = binom * (k - i) as f64 / (i + 1) as f64;
                    ((k as f64 / 2.0 - i as f64) * h, c / h.powi(k as i32))
                })
                .collect()
        })
        .collect();
    let sizes: Vec<usize> = stencils.iter().map(Vec::len).collect();
    let total: usize = sizes.iter().product();
    let mut x = t.to_vec();
    let mut s = 0.0;
    for idx in 0..total {
        let mut rest = idx;
        let mut w = 1.0;
        for j in (0..t.len()).rev() {
            let (off, c) = stencils[j][rest % sizes[j]];
            rest /= sizes[j];
            x[j] = t[j] + off;
            w *= c;
        }
        s += w * f(&x);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_references() {
        let f1 = smooth_family(1).unwrap();
        assert!((f1[0].reference - 2.0 / PI).abs() < 1e-15);
        assert!((f1[1].reference - (E - 1.0)).abs() < 1e-15);
        let xy = family_member(2, "prod").unwrap();
        assert_eq!(xy.reference, 0.25);
        assert_eq!(xy.poly_degree, Some(2));
        assert!(smooth_family(4).is_err());
    }

    #[test]
    fn sobolev_norm_of_linear() {
        // f = x: ‖f‖_{W_2^1}^2 = 1/3 + 1
        let f: Integrand = Arc::new(|t: &[f64]| t[0]);
        let v = sobolev_norm(&f, 1, 1, 2.0);
        assert!((v - (4.0f64 / 3.0).sqrt()).abs() < 1e-4, "{v}");
    }

    #[test]
    fn sobolev_norm_of_sine_second_order() {
        // Σ_{k≤2} ∫ |(π)^k sin or cos|^2 = (1 + π² + π⁴)/2
        let f: Integrand = Arc::new(|t: &[f64]| (PI * t[0]).sin());
        let v = sobolev_norm(&f, 1, 2, 2.0);
        let want = ((1.0 + PI.powi(2) + PI.powi(4)) / 2.0).sqrt();
        assert!((v / want - 1.0).abs() < 1e-3, "{v} vs {want}");
    }

    #[test]
    fn normalized_has_unit_norm() {
        let f = family_member(2, "exp").unwrap().with_norm(1, 2.0);
        let g = f.normalized(1, 2.0);
        let v = sobolev_norm(&g.f, 2, 1, 2.0);
        assert!((v - 1.0).abs() < 1e-9);
        assert!((g.reference * f.norm.unwrap().value - f.reference).abs() < 1e-12);
    }
}
