use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;

/// Composite Gauss–Legendre rule on `[a, b]` with `panels` panels of `order` nodes.
pub fn composite_gauss(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize, order: usize) -> f64 {
    let rule = GaussLegendre::new(NonZeroUsize::new(order.max(1)).expect("nonzero"));
    let h = (b - a) / panels.max(1) as f64;
    let mut total = 0.0;
    for k in 0..panels.max(1) {
        let lo = a + k as f64 * h;
        total += rule.integrate(lo, lo + h, &f);
    }
    total
}

/// Tensor composite Gauss–Legendre rule on `[lo, hi]^d`.
pub fn composite_gauss_cube(f: impl Fn(&[f64]) -> f64, d: usize, lo: f64, hi: f64, panels: usize, order: usize) -> f64 {
    let rule = GaussLegendre::new(NonZeroUsize::new(order.max(1)).expect("nonzero"));
    let h = (hi - lo) / panels.max(1) as f64;
    let mut pts = Vec::with_capacity(panels * order);
    for k in 0..panels.max(1) {
        let c = lo + (k as f64 + 0.5) * h;
        for (x, w) in rule.iter() {
            pts.push((c + 0.5 * h * x, 0.5 * h * w));
        }
    }
    let m = pts.len();
    let total = m.pow(d as u32);
    let mut t = vec![0.0; d];
    let mut s = 0.0;
    for idx in 0..total {
        let mut rest = idx;
        let mut w = 1.0;
        for slot in t.iter_mut().rev() {
            let (x, wx) = pts[rest % m];
            rest /= m;
            *slot = x;
            w *= wx;
        }
        s += w * f(&t);
    }
    s
}

/// Romberg extrapolation of the trapezoid rule with `2^levels` panels.
pub fn romberg(f: impl Fn(f64) -> f64, a: f64, b: f64, levels: usize) -> f64 {
    let mut row = vec![0.5 * (b - a) * (f(a) + f(b))];
    for k in 1..=levels {
        let panels = 1usize << k;
        let h = (b - a) / panels as f64;
        let mid: f64 = (0..panels / 2).map(|i| f(a + (2 * i + 1) as f64 * h)).sum();
        let mut next = vec![0.5 * row[0] + h * mid];
        let mut factor = 1.0;
        for j in 1..=k {
            factor *= 4.0;
            let v = next[j - 1] + (next[j - 1] - row[j - 1]) / (factor - 1.0);
            next.push(v);
        }
        row = next;
    }
    *row.last().expect("nonempty")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_and_romberg_agree_on_exp() {
        let e = std::f64::consts::E - 1.0;
        assert!((composite_gauss(f64::exp, 0.0, 1.0, 8, 10) - e).abs() < 1e-14);
        assert!((romberg(f64::exp, 0.0, 1.0, 10) - e).abs() < 1e-13);
    }

    #[test]
    fn cube_rule_on_product() {
        let v = composite_gauss_cube(|t| t.iter().product(), 3, 0.0, 1.0, 2, 3);
        assert!((v - 0.125).abs() < 1e-14);
    }
}
