use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::scalar::Real;

/// Largest supported nodes per axis.
pub const MAX_NODES_PER_AXIS: usize = 8;

/// Partition of `[0,1]^d` into `2^{dl}` congruent half-open cubes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CubePartition {
    pub d: usize,
    pub l: usize,
}

impl CubePartition {
    pub fn new(d: usize, l: usize) -> Self {
        Self { d, l }
    }

    pub fn len(&self) -> usize {
        1 << (self.d * self.l)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Integer coordinates of the corner of cube `i` in units of `2^{-l}`;
    /// axis 0 holds the most significant digit.
    pub fn digits(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        let mask = (1usize << self.l) - 1;
        (0..self.d).map(move |j| (i >> (self.l * (self.d - 1 - j))) & mask)
    }

    /// `s_{li}`: the point of cube `i` closest to the origin.
    pub fn corner<T: Real>(&self, i: usize) -> Vec<T> {
        let h = T::one() / T::of((1u64 << self.l) as f64);
        self.digits(i).map(|k| T::of(k as f64) * h).collect()
    }

    /// Index of the cube containing `t` (coordinates clamped into `[0,1)`).
    pub fn locate(&self, t: &[f64]) -> usize {
        let cells = 1usize << self.l;
        t.iter().fold(0, |acc, &x| {
            let k = ((x * cells as f64).floor().max(0.0) as usize).min(cells - 1);
            (acc << self.l) | k
        })
    }
}

/// A quadrature rule `Σ_j a_j g(t_j)` on `[0,1]^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct Quadrature<T> {
    pub d: usize,
    pub nodes: Vec<Vec<T>>,
    pub weights: Vec<T>,
}

impl<T: Real> Quadrature<T> {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn apply(&self, g: impl Fn(&[T]) -> T) -> T {
        self.nodes.iter().zip(&self.weights).fold(T::zero(), |s, (t, a)| s + *a * g(t))
    }

    /// `Σ_j |a_j|`.
    pub fn abs_weight(&self) -> T {
        self.weights.iter().fold(T::zero(), |s, a| s + a.abs())
    }

    /// Applies the rule to `g` restricted to cube `i` of the level-`l` partition: `J(E_{li} g)`.
    pub fn apply_local(&self, part: &CubePartition, i: usize, g: impl Fn(&[T]) -> T) -> T {
        let corner: Vec<T> = part.corner(i);
        let h = T::one() / T::of((1u64 << part.l) as f64);
        let mut x = vec![T::zero(); self.d];
        let mut s = T::zero();
        for (t, a) in self.nodes.iter().zip(&self.weights) {
            for k in 0..self.d {
                x[k] = corner[k] + h * t[k];
            }
            s += *a * g(&x);
        }
        s
    }
}

/// Closed Newton–Cotes weights for `r` equispaced nodes on `[0,1]` (`r = 1`: the node 0).
pub fn newton_cotes_1d<T: Real>(r: usize) -> Result<(Vec<T>, Vec<T>)> {
    if r == 0 || r > MAX_NODES_PER_AXIS {
        return Err(domain!("r = {r} outside [1, {MAX_NODES_PER_AXIS}]"));
    }
    if r == 1 {
        return Ok((vec![T::zero()], vec![T::one()]));
    }
    let nodes: Vec<f64> = (0..r).map(|k| k as f64 / (r - 1) as f64).collect();
    // moment equations Σ_j a_j t_j^q = 1/(q+1), solved by Gaussian elimination with pivoting
    let mut a: Vec<Vec<f64>> = (0..r)
        .map(|q| {
            let mut row: Vec<f64> = nodes.iter().map(|t| t.powi(q as i32)).collect();
            row.push(1.0 / (q + 1) as f64);
            row
        })
        .collect();
    for col in 0..r {
        let piv = (col..r).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs())).expect("nonempty");
        a.swap(col, piv);
        for row in 0..r {
            if row != col {
                let factor = a[row][col] / a[col][col];
                for k in col..=r {
                    a[row][k] -= factor * a[col][k];
                }
            }
        }
    }
    let weights: Vec<T> = (0..r).map(|j| T::of(a[j][r] / a[j][j])).collect();
    Ok((nodes.into_iter().map(T::of).collect(), weights))
}

/// Tensor-product closed Newton–Cotes rule with `r` nodes per axis; `κ = r^d`.
pub fn base_quadrature<T: Real>(d: usize, r: usize) -> Result<Quadrature<T>> {
    if d == 0 {
        return Err(domain!("dimension must be at least 1"));
    }
    let (t1, a1) = newton_cotes_1d::<T>(r)?;
    let kappa = r.pow(d as u32);
    let mut nodes = Vec::with_capacity(kappa);
    let mut weights = Vec::with_capacity(kappa);
    for idx in 0..kappa {
        let mut t = Vec::with_capacity(d);
        let mut w = T::one();
        let mut rest = idx;
        for _ in 0..d {
            let k = rest % r;
            rest /= r;
            t.push(t1[k]);
            w *= a1[k];
        }
        t.reverse();
        nodes.push(t);
        weights.push(w);
    }
    Ok(Quadrature { d, nodes, weights })
}

/// `J_l g = 2^{-dl} Σ_i J(E_{li} g)`.
pub fn composed_apply<T: Real>(rule: &Quadrature<T>, l: usize, g: impl Fn(&[T]) -> T + Sync) -> T {
    let part = CubePartition::new(rule.d, l);
    let n = part.len();
    const CHUNK: usize = 1 << 12;
    let partials: Vec<T> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| (c * CHUNK..((c + 1) * CHUNK).min(n)).fold(T::zero(), |s, i| s + rule.apply_local(&part, i, &g)))
        .collect();
    let sum = partials.into_iter().fold(T::zero(), |a, b| a + b);
    sum / T::of(n as f64)
}

/// `J' = J_1 − J_0` with coincident nodes merged and vanishing weights dropped.
///
/// Only valid for the equispaced rules built by [`base_quadrature`].
pub fn difference_quadrature<T: Real>(rule: &Quadrature<T>, r: usize) -> Quadrature<T> {
    let d = rule.d;
    // nodes are multiples of 1 / (2 (r-1)) on [0,1]; key them by integer numerators
    let den = 2 * (r.max(2) - 1);
    let key = |t: &[T], corner: &[usize], level: usize| -> Vec<usize> {
        t.iter()
            .zip(corner)
            .map(|(x, c)| {
                let base = (x.f64() * (den / (1 + level)) as f64).round() as usize;
                base + c * den / 2
            })
            .collect()
    };
    let mut merged: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    let part = CubePartition::new(d, 1);
    let scale = 1.0 / part.len() as f64;
    for i in 0..part.len() {
        let corner: Vec<usize> = part.digits(i).collect();
        for (t, a) in rule.nodes.iter().zip(&rule.weights) {
            *merged.entry(key(t, &corner, 1)).or_insert(0.0) += scale * a.f64();
        }
    }
    let zero = vec![0; d];
    for (t, a) in rule.nodes.iter().zip(&rule.weights) {
        *merged.entry(key(t, &zero, 0)).or_insert(0.0) -= a.f64();
    }
    let tol = 1e-14 * rule.abs_weight().f64();
    let (mut nodes, mut weights) = (Vec::new(), Vec::new());
    for (k, w) in merged {
        if w.abs() > tol {
            nodes.push(k.iter().map(|&x| T::of(x as f64 / den as f64)).collect());
            weights.push(T::of(w));
        }
    }
    Quadrature { d, nodes, weights }
}
