//! Gauss–Legendre and Gauss–Laguerre rules, and composite tensor rules over
//! a window split at the breakpoints of the integrand.

use std::sync::{Arc, Mutex, OnceLock};
use std::collections::HashMap;

use super::{Point, Window};

pub const DEFAULT_ORDER: usize = 32;

/// Nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// The `n`-point rule, exact for polynomials of degree `2n - 1`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut pp = 0.0;
            for _ in 0..100 {
                let (mut p1, mut p2) = (1.0, 0.0);
                for j in 0..n {
                    let p3 = p2;
                    p2 = p1;
                    p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
                }
                pp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            let w = 2.0 / ((1.0 - z * z) * pp * pp);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Cached rule of order `n`.
    pub fn cached(n: usize) -> Arc<GaussLegendre> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap();
        guard.entry(n).or_insert_with(|| Arc::new(GaussLegendre::new(n))).clone()
    }

    /// `∫_a^b f` with this rule.
    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

/// Nodes and weights for `∫_0^∞ g(s) e^{-s} ds`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLaguerre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLaguerre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 2);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        let mut z = 0.0;
        for i in 0..n {
            if i == 0 {
                z = 3.0 / (1.0 + 2.4 * nf);
            } else if i == 1 {
                z += 15.0 / (1.0 + 2.5 * nf);
            } else {
                let ai = (i - 1) as f64;
                z += (1.0 + 2.55 * ai) / (1.9 * ai) * (z - nodes[i - 2]);
            }
            let (mut p1, mut p2, mut pp) = (1.0, 0.0, 0.0);
            for _ in 0..200 {
                p1 = 1.0;
                p2 = 0.0;
                for j in 1..=n {
                    let p3 = p2;
                    p2 = p1;
                    p1 = ((2 * j - 1) as f64 - z) * p2 / j as f64 - (j - 1) as f64 * p3 / j as f64;
                }
                pp = (nf * p1 - nf * p2) / z;
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() <= 1e-15 * z.abs() {
                    break;
                }
            }
            let _ = p1;
            nodes[i] = z;
            weights[i] = -1.0 / (pp * nf * p2);
        }
        Self { nodes, weights }
    }

    pub fn cached(n: usize) -> Arc<GaussLaguerre> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLaguerre>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap();
        guard.entry(n).or_insert_with(|| Arc::new(GaussLaguerre::new(n))).clone()
    }
}

/// A tensor-product rule over a window: points with positive Lebesgue
/// weights (density not included).
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    pub order: usize,
}

impl QuadratureRule {
    /// Composite Gauss–Legendre of `order` points per cell, where cells are
    /// cut at `breakpoints[axis]` lying strictly inside the window.
    pub fn composite(window: &Window, order: usize, breakpoints: &[Vec<f64>; 2]) -> Self {
        let gl = GaussLegendre::cached(order);
        let axis_rule = |axis: usize| -> Vec<(f64, f64)> {
            let (a, b) = (window.lo[axis], window.hi[axis]);
            let mut cuts: Vec<f64> = breakpoints[axis]
                .iter()
                .copied()
                .filter(|&c| c > a && c < b)
                .collect();
            cuts.push(a);
            cuts.push(b);
            cuts.sort_by(f64::total_cmp);
            cuts.dedup();
            let mut out = Vec::with_capacity(order * (cuts.len() - 1));
            for cell in cuts.windows(2) {
                let half = 0.5 * (cell[1] - cell[0]);
                let mid = 0.5 * (cell[1] + cell[0]);
                for (&x, &w) in gl.nodes.iter().zip(&gl.weights) {
                    out.push((mid + half * x, w * half));
                }
            }
            out
        };
        let xs = axis_rule(0);
        let mut points = Vec::new();
        let mut weights = Vec::new();
        if window.dim == 1 {
            for (x, w) in xs {
                points.push(Point::d1(x));
                weights.push(w);
            }
        } else {
            let ys = axis_rule(1);
            for &(x, wx) in &xs {
                for &(y, wy) in &ys {
                    points.push(Point::d2(x, y));
                    weights.push(wx * wy);
                }
            }
        }
        Self { points, weights, order }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(&Point) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(p, &w)| w * f(p)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::special::factorial_f64;

    #[test]
    fn legendre_exact_to_degree_2n_minus_1() {
        let gl = GaussLegendre::new(DEFAULT_ORDER);
        assert!(gl.weights.iter().all(|&w| w > 0.0));
        for k in 0..(2 * DEFAULT_ORDER as i32) {
            let got = gl.integrate(0.0, 1.0, |x| x.powi(k));
            let want = 1.0 / (k + 1) as f64;
            assert!((got - want).abs() < 1e-14, "degree {k}: {got} vs {want}");
        }
    }

    #[test]
    fn laguerre_moments_are_factorials() {
        let gq = GaussLaguerre::new(64);
        assert!(gq.weights.iter().all(|&w| w >= 0.0));
        for k in 0..25u32 {
            let got: f64 = gq.nodes.iter().zip(&gq.weights).map(|(&s, &w)| w * s.powi(k as i32)).sum();
            let want = factorial_f64(k);
            assert!((got / want - 1.0).abs() < 1e-11, "k={k}: {got} vs {want}");
        }
    }

    #[test]
    fn composite_rule_respects_breakpoints() {
        let w = Window::interval(0.0, 1.0).unwrap();
        let rule = QuadratureRule::composite(&w, 4, &[vec![0.3, 2.0], vec![]]);
        assert_eq!(rule.len(), 8);
        let step = rule.integrate(|p| if p.x() < 0.3 { 1.0 } else { 0.0 });
        assert!((step - 0.3).abs() < 1e-15);
    }

    #[test]
    fn tensor_rule_integrates_product_monomials() {
        let w = Window::rect([0.0, 1.0], [0.0, 2.0]).unwrap();
        let rule = QuadratureRule::composite(&w, 8, &[vec![], vec![]]);
        let got = rule.integrate(|p| p.x().powi(3) * p.y().powi(2));
        assert!((got - 0.25 * 8.0 / 3.0).abs() < 1e-14);
    }
}
