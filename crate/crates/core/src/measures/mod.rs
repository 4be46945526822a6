//! Windows, intensity and Lévy measures, quadrature, Laplace functionals and
//! samplers.
//!
//! Everything lives on one bounded [`Window`] of dimension 1 or 2. Integrals
//! against an [`IntensityMeasure`] use composite Gauss–Legendre rules cut at
//! the breakpoints of the integrand, so piecewise-polynomial integrands are
//! integrated exactly up to the rule's degree.

pub mod config;
pub mod laplace;
pub mod levy;
pub mod quadrature;
pub mod sampling;
pub mod special;
pub mod testfn;

use serde::Serialize;

use crate::error::{Error, Result};
pub use config::{LevySpec, MeasureConfig};
pub use laplace::{laplace, LaplaceKind};
pub use levy::{AnalyticityReport, Extended, GammaLevy, LevyMeasure};
pub use quadrature::{GaussLaguerre, GaussLegendre, QuadratureRule, DEFAULT_ORDER};
pub use sampling::{
    sample_compound_poisson, sample_compound_poisson_superposed, sample_marked_poisson, sample_poisson,
};
pub use testfn::{Interval, Overlap, TestFunction};

/// A point of ℝ¹ or ℝ²; 1D points keep a zero second coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Point(pub [f64; 2]);

impl Point {
    pub fn d1(x: f64) -> Self {
        Point([x, 0.0])
    }

    pub fn d2(x: f64, y: f64) -> Self {
        Point([x, y])
    }

    pub fn x(&self) -> f64 {
        self.0[0]
    }

    pub fn y(&self) -> f64 {
        self.0[1]
    }

    /// Lexicographic total order.
    pub fn cmp_lex(&self, other: &Point) -> std::cmp::Ordering {
        self.0[0].total_cmp(&other.0[0]).then(self.0[1].total_cmp(&other.0[1]))
    }
}

/// A closed box `∏ [lo_i, hi_i]` in dimension 1 or 2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Window {
    pub dim: usize,
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl Window {
    pub fn interval(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::invalid(format!("interval [{a}, {b}] must satisfy a < b")));
        }
        Ok(Self { dim: 1, lo: [a, 0.0], hi: [b, 0.0] })
    }

    pub fn rect(x: [f64; 2], y: [f64; 2]) -> Result<Self> {
        let ok = |[a, b]: [f64; 2]| a.is_finite() && b.is_finite() && a < b;
        if !(ok(x) && ok(y)) {
            return Err(Error::invalid(format!("box {x:?} x {y:?} must have a < b on each axis")));
        }
        Ok(Self { dim: 2, lo: [x[0], y[0]], hi: [x[1], y[1]] })
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim).map(|i| self.hi[i] - self.lo[i]).product()
    }

    pub fn contains(&self, p: &Point) -> bool {
        (0..self.dim).all(|i| self.lo[i] <= p.0[i] && p.0[i] <= self.hi[i])
    }

    /// Whether `self` is contained in `outer` (dimensions must agree).
    pub fn is_within(&self, outer: &Window) -> bool {
        self.dim == outer.dim && (0..self.dim).all(|i| outer.lo[i] <= self.lo[i] && self.hi[i] <= outer.hi[i])
    }

    /// How the box `self` meets `window`.
    pub fn overlap(&self, window: &Window) -> Overlap {
        let d = window.dim;
        let mut covers = true;
        for i in 0..d {
            let (lo, hi) = if i < self.dim { (self.lo[i], self.hi[i]) } else { (f64::NEG_INFINITY, f64::INFINITY) };
            if hi < window.lo[i] || lo > window.hi[i] {
                return Overlap::Disjoint;
            }
            if lo > window.lo[i] || hi < window.hi[i] {
                covers = false;
            }
        }
        if covers {
            Overlap::Covers
        } else {
            Overlap::Partial
        }
    }
}

/// A quadrature rule whose weights already include the density of σ.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureRule {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
}

impl MeasureRule {
    pub fn integrate(&self, f: impl Fn(&Point) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(p, &w)| w * f(p)).sum()
    }
}

/// `σ(dx) = density(x) dx` on a window.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityMeasure {
    window: Window,
    density: TestFunction,
    order: usize,
    mass: f64,
    density_bound: f64,
}

impl IntensityMeasure {
    pub fn new(window: Window, density: TestFunction, order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::invalid("quadrature order must be positive"));
        }
        let range = density.range(&window);
        if !(range.hi.is_finite() && range.hi > 0.0) {
            return Err(Error::invalid(format!("density {density} has no finite positive upper bound")));
        }
        let mut sigma = Self { window, density, order, mass: 0.0, density_bound: range.hi };
        let rule = sigma.base_rule(&[]);
        if let Some(p) = rule.points.iter().find(|p| !(sigma.density.eval(p) > 0.0)) {
            return Err(Error::invalid(format!(
                "density {} is not strictly positive at quadrature node {:?}",
                sigma.density, p.0
            )));
        }
        sigma.mass = rule.integrate(|p| sigma.density.eval(p));
        if !(sigma.mass.is_finite() && sigma.mass > 0.0) {
            return Err(Error::invalid("total mass must be finite and positive"));
        }
        Ok(sigma)
    }

    /// Lebesgue measure on `window` at the default quadrature order.
    pub fn lebesgue(window: Window) -> Self {
        Self::uniform(window, 1.0)
    }

    /// `c · Lebesgue` on `window`.
    pub fn uniform(window: Window, c: f64) -> Self {
        Self::new(window, TestFunction::constant(c), DEFAULT_ORDER).expect("uniform intensity")
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn density(&self) -> &TestFunction {
        &self.density
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Total mass σ(W).
    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Upper bound of the density over the window.
    pub fn density_bound(&self) -> f64 {
        self.density_bound
    }

    fn base_rule(&self, extra: &[&TestFunction]) -> QuadratureRule {
        let mut bps: [Vec<f64>; 2] = [self.density.breakpoints(0), self.density.breakpoints(1)];
        for f in extra {
            bps[0].extend(f.breakpoints(0));
            bps[1].extend(f.breakpoints(1));
        }
        QuadratureRule::composite(&self.window, self.order, &bps)
    }

    /// A rule for `∫ · dσ`, cut at the breakpoints of the density and of
    /// every function in `extra`.
    pub fn rule(&self, extra: &[&TestFunction]) -> MeasureRule {
        let base = self.base_rule(extra);
        let weights = base
            .points
            .iter()
            .zip(&base.weights)
            .map(|(p, &w)| w * self.density.eval(p))
            .collect();
        MeasureRule { points: base.points, weights }
    }

    /// `⟨f⟩_σ = ∫ f dσ`.
    pub fn integrate(&self, f: &TestFunction) -> f64 {
        self.rule(&[f]).integrate(|p| f.eval(p))
    }

    /// `∫ g dσ` for a pointwise map `g`, with cuts taken from `shape`.
    pub fn integrate_with(&self, shape: &[&TestFunction], g: impl Fn(&Point) -> f64) -> f64 {
        self.rule(shape).integrate(g)
    }

    /// `(f, g)_{L²(σ)}`.
    pub fn inner(&self, f: &TestFunction, g: &TestFunction) -> f64 {
        self.rule(&[f, g]).integrate(|p| f.eval(p) * g.eval(p))
    }

    pub fn norm(&self, f: &TestFunction) -> f64 {
        self.inner(f, f).sqrt()
    }

    /// `σ(B)` for a sub-box.
    pub fn measure_of(&self, region: &Window) -> f64 {
        self.integrate(&TestFunction::indicator_box(*region, 1.0))
    }

    /// The perturbed intensity `σ_η(dx) = (1 + η(x)) σ(dx)`; requires
    /// `η > -1` on the window.
    pub fn perturb(&self, eta: &TestFunction) -> Result<Self> {
        let r = eta.range(&self.window);
        if !(r.lo > -1.0) {
            return Err(Error::domain(format!("perturbation {eta} must exceed -1 (lower bound {})", r.lo)));
        }
        let density = TestFunction::constant(1.0).plus(eta.clone()).times(self.density.clone());
        Self::new(self.window, density, self.order)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> Window {
        Window::interval(0.0, 1.0).unwrap()
    }

    #[test]
    fn integrate_moments() {
        let sigma = IntensityMeasure::lebesgue(unit());
        assert!((sigma.integrate(&TestFunction::poly([0.0, 1.0])) - 0.5).abs() < 1e-15);
        assert!((sigma.integrate(&TestFunction::poly([0.0, 0.0, 1.0])) - 1.0 / 3.0).abs() < 1e-15);
        let three = IntensityMeasure::uniform(Window::interval(0.0, 2.0).unwrap(), 3.0);
        assert!((three.integrate(&TestFunction::constant(1.0)) - 6.0).abs() < 1e-14);
        assert!((three.mass() - 6.0).abs() < 1e-14);
    }

    #[test]
    fn integrate_is_linear() {
        let sigma = IntensityMeasure::new(unit(), TestFunction::poly([1.0, 2.0]), 32).unwrap();
        let f = TestFunction::poly([0.3, -1.0, 2.0]);
        let g = TestFunction::poly([1.0, 0.0, 0.0, 5.0]);
        let (a, b) = (1.7, -0.4);
        let lhs = sigma.integrate(&f.clone().scaled(a).plus(g.clone().scaled(b)));
        let rhs = a * sigma.integrate(&f) + b * sigma.integrate(&g);
        assert!((lhs - rhs).abs() < 1e-14);
    }

    #[test]
    fn indicators_integrate_exactly() {
        let sigma = IntensityMeasure::lebesgue(unit());
        let f = TestFunction::indicator(0.25, 0.6, 2.0).times(TestFunction::poly([0.0, 1.0]));
        let want = 2.0 * (0.6f64.powi(2) - 0.25f64.powi(2)) / 2.0;
        assert!((sigma.integrate(&f) - want).abs() < 1e-15);
    }

    #[test]
    fn rejects_nonpositive_density() {
        assert!(IntensityMeasure::new(unit(), TestFunction::poly([-0.1, 1.0]), 32).is_err());
        assert!(IntensityMeasure::new(unit(), TestFunction::constant(0.0), 32).is_err());
    }

    #[test]
    fn perturbation_identities() {
        let sigma = IntensityMeasure::new(unit(), TestFunction::poly([1.0, 1.0]), 32).unwrap();
        let same = sigma.perturb(&TestFunction::zero()).unwrap();
        assert_eq!(same.mass(), sigma.mass());
        let doubled = sigma.perturb(&TestFunction::constant(1.0)).unwrap();
        assert!((doubled.mass() - 2.0 * sigma.mass()).abs() < 1e-14);
        let eta = TestFunction::poly([0.2, -0.9, 0.5]);
        let psi = TestFunction::poly([1.0, 3.0, -1.0]);
        let perturbed = sigma.perturb(&eta).unwrap();
        let lhs = perturbed.integrate(&psi);
        let rhs = sigma.integrate(&psi) + sigma.inner(&psi, &eta);
        assert!((lhs - rhs).abs() < 1e-14);
        assert!(matches!(sigma.perturb(&TestFunction::constant(-1.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn two_dimensional_box_measure() {
        let w = Window::rect([0.0, 2.0], [0.0, 1.0]).unwrap();
        let sigma = IntensityMeasure::lebesgue(w);
        assert!((sigma.mass() - 2.0).abs() < 1e-14);
        let b = Window::rect([0.5, 1.0], [0.0, 0.5]).unwrap();
        assert!((sigma.measure_of(&b) - 0.25).abs() < 1e-14);
    }
}
