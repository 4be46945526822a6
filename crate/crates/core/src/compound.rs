//! The Poisson calculus transported to compound Poisson space through Σ.
//!
//! A direction on the marked space is `φ̂(s, x) = p(s) φ(x)` with a
//! polynomial mark factor `p`. Operators take ρ in its analytic semantics:
//! sums over atoms for discrete ρ, and for the Gamma Lévy measure integrals
//! over all of `(0, ∞)` (Gauss–Legendre on `(0, 1]`, Gauss–Laguerre on
//! `[1, ∞)`).

use crate::charlier::{charlier_from_symbols, CylinderFunction, Functional, Generator};
use crate::configuration::{AtomicMeasure, DiscreteMeasure, MarkedConfiguration};
use crate::error::{Error, Result};
use crate::measures::levy::eval_poly;
use crate::measures::{Extended, GaussLaguerre, GaussLegendre, IntensityMeasure, Interval, LevyMeasure, Point, TestFunction};

/// Gauss–Legendre order on `(0, 1]` for Gamma mark integrals.
pub const GAMMA_SPLIT_GL_ORDER: usize = 48;
/// Gauss–Laguerre order on `[1, ∞)` for Gamma mark integrals.
pub const GAMMA_SPLIT_LAGUERRE_ORDER: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct MarkedDirection {
    /// Coefficients of `p(s) = Σ p_k sᵏ`.
    pub mark: Vec<f64>,
    pub spatial: TestFunction,
}

impl MarkedDirection {
    pub fn new(mark: Vec<f64>, spatial: TestFunction) -> Self {
        Self { mark, spatial }
    }

    /// `p ≡ 1`.
    pub fn flat(spatial: TestFunction) -> Self {
        Self::new(vec![1.0], spatial)
    }

    pub fn p(&self, s: f64) -> f64 {
        eval_poly(&self.mark, s)
    }

    fn check(&self, rho: &LevyMeasure) -> Result<()> {
        if rho.is_infinite() && self.mark.first().is_some_and(|&c| c != 0.0) {
            return Err(Error::domain("a mark factor with p(0) ≠ 0 is not integrable against an infinite Lévy measure"));
        }
        Ok(())
    }

    /// `⟨φ̂⟩_σ̂ = ⟨p⟩_ρ ⟨φ⟩_σ`.
    pub fn mean(&self, rho: &LevyMeasure, sigma: &IntensityMeasure) -> Extended {
        let m = sigma.integrate(&self.spatial);
        rho.mark_mean(&self.mark).map(|pm| pm * m)
    }
}

/// `(φ̂, ψ̂)_{L²(σ̂)} = ⟨p q⟩_ρ (φ, ψ)_{L²(σ)}`.
pub fn marked_inner(a: &MarkedDirection, b: &MarkedDirection, rho: &LevyMeasure, sigma: &IntensityMeasure) -> Extended {
    let mut pq = vec![0.0; a.mark.len() + b.mark.len()];
    for (i, x) in a.mark.iter().enumerate() {
        for (j, y) in b.mark.iter().enumerate() {
            pq[i + j] += x * y;
        }
    }
    rho.mark_mean(&pq).map(|v| v * sigma.inner(&a.spatial, &b.spatial))
}

/// `U_Σ h = h ∘ Σ`, a functional on marked configurations.
pub struct USigma<H>(pub H);

impl<H: Functional<DiscreteMeasure>> Functional<MarkedConfiguration> for USigma<H> {
    fn eval(&self, m: &MarkedConfiguration) -> f64 {
        self.0.eval(&m.sigma_map())
    }
}

/// `U_Σ⁻¹ f = f ∘ Σ⁻¹`, a functional on discrete measures.
pub struct USigmaInverse<F>(pub F);

impl<F: Functional<MarkedConfiguration>> Functional<DiscreteMeasure> for USigmaInverse<F> {
    fn eval(&self, w: &DiscreteMeasure) -> f64 {
        self.0.eval(&w.sigma_inverse())
    }
}

/// Evaluates a cylinder function through the marked picture,
/// `H(⟨γ̂, s φ_1⟩, …)` with `γ̂ = Σ⁻¹ ω`.
pub fn eval_on_marked(h: &CylinderFunction, m: &MarkedConfiguration) -> f64 {
    let u: Vec<f64> = h
        .directions
        .iter()
        .map(|d| {
            let mut acc = 0.0;
            for (s, x) in m.atoms() {
                acc += s * d.eval(&x);
            }
            acc
        })
        .collect();
    h.generator.eval(&u)
}

/// `∫ g(s) dρ(s)`, with the Gamma measure split at `s = 1`.
pub(crate) fn rho_integral(rho: &LevyMeasure, mut g: impl FnMut(f64) -> f64) -> f64 {
    match rho {
        LevyMeasure::FiniteDiscrete { atoms } => {
            let mut acc = 0.0;
            for &(s, w) in atoms {
                acc += w * g(s);
            }
            acc
        }
        LevyMeasure::Gamma(_) => gamma_levy_integral(0.0, g),
    }
}

/// `∫_lower^∞ g(s) e^{-s}/s ds` for `0 ≤ lower < 1`: Gauss–Legendre on
/// `(lower, 1]`, Gauss–Laguerre on `[1, ∞)`.
pub(crate) fn gamma_levy_integral(lower: f64, mut g: impl FnMut(f64) -> f64) -> f64 {
    debug_assert!((0.0..1.0).contains(&lower));
    let gl = GaussLegendre::cached(GAMMA_SPLIT_GL_ORDER);
    let lag = GaussLaguerre::cached(GAMMA_SPLIT_LAGUERRE_ORDER);
    let half = 0.5 * (1.0 - lower);
    let mut acc = 0.0;
    for (&t, &w) in gl.nodes.iter().zip(&gl.weights) {
        let s = lower + half * (t + 1.0);
        acc += half * w * g(s) * (-s).exp() / s;
    }
    let e1 = (-1.0f64).exp();
    for (&t, &w) in lag.nodes.iter().zip(&lag.weights) {
        let s = 1.0 + t;
        acc += e1 * w * g(s) / s;
    }
    acc
}

/// `ω + s ε_x`, nudging `x` by one ulp while it coincides with an atom.
pub(crate) fn add_atom_nudged(w: &DiscreteMeasure, x: Point, s: f64) -> DiscreteMeasure {
    let mut p = x;
    loop {
        match w.add_atom(p, s) {
            Ok(v) => return v,
            Err(Error::AtomClash) => {
                let next = p.0[0].next_up();
                p.0[0] = if w.window().contains(&Point([next, p.0[1]])) { next } else { p.0[0].next_down() };
            }
            Err(e) => panic!("cannot add atom: {e}"),
        }
    }
}

/// `(∇^CP_φ̂ h)(ω) = ∫∫ (h(ω + s ε_x) - h(ω)) p(s) φ(x) dρ(s) dσ(x)`.
pub fn cp_annihilation(
    h: &impl Functional<DiscreteMeasure>,
    dir: &MarkedDirection,
    omega: &DiscreteMeasure,
    rho: &LevyMeasure,
    sigma: &IntensityMeasure,
) -> Result<f64> {
    dir.check(rho)?;
    let base = h.eval(omega);
    let mut shape = h.shape();
    shape.push(&dir.spatial);
    let rule = sigma.rule(&shape);
    Ok(rule.integrate(|x| {
        let inner = rho_integral(rho, |s| dir.p(s) * (h.eval(&add_atom_nudged(omega, *x, s)) - base));
        inner * dir.spatial.eval(x)
    }))
}

/// `Σ_{(x, s) ∈ ω} g(ω - s ε_x) p(s) φ(x) - g(ω) ⟨p⟩_ρ ⟨φ⟩_σ`.
pub fn cp_creation(
    g: &impl Functional<DiscreteMeasure>,
    dir: &MarkedDirection,
    omega: &DiscreteMeasure,
    rho: &LevyMeasure,
    sigma: &IntensityMeasure,
) -> Extended {
    let Extended::Finite(mean) = dir.mean(rho, sigma) else {
        return Extended::Diverges;
    };
    let mut sum = 0.0;
    for (x, s) in omega.atoms() {
        let rest = omega.remove_atom(x).expect("atom of ω");
        sum += g.eval(&rest) * (dir.p(*s) * dir.spatial.eval(x));
    }
    Extended::Finite(sum - g.eval(omega) * mean)
}

/// `⟨C_n^{σ̂}(Σ⁻¹ ω), φ̂^{⊗n}⟩` from `Ŝ_k = Σ (p(s) φ(x))ᵏ` and
/// `m̂ = ⟨p⟩_ρ ⟨φ⟩_σ`.
pub fn cp_charlier_eval(
    omega: &DiscreteMeasure,
    dir: &MarkedDirection,
    n: usize,
    rho: &LevyMeasure,
    sigma: &IntensityMeasure,
) -> Result<Extended> {
    let Extended::Finite(mean) = dir.mean(rho, sigma) else {
        return Ok(Extended::Diverges);
    };
    Ok(Extended::Finite(cp_charlier_all(omega, dir, n, mean)?[n]))
}

/// `[Ĉ_0, …, Ĉ_n]` with the mean `m̂` supplied.
pub fn cp_charlier_all(omega: &DiscreteMeasure, dir: &MarkedDirection, n: usize, mean: f64) -> Result<Vec<f64>> {
    let mut sums = vec![0.0; n];
    for (x, s) in omega.atoms() {
        let v = dir.p(*s) * dir.spatial.eval(x);
        let mut pow = 1.0;
        for acc in sums.iter_mut() {
            pow *= v;
            *acc += 1.0 * pow;
        }
    }
    charlier_from_symbols(&sums, &mean, n)
}

/// `h(ω) = exp(-⟨p⟩_ρ ⟨φ⟩_σ) ∏_{(x,s) ∈ ω} (1 + p(s) φ(x))`, the image of the
/// marked-space normalized exponential of `φ̂ = p φ`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkedExponential {
    dir: MarkedDirection,
    mean: f64,
}

impl MarkedExponential {
    pub fn new(dir: MarkedDirection, rho: &LevyMeasure, sigma: &IntensityMeasure) -> Result<Self> {
        let mean = dir
            .mean(rho, sigma)
            .finite()
            .ok_or_else(|| Error::domain("marked exponential needs a finite ⟨p⟩_ρ"))?;
        Ok(Self { dir, mean })
    }
}

impl Functional<DiscreteMeasure> for MarkedExponential {
    fn eval(&self, w: &DiscreteMeasure) -> f64 {
        let prod: f64 = w.atoms().iter().map(|(x, s)| 1.0 + self.dir.p(*s) * self.dir.spatial.eval(x)).product();
        (-self.mean).exp() * prod
    }

    fn shape(&self) -> Vec<&TestFunction> {
        vec![&self.dir.spatial]
    }
}

/// `h(ω) = exp(⟨ω, log(1 + η)⟩ - ⟨η⟩_σ m_1(ρ))`.
pub fn exponential_example(eta: &TestFunction, rho: &LevyMeasure, sigma: &IntensityMeasure) -> Result<CylinderFunction> {
    let lo = eta.range(sigma.window()).lo;
    if !(lo > -1.0) {
        return Err(Error::domain(format!("η must exceed -1, lower bound {lo}")));
    }
    let m1 = rho.signed_moment(1).finite().ok_or_else(|| Error::domain("first moment of ρ diverges"))?;
    Ok(CylinderFunction::exp_affine(vec![eta.clone().log1p()], -sigma.integrate(eta) * m1, vec![1.0]))
}

/// A bound `C` with `|h(ω + s ε_x) - h(ω)| ≤ C s` for `s ∈ [0, 1]` and all
/// `x` in the window, from interval enclosures of `∇H` along the segment.
pub fn lagrange_constant(h: &CylinderFunction, omega: &impl AtomicMeasure) -> f64 {
    let window = omega.window();
    let ranges: Vec<Interval> = h.directions.iter().map(|d| d.range(window)).collect();
    let u: Vec<f64> = h.directions.iter().map(|d| omega.pairing(d)).collect();
    // u + t v with t ∈ [0, 1] and v ∈ range(φ_i)
    let boxes: Vec<Interval> =
        u.iter().zip(&ranges).map(|(&ui, r)| Interval::new(ui + r.lo.min(0.0), ui + r.hi.max(0.0))).collect();
    match &h.generator {
        Generator::Polynomial(terms) => {
            let mut c = 0.0;
            for (i, r) in ranges.iter().enumerate() {
                let mut d = Interval::point(0.0);
                for (coef, e) in terms {
                    let ei = e.get(i).copied().unwrap_or(0);
                    if ei == 0 {
                        continue;
                    }
                    let mut t = Interval::point(coef * ei as f64).mul(boxes[i].powi(ei - 1));
                    for (j, &ej) in e.iter().enumerate() {
                        if j != i {
                            t = t.mul(boxes[j].powi(ej));
                        }
                    }
                    d = d.add(t);
                }
                c += d.mag() * r.mag();
            }
            c
        }
        Generator::ExpAffine { offset, coeffs } => {
            let arg = coeffs.iter().zip(&boxes).fold(Interval::point(*offset), |a, (&ci, b)| a.add(b.scale(ci)));
            let slope: f64 = coeffs.iter().zip(&ranges).map(|(ci, r)| ci.abs() * r.mag()).sum();
            arg.hi.exp() * slope
        }
    }
}
