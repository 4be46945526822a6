//! Poisson-side calculus: normalized exponentials, Charlier kernels, the
//! difference gradient, the creation operator and their Monte Carlo checks.

pub mod checks;
pub mod fock;

use std::collections::HashMap;

use crate::configuration::{AtomicMeasure, Configuration};
use crate::error::{Error, Result};
use crate::measures::{IntensityMeasure, MeasureRule, Point, TestFunction};
use crate::series::{Scalar, TruncatedSeries, MAX_PARTITION_N};

pub use checks::{charlier_orthogonality_mc, mecke_check, rn_check, MeckeIntegrand};
pub use fock::{coherent_vector, FockTerm, FockVector};

/// A real functional of an atomic measure.
pub trait Functional<M>: Sync {
    fn eval(&self, m: &M) -> f64;

    /// Test functions whose breakpoints quadrature rules should respect.
    fn shape(&self) -> Vec<&TestFunction> {
        Vec::new()
    }
}

impl<M, F: Fn(&M) -> f64 + Sync> Functional<M> for F {
    fn eval(&self, m: &M) -> f64 {
        self(m)
    }
}

/// Outer function of a cylinder functional.
#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    /// `Σ c_j ∏_i u_i^{e_ji}` as `(c_j, e_j)` pairs.
    Polynomial(Vec<(f64, Vec<u32>)>),
    /// `exp(offset + Σ c_i u_i)`.
    ExpAffine { offset: f64, coeffs: Vec<f64> },
}

impl Generator {
    pub fn eval(&self, u: &[f64]) -> f64 {
        match self {
            Generator::Polynomial(terms) => terms
                .iter()
                .map(|(c, e)| c * e.iter().zip(u).map(|(&k, &v)| v.powi(k as i32)).product::<f64>())
                .sum(),
            Generator::ExpAffine { offset, coeffs } => {
                (offset + coeffs.iter().zip(u).map(|(c, v)| c * v).sum::<f64>()).exp()
            }
        }
    }
}

/// `F(⟨m, φ_1⟩, …, ⟨m, φ_N⟩)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderFunction {
    pub directions: Vec<TestFunction>,
    pub generator: Generator,
}

impl CylinderFunction {
    pub fn constant(c: f64) -> Self {
        Self { directions: Vec::new(), generator: Generator::Polynomial(vec![(c, Vec::new())]) }
    }

    /// `m ↦ ⟨m, ψ⟩`.
    pub fn pairing(psi: TestFunction) -> Self {
        Self { directions: vec![psi], generator: Generator::Polynomial(vec![(1.0, vec![1])]) }
    }

    /// `m ↦ ∏ ⟨m, ψ_i⟩`.
    pub fn product_of_pairings(psis: Vec<TestFunction>) -> Self {
        let e = vec![1; psis.len()];
        Self { directions: psis, generator: Generator::Polynomial(vec![(1.0, e)]) }
    }

    pub fn polynomial(directions: Vec<TestFunction>, terms: Vec<(f64, Vec<u32>)>) -> Self {
        Self { directions, generator: Generator::Polynomial(terms) }
    }

    /// `m ↦ exp(offset + Σ c_i ⟨m, ψ_i⟩)`.
    pub fn exp_affine(directions: Vec<TestFunction>, offset: f64, coeffs: Vec<f64>) -> Self {
        Self { directions, generator: Generator::ExpAffine { offset, coeffs } }
    }
}

impl<M: AtomicMeasure> Functional<M> for CylinderFunction {
    fn eval(&self, m: &M) -> f64 {
        let u: Vec<f64> = self.directions.iter().map(|d| m.pairing(d)).collect();
        self.generator.eval(&u)
    }

    fn shape(&self) -> Vec<&TestFunction> {
        self.directions.iter().collect()
    }
}

fn check_above_minus_one(phi: &TestFunction, sigma: &IntensityMeasure) -> Result<()> {
    let lo = phi.range(sigma.window()).lo;
    if !(lo > -1.0) {
        return Err(Error::domain(format!("normalized exponential needs inf φ > -1, got a lower bound of {lo}")));
    }
    Ok(())
}

/// `e(φ; γ) = e^{-⟨φ⟩_σ} ∏_{x∈γ} (1 + φ(x))`.
pub fn normalized_exp_poisson(phi: &TestFunction, gamma: &Configuration, sigma: &IntensityMeasure) -> Result<f64> {
    Ok(NormalizedExp::new(phi.clone(), sigma)?.eval(gamma))
}

/// The functional `γ ↦ e(φ; γ)` with `⟨φ⟩_σ` precomputed.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedExp {
    phi: TestFunction,
    mean: f64,
}

impl NormalizedExp {
    pub fn new(phi: TestFunction, sigma: &IntensityMeasure) -> Result<Self> {
        check_above_minus_one(&phi, sigma)?;
        let mean = sigma.integrate(&phi);
        Ok(Self { phi, mean })
    }

    pub fn direction(&self) -> &TestFunction {
        &self.phi
    }
}

impl Functional<Configuration> for NormalizedExp {
    fn eval(&self, gamma: &Configuration) -> f64 {
        (-self.mean).exp() * gamma.points().map(|p| 1.0 + self.phi.eval(p)).product::<f64>()
    }

    fn shape(&self) -> Vec<&TestFunction> {
        vec![&self.phi]
    }
}

/// `S_k = ⟨γ, φᵏ⟩` for `k = 1..n` and `m = ⟨φ⟩_σ`.
#[derive(Debug, Clone, PartialEq)]
pub struct CharlierSymbols {
    pub power_sums: Vec<f64>,
    pub mean: f64,
}

impl CharlierSymbols {
    pub fn new<M: AtomicMeasure>(gamma: &M, phi: &TestFunction, n: usize, mean: f64) -> Self {
        Self { power_sums: gamma.power_sums(phi, n), mean }
    }
}

fn check_order(n: usize) -> Result<()> {
    if n > MAX_PARTITION_N {
        return Err(Error::Size { what: "kernel order n", value: n, limit: MAX_PARTITION_N });
    }
    Ok(())
}

/// `[C_0, …, C_n]` from power sums `s = [S_1, …]` and mean `m`:
/// `C_k = k! [tᵏ] exp(Σ_j (-1)^{j+1} tʲ S_j / j - t m)`.
pub fn charlier_from_symbols<S: Scalar>(s: &[S], m: &S, n: usize) -> Result<Vec<S>> {
    check_order(n)?;
    let mut l = vec![S::zero(); n + 1];
    for j in 1..=n {
        let sign = if j % 2 == 1 { S::one() } else { -S::one() };
        l[j] = sign * s[j - 1].clone() / S::from_int(j as i64);
    }
    if n >= 1 {
        l[1] = l[1].clone() - m.clone();
    }
    let g = TruncatedSeries::new(l, n).exp()?;
    Ok((0..=n).map(|k| g.derivative_at_zero(k)).collect())
}

/// `⟨C_n(γ), φ^{⊗n}⟩`.
pub fn charlier_eval(gamma: &Configuration, phi: &TestFunction, n: usize, sigma: &IntensityMeasure) -> Result<f64> {
    check_order(n)?;
    let sym = CharlierSymbols::new(gamma, phi, n, sigma.integrate(phi));
    Ok(charlier_from_symbols(&sym.power_sums, &sym.mean, n)?[n])
}

/// `f(γ + ε_x) - f(γ)`.
pub fn poisson_gradient(f: &impl Functional<Configuration>, gamma: &Configuration, x: Point) -> Result<f64> {
    Ok(f.eval(&gamma.add_atom(x)?) - f.eval(gamma))
}

/// Adds `x` to `γ`, moving it up by one ulp per axis-0 step while it
/// coincides with an atom.
pub(crate) fn add_atom_nudged(gamma: &Configuration, x: Point) -> Configuration {
    let mut p = x;
    loop {
        match gamma.add_atom(p) {
            Ok(g) => return g,
            Err(_) => {
                let next = p.0[0].next_up();
                p.0[0] = if gamma.window().contains(&Point([next, p.0[1]])) { next } else { p.0[0].next_down() };
            }
        }
    }
}

fn gradient_rule(f: &impl Functional<Configuration>, phi: &TestFunction, sigma: &IntensityMeasure) -> MeasureRule {
    let mut shape = f.shape();
    shape.push(phi);
    sigma.rule(&shape)
}

/// `(∇_φ f)(γ) = ∫ (f(γ + ε_x) - f(γ)) φ(x) dσ(x)` by quadrature.
pub fn directional_gradient(
    f: &impl Functional<Configuration>,
    phi: &TestFunction,
    gamma: &Configuration,
    sigma: &IntensityMeasure,
) -> f64 {
    let base = f.eval(gamma);
    gradient_rule(f, phi, sigma).integrate(|x| (f.eval(&add_atom_nudged(gamma, *x)) - base) * phi.eval(x))
}

/// The adjoint of `∇_φ`:
/// `g ↦ Σ_{x∈γ} g(γ - ε_x) φ(x) - g(γ) ⟨φ⟩_σ`.
#[derive(Debug, Clone, PartialEq)]
pub struct CreationOperator {
    phi: TestFunction,
    mean: f64,
}

impl CreationOperator {
    pub fn new(phi: TestFunction, sigma: &IntensityMeasure) -> Self {
        let mean = sigma.integrate(&phi);
        Self { phi, mean }
    }

    pub fn apply(&self, g: &impl Functional<Configuration>, gamma: &Configuration) -> f64 {
        let mut sum = 0.0;
        for x in gamma.points() {
            let rest = gamma.remove_atom(x).expect("atom of γ");
            sum += g.eval(&rest) * self.phi.eval(x);
        }
        sum - g.eval(gamma) * self.mean
    }

    /// `((∇_φ)^*)ⁿ 1` at `γ`, by the recursion with memoisation over the
    /// removed atom sets.
    pub fn iterate_on_one(&self, n: usize, gamma: &Configuration) -> Result<f64> {
        check_order(n)?;
        let vals: Vec<f64> = gamma.points().map(|p| self.phi.eval(p)).collect();
        let mut memo: HashMap<(usize, Vec<u32>), f64> = HashMap::new();
        Ok(self.iterate_rec(n, &mut Vec::new(), &vals, &mut memo))
    }

    fn iterate_rec(&self, k: usize, removed: &mut Vec<u32>, vals: &[f64], memo: &mut HashMap<(usize, Vec<u32>), f64>) -> f64 {
        if k == 0 {
            return 1.0;
        }
        if let Some(&v) = memo.get(&(k, removed.clone())) {
            return v;
        }
        let mut sum = 0.0;
        for (i, &phi_x) in vals.iter().enumerate() {
            let i = i as u32;
            if let Err(pos) = removed.binary_search(&i) {
                removed.insert(pos, i);
                sum += self.iterate_rec(k - 1, removed, vals, memo) * phi_x;
                removed.remove(pos);
            }
        }
        let v = sum - self.iterate_rec(k - 1, removed, vals, memo) * self.mean;
        memo.insert((k, removed.clone()), v);
        v
    }
}

/// One application of the creation operator.
pub fn creation_apply(
    g: &impl Functional<Configuration>,
    phi: &TestFunction,
    gamma: &Configuration,
    sigma: &IntensityMeasure,
) -> f64 {
    CreationOperator::new(phi.clone(), sigma).apply(g, gamma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::Window;
    use crate::series::rational;
    use num_rational::BigRational;

    fn unit() -> IntensityMeasure {
        IntensityMeasure::lebesgue(Window::interval(0.0, 1.0).unwrap())
    }

    fn gamma(xs: &[f64]) -> Configuration {
        Configuration::new(Window::interval(0.0, 1.0).unwrap(), xs.iter().map(|&x| Point::d1(x)).collect()).unwrap()
    }

    #[test]
    fn normalized_exp_basics() {
        let sigma = unit();
        let g = gamma(&[0.2, 0.9]);
        assert_eq!(normalized_exp_poisson(&TestFunction::zero(), &g, &sigma).unwrap(), 1.0);
        let phi = TestFunction::poly([0.5, 1.0]);
        let empty = gamma(&[]);
        assert!((normalized_exp_poisson(&phi, &empty, &sigma).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        assert!(matches!(
            normalized_exp_poisson(&TestFunction::poly([-1.0, 1.0]), &g, &sigma),
            Err(Error::Domain(_))
        ));
        // product form against exp(⟨γ, log(1+φ)⟩ - ⟨φ⟩_σ)
        let v = normalized_exp_poisson(&phi, &g, &sigma).unwrap();
        let w = (g.pairing(&phi.clone().log1p()) - 1.0).exp();
        assert!((v - w).abs() < 1e-15);
    }

    #[test]
    fn charlier_low_orders() {
        let sigma = unit();
        let g = gamma(&[0.1, 0.4, 0.75]);
        let phi = TestFunction::poly([0.3, -0.6, 1.1]);
        let m = sigma.integrate(&phi);
        assert_eq!(charlier_eval(&g, &phi, 0, &sigma).unwrap(), 1.0);
        let s1 = g.pairing(&phi);
        let s2 = g.power_sum(&phi, 2);
        assert!((charlier_eval(&g, &phi, 1, &sigma).unwrap() - (s1 - m)).abs() < 1e-15);
        assert!((charlier_eval(&g, &phi, 2, &sigma).unwrap() - ((s1 - m).powi(2) - s2)).abs() < 1e-14);
        assert!(matches!(charlier_eval(&g, &phi, 11, &sigma), Err(Error::Size { .. })));
    }

    #[test]
    fn charlier_second_order_exact() {
        let s = [rational(7, 3), rational(-2, 5)];
        let m = rational(1, 7);
        let c = charlier_from_symbols::<BigRational>(&s, &m, 2).unwrap();
        let d = s[0].clone() - m.clone();
        assert_eq!(c[2], d.clone() * d - s[1].clone());
    }

    #[test]
    fn charlier_second_order_by_finite_differences() {
        // C_2 = d²/dt² exp(⟨γ, log(1 + tφ)⟩ - t m) at t = 0
        let sigma = unit();
        let g = gamma(&[0.15, 0.5, 0.8]);
        let phi = TestFunction::poly([0.2, 0.9]);
        let m = sigma.integrate(&phi);
        let e = |t: f64| g.points().map(|p| 1.0 + t * phi.eval(p)).product::<f64>() * (-t * m).exp();
        let h = 1e-3;
        let fd = (e(h) - 2.0 * e(0.0) + e(-h)) / (h * h);
        assert!((fd - charlier_eval(&g, &phi, 2, &sigma).unwrap()).abs() < 1e-5);
    }

    #[test]
    fn gradient_examples() {
        let sigma = unit();
        let g = gamma(&[0.2, 0.6]);
        let psi = TestFunction::poly([0.1, 0.5]);
        let x = Point::d1(0.35);
        assert_eq!(poisson_gradient(&CylinderFunction::constant(2.0), &g, x).unwrap(), 0.0);
        let lin = CylinderFunction::pairing(psi.clone());
        assert!((poisson_gradient(&lin, &g, x).unwrap() - psi.eval(&x)).abs() < 1e-15);
        assert_eq!(poisson_gradient(&lin, &g, Point::d1(0.2)), Err(Error::AtomClash));
        let e = NormalizedExp::new(psi.clone(), &sigma).unwrap();
        let d = poisson_gradient(&e, &g, x).unwrap();
        assert!((d - e.eval(&g) * ((1.0 + psi.eval(&x)) - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn directional_gradient_examples() {
        let sigma = unit();
        let g = gamma(&[0.2, 0.6]);
        let psi = TestFunction::poly([0.1, 0.5]);
        let phi = TestFunction::indicator(0.0, 0.5, 1.0).plus(TestFunction::poly([0.0, 0.3]));
        let inner = sigma.inner(&psi, &phi);
        let lin = CylinderFunction::pairing(psi.clone());
        assert!((directional_gradient(&lin, &phi, &g, &sigma) - inner).abs() < 1e-14);
        assert_eq!(directional_gradient(&CylinderFunction::constant(1.0), &phi, &g, &sigma), 0.0);
        let e = NormalizedExp::new(psi, &sigma).unwrap();
        let got = directional_gradient(&e, &phi, &g, &sigma);
        assert!((got - inner * e.eval(&g)).abs() < 1e-14);
    }

    #[test]
    fn gradient_quadrature_survives_atom_on_node() {
        let sigma = unit();
        let psi = TestFunction::poly([0.0, 1.0]);
        let node = sigma.rule(&[&psi]).points[3];
        let g = gamma(&[node.x()]);
        let lin = CylinderFunction::pairing(psi.clone());
        let got = directional_gradient(&lin, &psi, &g, &sigma);
        assert!((got - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn creation_examples() {
        let sigma = unit();
        let phi = TestFunction::poly([0.4, -0.2]);
        let one = CylinderFunction::constant(1.0);
        let g = gamma(&[0.3, 0.7]);
        let c1 = charlier_eval(&g, &phi, 1, &sigma).unwrap();
        assert!((creation_apply(&one, &phi, &g, &sigma) - c1).abs() < 1e-15);
        let m = sigma.integrate(&phi);
        assert_eq!(creation_apply(&one, &phi, &gamma(&[]), &sigma), -m);
    }

    #[test]
    fn creation_iterate_matches_series() {
        let sigma = unit();
        let phi = TestFunction::poly([0.4, -0.9, 0.7]);
        let op = CreationOperator::new(phi.clone(), &sigma);
        for xs in [&[][..], &[0.5][..], &[0.1, 0.33, 0.57, 0.8][..], &[0.05, 0.15, 0.25, 0.45, 0.65, 0.85, 0.95][..]] {
            let g = gamma(xs);
            for n in 0..=5 {
                let a = op.iterate_on_one(n, &g).unwrap();
                let b = charlier_eval(&g, &phi, n, &sigma).unwrap();
                assert!((a - b).abs() <= 1e-10 * a.abs().max(b.abs()).max(1.0), "n={n} {a} vs {b}");
            }
        }
    }
}
