//! Gamma-noise calculus: normalized exponentials, generalized Laguerre
//! kernels, the partition-weighted inner product on each chaos and the
//! Gamma annihilation operator.
//!
//! The Lévy measure is one-sided, `e^{-s}/s ds` on `(0, ∞)`, and the
//! deterministic formulas below use it untruncated. Only the samplers
//! truncate at ε.

pub mod checks;
pub mod inner;

use crate::charlier::Functional;
use crate::compound::{add_atom_nudged, gamma_levy_integral};
use crate::configuration::{AtomicMeasure, DiscreteMeasure};
use crate::error::{Error, Result};
use crate::measures::{IntensityMeasure, TestFunction};
use crate::series::{Scalar, TruncatedSeries, MAX_PARTITION_N};

pub use checks::{
    classical_orthogonality_mc, gamma_norm_check, gamma_orthogonality_mc, truncated_pair_moment, PairMoment,
    MAX_MC_LEVEL,
};
pub use inner::{
    gamma_inner_factorized, gamma_inner_oracle, gamma_inner_partition, rational_poly, BlockIntegral,
    ExactPolynomialMeasure, RankDecomposedKernel, MAX_PARTITION_PATH_N,
};

fn check_order(n: usize) -> Result<()> {
    if n > MAX_PARTITION_N {
        return Err(Error::Size { what: "kernel order n", value: n, limit: MAX_PARTITION_N });
    }
    Ok(())
}

/// Rejects `φ` unless `sup |φ| < 1` on the window.
pub fn check_sup_below_one(phi: &TestFunction, sigma: &IntensityMeasure) -> Result<()> {
    let mag = phi.range(sigma.window()).mag();
    if !(mag < 1.0) {
        return Err(Error::domain(format!("Gamma exponential needs sup |φ| < 1, got a bound of {mag}")));
    }
    Ok(())
}

/// `e(φ; ω) = exp(⟨ω, φ/(φ - 1)⟩ - ⟨log(1 - φ)⟩_σ)`.
pub fn normalized_exp_gamma(phi: &TestFunction, omega: &impl AtomicMeasure, sigma: &IntensityMeasure) -> Result<f64> {
    check_sup_below_one(phi, sigma)?;
    let log_term = sigma.integrate(&phi.clone().scaled(-1.0).log1p());
    let mut acc = 0.0;
    omega.for_each_atom(|p, s| {
        let v = phi.eval(p);
        acc += s * v / (v - 1.0);
    });
    Ok((acc - log_term).exp())
}

/// `[⟨φ⟩_σ, ⟨φ²⟩_σ, …, ⟨φⁿ⟩_σ]`.
pub fn gamma_moments(phi: &TestFunction, n: usize, sigma: &IntensityMeasure) -> Vec<f64> {
    (1..=n as u32).map(|k| sigma.integrate(&phi.clone().pow(k))).collect()
}

/// Symbols of the Laguerre generating function:
/// `T_k = ⟨ω, φᵏ⟩` and `u_k = ⟨φᵏ⟩_σ / k`.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaSymbols {
    pub weighted_power_sums: Vec<f64>,
    pub scaled_moments: Vec<f64>,
}

impl GammaSymbols {
    pub fn new(omega: &impl AtomicMeasure, phi: &TestFunction, moments: &[f64]) -> Self {
        Self {
            weighted_power_sums: omega.power_sums(phi, moments.len()),
            scaled_moments: moments.iter().enumerate().map(|(i, m)| m / (i + 1) as f64).collect(),
        }
    }
}

/// `[L_0, …, L_n]` with `L_k = k! [tᵏ] exp(Σ_j tʲ (⟨φʲ⟩_σ / j - T_j))`, from
/// `t = [T_1, …]` and `moments = [⟨φ⟩_σ, …]`.
pub fn laguerre_from_symbols<S: Scalar>(t: &[S], moments: &[S], n: usize) -> Result<Vec<S>> {
    check_order(n)?;
    let mut g = vec![S::zero(); n + 1];
    for j in 1..=n {
        g[j] = moments[j - 1].clone() / S::from_int(j as i64) - t[j - 1].clone();
    }
    let e = TruncatedSeries::new(g, n).exp()?;
    Ok((0..=n).map(|k| e.derivative_at_zero(k)).collect())
}

/// `⟨L_n(ω), φ^{⊗n}⟩`.
pub fn laguerre_eval(omega: &impl AtomicMeasure, phi: &TestFunction, n: usize, sigma: &IntensityMeasure) -> Result<f64> {
    check_order(n)?;
    let moments = gamma_moments(phi, n, sigma);
    let t = omega.power_sums(phi, n);
    Ok(laguerre_from_symbols(&t, &moments, n)?[n])
}

/// The functional `ω ↦ [⟨L_0(ω), φ^{⊗0}⟩, …, ⟨L_n(ω), φ^{⊗n}⟩]` with the
/// σ-moments precomputed.
#[derive(Debug, Clone, PartialEq)]
pub struct LaguerreKernel {
    phi: TestFunction,
    moments: Vec<f64>,
}

impl LaguerreKernel {
    pub fn new(phi: TestFunction, n: usize, sigma: &IntensityMeasure) -> Result<Self> {
        check_order(n)?;
        let moments = gamma_moments(&phi, n, sigma);
        Ok(Self { phi, moments })
    }

    pub fn levels(&self, omega: &impl AtomicMeasure) -> Vec<f64> {
        let n = self.moments.len();
        let t = omega.power_sums(&self.phi, n);
        laguerre_from_symbols(&t, &self.moments, n).expect("order checked at construction")
    }
}

/// `(∇^G_φ h)(ω) = ∫ ∫_0^∞ (h(ω + s ε_x) - h(ω)) e^{-s}/s ds φ(x) dσ(x)`.
pub fn gamma_annihilation(
    h: &impl Functional<DiscreteMeasure>,
    phi: &TestFunction,
    omega: &DiscreteMeasure,
    sigma: &IntensityMeasure,
) -> f64 {
    annihilation_from(0.0, h, phi, omega, sigma)
}

/// The same operator with jumps below `eps` discarded, as seen by the
/// truncated sampler. Needs `0 < eps < 1`.
pub fn gamma_annihilation_truncated(
    h: &impl Functional<DiscreteMeasure>,
    phi: &TestFunction,
    omega: &DiscreteMeasure,
    sigma: &IntensityMeasure,
    eps: f64,
) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::domain(format!("truncation level must lie in (0, 1), got {eps}")));
    }
    Ok(annihilation_from(eps, h, phi, omega, sigma))
}

fn annihilation_from(
    lower: f64,
    h: &impl Functional<DiscreteMeasure>,
    phi: &TestFunction,
    omega: &DiscreteMeasure,
    sigma: &IntensityMeasure,
) -> f64 {
    let base = h.eval(omega);
    let mut shape = h.shape();
    shape.push(phi);
    sigma.rule(&shape).integrate(|x| {
        let inner = gamma_levy_integral(lower, |s| h.eval(&add_atom_nudged(omega, *x, s)) - base);
        inner * phi.eval(x)
    })
}

/// `[L_0^{(α)}(x), …, L_n^{(α)}(x)]` by the three-term recurrence.
pub fn classical_laguerre(n: usize, alpha: f64, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(1.0);
    if n >= 1 {
        out.push(1.0 + alpha - x);
    }
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + alpha - x) * out[k] - (kf + alpha) * out[k - 1]) / (kf + 1.0);
        out.push(next);
    }
    out
}

/// `Σ_j |binom(n + α, n - j) xʲ / j!|`, the size of the monomial terms of
/// `L_n^{(α)}(x)`; cancellation makes ratios unreliable where `|L_n|` is
/// small against it.
pub fn classical_laguerre_scale(n: usize, alpha: f64, x: f64) -> f64 {
    let mut total = 0.0;
    let mut xpow = 1.0;
    let mut jfact = 1.0;
    for j in 0..=n {
        if j > 0 {
            xpow *= x;
            jfact *= j as f64;
        }
        let mut binom = 1.0;
        for i in 1..=(n - j) {
            binom *= (alpha + j as f64 + i as f64) / i as f64;
        }
        total += (binom * xpow / jfact).abs();
    }
    total
}

/// Both sides of the constant-direction identity for `φ = c 1_{[0,T]}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalComparison {
    pub x: f64,
    /// `e(c 1_{[0,T]}; ω)`.
    pub exponential: f64,
    /// `(1 - c)^{-T} exp(-x c / (1 - c))`.
    pub closed_form: f64,
    /// `⟨L_k(ω), 1_{[0,T]}^{⊗k}⟩` for `k = 0..=n`.
    pub kernel: Vec<f64>,
    /// `L_k^{(T-1)}(x)`.
    pub classical: Vec<f64>,
    /// Monomial scale of each classical value.
    pub scale: Vec<f64>,
}

impl ClassicalComparison {
    /// `κ_k = kernel_k / classical_k`, or `None` near a root of the classical
    /// polynomial (`|L_k| < cutoff · scale_k`).
    pub fn kappa(&self, k: usize, cutoff: f64) -> Option<f64> {
        let c = self.classical[k];
        if c.abs() < cutoff * self.scale[k] {
            None
        } else {
            Some(self.kernel[k] / c)
        }
    }
}

/// Compares Gamma-space objects along `1_{[0,T]}` with their classical
/// counterparts at `x = ⟨ω, 1_{[0,T]}⟩`. σ must be Lebesgue measure on a
/// one-dimensional window containing `[0, T]`.
pub fn laguerre_classical_check(
    t: f64,
    c: f64,
    n: usize,
    omega: &impl AtomicMeasure,
    sigma: &IntensityMeasure,
) -> Result<ClassicalComparison> {
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::domain(format!("c must lie in (0, 1), got {c}")));
    }
    let w = sigma.window();
    if w.dim != 1 || w.lo[0] > 0.0 || w.hi[0] < t || !(t > 0.0) {
        return Err(Error::domain(format!("window must be one-dimensional and contain [0, {t}]")));
    }
    let ind = TestFunction::indicator(0.0, t, 1.0);
    let x = omega.pairing(&ind);
    let exponential = normalized_exp_gamma(&ind.clone().scaled(c), omega, sigma)?;
    let closed_form = (1.0 - c).powf(-t) * (-x * c / (1.0 - c)).exp();
    let kernel = {
        let moments = gamma_moments(&ind, n, sigma);
        let tk = omega.power_sums(&ind, n);
        laguerre_from_symbols(&tk, &moments, n)?
    };
    let alpha = t - 1.0;
    let classical = classical_laguerre(n, alpha, x);
    let scale = (0..=n).map(|k| classical_laguerre_scale(k, alpha, x)).collect();
    Ok(ClassicalComparison { x, exponential, closed_form, kernel, classical, scale })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{sample_compound_poisson, LevyMeasure, Point, Window};
    use crate::rng::StreamKey;
    use crate::charlier::CylinderFunction;

    fn unit() -> IntensityMeasure {
        IntensityMeasure::lebesgue(Window::interval(0.0, 1.0).unwrap())
    }

    fn omega() -> DiscreteMeasure {
        DiscreteMeasure::new(
            *unit().window(),
            vec![(Point::d1(0.1), 0.7), (Point::d1(0.45), 2.2), (Point::d1(0.8), 0.05)],
        )
        .unwrap()
    }

    #[test]
    fn trivial_levels() {
        let s = unit();
        let phi = TestFunction::poly([0.1, 0.3]);
        assert_eq!(laguerre_eval(&omega(), &phi, 0, &s).unwrap(), 1.0);
        let zero = TestFunction::zero();
        assert_eq!(normalized_exp_gamma(&zero, &omega(), &s).unwrap(), 1.0);
    }

    #[test]
    fn first_kernel_matches_finite_difference() {
        let s = unit();
        let phi = TestFunction::poly([0.1, 0.3]);
        let w = omega();
        let l1 = laguerre_eval(&w, &phi, 1, &s).unwrap();
        assert!((l1 - (s.integrate(&phi) - w.pairing(&phi))).abs() < 1e-14);
        // d/dt e(tφ) at t = 0 by central differences
        let h = 1e-5;
        let fd = (normalized_exp_gamma(&phi.clone().scaled(h), &w, &s).unwrap()
            - normalized_exp_gamma(&phi.clone().scaled(-h), &w, &s).unwrap())
            / (2.0 * h);
        assert!((fd - l1).abs() < 1e-8, "fd {fd} vs {l1}");
    }

    #[test]
    fn exponential_rejects_large_direction() {
        let s = unit();
        assert!(matches!(
            normalized_exp_gamma(&TestFunction::constant(1.0), &omega(), &s),
            Err(Error::Domain(_))
        ));
        assert!(matches!(laguerre_eval(&omega(), &TestFunction::constant(0.5), 11, &s), Err(Error::Size { .. })));
    }

    #[test]
    fn partial_sums_converge_to_exponential() {
        let s = unit();
        let phi = TestFunction::poly([0.2, -0.3]);
        let rho = LevyMeasure::gamma(1e-3).unwrap();
        let mut rng = StreamKey::new(11, 0).rng();
        let kernel = LaguerreKernel::new(phi.clone(), 10, &s).unwrap();
        for _ in 0..20 {
            let w = sample_compound_poisson(&rho, &s, &mut rng);
            let levels = kernel.levels(&w);
            for &t in &[0.5f64, -1.0, 1.0] {
                let mut sum = 0.0;
                let mut fact = 1.0;
                for (n, l) in levels.iter().enumerate() {
                    if n > 0 {
                        fact *= n as f64;
                    }
                    sum += t.powi(n as i32) / fact * l;
                }
                let target = normalized_exp_gamma(&phi.clone().scaled(t), &w, &s).unwrap();
                assert!((sum - target).abs() < 1e-6, "t={t}: {sum} vs {target}");
            }
        }
    }

    #[test]
    fn classical_recurrence_low_orders() {
        let (a, x) = (0.7, 1.3);
        let l = classical_laguerre(3, a, x);
        assert!((l[1] - (1.0 + a - x)).abs() < 1e-15);
        let l2 = x * x / 2.0 - (a + 2.0) * x + (a + 2.0) * (a + 1.0) / 2.0;
        assert!((l[2] - l2).abs() < 1e-14);
        let l3 = -x.powi(3) / 6.0 + (a + 3.0) * x * x / 2.0 - (a + 2.0) * (a + 3.0) * x / 2.0
            + (a + 1.0) * (a + 2.0) * (a + 3.0) / 6.0;
        assert!((l[3] - l3).abs() < 1e-13);
    }

    #[test]
    fn classical_identity_and_kappa() {
        let t = 2.5;
        let s = IntensityMeasure::lebesgue(Window::interval(0.0, 3.0).unwrap());
        let rho = LevyMeasure::gamma(1e-3).unwrap();
        let mut rng = StreamKey::new(12, 0).rng();
        for _ in 0..50 {
            let w = sample_compound_poisson(&rho, &s, &mut rng);
            let cmp = laguerre_classical_check(t, 0.4, 6, &w, &s).unwrap();
            let rel = (cmp.exponential - cmp.closed_form).abs() / cmp.closed_form;
            assert!(rel < 1e-12);
            let mut fact = 1.0;
            for k in 0..=6 {
                if k > 0 {
                    fact *= k as f64;
                }
                if let Some(kappa) = cmp.kappa(k, 1e-6) {
                    assert!((kappa / fact - 1.0).abs() < 1e-9, "k={k} kappa={kappa}");
                }
            }
        }
        assert!(laguerre_classical_check(t, 1.0, 2, &omega(), &s).is_err());
    }

    #[test]
    fn annihilation_of_constant_and_linear() {
        let s = unit();
        let phi = TestFunction::poly([0.5, 1.0]);
        let psi = TestFunction::bump(0.4, 0.3, 1.0);
        let w = omega();
        assert_eq!(gamma_annihilation(&CylinderFunction::constant(2.0), &phi, &w, &s), 0.0);
        let lin = CylinderFunction::pairing(psi.clone());
        let got = gamma_annihilation(&lin, &phi, &w, &s);
        let want = s.inner(&psi, &phi);
        assert!((got - want).abs() < 1e-10 * want.abs().max(1.0), "{got} vs {want}");
    }

    #[test]
    fn truncated_annihilation_within_lagrange_budget() {
        let s = unit();
        let phi = TestFunction::poly([0.5, 1.0]);
        let h = CylinderFunction::polynomial(
            vec![TestFunction::poly([0.0, 1.0]), TestFunction::bump(0.5, 0.4, 1.0)],
            vec![(1.0, vec![2, 0]), (-0.5, vec![1, 1]), (0.3, vec![0, 3])],
        );
        let w = omega();
        let c = crate::compound::lagrange_constant(&h, &w);
        let full = gamma_annihilation(&h, &phi, &w, &s);
        let phi_l1 = s.integrate(&phi);
        for &eps in &[1e-1, 1e-2, 1e-3] {
            let trunc = gamma_annihilation_truncated(&h, &phi, &w, &s, eps).unwrap();
            let diff = (full - trunc).abs();
            assert!(diff <= c * eps * phi_l1 + 1e-10, "eps={eps}: {diff} > {}", c * eps * phi_l1);
        }
    }
}
