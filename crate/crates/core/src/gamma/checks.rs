//! Monte Carlo checks under truncated Gamma noise.
//!
//! The sampler drops jumps below ε while the kernels are built from the
//! untruncated measure, so each check carries the exact truncation bias as
//! its deterministic budget. The bias follows from the truncated Laplace
//! exponent `-log(1 - u) - D_ε(u)`, `D_ε(u) = Σ_j uʲ γ(j, ε) / j!`:
//!
//! `E_ε[e(sφ) e(tψ)] = exp(-⟨log(1 - stφψ)⟩_σ - ∫ D_ε(a + b) dσ)`
//!
//! with `a = sφ/(sφ - 1)` and `b = tψ/(tψ - 1)`.

use rand_distr::{Distribution, Gamma};

use super::{check_sup_below_one, classical_laguerre, gamma_inner_factorized, LaguerreKernel};
use crate::charlier::checks::QUADRATURE_BUDGET;
use crate::error::{Error, Result};
use crate::mc::McPlan;
use crate::measures::special::lower_incomplete_gamma_int;
use crate::measures::{sample_compound_poisson, IntensityMeasure, LevyMeasure, TestFunction};
use crate::report::IdentityCheck;

/// Highest level used by the Monte Carlo checks.
pub const MAX_MC_LEVEL: usize = 4;

/// Dense bivariate series in `(s, t)` truncated at degrees `(n, m)`.
#[derive(Debug, Clone)]
struct Bivariate {
    n: usize,
    m: usize,
    c: Vec<f64>,
}

impl Bivariate {
    fn zero(n: usize, m: usize) -> Self {
        Self { n, m, c: vec![0.0; (n + 1) * (m + 1)] }
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.c[i * (self.m + 1) + j]
    }

    fn at_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.c[i * (self.m + 1) + j]
    }

    fn mul(&self, o: &Self) -> Self {
        let mut out = Self::zero(self.n, self.m);
        for i in 0..=self.n {
            for j in 0..=self.m {
                let a = self.at(i, j);
                if a == 0.0 {
                    continue;
                }
                for k in 0..=(self.n - i) {
                    for l in 0..=(self.m - j) {
                        *out.at_mut(i + k, j + l) += a * o.at(k, l);
                    }
                }
            }
        }
        out
    }

    fn axpy(&mut self, a: f64, o: &Self) {
        for (x, y) in self.c.iter_mut().zip(&o.c) {
            *x += a * y;
        }
    }

    /// `exp(self)` for a series without constant term.
    fn exp(&self) -> Self {
        let mut out = Self::zero(self.n, self.m);
        *out.at_mut(0, 0) = 1.0;
        let mut pow = out.clone();
        for j in 1..=(self.n + self.m) {
            pow = pow.mul(self);
            out.axpy(1.0 / (1..=j).map(|k| k as f64).product::<f64>(), &pow);
        }
        out
    }
}

/// `E[⟨L_n, φ^{⊗n}⟩ ⟨L_m, ψ^{⊗m}⟩]` under untruncated and ε-truncated
/// Gamma noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairMoment {
    pub full: f64,
    pub truncated: f64,
}

impl PairMoment {
    pub fn bias(&self) -> f64 {
        self.truncated - self.full
    }
}

pub fn truncated_pair_moment(
    phi: &TestFunction,
    psi: &TestFunction,
    n: usize,
    m: usize,
    sigma: &IntensityMeasure,
    eps: f64,
) -> PairMoment {
    let rule = sigma.rule(&[phi, psi]);
    let mut full = Bivariate::zero(n, m);
    for k in 1..=n.min(m) {
        let pk = phi.clone().times(psi.clone()).pow(k as u32);
        *full.at_mut(k, k) = rule.integrate(|x| pk.eval(x)) / k as f64;
    }
    let order = n + m;
    let weights: Vec<f64> = (1..=order as u32)
        .map(|j| lower_incomplete_gamma_int(j, eps) / (1..=j).map(f64::from).product::<f64>())
        .collect();
    let mut d = Bivariate::zero(n, m);
    for (x, &w) in rule.points.iter().zip(&rule.weights) {
        let (fx, gx) = (phi.eval(x), psi.eval(x));
        let mut u = Bivariate::zero(n, m);
        for k in 1..=n {
            *u.at_mut(k, 0) = -fx.powi(k as i32);
        }
        for k in 1..=m {
            *u.at_mut(0, k) = -gx.powi(k as i32);
        }
        let mut pow = u.clone();
        for (j, &cj) in weights.iter().enumerate() {
            if j > 0 {
                pow = pow.mul(&u);
            }
            d.axpy(w * cj, &pow);
        }
    }
    let scale: f64 = (1..=n).chain(1..=m).map(|k| k as f64).product();
    let mut trunc = full.clone();
    trunc.axpy(-1.0, &d);
    PairMoment { full: scale * full.exp().at(n, m), truncated: scale * trunc.exp().at(n, m) }
}

fn check_mc_level(n: usize) -> Result<()> {
    if n > MAX_MC_LEVEL {
        return Err(Error::Size { what: "Laguerre level", value: n, limit: MAX_MC_LEVEL });
    }
    Ok(())
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `E[⟨L_n, φ^{⊗n}⟩ ⟨L_m, ψ^{⊗m}⟩]` under Gamma noise truncated at `eps`
/// against `δ_{nm} n! (φ^{⊗n}, ψ^{⊗n})_G`.
pub fn gamma_orthogonality_mc(
    phi: &TestFunction,
    psi: &TestFunction,
    n: usize,
    m: usize,
    sigma: &IntensityMeasure,
    eps: f64,
    plan: &McPlan,
) -> Result<IdentityCheck> {
    check_mc_level(n.max(m))?;
    check_sup_below_one(phi, sigma)?;
    check_sup_below_one(psi, sigma)?;
    let rho = LevyMeasure::gamma(eps)?;
    let kp = LaguerreKernel::new(phi.clone(), n, sigma)?;
    let kq = LaguerreKernel::new(psi.clone(), m, sigma)?;
    let est = plan.estimate_one(|rng| {
        let w = sample_compound_poisson(&rho, sigma, rng);
        kp.levels(&w)[n] * kq.levels(&w)[m]
    });
    let target = if n == m { factorial(n) * gamma_inner_factorized(phi, psi, n, sigma)? } else { 0.0 };
    let bias = truncated_pair_moment(phi, psi, n, m, sigma, eps).bias();
    let budget = bias.abs() + QUADRATURE_BUDGET * target.abs().max(1.0);
    Ok(IdentityCheck::mc_vs_value(format!("laguerre_orthogonality_n{n}_m{m}"), est, target, budget))
}

/// `‖F‖²` for `F = Σ_n c_n ⟨L_n, φ_n^{⊗n}⟩` (level `n` = index) against
/// `Σ_n c_n² n! (φ_n^{⊗n}, φ_n^{⊗n})_G`.
pub fn gamma_norm_check(
    levels: &[(f64, TestFunction)],
    sigma: &IntensityMeasure,
    eps: f64,
    plan: &McPlan,
) -> Result<IdentityCheck> {
    check_mc_level(levels.len().saturating_sub(1))?;
    let rho = LevyMeasure::gamma(eps)?;
    let kernels: Vec<LaguerreKernel> = levels
        .iter()
        .enumerate()
        .map(|(n, (_, f))| LaguerreKernel::new(f.clone(), n, sigma))
        .collect::<Result<_>>()?;
    let est = plan.estimate_one(|rng| {
        let w = sample_compound_poisson(&rho, sigma, rng);
        let f: f64 = kernels.iter().zip(levels).enumerate().map(|(n, (k, (c, _)))| c * k.levels(&w)[n]).sum();
        f * f
    });
    let mut target = 0.0;
    let mut bias = 0.0;
    for (n, (c, f)) in levels.iter().enumerate() {
        target += c * c * factorial(n) * gamma_inner_factorized(f, f, n, sigma)?;
        for (m, (d, g)) in levels.iter().enumerate() {
            bias += c * d * truncated_pair_moment(f, g, n, m, sigma, eps).bias();
        }
    }
    let budget = bias.abs() + QUADRATURE_BUDGET * target.abs().max(1.0);
    Ok(IdentityCheck::mc_vs_value("laguerre_norm", est, target, budget))
}

/// `E[L_n^{(T-1)}(x) L_m^{(T-1)}(x)]` for `x ~ Gamma(T, 1)` against
/// `δ_{nm} binom(n + T - 1, n)`.
pub fn classical_orthogonality_mc(t: f64, n: usize, m: usize, plan: &McPlan) -> Result<IdentityCheck> {
    let law = Gamma::new(t, 1.0).map_err(|e| Error::domain(format!("Gamma({t}) law: {e}")))?;
    let alpha = t - 1.0;
    let top = n.max(m);
    let est = plan.estimate_one(|rng| {
        let l = classical_laguerre(top, alpha, law.sample(rng));
        l[n] * l[m]
    });
    let target = if n == m { (1..=n).map(|i| (alpha + i as f64) / i as f64).product() } else { 0.0 };
    Ok(IdentityCheck::mc_vs_value(format!("classical_laguerre_orthogonality_n{n}_m{m}"), est, target, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gamma::gamma_inner_oracle;
    use crate::measures::Window;
    use crate::rng::StreamKey;

    fn unit() -> IntensityMeasure {
        IntensityMeasure::lebesgue(Window::interval(0.0, 1.0).unwrap())
    }

    #[test]
    fn untruncated_pair_moment_is_orthogonality_target() {
        let s = unit();
        let phi = TestFunction::poly([0.3, 0.4]);
        let psi = TestFunction::poly([0.5, -0.2]);
        for n in 0..=3 {
            for m in 0..=3 {
                let pm = truncated_pair_moment(&phi, &psi, n, m, &s, 1e-3);
                let want = if n == m { factorial(n) * gamma_inner_oracle(&phi, &psi, n, &s).unwrap() } else { 0.0 };
                assert!((pm.full - want).abs() < 1e-13, "n={n} m={m}");
            }
        }
    }

    #[test]
    fn truncation_bias_is_order_epsilon() {
        let s = unit();
        let phi = TestFunction::poly([0.3, 0.4]);
        let b1 = truncated_pair_moment(&phi, &phi, 2, 2, &s, 1e-2).bias();
        let b2 = truncated_pair_moment(&phi, &phi, 2, 2, &s, 1e-3).bias();
        // diagonal moments feel truncation at second order, off-diagonal ones at first
        assert!((b1 / b2 - 100.0).abs() < 5.0, "ratio {}", b1 / b2);
        let o1 = truncated_pair_moment(&phi, &phi, 2, 0, &s, 1e-2).bias();
        let o2 = truncated_pair_moment(&phi, &phi, 2, 0, &s, 1e-3).bias();
        assert!((o1 / o2 - 10.0).abs() < 0.5, "ratio {}", o1 / o2);
        // level 1 in closed form: E_ε[L_1²] = ∫φ² (1 + ε) e^{-ε} + (1 - e^{-ε})² ⟨φ⟩²
        for &eps in &[1e-1, 1e-3] {
            let l1 = truncated_pair_moment(&phi, &phi, 1, 1, &s, eps);
            let want = s.inner(&phi, &phi) * (1.0 + eps) * (-eps).exp() + (-eps).exp_m1().powi(2) * s.integrate(&phi).powi(2);
            assert!((l1.truncated - want).abs() < 1e-14, "eps={eps}");
        }
    }

    #[test]
    fn orthogonality_examples() {
        let s = unit();
        let phi = TestFunction::poly([0.3, 0.4]);
        let psi = TestFunction::poly([0.5, -0.2]);
        let plan = McPlan::new(40_000, StreamKey::new(21, 0));
        for (n, m) in [(1, 1), (0, 2), (2, 2), (1, 3)] {
            let c = gamma_orthogonality_mc(&phi, &psi, n, m, &s, 1e-3, &plan).unwrap();
            assert!(c.pass, "{c:?}");
        }
        let c = gamma_orthogonality_mc(&phi, &psi, 1, 1, &s, 1e-3, &plan).unwrap();
        assert!((c.estimates[1] - s.inner(&phi, &psi)).abs() < 1e-14);
        assert!(gamma_orthogonality_mc(&phi, &psi, 5, 0, &s, 1e-3, &plan).is_err());
        assert!(gamma_orthogonality_mc(&TestFunction::constant(1.0), &psi, 1, 1, &s, 1e-3, &plan).is_err());
    }

    #[test]
    fn norm_identity() {
        let s = unit();
        let levels = vec![
            (0.5, TestFunction::zero()),
            (1.0, TestFunction::poly([0.2, 0.3])),
            (0.5, TestFunction::poly([0.4, -0.3])),
            (0.25, TestFunction::bump(0.5, 0.4, 0.6)),
        ];
        let plan = McPlan::new(40_000, StreamKey::new(22, 0));
        let c = gamma_norm_check(&levels, &s, 1e-3, &plan).unwrap();
        assert!(c.pass, "{c:?}");
    }

    #[test]
    fn classical_orthogonality() {
        let plan = McPlan::new(40_000, StreamKey::new(23, 0));
        for (n, m) in [(0, 0), (1, 1), (2, 2), (1, 2), (0, 3)] {
            let c = classical_orthogonality_mc(2.5, n, m, &plan).unwrap();
            assert!(c.pass, "{c:?}");
        }
    }
}
