//! Monte Carlo checks of the Poisson-side identities.
//!
//! Two sides estimated by simulation always use distinct stream families
//! (`key.substream(0)` and `key.substream(1)`), so their errors are
//! independent and the combined standard error applies.

use super::{
    add_atom_nudged, charlier_from_symbols, directional_gradient, CharlierSymbols, CreationOperator, Functional,
    NormalizedExp,
};
use crate::configuration::{AtomicMeasure, Configuration};
use crate::error::{Error, Result};
use crate::mc::McPlan;
use crate::measures::{sample_poisson, IntensityMeasure, TestFunction};
use crate::report::IdentityCheck;
use crate::series::MAX_PARTITION_N;

/// Deterministic allowance for quadrature in Monte Carlo comparisons.
pub const QUADRATURE_BUDGET: f64 = 1e-10;

/// `f(x, γ) = φ(x) h(γ)`.
pub struct MeckeIntegrand<'a, H> {
    pub phi: &'a TestFunction,
    pub h: &'a H,
}

/// `E Σ_{x∈γ} f(x, γ)` against `E ∫ f(x, γ + ε_x) dσ(x)`.
pub fn mecke_check<H: Functional<Configuration>>(f: &MeckeIntegrand<'_, H>, sigma: &IntensityMeasure, plan: &McPlan) -> IdentityCheck {
    let lhs = plan.with_key(plan.key.substream(0)).estimate_one(|rng| {
        let g = sample_poisson(sigma, rng);
        g.pairing(f.phi) * f.h.eval(&g)
    });
    let mut shape = f.h.shape();
    shape.push(f.phi);
    let rule = sigma.rule(&shape);
    let rhs = plan.with_key(plan.key.substream(1)).estimate_one(|rng| {
        let g = sample_poisson(sigma, rng);
        rule.integrate(|x| f.phi.eval(x) * f.h.eval(&add_atom_nudged(&g, *x)))
    });
    IdentityCheck::mc_vs_mc("mecke", lhs, rhs, QUADRATURE_BUDGET)
}

/// `E_{π_σ}[F e(η; ·)]` against `E_{π_{σ_η}}[F]`.
pub fn rn_check<F: Functional<Configuration>>(
    eta: &TestFunction,
    f: &F,
    sigma: &IntensityMeasure,
    plan: &McPlan,
) -> Result<IdentityCheck> {
    let density = NormalizedExp::new(eta.clone(), sigma)?;
    let perturbed = sigma.perturb(eta)?;
    let weighted = plan.with_key(plan.key.substream(0)).estimate_one(|rng| {
        let g = sample_poisson(sigma, rng);
        f.eval(&g) * density.eval(&g)
    });
    let direct = plan.with_key(plan.key.substream(1)).estimate_one(|rng| f.eval(&sample_poisson(&perturbed, rng)));
    Ok(IdentityCheck::mc_vs_mc("radon_nikodym", weighted, direct, QUADRATURE_BUDGET))
}

/// `E[⟨C_n, φ^{⊗n}⟩ ⟨C_m, ψ^{⊗m}⟩]` against `δ_{nm} n! (φ, ψ)ⁿ`.
pub fn charlier_orthogonality_mc(
    phi: &TestFunction,
    psi: &TestFunction,
    n: usize,
    m: usize,
    sigma: &IntensityMeasure,
    plan: &McPlan,
) -> Result<IdentityCheck> {
    if n.max(m) > MAX_PARTITION_N {
        return Err(Error::Size { what: "kernel order n", value: n.max(m), limit: MAX_PARTITION_N });
    }
    let (mp, mq) = (sigma.integrate(phi), sigma.integrate(psi));
    let est = plan.estimate_one(|rng| {
        let g = sample_poisson(sigma, rng);
        let a = charlier_from_symbols(&CharlierSymbols::new(&g, phi, n, mp).power_sums, &mp, n).unwrap()[n];
        let b = charlier_from_symbols(&CharlierSymbols::new(&g, psi, m, mq).power_sums, &mq, m).unwrap()[m];
        a * b
    });
    let target = if n == m {
        (1..=n).map(|k| k as f64).product::<f64>() * sigma.inner(phi, psi).powi(n as i32)
    } else {
        0.0
    };
    let budget = QUADRATURE_BUDGET * target.abs().max(1.0);
    Ok(IdentityCheck::mc_vs_value(format!("charlier_orthogonality_n{n}_m{m}"), est, target, budget))
}

/// `(∇_φ f, g)_{L²(π_σ)}` against `(f, (∇_φ)^* g)_{L²(π_σ)}`.
pub fn adjointness_check<F, G>(f: &F, g: &G, phi: &TestFunction, sigma: &IntensityMeasure, plan: &McPlan) -> IdentityCheck
where
    F: Functional<Configuration>,
    G: Functional<Configuration>,
{
    let op = CreationOperator::new(phi.clone(), sigma);
    let left = plan.with_key(plan.key.substream(0)).estimate_one(|rng| {
        let c = sample_poisson(sigma, rng);
        directional_gradient(f, phi, &c, sigma) * g.eval(&c)
    });
    let right = plan.with_key(plan.key.substream(1)).estimate_one(|rng| {
        let c = sample_poisson(sigma, rng);
        f.eval(&c) * op.apply(g, &c)
    });
    IdentityCheck::mc_vs_mc("gradient_adjointness", left, right, QUADRATURE_BUDGET)
}

/// `E[e(ψ) e(η)] = exp((ψ, η))` and, with the gradient applied,
/// `E[∇_φ e(ψ) · e(η)] = (ψ, φ) exp((ψ, η))`.
pub fn coherent_pairing_checks(
    psi: &TestFunction,
    eta: &TestFunction,
    phi: &TestFunction,
    sigma: &IntensityMeasure,
    plan: &McPlan,
) -> Result<[IdentityCheck; 2]> {
    let ep = NormalizedExp::new(psi.clone(), sigma)?;
    let ee = NormalizedExp::new(eta.clone(), sigma)?;
    let est = plan.estimate(2, |rng, out| {
        let c = sample_poisson(sigma, rng);
        let b = ee.eval(&c);
        out[0] = ep.eval(&c) * b;
        out[1] = directional_gradient(&ep, phi, &c, sigma) * b;
    });
    let pair = sigma.inner(psi, eta).exp();
    Ok([
        IdentityCheck::mc_vs_value("coherent_pairing", est[0], pair, QUADRATURE_BUDGET * pair),
        IdentityCheck::mc_vs_value(
            "coherent_pairing_gradient",
            est[1],
            sigma.inner(psi, phi) * pair,
            QUADRATURE_BUDGET * pair,
        ),
    ])
}
