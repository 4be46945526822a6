//! Closed-form Laplace transforms `E[exp⟨·, φ⟩]` of the three noises.

use super::{IntensityMeasure, LevyMeasure, TestFunction};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LaplaceKind {
    /// `exp ∫ (e^φ - 1) dσ`.
    Poisson,
    /// `exp ∫ ψ_ρ(φ(x)) dσ(x)` with ρ as sampled (truncated for Gamma).
    Compound,
    /// `exp(-⟨log(1-φ)⟩_σ)`, the untruncated Gamma noise; needs `sup φ < 1`.
    Gamma,
}

/// Evaluates the Laplace transform of the chosen noise at `φ`.
///
/// `rho` is required for [`LaplaceKind::Compound`] and ignored otherwise.
pub fn laplace(kind: LaplaceKind, phi: &TestFunction, sigma: &IntensityMeasure, rho: Option<&LevyMeasure>) -> Result<f64> {
    match kind {
        LaplaceKind::Poisson => Ok(sigma.integrate_with(&[phi], |p| phi.eval(p).exp_m1()).exp()),
        LaplaceKind::Compound => {
            let rho = rho.ok_or_else(|| Error::invalid("compound Laplace transform needs a Lévy measure"))?;
            if let LevyMeasure::Gamma(_) = rho {
                check_below_one(phi, sigma)?;
            }
            let rule = sigma.rule(&[phi]);
            let mut acc = 0.0;
            for (p, &w) in rule.points.iter().zip(&rule.weights) {
                acc += w * rho.kolmogorov(phi.eval(p))?;
            }
            Ok(acc.exp())
        }
        LaplaceKind::Gamma => {
            check_below_one(phi, sigma)?;
            Ok((-sigma.integrate_with(&[phi], |p| (-phi.eval(p)).ln_1p())).exp())
        }
    }
}

fn check_below_one(phi: &TestFunction, sigma: &IntensityMeasure) -> Result<()> {
    let sup = phi.range(sigma.window()).hi;
    if sup >= 1.0 {
        return Err(Error::domain(format!("Gamma Laplace transform needs sup φ < 1, got an upper bound of {sup}")));
    }
    Ok(())
}
