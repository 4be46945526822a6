//! Lévy measures ρ: finite discrete measures, and the Gamma Lévy measure
//! `1_{s>0} e^{-s}/s ds` with a hard truncation at `s = ε` for sampling.

use rand::Rng;
use serde::Serialize;

use super::special::{exp_integral_e1, factorial_f64, lower_incomplete_gamma_int, upper_incomplete_gamma_int};
use crate::error::{Error, Result};

/// A value that may be `+∞`, e.g. the total mass of an infinite ρ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Extended {
    Finite(f64),
    Diverges,
}

impl Extended {
    pub fn finite(self) -> Option<f64> {
        match self {
            Extended::Finite(v) => Some(v),
            Extended::Diverges => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Extended::Finite(_))
    }

    pub fn map(self, f: impl FnOnce(f64) -> f64) -> Extended {
        match self {
            Extended::Finite(v) => Extended::Finite(f(v)),
            Extended::Diverges => Extended::Diverges,
        }
    }
}

/// Number of nodes in the Gamma mark inverse-CDF table.
pub const GAMMA_TABLE_NODES: usize = 1024;
const GAMMA_TABLE_SMAX: f64 = 40.0;

/// Truncated Gamma Lévy measure `1_{s ≥ ε} e^{-s}/s ds`.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaLevy {
    eps: f64,
    mass: f64,
    cdf: Vec<f64>,
    log_s: Vec<f64>,
    slopes: Vec<f64>,
}

impl GammaLevy {
    pub fn new(eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::invalid(format!("Gamma truncation ε = {eps} must lie in (0, 1)")));
        }
        let mass = exp_integral_e1(eps);
        let (a, b) = (eps.ln(), GAMMA_TABLE_SMAX.ln());
        let mut cdf = Vec::with_capacity(GAMMA_TABLE_NODES);
        let mut log_s = Vec::with_capacity(GAMMA_TABLE_NODES);
        for i in 0..GAMMA_TABLE_NODES {
            let ls = a + (b - a) * i as f64 / (GAMMA_TABLE_NODES - 1) as f64;
            let f = if i == 0 { 0.0 } else { (mass - exp_integral_e1(ls.exp())) / mass };
            if cdf.last().is_none_or(|&last| f > last) {
                cdf.push(f);
                log_s.push(ls);
            }
        }
        let slopes = pchip_slopes(&cdf, &log_s);
        Ok(Self { eps, mass, cdf, log_s, slopes })
    }

    pub fn epsilon(&self) -> f64 {
        self.eps
    }

    /// `E₁(ε)`, the mass of the truncated measure.
    pub fn truncated_mass(&self) -> f64 {
        self.mass
    }

    /// Inverse of the normalised truncated CDF, by monotone cubic
    /// interpolation of `log s` against `F(s)`.
    pub fn quantile(&self, u: f64) -> f64 {
        let n = self.cdf.len();
        if u <= 0.0 {
            return self.eps;
        }
        if u >= self.cdf[n - 1] {
            return self.log_s[n - 1].exp();
        }
        let i = self.cdf.partition_point(|&c| c <= u) - 1;
        let (x0, x1) = (self.cdf[i], self.cdf[i + 1]);
        let h = x1 - x0;
        let t = (u - x0) / h;
        let (t2, t3) = (t * t, t * t * t);
        let y = (2.0 * t3 - 3.0 * t2 + 1.0) * self.log_s[i]
            + (t3 - 2.0 * t2 + t) * h * self.slopes[i]
            + (-2.0 * t3 + 3.0 * t2) * self.log_s[i + 1]
            + (t3 - t2) * h * self.slopes[i + 1];
        y.exp().max(self.eps)
    }
}

/// Fritsch–Butland slopes for a monotone cubic Hermite interpolant.
fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let d: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    let mut m = vec![0.0; n];
    m[0] = d[0];
    m[n - 1] = d[n - 2];
    for i in 1..n - 1 {
        if d[i - 1] * d[i] <= 0.0 {
            m[i] = 0.0;
        } else {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            m[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
        }
    }
    m
}

#[derive(Debug, Clone, PartialEq)]
pub enum LevyMeasure {
    /// `Σ w_i ε_{s_i}` with `s_i ≠ 0`, `w_i > 0`.
    FiniteDiscrete { atoms: Vec<(f64, f64)> },
    /// Gamma Lévy measure; infinite total mass, sampled with truncation.
    Gamma(GammaLevy),
}

/// Outcome of the moment-growth check `m_n ≤ Cⁿ n!`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticityReport {
    /// `C` fitted on the first half of the checked moments.
    pub c: f64,
    pub checked_up_to: u32,
    pub holds: bool,
}

impl LevyMeasure {
    pub fn discrete(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::invalid("a discrete Lévy measure needs at least one atom"));
        }
        for &(s, w) in &atoms {
            if s == 0.0 || !s.is_finite() {
                return Err(Error::invalid(format!("jump size {s} must be finite and nonzero")));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::invalid(format!("atom weight {w} must be positive")));
            }
        }
        Ok(LevyMeasure::FiniteDiscrete { atoms })
    }

    /// `ε₁`: compound Poisson collapses to Poisson.
    pub fn unit_jump() -> Self {
        LevyMeasure::FiniteDiscrete { atoms: vec![(1.0, 1.0)] }
    }

    /// `½(ε₋₁ + ε₁)`.
    pub fn telegraph() -> Self {
        LevyMeasure::FiniteDiscrete { atoms: vec![(-1.0, 0.5), (1.0, 0.5)] }
    }

    pub fn gamma(eps: f64) -> Result<Self> {
        Ok(LevyMeasure::Gamma(GammaLevy::new(eps)?))
    }

    /// Whether ρ(ℝ) = ∞ in the untruncated semantics.
    pub fn is_infinite(&self) -> bool {
        matches!(self, LevyMeasure::Gamma(_))
    }

    /// Mass of the measure actually sampled (`E₁(ε)` for Gamma).
    pub fn sampling_mass(&self) -> f64 {
        match self {
            LevyMeasure::FiniteDiscrete { atoms } => atoms.iter().map(|a| a.1).sum(),
            LevyMeasure::Gamma(g) => g.truncated_mass(),
        }
    }

    /// ρ(ℝ); `Diverges` for the Gamma measure.
    pub fn total_mass(&self) -> Extended {
        match self {
            LevyMeasure::FiniteDiscrete { .. } => Extended::Finite(self.sampling_mass()),
            LevyMeasure::Gamma(_) => Extended::Diverges,
        }
    }

    /// Kolmogorov characteristic `ψ_ρ(u) = ∫ (e^{su} - 1) dρ(s)` of the
    /// sampled measure. For Gamma with truncation ε this is
    /// `E₁((1-u)ε) - E₁(ε)`, defined for `u < 1`.
    pub fn kolmogorov(&self, u: f64) -> Result<f64> {
        match self {
            LevyMeasure::FiniteDiscrete { atoms } => Ok(atoms.iter().map(|&(s, w)| w * (s * u).exp_m1()).sum()),
            LevyMeasure::Gamma(g) => {
                if u >= 1.0 {
                    return Err(Error::domain(format!("Gamma Kolmogorov characteristic needs u < 1, got {u}")));
                }
                if u == 0.0 {
                    return Ok(0.0);
                }
                Ok(exp_integral_e1((1.0 - u) * g.eps) - g.truncated_mass())
            }
        }
    }

    /// `∫ |s|ⁿ dρ`. For Gamma this is the untruncated value `Γ(n) = (n-1)!`
    /// for `n ≥ 1` and `Diverges` at `n = 0`.
    pub fn moment(&self, n: u32) -> Extended {
        match self {
            LevyMeasure::FiniteDiscrete { atoms } => {
                Extended::Finite(atoms.iter().map(|&(s, w)| w * s.abs().powi(n as i32)).sum())
            }
            LevyMeasure::Gamma(_) => {
                if n == 0 {
                    Extended::Diverges
                } else {
                    Extended::Finite(factorial_f64(n - 1))
                }
            }
        }
    }

    /// `∫ sⁿ dρ` (signed).
    pub fn signed_moment(&self, n: u32) -> Extended {
        match self {
            LevyMeasure::FiniteDiscrete { atoms } => {
                Extended::Finite(atoms.iter().map(|&(s, w)| w * s.powi(n as i32)).sum())
            }
            LevyMeasure::Gamma(_) => self.moment(n),
        }
    }

    /// `∫ |s|ⁿ dρ` over the sampled (truncated) measure: `Γ(n, ε)` for Gamma.
    pub fn truncated_moment(&self, n: u32) -> f64 {
        match self {
            LevyMeasure::FiniteDiscrete { .. } => self.moment(n).finite().unwrap(),
            LevyMeasure::Gamma(g) => {
                if n == 0 {
                    g.truncated_mass()
                } else {
                    upper_incomplete_gamma_int(n, g.eps)
                }
            }
        }
    }

    /// `⟨p⟩_ρ = ∫ p(s) dρ(s)` for a polynomial mark factor. For Gamma the
    /// untruncated value is returned, `Diverges` when `p₀ ≠ 0`.
    pub fn mark_mean(&self, p: &[f64]) -> Extended {
        match self {
            LevyMeasure::FiniteDiscrete { atoms } => {
                Extended::Finite(atoms.iter().map(|&(s, w)| w * eval_poly(p, s)).sum())
            }
            LevyMeasure::Gamma(_) => {
                if p.first().is_some_and(|&c| c != 0.0) {
                    return Extended::Diverges;
                }
                Extended::Finite(p.iter().enumerate().skip(1).map(|(k, c)| c * factorial_f64(k as u32 - 1)).sum())
            }
        }
    }

    /// `⟨p⟩_ρ` over the sampled measure (Gamma restricted to `s ≥ ε`).
    pub fn truncated_mark_mean(&self, p: &[f64]) -> f64 {
        match self {
            LevyMeasure::FiniteDiscrete { .. } => self.mark_mean(p).finite().unwrap(),
            LevyMeasure::Gamma(g) => p
                .iter()
                .enumerate()
                .map(|(k, c)| {
                    if k == 0 {
                        c * g.truncated_mass()
                    } else {
                        c * upper_incomplete_gamma_int(k as u32, g.eps)
                    }
                })
                .sum(),
        }
    }

    /// Fits `C = max_{n ≤ N/2} (m_n / n!)^{1/n}` and checks `m_n ≤ Cⁿ n!`
    /// for all `1 ≤ n ≤ N`.
    pub fn analyticity(&self, up_to: u32) -> AnalyticityReport {
        let up_to = up_to.max(2);
        let ratio = |n: u32| self.moment(n).finite().unwrap() / factorial_f64(n);
        let c = (1..=up_to / 2).map(|n| ratio(n).powf(1.0 / n as f64)).fold(0.0, f64::max);
        let holds = (1..=up_to).all(|n| ratio(n) <= c.powi(n as i32) * (1.0 + 1e-12));
        AnalyticityReport { c, checked_up_to: up_to, holds }
    }

    /// Draws a mark from the normalised (sampled) measure.
    pub fn sample_mark<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            LevyMeasure::FiniteDiscrete { atoms } => {
                if atoms.len() == 1 {
                    return atoms[0].0;
                }
                let total: f64 = atoms.iter().map(|a| a.1).sum();
                let mut u = rng.random::<f64>() * total;
                for &(s, w) in atoms {
                    if u < w {
                        return s;
                    }
                    u -= w;
                }
                atoms[atoms.len() - 1].0
            }
            LevyMeasure::Gamma(g) => g.quantile(rng.random::<f64>()),
        }
    }
}

pub(crate) fn eval_poly(p: &[f64], s: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, &c| acc * s + c)
}

/// `∫_0^ε (e^{su} - 1) e^{-s}/s ds = Σ_j uʲ γ(j, ε)/j!`, the part of the
/// untruncated Gamma characteristic lost to truncation.
pub fn gamma_truncation_loss(eps: f64, u: f64) -> f64 {
    let mut sum = 0.0;
    let mut upow = 1.0;
    for j in 1..60u32 {
        upow *= u;
        let term = upow * lower_incomplete_gamma_int(j, eps) / factorial_f64(j);
        sum += term;
        if term.abs() < 1e-18 {
            break;
        }
    }
    sum
}
