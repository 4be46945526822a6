//! Finite vectors of the symmetric Fock space over `L²(σ)`.
//!
//! A level-`n` term `c · f_1 ⊗̂ … ⊗̂ f_n` is stored by its factors. Level
//! inner products are `⟨f_1⊗̂…⊗̂f_n, g_1⊗̂…⊗̂g_n⟩ = per[(f_i, g_j)] / n!`, so
//! `‖fⁿ‖² = ‖f‖²ⁿ`, and the Fock inner product weights level `n` by `n!`.
//! With this weighting coherent vectors satisfy `‖Exp ψ‖² = e^{‖ψ‖²}` and
//! `a⁺(φ)` is the adjoint of `a⁻(φ)`.

use crate::configuration::Configuration;
use crate::error::{Error, Result};
use crate::measures::{IntensityMeasure, TestFunction};

use super::{charlier_from_symbols, CharlierSymbols};

/// Highest level a [`FockVector`] may reach.
pub const MAX_FOCK_LEVEL: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct FockTerm {
    pub coeff: f64,
    pub factors: Vec<TestFunction>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FockVector {
    levels: Vec<Vec<FockTerm>>,
}

fn check_level(n: usize) -> Result<()> {
    if n > MAX_FOCK_LEVEL {
        return Err(Error::Size { what: "Fock level", value: n, limit: MAX_FOCK_LEVEL });
    }
    Ok(())
}

/// Permanent of a square matrix by dynamic programming over column subsets.
pub fn permanent(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    if n == 0 {
        return 1.0;
    }
    let mut dp = vec![0.0; 1 << n];
    dp[0] = 1.0;
    for mask in 1usize..(1 << n) {
        let row = mask.count_ones() as usize - 1;
        let mut acc = 0.0;
        let mut bits = mask;
        while bits != 0 {
            let j = bits.trailing_zeros() as usize;
            acc += dp[mask & !(1 << j)] * m[row][j];
            bits &= bits - 1;
        }
        dp[mask] = acc;
    }
    dp[(1 << n) - 1]
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `⟨f_1⊗̂…⊗̂f_n, g_1⊗̂…⊗̂g_n⟩` in `L²(σ)^{⊗̂n}`.
pub fn level_inner(f: &[TestFunction], g: &[TestFunction], sigma: &IntensityMeasure) -> f64 {
    assert_eq!(f.len(), g.len());
    let gram: Vec<Vec<f64>> = f.iter().map(|a| g.iter().map(|b| sigma.inner(a, b)).collect()).collect();
    permanent(&gram) / factorial(f.len())
}

impl FockVector {
    pub fn zero() -> Self {
        Self::default()
    }

    /// The vacuum scaled by `c`.
    pub fn scalar(c: f64) -> Self {
        Self { levels: vec![vec![FockTerm { coeff: c, factors: Vec::new() }]] }
    }

    /// `c · f_1 ⊗̂ … ⊗̂ f_n`.
    pub fn factorized(coeff: f64, factors: Vec<TestFunction>) -> Result<Self> {
        let mut v = Self::zero();
        v.push(coeff, factors)?;
        Ok(v)
    }

    pub fn push(&mut self, coeff: f64, factors: Vec<TestFunction>) -> Result<()> {
        let n = factors.len();
        check_level(n)?;
        if self.levels.len() <= n {
            self.levels.resize(n + 1, Vec::new());
        }
        self.levels[n].push(FockTerm { coeff, factors });
        Ok(())
    }

    /// Highest populated level plus one.
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, n: usize) -> &[FockTerm] {
        self.levels.get(n).map_or(&[], Vec::as_slice)
    }

    pub fn terms(&self) -> impl Iterator<Item = &FockTerm> {
        self.levels.iter().flatten()
    }

    /// The level-`n` component alone.
    pub fn project(&self, n: usize) -> Self {
        let mut levels = vec![Vec::new(); n + 1];
        levels[n] = self.level(n).to_vec();
        Self { levels }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for t in other.terms() {
            out.push(t.coeff, t.factors.clone()).expect("levels already bounded");
        }
        out
    }

    pub fn scale(&self, c: f64) -> Self {
        let levels = self
            .levels
            .iter()
            .map(|l| l.iter().map(|t| FockTerm { coeff: c * t.coeff, factors: t.factors.clone() }).collect())
            .collect();
        Self { levels }
    }

    /// `a⁻(φ)`: `f_1⊗̂…⊗̂f_n ↦ Σ_j (φ, f_j) ⊗̂_{i≠j} f_i`.
    pub fn annihilate(&self, phi: &TestFunction, sigma: &IntensityMeasure) -> Self {
        let mut out = Self::zero();
        for t in self.levels.iter().skip(1).flatten() {
            for j in 0..t.factors.len() {
                let mut rest = t.factors.clone();
                let fj = rest.remove(j);
                out.push(t.coeff * sigma.inner(phi, &fj), rest).expect("level decreases");
            }
        }
        out
    }

    /// `a⁺(φ)`: `f ↦ φ ⊗̂ f`.
    pub fn create(&self, phi: &TestFunction) -> Result<Self> {
        let mut out = Self::zero();
        for t in self.terms() {
            let mut factors = Vec::with_capacity(t.factors.len() + 1);
            factors.push(phi.clone());
            factors.extend(t.factors.iter().cloned());
            out.push(t.coeff, factors)?;
        }
        Ok(out)
    }

    /// `Σ_n n! ⟨v_n, w_n⟩`.
    pub fn inner(&self, other: &Self, sigma: &IntensityMeasure) -> f64 {
        let mut acc = 0.0;
        for n in 0..self.depth().min(other.depth()) {
            let w = factorial(n);
            for a in self.level(n) {
                for b in other.level(n) {
                    acc += a.coeff * b.coeff * w * level_inner(&a.factors, &b.factors, sigma);
                }
            }
        }
        acc
    }

    pub fn norm(&self, sigma: &IntensityMeasure) -> f64 {
        self.inner(self, sigma).max(0.0).sqrt()
    }

    /// Image under the isomorphism onto `L²(π_σ)`, evaluated at `γ`:
    /// `Σ c ⟨C_n(γ), f_1⊗̂…⊗̂f_n⟩`. Terms with distinct factors go through
    /// the polarization identity.
    pub fn image(&self, gamma: &Configuration, sigma: &IntensityMeasure) -> f64 {
        let mut acc = 0.0;
        for t in self.terms() {
            acc += t.coeff * kernel_pairing(gamma, &t.factors, sigma);
        }
        acc
    }
}

fn charlier_at(gamma: &Configuration, phi: &TestFunction, n: usize, sigma: &IntensityMeasure) -> f64 {
    let m = sigma.integrate(phi);
    charlier_from_symbols(&CharlierSymbols::new(gamma, phi, n, m).power_sums, &m, n).expect("level is bounded")[n]
}

/// `⟨C_n(γ), f_1⊗̂…⊗̂f_n⟩`.
fn kernel_pairing(gamma: &Configuration, factors: &[TestFunction], sigma: &IntensityMeasure) -> f64 {
    let n = factors.len();
    if n == 0 {
        return 1.0;
    }
    if factors.iter().all(|f| f == &factors[0]) {
        return charlier_at(gamma, &factors[0], n, sigma);
    }
    // L(f_1, …, f_n) = (2ⁿ n!)⁻¹ Σ_ε ε_1⋯ε_n L(Σ ε_i f_i, …)
    let mut acc = 0.0;
    for signs in 0u32..(1 << n) {
        let mut sum: Option<TestFunction> = None;
        let mut sign = 1.0;
        for (i, f) in factors.iter().enumerate() {
            let e = if signs >> i & 1 == 1 { -1.0 } else { 1.0 };
            sign *= e;
            let term = if e > 0.0 { f.clone() } else { f.clone().scaled(-1.0) };
            sum = Some(match sum {
                None => term,
                Some(s) => s.plus(term),
            });
        }
        acc += sign * charlier_at(gamma, &sum.unwrap(), n, sigma);
    }
    acc / (2f64.powi(n as i32) * factorial(n))
}

/// Truncated coherent vector `Σ_{n ≤ N} (1/n!) ψ^{⊗n}`.
pub fn coherent_vector(psi: &TestFunction, max_level: usize) -> Result<FockVector> {
    check_level(max_level)?;
    let mut v = FockVector::zero();
    for n in 0..=max_level {
        v.push(1.0 / factorial(n), vec![psi.clone(); n])?;
    }
    Ok(v)
}
