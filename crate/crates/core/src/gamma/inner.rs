//! The partition-weighted inner product on the n-th Gamma chaos, by three
//! routes: a sum over partition types, a sum over set partitions with block
//! contractions, and the Taylor coefficient of `exp(-⟨log(1 - tφψ)⟩_σ)`.
//!
//! All three are generic over [`BlockIntegral`], so the same code runs in
//! floating point against an [`IntensityMeasure`] and exactly over the
//! rationals against an [`ExactPolynomialMeasure`].

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::mc::{map_indexed, Execution};
use crate::measures::{IntensityMeasure, TestFunction};
use crate::series::{enumerate_set_partitions, partition_types, Scalar, TruncatedSeries, MAX_PARTITION_N};

/// Largest level accepted by the set-partition route (Bell(8) = 4140 terms).
pub const MAX_PARTITION_PATH_N: usize = 8;

/// `∫ ∏ f_j dσ` in some coefficient ring.
pub trait BlockIntegral: Sync {
    type Value: Scalar + Send + Sync;

    /// Embeds a real coefficient.
    fn coefficient(&self, c: f64) -> Result<Self::Value>;

    fn block(&self, factors: &[&TestFunction]) -> Result<Self::Value>;
}

impl BlockIntegral for IntensityMeasure {
    type Value = f64;

    fn coefficient(&self, c: f64) -> Result<f64> {
        Ok(c)
    }

    fn block(&self, factors: &[&TestFunction]) -> Result<f64> {
        Ok(self.integrate_with(factors, |x| factors.iter().map(|f| f.eval(x)).product()))
    }
}

fn exact(c: f64) -> Result<BigRational> {
    BigRational::from_float(c).ok_or_else(|| Error::invalid(format!("{c} has no exact rational value")))
}

fn poly_mul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Exact coefficients of a test function built from first-axis polynomials
/// by sums, products, scalings and powers.
pub fn rational_poly(f: &TestFunction) -> Result<Vec<BigRational>> {
    match f {
        TestFunction::Polynomial { axis, coeffs } => {
            if *axis != 0 && coeffs.len() > 1 {
                return Err(Error::invalid("exact integration is one-dimensional"));
            }
            coeffs.iter().map(|&c| exact(c)).collect()
        }
        TestFunction::Sum(a, b) => {
            let (a, b) = (rational_poly(a)?, rational_poly(b)?);
            let mut out = vec![BigRational::zero(); a.len().max(b.len())];
            for (i, c) in a.into_iter().enumerate() {
                out[i] += c;
            }
            for (i, c) in b.into_iter().enumerate() {
                out[i] += c;
            }
            Ok(out)
        }
        TestFunction::Product(a, b) => Ok(poly_mul(&rational_poly(a)?, &rational_poly(b)?)),
        TestFunction::Scale(c, a) => {
            let c = exact(*c)?;
            Ok(rational_poly(a)?.into_iter().map(|x| x * &c).collect())
        }
        TestFunction::Power(a, k) => {
            let base = rational_poly(a)?;
            let mut out = vec![BigRational::one()];
            for _ in 0..*k {
                out = poly_mul(&out, &base);
            }
            Ok(out)
        }
        other => Err(Error::invalid(format!("exact integration needs a polynomial, got {other}"))),
    }
}

/// A one-dimensional intensity with polynomial density, integrated exactly
/// against polynomial test functions.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactPolynomialMeasure {
    lo: BigRational,
    hi: BigRational,
    density: Vec<BigRational>,
}

impl ExactPolynomialMeasure {
    pub fn new(sigma: &IntensityMeasure) -> Result<Self> {
        let w = sigma.window();
        if w.dim != 1 {
            return Err(Error::invalid("exact integration is one-dimensional"));
        }
        Ok(Self { lo: exact(w.lo[0])?, hi: exact(w.hi[0])?, density: rational_poly(sigma.density())? })
    }

    /// `∫_lo^hi p(x) density(x) dx`.
    pub fn integrate_poly(&self, p: &[BigRational]) -> BigRational {
        let q = poly_mul(p, &self.density);
        let mut total = BigRational::zero();
        let mut hi_pow = self.hi.clone();
        let mut lo_pow = self.lo.clone();
        for (k, c) in q.iter().enumerate() {
            total += c * (&hi_pow - &lo_pow) / BigRational::from_integer(BigInt::from(k + 1));
            hi_pow *= &self.hi;
            lo_pow *= &self.lo;
        }
        total
    }
}

impl BlockIntegral for ExactPolynomialMeasure {
    type Value = BigRational;

    fn coefficient(&self, c: f64) -> Result<BigRational> {
        exact(c)
    }

    fn block(&self, factors: &[&TestFunction]) -> Result<BigRational> {
        let mut p = vec![BigRational::one()];
        for f in factors {
            p = poly_mul(&p, &rational_poly(f)?);
        }
        Ok(self.integrate_poly(&p))
    }
}

/// A level-n kernel `Σ_r c_r f_{r,1} ⊗ … ⊗ f_{r,n}`, symmetrized implicitly.
#[derive(Debug, Clone, PartialEq)]
pub struct RankDecomposedKernel {
    level: usize,
    terms: Vec<(f64, Vec<TestFunction>)>,
}

impl RankDecomposedKernel {
    pub fn new(level: usize, terms: Vec<(f64, Vec<TestFunction>)>) -> Result<Self> {
        if let Some((_, f)) = terms.iter().find(|(_, f)| f.len() != level) {
            return Err(Error::invalid(format!("term with {} factors in a level-{level} kernel", f.len())));
        }
        Ok(Self { level, terms })
    }

    /// `φ^{⊗n}`.
    pub fn rank_one(phi: TestFunction, n: usize) -> Self {
        Self { level: n, terms: vec![(1.0, vec![phi; n])] }
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn terms(&self) -> &[(f64, Vec<TestFunction>)] {
        &self.terms
    }
}

fn check_level(n: usize, limit: usize) -> Result<()> {
    if n > limit {
        return Err(Error::Size { what: "chaos level n", value: n, limit });
    }
    Ok(())
}

fn factorial_u64(n: usize) -> u64 {
    (1..=n as u64).product()
}

fn pow<S: Scalar>(x: &S, k: u32) -> S {
    let mut out = S::one();
    for _ in 0..k {
        out = out * x.clone();
    }
    out
}

/// `Σ_types n! / ∏(i_k! k^{i_k}) ∏_k (∫ φᵏ ψᵏ dσ)^{i_k}`.
pub fn gamma_inner_factorized<B: BlockIntegral>(
    phi: &TestFunction,
    psi: &TestFunction,
    n: usize,
    blocks: &B,
) -> Result<B::Value> {
    check_level(n, MAX_PARTITION_N)?;
    let mut a = Vec::with_capacity(n);
    for k in 1..=n {
        let mut factors = vec![phi; k];
        factors.extend(std::iter::repeat_n(psi, k));
        a.push(blocks.block(&factors)?);
    }
    let nf = factorial_u64(n);
    let mut total = B::Value::zero();
    for t in partition_types(n)? {
        let mut denom = 1u64;
        let mut term = B::Value::one();
        for (idx, &i) in t.multiplicities().iter().enumerate() {
            let k = idx as u64 + 1;
            denom *= factorial_u64(i as usize) * k.pow(i);
            term = term * pow(&a[idx], i);
        }
        total = total + B::Value::from_int((nf / denom) as i64) * term;
    }
    Ok(total)
}

/// `n! [tⁿ] exp(Σ_k tᵏ ⟨(φψ)ᵏ⟩_σ / k)`.
pub fn gamma_inner_oracle<B: BlockIntegral>(
    phi: &TestFunction,
    psi: &TestFunction,
    n: usize,
    blocks: &B,
) -> Result<B::Value> {
    check_level(n, MAX_PARTITION_N)?;
    let prod = phi.clone().times(psi.clone());
    let mut g = vec![B::Value::zero(); n + 1];
    for k in 1..=n {
        g[k] = blocks.block(&vec![&prod; k])? / B::Value::from_int(k as i64);
    }
    Ok(TruncatedSeries::new(g, n).exp()?.derivative_at_zero(n))
}

/// Distinct orderings of `ids`, each with the number of permutations that
/// produce it.
fn distinct_arrangements(ids: &[usize]) -> Vec<(Vec<usize>, u64)> {
    let mut cur = ids.to_vec();
    cur.sort_unstable();
    let mut mult = std::collections::BTreeMap::new();
    for &i in ids {
        *mult.entry(i).or_insert(0usize) += 1;
    }
    let weight: u64 = mult.values().map(|&m| factorial_u64(m)).product();
    let mut out = vec![(cur.clone(), weight)];
    loop {
        // next lexicographic permutation
        let Some(i) = (1..cur.len()).rev().find(|&i| cur[i - 1] < cur[i]) else {
            break;
        };
        let j = (i..cur.len()).rev().find(|&j| cur[j] > cur[i - 1]).expect("pivot");
        cur.swap(i - 1, j);
        cur[i..].reverse();
        out.push((cur.clone(), weight));
    }
    out
}

fn factor_ids(fs: &[TestFunction]) -> Vec<usize> {
    let mut ids = Vec::with_capacity(fs.len());
    for (i, f) in fs.iter().enumerate() {
        let id = fs[..i].iter().position(|g| g == f).map(|j| ids[j]).unwrap_or(i);
        ids.push(id);
    }
    ids
}

/// `Σ_{set partitions P} ∏_{B ∈ P} (|B| - 1)! ∫ ∏_{j ∈ B} f_j g_j dσ`,
/// bilinear over rank terms, with the right-hand kernel symmetrized.
pub fn gamma_inner_partition<B: BlockIntegral>(
    f: &RankDecomposedKernel,
    g: &RankDecomposedKernel,
    blocks: &B,
) -> Result<B::Value> {
    if f.level != g.level {
        return Err(Error::invalid(format!("kernel levels differ: {} and {}", f.level, g.level)));
    }
    let n = f.level;
    check_level(n, MAX_PARTITION_PATH_N)?;
    let partitions = enumerate_set_partitions(n)?;
    let shapes: Vec<(i64, Vec<usize>)> = partitions
        .iter()
        .map(|p| {
            let weight = p.blocks().iter().map(|b| factorial_u64(b.len() - 1) as i64).product();
            let masks = p.blocks().iter().map(|b| b.iter().map(|&j| 1usize << j).sum()).collect();
            (weight, masks)
        })
        .collect();
    let nf = B::Value::from_int(factorial_u64(n) as i64);
    let exec = Execution::default();
    let mut total = B::Value::zero();
    for (c, fs) in &f.terms {
        for (d, gs) in &g.terms {
            let coef = blocks.coefficient(*c)? * blocks.coefficient(*d)?;
            for (order, count) in distinct_arrangements(&factor_ids(gs)) {
                let table: Vec<B::Value> = map_indexed(exec, 1 << n, |mask| {
                    let mut factors: Vec<&TestFunction> = Vec::with_capacity(2 * n);
                    for j in (0..n).filter(|j| mask >> j & 1 == 1) {
                        factors.push(&fs[j]);
                        factors.push(&gs[order[j]]);
                    }
                    blocks.block(&factors)
                })
                .into_iter()
                .collect::<Result<_>>()?;
                let terms = map_indexed(exec, shapes.len(), |i| {
                    let (w, masks) = &shapes[i];
                    masks.iter().fold(B::Value::from_int(*w), |acc, &m| acc * table[m].clone())
                });
                let sum = terms.into_iter().fold(B::Value::zero(), |acc, t| acc + t);
                total = total + coef.clone() * B::Value::from_int(count as i64) * sum / nf.clone();
            }
        }
    }
    Ok(total)
}
