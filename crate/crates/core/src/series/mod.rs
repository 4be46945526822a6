//! Truncated formal power series over `f64` or exact rationals, and
//! set-partition combinatorics.

pub mod partitions;

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
pub use partitions::{
    bell_number, count_of_type, enumerate_set_partitions, faa_di_bruno_exp, partition_types, PartitionType,
    SetPartition, MAX_PARTITION_N,
};

/// Coefficient ring for [`TruncatedSeries`].
pub trait Scalar:
    Clone
    + PartialEq
    + Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_int(v: i64) -> Self;

    /// `e^c`, if representable.
    fn exp_const(&self) -> Result<Self>;

    /// `log c`, if representable.
    fn ln_const(&self) -> Result<Self>;
}

impl Scalar for f64 {
    fn from_int(v: i64) -> Self {
        v as f64
    }

    fn exp_const(&self) -> Result<Self> {
        Ok(self.exp())
    }

    fn ln_const(&self) -> Result<Self> {
        if *self > 0.0 {
            Ok(self.ln())
        } else {
            Err(Error::domain(format!("series log needs a positive constant term, got {self}")))
        }
    }
}

impl Scalar for BigRational {
    fn from_int(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn exp_const(&self) -> Result<Self> {
        if self.is_zero() {
            Ok(Self::one())
        } else {
            Err(Error::domain("exact series exp needs a zero constant term"))
        }
    }

    fn ln_const(&self) -> Result<Self> {
        if self.is_one() {
            Ok(Self::zero())
        } else {
            Err(Error::domain("exact series log needs constant term 1"))
        }
    }
}

/// `c_0 + c_1 t + … + c_N t^N`, with arithmetic truncated at order `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSeries<S> {
    coeffs: Vec<S>,
}

impl<S: Scalar> TruncatedSeries<S> {
    /// Pads or truncates `coeffs` to order `n`.
    pub fn new(mut coeffs: Vec<S>, order: usize) -> Self {
        coeffs.resize(order + 1, S::zero());
        Self { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        Self::new(Vec::new(), order)
    }

    pub fn one(order: usize) -> Self {
        Self::new(vec![S::one()], order)
    }

    /// `c · t^k`.
    pub fn monomial(c: S, k: usize, order: usize) -> Self {
        let mut s = Self::zero(order);
        if k <= order {
            s.coeffs[k] = c;
        }
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> &S {
        &self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<S> {
        self.coeffs
    }

    fn check_order(&self, other: &Self) {
        assert_eq!(self.order(), other.order(), "series orders differ");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_order(other);
        Self { coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.clone() + b.clone()).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.check_order(other);
        Self { coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.clone() - b.clone()).collect() }
    }

    pub fn scale(&self, c: &S) -> Self {
        Self { coeffs: self.coeffs.iter().map(|a| a.clone() * c.clone()).collect() }
    }

    /// Cauchy product truncated at `N`.
    pub fn mul(&self, other: &Self) -> Self {
        self.check_order(other);
        let n = self.order();
        let mut out = vec![S::zero(); n + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs[..=n - i].iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Self { coeffs: out }
    }

    /// `exp f` via `g_n = (1/n) Σ_{k=1}^n k f_k g_{n-k}`.
    pub fn exp(&self) -> Result<Self> {
        let n = self.order();
        let mut g = Vec::with_capacity(n + 1);
        g.push(self.coeffs[0].exp_const()?);
        for m in 1..=n {
            let mut acc = S::zero();
            for k in 1..=m {
                acc = acc + S::from_int(k as i64) * self.coeffs[k].clone() * g[m - k].clone();
            }
            g.push(acc / S::from_int(m as i64));
        }
        Ok(Self { coeffs: g })
    }

    /// `log f` via `h_n = (f_n - (1/n) Σ_{k=1}^{n-1} k h_k f_{n-k}) / f_0`.
    pub fn log(&self) -> Result<Self> {
        let n = self.order();
        let f0 = self.coeffs[0].clone();
        let mut h = Vec::with_capacity(n + 1);
        h.push(f0.ln_const()?);
        for m in 1..=n {
            let mut acc = S::zero();
            for k in 1..m {
                acc = acc + S::from_int(k as i64) * h[k].clone() * self.coeffs[m - k].clone();
            }
            h.push((self.coeffs[m].clone() - acc / S::from_int(m as i64)) / f0.clone());
        }
        Ok(Self { coeffs: h })
    }

    /// `n! · c_n`, the n-th derivative at 0.
    pub fn derivative_at_zero(&self, n: usize) -> S {
        let mut f = S::one();
        for k in 2..=n {
            f = f * S::from_int(k as i64);
        }
        f * self.coeffs[n].clone()
    }
}

/// `p / q` as an exact rational.
pub fn rational(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    type Q = BigRational;

    #[test]
    fn exp_of_t() {
        let t = TruncatedSeries::<Q>::monomial(Q::one(), 1, 8);
        let g = t.exp().unwrap();
        let mut fact = 1i64;
        for n in 0..=8 {
            if n > 0 {
                fact *= n as i64;
            }
            assert_eq!(g.coeff(n), &rational(1, fact));
        }
        assert_eq!(TruncatedSeries::<Q>::zero(5).exp().unwrap(), TruncatedSeries::one(5));
    }

    #[test]
    fn log_one_plus_t() {
        let f = TruncatedSeries::<Q>::new(vec![Q::one(), Q::one()], 7);
        let l = f.log().unwrap();
        for k in 1..=7 {
            let sign = if k % 2 == 1 { 1 } else { -1 };
            assert_eq!(l.coeff(k), &rational(sign, k as i64));
        }
        assert!(TruncatedSeries::<Q>::new(vec![rational(2, 1)], 3).log().is_err());
        assert!(TruncatedSeries::<f64>::new(vec![-1.0], 3).log().is_err());
        assert!(TruncatedSeries::<Q>::new(vec![Q::one()], 3).exp().is_err());
    }

    #[test]
    fn telescoping_product() {
        for n in 0..10 {
            let a = TruncatedSeries::<Q>::new(vec![Q::one(), -Q::one()], n);
            let b = TruncatedSeries::<Q>::new(vec![Q::one(); n + 1], n);
            assert_eq!(a.mul(&b), TruncatedSeries::one(n));
            assert_eq!(b.mul(&TruncatedSeries::one(n)), b);
        }
    }

    #[test]
    fn float_exp_constant_term() {
        let f = TruncatedSeries::new(vec![0.5, 1.0], 4);
        let g = f.exp().unwrap();
        let e = 0.5f64.exp();
        assert!((g.coeff(3) - e / 6.0).abs() < 1e-15);
    }

    fn arb_series() -> impl Strategy<Value = TruncatedSeries<Q>> {
        prop::collection::vec((-20i64..20, 1i64..12), 6).prop_map(|v| {
            let mut c: Vec<Q> = v.into_iter().map(|(p, q)| rational(p, q)).collect();
            c[0] = Q::zero();
            TruncatedSeries::new(c, 5)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn exp_log_inverse(f in arb_series()) {
            let g = f.exp().unwrap();
            prop_assert_eq!(g.log().unwrap(), f.clone());
        }

        #[test]
        fn exp_is_homomorphism(f in arb_series(), g in arb_series()) {
            prop_assert_eq!(f.add(&g).exp().unwrap(), f.exp().unwrap().mul(&g.exp().unwrap()));
        }

        #[test]
        fn ring_laws(f in arb_series(), g in arb_series(), h in arb_series()) {
            prop_assert_eq!(f.mul(&g), g.mul(&f));
            prop_assert_eq!(f.mul(&g.add(&h)), f.mul(&g).add(&f.mul(&h)));
            prop_assert_eq!(f.mul(&g).mul(&h), f.mul(&g.mul(&h)));
            prop_assert_eq!(f.add(&g).sub(&g), f.clone());
            prop_assert_eq!(f.scale(&rational(3, 2)).scale(&rational(2, 3)), f);
        }
    }
}
