//! Set partitions of `{0, …, n-1}`, their types, and Faà di Bruno's formula.
//!
//! Partitions are enumerated as restricted-growth strings `a` (with
//! `a[0] = 0` and `a[i] ≤ 1 + max a[..i]`) in lexicographic order; block `b`
//! holds the indices `i` with `a[i] = b`.

use serde::Serialize;

use super::Scalar;
use crate::error::{Error, Result};

/// Largest `n` accepted by the exhaustive routines (`Bell(10) = 115975`).
pub const MAX_PARTITION_N: usize = 10;

fn check_n(n: usize) -> Result<()> {
    if n > MAX_PARTITION_N {
        return Err(Error::Size { what: "partition size n", value: n, limit: MAX_PARTITION_N });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SetPartition {
    n: usize,
    blocks: Vec<Vec<usize>>,
}

impl SetPartition {
    /// Builds the partition encoded by a restricted-growth string.
    pub fn from_rgs(rgs: &[usize]) -> Self {
        let nb = rgs.iter().max().map_or(0, |m| m + 1);
        let mut blocks = vec![Vec::new(); nb];
        for (i, &b) in rgs.iter().enumerate() {
            blocks[b].push(i);
        }
        Self { n: rgs.len(), blocks }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Blocks ordered by their smallest element, each sorted.
    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn partition_type(&self) -> PartitionType {
        let mut mult = vec![0u32; self.n];
        for b in &self.blocks {
            mult[b.len() - 1] += 1;
        }
        PartitionType { mult }
    }
}

/// All set partitions of `{0, …, n-1}` in restricted-growth lexicographic
/// order. `n = 0` yields the single empty partition.
pub fn enumerate_set_partitions(n: usize) -> Result<Vec<SetPartition>> {
    check_n(n)?;
    fn rec(rgs: &mut Vec<usize>, n: usize, max: usize, out: &mut Vec<SetPartition>) {
        if rgs.len() == n {
            out.push(SetPartition::from_rgs(rgs));
            return;
        }
        let top = if rgs.is_empty() { 0 } else { max + 1 };
        for v in 0..=top {
            rgs.push(v);
            rec(rgs, n, max.max(v), out);
            rgs.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(n), n, 0, &mut out);
    Ok(out)
}

/// Block-size multiplicities: `mult[k-1] = i_k`, the number of blocks of
/// size `k`, with `Σ k i_k = n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct PartitionType {
    mult: Vec<u32>,
}

impl PartitionType {
    /// `mult[k-1] = i_k`; `n` is inferred as `Σ k i_k`.
    pub fn new(mult: Vec<u32>) -> Self {
        let n: usize = mult.iter().enumerate().map(|(k, &i)| (k + 1) * i as usize).sum();
        let mut mult = mult;
        mult.resize(n, 0);
        Self { mult }
    }

    pub fn n(&self) -> usize {
        self.mult.len()
    }

    /// `i_k` for `k ≥ 1`.
    pub fn i(&self, k: usize) -> u32 {
        self.mult.get(k - 1).copied().unwrap_or(0)
    }

    pub fn multiplicities(&self) -> &[u32] {
        &self.mult
    }

    pub fn block_count(&self) -> u32 {
        self.mult.iter().sum()
    }
}

/// All partition types of `n`, i.e. the integer partitions of `n`, with the
/// single-block type last.
pub fn partition_types(n: usize) -> Result<Vec<PartitionType>> {
    check_n(n)?;
    fn rec(rem: usize, max_part: usize, mult: &mut Vec<u32>, out: &mut Vec<PartitionType>) {
        if rem == 0 {
            out.push(PartitionType { mult: mult.clone() });
            return;
        }
        for k in 1..=max_part.min(rem) {
            mult[k - 1] += 1;
            rec(rem - k, k, mult, out);
            mult[k - 1] -= 1;
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut vec![0; n], &mut out);
    Ok(out)
}

fn factorial_u128(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// Number of set partitions of `{0, …, n-1}` with the given type,
/// `n! / ∏_k ((k!)^{i_k} i_k!)`.
pub fn count_of_type(t: &PartitionType) -> u64 {
    let mut denom: u128 = 1;
    for (k, &i) in t.mult.iter().enumerate() {
        denom *= factorial_u128(k + 1).pow(i) * factorial_u128(i as usize);
    }
    (factorial_u128(t.n()) / denom) as u64
}

/// Bell numbers by the Bell triangle.
pub fn bell_number(n: usize) -> u64 {
    let mut row = vec![1u64];
    for _ in 0..n {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(*row.last().unwrap());
        for &r in &row {
            let v = next.last().unwrap() + r;
            next.push(v);
        }
        row = next;
    }
    row[0]
}

/// `dⁿ/dtⁿ e^{f(t)}` from `derivs = [f'(t), …, f⁽ⁿ⁾(t)]` and `exp_f = e^{f(t)}`:
/// `Σ_types n!/∏ i_k! · ∏ (f⁽ᵏ⁾/k!)^{i_k} · e^{f}`.
pub fn faa_di_bruno_exp<S: Scalar>(derivs: &[S], exp_f: &S) -> Result<S> {
    let n = derivs.len();
    let fact = |m: usize| (1..=m).fold(S::one(), |a, k| a * S::from_int(k as i64));
    let mut total = S::zero();
    for t in partition_types(n)? {
        let mut term = fact(n);
        for (k, &i) in t.mult.iter().enumerate() {
            if i == 0 {
                continue;
            }
            term = term / fact(i as usize);
            let base = derivs[k].clone() / fact(k + 1);
            for _ in 0..i {
                term = term * base.clone();
            }
        }
        total = total + term;
    }
    Ok(total * exp_f.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{rational, TruncatedSeries};
    use num_rational::BigRational;
    use num_traits::One;
    use std::collections::HashMap;

    #[test]
    fn bell_counts() {
        for (n, want) in [(1usize, 1u64), (3, 5), (4, 15)] {
            assert_eq!(enumerate_set_partitions(n).unwrap().len() as u64, want);
        }
        assert_eq!(bell_number(10), 115_975);
        for n in 0..=MAX_PARTITION_N {
            let parts = enumerate_set_partitions(n).unwrap();
            assert_eq!(parts.len() as u64, bell_number(n));
            let by_types: u64 = partition_types(n).unwrap().iter().map(count_of_type).sum();
            assert_eq!(by_types, bell_number(n));
        }
        assert!(matches!(enumerate_set_partitions(11), Err(Error::Size { .. })));
    }

    #[test]
    fn partitions_are_valid_and_distinct() {
        for n in 1..=7 {
            let parts = enumerate_set_partitions(n).unwrap();
            let mut seen = std::collections::HashSet::new();
            for p in &parts {
                let mut all: Vec<usize> = p.blocks().iter().flatten().copied().collect();
                all.sort();
                assert_eq!(all, (0..n).collect::<Vec<_>>());
                assert!(p.blocks().iter().all(|b| !b.is_empty()));
                assert!(seen.insert(p.blocks().to_vec()));
            }
        }
    }

    #[test]
    fn enumeration_order_is_rgs_lexicographic() {
        let parts = enumerate_set_partitions(3).unwrap();
        let blocks: Vec<_> = parts.iter().map(|p| p.blocks().to_vec()).collect();
        assert_eq!(
            blocks,
            vec![
                vec![vec![0, 1, 2]],
                vec![vec![0, 1], vec![2]],
                vec![vec![0, 2], vec![1]],
                vec![vec![0], vec![1, 2]],
                vec![vec![0], vec![1], vec![2]],
            ]
        );
    }

    #[test]
    fn type_counts_match_enumeration() {
        assert_eq!(count_of_type(&PartitionType::new(vec![1, 1])), 3);
        assert_eq!(count_of_type(&PartitionType::new(vec![0, 0, 1])), 1);
        assert_eq!(count_of_type(&PartitionType::new(vec![2])), 1);
        for n in 1..=8 {
            let mut hist: HashMap<PartitionType, u64> = HashMap::new();
            for p in enumerate_set_partitions(n).unwrap() {
                *hist.entry(p.partition_type()).or_default() += 1;
            }
            for t in partition_types(n).unwrap() {
                assert_eq!(hist[&t], count_of_type(&t), "type {t:?}");
            }
        }
    }

    #[test]
    fn coefficient_identity() {
        let fact = |m: usize| (1..=m as i64).fold(BigRational::one(), |a, k| a * rational(k, 1));
        for n in 1..=MAX_PARTITION_N {
            for t in partition_types(n).unwrap() {
                let mut lhs = fact(n);
                let mut cnt = fact(n);
                let mut rhs = BigRational::one();
                for k in 1..=n {
                    let i = t.i(k) as usize;
                    for _ in 0..i {
                        lhs = lhs / rational(k as i64, 1);
                        cnt = cnt / fact(k);
                        rhs = rhs * fact(k - 1);
                    }
                    lhs = lhs / fact(i);
                    cnt = cnt / fact(i);
                }
                assert_eq!(cnt, rational(count_of_type(&t) as i64, 1));
                assert_eq!(lhs / cnt, rhs, "type {t:?}");
            }
        }
    }

    #[test]
    fn faa_di_bruno_small() {
        let e = 1.7f64;
        assert!((faa_di_bruno_exp(&[0.3], &e).unwrap() - 0.3 * e).abs() < 1e-15);
        let v = faa_di_bruno_exp(&[0.3, -0.8], &e).unwrap();
        assert!((v - (0.09 - 0.8) * e).abs() < 1e-15);
        assert_eq!(faa_di_bruno_exp::<f64>(&[], &e).unwrap(), e);
    }

    #[test]
    fn faa_di_bruno_matches_series_exp() {
        let coeffs: Vec<BigRational> =
            [0i64, 2, -3, 1, 5, -7, 4, 1, -2].iter().enumerate().map(|(k, &p)| rational(p, (k as i64) + 1)).collect();
        for n in 1..=8 {
            let f = TruncatedSeries::new(coeffs[..=n].to_vec(), n);
            let via_series = f.exp().unwrap().derivative_at_zero(n);
            let derivs: Vec<BigRational> = (1..=n).map(|k| f.derivative_at_zero(k)).collect();
            let via_fdb = faa_di_bruno_exp(&derivs, &BigRational::one()).unwrap();
            assert_eq!(via_series, via_fdb, "n = {n}");
        }
    }

    #[test]
    fn json_dump() {
        let p = &enumerate_set_partitions(3).unwrap()[2];
        assert_eq!(serde_json::to_string(p).unwrap(), r#"{"n":3,"blocks":[[0,2],[1]]}"#);
    }
}
