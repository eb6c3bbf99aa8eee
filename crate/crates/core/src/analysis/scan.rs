use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{point_pow, ProblemInstance};
use crate::arith::PrimeSet;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
pub enum ScanError {
    #[error("value at n = {n} is not an S-integer; extend S first")]
    NotSIntegral { n: u64 },
    #[error("factorization failed at n = {n}, cofactor {cofactor}")]
    Factorization { n: u64, cofactor: String },
}

fn values_at(inst: &ProblemInstance, n: u64) -> (BigRational, BigRational) {
    let e = n as i64;
    let a = inst.f1.evaluate(&point_pow(&inst.g1, e)).expect("dimensions validated");
    let b = inst.f2.evaluate(&point_pow(&inst.g2, e)).expect("dimensions validated");
    (a, b)
}

/// Numerator of `q` with `S` removed, or `None` if `q` is not an S-integer.
fn s_free_part(q: &BigRational, s: &PrimeSet) -> Option<BigUint> {
    if !s.strip(q.denom().magnitude()).is_one() {
        return None;
    }
    Some(s.strip(q.numer().magnitude()))
}

/// Whether `F1(g1ⁿ)` divides `F2(g2ⁿ)` in `O_S`. A zero right side is
/// divisible by anything; a zero left side divides only zero.
pub fn ideal_inclusion_at(inst: &ProblemInstance, n: u64) -> Result<bool, ScanError> {
    let (a, b) = values_at(inst, n);
    if b.is_zero() {
        return Ok(true);
    }
    if a.is_zero() {
        return Ok(false);
    }
    if s_free_part(&a, &inst.s).is_none() || s_free_part(&b, &inst.s).is_none() {
        return Err(ScanError::NotSIntegral { n });
    }
    Ok(inst.s.strip((b / a).denom().magnitude()).is_one())
}

/// `rad(a) | b`, by dividing out common factors until none remain.
pub(crate) fn radical_divides(a: &BigUint, b: &BigUint) -> bool {
    let mut a = a.clone();
    loop {
        if a.is_one() {
            return true;
        }
        let g = a.gcd(b);
        if g.is_one() {
            return false;
        }
        while (&a % &g).is_zero() {
            a /= &g;
        }
    }
}

/// Whether every prime outside `S` dividing `F1(g1ⁿ)` also divides `F2(g2ⁿ)`.
pub fn support_inclusion_at(inst: &ProblemInstance, n: u64) -> Result<bool, ScanError> {
    let (a, b) = values_at(inst, n);
    if b.is_zero() {
        return Ok(true);
    }
    if a.is_zero() {
        return Ok(false);
    }
    let (Some(a), Some(b)) = (s_free_part(&a, &inst.s), s_free_part(&b, &inst.s)) else {
        return Err(ScanError::NotSIntegral { n });
    };
    Ok(radical_divides(&a, &b))
}

fn scan(inst: &ProblemInstance, n_max: u64, at: fn(&ProblemInstance, u64) -> Result<bool, ScanError>) -> Result<Vec<u64>, ScanError> {
    let flags: Vec<Result<bool, ScanError>> = (1..=n_max).into_par_iter().map(|n| at(inst, n)).collect();
    let mut hits = Vec::new();
    for (n, f) in (1..=n_max).zip(flags) {
        if f? {
            hits.push(n);
        }
    }
    Ok(hits)
}

/// All `n ∈ [1, n_max]` with `F1(g1ⁿ) | F2(g2ⁿ)` in `O_S`, ascending.
pub fn scan_ideal_inclusion(inst: &ProblemInstance, n_max: u64) -> Result<Vec<u64>, ScanError> {
    scan(inst, n_max, ideal_inclusion_at)
}

/// All `n ∈ [1, n_max]` with `Supp F1(g1ⁿ) ⊆ Supp F2(g2ⁿ)` outside `S`, ascending.
pub fn scan_support_inclusion(inst: &ProblemInstance, n_max: u64) -> Result<Vec<u64>, ScanError> {
    scan(inst, n_max, support_inclusion_at)
}

/// Fraction of hits among `n ∈ [1, n_max]` with `n ≡ r (mod k)`, for each `r`.
pub fn residue_evidence(hits: &[u64], n_max: u64, k: u64) -> Vec<f64> {
    (0..k)
        .map(|r| {
            let total = (1..=n_max).filter(|n| n % k == r).count();
            if total == 0 {
                return 0.0;
            }
            let got = hits.iter().filter(|&&n| n <= n_max && n % k == r).count();
            got as f64 / total as f64
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn inst(s: &[u64], g1: &[&str], g2: &[&str], f1: &str, f2: &str) -> ProblemInstance {
        ProblemInstance::from_strs(s, g1, g2, f1, f2).unwrap()
    }

    // independent oracle: plain integer divisibility of x^n − 1 values
    fn brute_ideal(x: i64, y: i64, n: u32) -> bool {
        let a: BigInt = BigInt::from(x).pow(n) - 1;
        let b: BigInt = BigInt::from(y).pow(n) - 1;
        let mut a = a.magnitude().clone();
        while a.is_even() && !a.is_zero() {
            a >>= 1;
        }
        b.is_zero() || (!a.is_zero() && (b.magnitude() % &a).is_zero())
    }

    #[test]
    fn ideal_examples() {
        let es = ProblemInstance::example_es();
        let mut expected = vec![1];
        expected.extend((2..=10).step_by(2));
        assert_eq!(scan_ideal_inclusion(&es, 10).unwrap(), expected);

        let i = inst(&[2], &["2"], &["4"], "X1 - 1", "X1 - 1");
        assert_eq!(scan_ideal_inclusion(&i, 20).unwrap(), (1..=20).collect::<Vec<_>>());

        let i = inst(&[2], &["2"], &["3"], "X1 - 1", "X1 - 1");
        assert_eq!(scan_ideal_inclusion(&i, 5).unwrap(), vec![1]);

        for n in 1..=40 {
            let i = inst(&[2], &["2"], &["-2"], "X1 - 1", "X1 - 1");
            assert_eq!(ideal_inclusion_at(&i, n).unwrap(), brute_ideal(2, -2, n as u32), "n = {n}");
        }
    }

    #[test]
    fn support_examples() {
        let i = inst(&[2], &["2"], &["4"], "X1 - 1", "X1 - 1");
        assert_eq!(scan_support_inclusion(&i, 50).unwrap(), (1..=50).collect::<Vec<_>>());

        let i = ProblemInstance::example_es3();
        assert_eq!(scan_support_inclusion(&i, 20).unwrap(), (1..=20).collect::<Vec<_>>());

        let i = inst(&[2], &["2"], &["3"], "X1 - 1", "X1 - 1");
        let hits = scan_support_inclusion(&i, 5).unwrap();
        assert!(!hits.contains(&2));
        assert!(hits.contains(&1));
    }

    #[test]
    fn zeros_follow_ideal_reading() {
        // F2(g2ⁿ) = 0 for every n: vacuous inclusion
        let i = inst(&[2], &["2"], &["1"], "X1 - 3", "X1 - 1");
        assert_eq!(scan_ideal_inclusion(&i, 3).unwrap(), vec![1, 2, 3]);
        // F1(g1ⁿ) = 0, F2(g2ⁿ) ≠ 0: fails
        let i = inst(&[2], &["1"], &["2"], "X1 - 1", "X1 - 3");
        assert!(scan_ideal_inclusion(&i, 3).unwrap().is_empty());
        assert!(scan_support_inclusion(&i, 3).unwrap().is_empty());
    }

    #[test]
    fn radical_test() {
        let b = |x: u64| BigUint::from(x);
        assert!(radical_divides(&b(12), &b(6)));
        assert!(radical_divides(&b(8), &b(2)));
        assert!(!radical_divides(&b(12), &b(4)));
        assert!(radical_divides(&b(1), &b(7)));
        assert!(!radical_divides(&b(3), &b(8)));
    }

    #[test]
    fn needs_s_integral_values() {
        let i = inst(&[], &["2"], &["2"], "X1 - 1", "X1 - 1");
        assert!(matches!(ideal_inclusion_at(&i, 2), Ok(true)));
        let i = inst(&[], &["1/2"], &["2"], "X1 - 2", "X1 - 1");
        assert_eq!(ideal_inclusion_at(&i, 1), Err(ScanError::NotSIntegral { n: 1 }));
    }

    #[test]
    fn evidence_by_residue() {
        let hits = vec![1, 2, 4, 6, 8, 10];
        let e = residue_evidence(&hits, 10, 2);
        assert_eq!(e, vec![1.0, 0.2]);
    }
}
