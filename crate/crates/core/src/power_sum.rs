//! Power sums `n ↦ Σ bᵢ αᵢⁿ` with rational coefficients and roots.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{format_rational, rational, ArithError, FactoredRational, Factorizer};
use crate::group::{express, group_basis, GroupBasis};
use crate::laurent::{exact_divide, pow_rat, LaurentError, LaurentPoly};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum PowerSumError {
    #[error("root must be nonzero")]
    ZeroRoot,
    #[error("root {0} is not in the group")]
    RootNotInGroup(String),
    #[error("the root group contains -1; subsample modulo 2 first")]
    Torsion,
    #[error("zero power sum")]
    Zero,
    #[error("the divisor vanishes on a whole residue class modulo 2")]
    Degenerate,
    #[error("coordinate {0} does not fit in 64 bits")]
    Overflow(BigInt),
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Laurent(#[from] LaurentError),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PowerSum {
    // root → coefficient, both nonzero
    terms: BTreeMap<BigRational, BigRational>,
}

impl PowerSum {
    pub fn zero() -> Self {
        Self { terms: BTreeMap::new() }
    }

    /// Merges equal roots and drops vanishing coefficients.
    pub fn new(terms: impl IntoIterator<Item = (BigRational, BigRational)>) -> Result<Self, PowerSumError> {
        let mut out = Self::zero();
        for (c, root) in terms {
            if root.is_zero() {
                return Err(PowerSumError::ZeroRoot);
            }
            out.add_term(root, c);
        }
        Ok(out)
    }

    /// Convenience constructor from `(coeff, root)` integer pairs.
    pub fn from_ints(terms: &[(i64, i64)]) -> Result<Self, PowerSumError> {
        Self::new(terms.iter().map(|&(c, r)| (BigRational::from_integer(c.into()), BigRational::from_integer(r.into()))))
    }

    fn add_term(&mut self, root: BigRational, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(root.clone()).or_insert_with(BigRational::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&root);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `(coeff, root)` pairs in ascending root order.
    pub fn terms(&self) -> impl Iterator<Item = (&BigRational, &BigRational)> {
        self.terms.iter().map(|(r, c)| (c, r))
    }

    pub fn roots(&self) -> impl Iterator<Item = &BigRational> {
        self.terms.keys()
    }

    pub fn eval(&self, n: i64) -> BigRational {
        self.terms.iter().map(|(r, c)| c * pow_rat(r, n)).sum()
    }

    /// `n ↦ f(qn + r)`.
    pub fn subsample(&self, q: u64, r: i64) -> Self {
        assert!(q >= 1, "subsample step must be positive");
        let mut out = Self::zero();
        for (root, c) in &self.terms {
            out.add_term(pow_rat(root, q as i64), c * pow_rat(root, r));
        }
        out
    }

    pub fn is_reduced(&self) -> bool {
        self.terms.contains_key(&BigRational::one())
    }

    pub fn factored_roots(&self) -> Result<Vec<FactoredRational>, PowerSumError> {
        let fz = Factorizer::default();
        self.terms
            .keys()
            .map(|r| FactoredRational::factor_rational(r, &fz).map_err(PowerSumError::from))
            .collect()
    }

    pub fn to_laurent(&self, b: &GroupBasis) -> Result<LaurentPoly, PowerSumError> {
        if b.torsion_order() != 1 {
            return Err(PowerSumError::Torsion);
        }
        let fz = Factorizer::default();
        let mut terms = Vec::with_capacity(self.terms.len());
        for (root, c) in &self.terms {
            let fr = FactoredRational::factor_rational(root, &fz)?;
            let v = express(&fr, b).ok_or_else(|| PowerSumError::RootNotInGroup(format_rational(root)))?;
            let e = v
                .iter()
                .map(|x| x.to_i64().ok_or_else(|| PowerSumError::Overflow(x.clone())))
                .collect::<Result<Vec<_>, _>>()?;
            terms.push((e, c.clone()));
        }
        Ok(LaurentPoly::from_terms(b.rank(), terms))
    }

    pub fn from_laurent(f: &LaurentPoly, b: &GroupBasis) -> Result<Self, PowerSumError> {
        let roots: Vec<BigRational> = b.basis().iter().map(FactoredRational::value).collect();
        let mut out = Self::zero();
        for (e, c) in f.terms() {
            let mut root = BigRational::one();
            for (r, &k) in roots.iter().zip(e) {
                root *= pow_rat(r, k);
            }
            out.add_term(root, c.clone());
        }
        Ok(out)
    }

    pub fn roots_group(&self) -> Result<GroupBasis, PowerSumError> {
        if self.is_zero() {
            return Err(PowerSumError::Zero);
        }
        Ok(group_basis(&self.factored_roots()?))
    }
}

impl std::ops::Mul for &PowerSum {
    type Output = PowerSum;
    fn mul(self, rhs: &PowerSum) -> PowerSum {
        let mut out = PowerSum::zero();
        for (r1, c1) in &self.terms {
            for (r2, c2) in &rhs.terms {
                out.add_term(r1 * r2, c1 * c2);
            }
        }
        out
    }
}

fn rational_sqrt(x: &BigRational) -> Option<BigRational> {
    if x.is_negative() {
        return None;
    }
    let (n, d) = (x.numer().sqrt(), x.denom().sqrt());
    (&n * &n == *x.numer() && &d * &d == *x.denom()).then(|| BigRational::new(n, d))
}

/// `g` with `f2 = f1·g` identically, via Laurent division on a common basis.
/// When the roots generate `−1`, both sides are split by the parity of `n`
/// and the two quotients glued back; a quotient needing irrational roots
/// counts as none.
pub fn divide(f2: &PowerSum, f1: &PowerSum) -> Result<Option<PowerSum>, PowerSumError> {
    if f1.is_zero() {
        return Err(PowerSumError::Zero);
    }
    let mut roots = f1.factored_roots()?;
    roots.extend(f2.factored_roots()?);
    let b = group_basis(&roots);
    if b.torsion_order() != 1 {
        return divide_by_parity(f2, f1);
    }
    let l1 = f1.to_laurent(&b)?;
    let l2 = f2.to_laurent(&b)?;
    match exact_divide(&l2, &l1)? {
        Some(q) => Ok(Some(PowerSum::from_laurent(&q, &b)?)),
        None => Ok(None),
    }
}

fn divide_by_parity(f2: &PowerSum, f1: &PowerSum) -> Result<Option<PowerSum>, PowerSumError> {
    let mut halves = Vec::with_capacity(2);
    for r in 0..2 {
        let (s1, s2) = (f1.subsample(2, r), f2.subsample(2, r));
        if s1.is_zero() {
            return Err(PowerSumError::Degenerate);
        }
        match divide(&s2, &s1)? {
            Some(g) => halves.push(g),
            None => return Ok(None),
        }
    }
    // g(2m) = Σ (d₊ + d₋) βᵐ and g(2m+1) = Σ γ(d₊ − d₋) βᵐ with γ² = β
    let mut betas: Vec<&BigRational> = halves[0].roots().chain(halves[1].roots()).collect();
    betas.sort();
    betas.dedup();
    let coeff = |h: &PowerSum, beta: &BigRational| h.terms.get(beta).cloned().unwrap_or_else(BigRational::zero);
    let two = BigRational::from_integer(2.into());
    let mut g = PowerSum::zero();
    for beta in betas {
        let Some(gamma) = rational_sqrt(beta) else {
            return Ok(None);
        };
        let (a, b) = (coeff(&halves[0], beta), coeff(&halves[1], beta) / &gamma);
        g.add_term(gamma.clone(), (&a + &b) / &two);
        g.add_term(-gamma, (a - b) / &two);
    }
    Ok((&(f1 * &g) == f2).then_some(g))
}

/// e.g. `2*3^n - 1`, `(-2)^n + 1/2*(2/3)^n`.
impl fmt::Display for PowerSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (root, c)) in self.terms.iter().rev().enumerate() {
            match (k == 0, c.is_negative()) {
                (true, true) => write!(f, "-")?,
                (true, false) => {}
                (false, true) => write!(f, " - ")?,
                (false, false) => write!(f, " + ")?,
            }
            let a = c.abs();
            if root.is_one() {
                write!(f, "{}", format_rational(&a))?;
                continue;
            }
            if !a.is_one() {
                write!(f, "{}*", format_rational(&a))?;
            }
            if root.is_negative() || !root.denom().is_one() {
                write!(f, "({})^n", format_rational(root))?;
            } else {
                write!(f, "{}^n", format_rational(root))?;
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    #[serde(with = "rational::rat_string")]
    coeff: BigRational,
    #[serde(with = "rational::rat_string")]
    root: BigRational,
}

#[derive(Serialize, Deserialize)]
struct PowerSumJson {
    terms: Vec<TermJson>,
}

impl Serialize for PowerSum {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PowerSumJson {
            terms: self
                .terms
                .iter()
                .map(|(r, c)| TermJson {
                    coeff: c.clone(),
                    root: r.clone(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PowerSum {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = PowerSumJson::deserialize(d)?;
        PowerSum::new(j.terms.into_iter().map(|t| (t.coeff, t.root))).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ps(t: &[(i64, i64)]) -> PowerSum {
        PowerSum::from_ints(t).unwrap()
    }

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn int(x: i64) -> FactoredRational {
        FactoredRational::factor_integer(&x.into(), &Factorizer::default()).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(ps(&[(1, 2), (-1, 1)]).eval(4), q(15));
        assert_eq!(ps(&[(2, 3), (-1, 1)]).eval(2), q(17));
        assert_eq!(ps(&[(1, -2), (-1, 1)]).eval(3), q(-9));
        assert_eq!(ps(&[(1, 2)]).eval(-2), BigRational::new(1.into(), 4.into()));
    }

    #[test]
    fn laurent_examples() {
        let b = group_basis(&[int(2)]);
        assert_eq!(ps(&[(1, 4), (-1, 1)]).to_laurent(&b).unwrap(), LaurentPoly::parse("X1^2 - 1", 1).unwrap());
        let b = group_basis(&[int(2), int(3)]);
        assert_eq!(
            ps(&[(1, 6), (-2, 3)]).to_laurent(&b).unwrap(),
            LaurentPoly::parse("X1*X2 - 2*X2", 2).unwrap()
        );
        let b = group_basis(&[int(3)]);
        assert!(matches!(ps(&[(1, 2), (-1, 1)]).to_laurent(&b), Err(PowerSumError::RootNotInGroup(_))));
        let f = ps(&[(1, 6), (-2, 3), (5, 1)]);
        let b = f.roots_group().unwrap();
        assert_eq!(PowerSum::from_laurent(&f.to_laurent(&b).unwrap(), &b).unwrap(), f);
    }

    #[test]
    fn subsample_examples() {
        assert_eq!(ps(&[(1, -2), (-1, 1)]).subsample(2, 0), ps(&[(1, 4), (-1, 1)]));
        let f = ps(&[(1, 2), (-1, 1)]);
        assert_eq!(f.subsample(1, 0), f);
        assert_eq!(ps(&[(1, 2)]).subsample(2, 1), ps(&[(2, 4)]));
        // roots 2 and −2 collide at q = 2
        assert_eq!(ps(&[(1, 2), (1, -2)]).subsample(2, 1), PowerSum::zero());
    }

    #[test]
    fn divide_examples() {
        let g = divide(&ps(&[(1, 4), (-1, 1)]), &ps(&[(1, 2), (-1, 1)])).unwrap();
        assert_eq!(g, Some(ps(&[(1, 2), (1, 1)])));
        assert_eq!(divide(&ps(&[(1, 9), (-1, 1)]), &ps(&[(1, 2), (-1, 1)])).unwrap(), None);
        let f = ps(&[(3, 5), (-1, 2), (7, 1)]);
        assert_eq!(divide(&f, &f).unwrap(), Some(ps(&[(1, 1)])));
        assert_eq!(divide(&ps(&[(1, 2), (-1, 1)]), &ps(&[(1, -2), (-1, 1)])).unwrap(), None);
        // (−2)ⁿ − 1 times 3ⁿ + (−1)ⁿ
        let f1 = ps(&[(1, -2), (-1, 1)]);
        let g = ps(&[(1, 3), (1, -1)]);
        assert_eq!(divide(&(&f1 * &g), &f1).unwrap(), Some(g));
        assert_eq!(divide(&ps(&[(1, 2)]), &ps(&[(1, 2), (1, -2)])), Err(PowerSumError::Degenerate));
    }

    #[test]
    fn reduced_and_groups() {
        assert!(ps(&[(1, 2), (-1, 1)]).is_reduced());
        assert!(!ps(&[(1, 2), (-2, 3)]).is_reduced());
        assert!(ps(&[(5, 1)]).is_reduced());
        let b = ps(&[(1, 2), (-1, 1)]).roots_group().unwrap();
        assert_eq!(b.basis(), &[int(2)]);
        let b = ps(&[(1, 6), (-1, 2), (-1, 3), (1, 1)]).roots_group().unwrap();
        assert_eq!(b.basis(), &[int(2), int(3)]);
        let b = ps(&[(1, -2), (-1, 1)]).roots_group().unwrap();
        assert_eq!(b.basis(), &[int(-2)]);
        assert_eq!(b.torsion_order(), 1);
        assert!(PowerSum::zero().roots_group().is_err());
    }

    #[test]
    fn display_and_json() {
        let f = PowerSum::new([
            (q(2), q(3)),
            (q(-1), q(1)),
            (BigRational::new(1.into(), 2.into()), q(-2)),
        ])
        .unwrap();
        assert_eq!(f.to_string(), "2*3^n - 1 + 1/2*(-2)^n");
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(serde_json::from_str::<PowerSum>(&s).unwrap(), f);
        assert!(s.contains(r#"{"coeff":"1/2","root":"-2"}"#));
    }

    fn arb_ps(max_terms: usize) -> impl Strategy<Value = PowerSum> {
        proptest::collection::vec((prop_oneof![-9i64..=-1, 1i64..=9], prop_oneof![-12i64..=-1, 1i64..=12]), 1..=max_terms)
            .prop_map(|t| PowerSum::from_ints(&t).unwrap())
    }

    proptest! {
        #[test]
        fn laurent_round_trip(f in arb_ps(5)) {
            if let Ok(b) = f.roots_group() {
                if b.torsion_order() == 1 {
                    let l = f.to_laurent(&b).unwrap();
                    prop_assert_eq!(PowerSum::from_laurent(&l, &b).unwrap(), f);
                }
            }
        }

        #[test]
        fn subsample_composes(f in arb_ps(4), q1 in 1u64..4, r1 in -3i64..4, q2 in 1u64..4, r2 in -3i64..4) {
            let lhs = f.subsample(q1, r1).subsample(q2, r2);
            let rhs = f.subsample(q1 * q2, q1 as i64 * r2 + r1);
            prop_assert_eq!(lhs.clone(), rhs);
            for n in -3..6 {
                prop_assert_eq!(lhs.eval(n), f.eval((q1 * q2) as i64 * n + q1 as i64 * r2 + r1));
            }
        }

        #[test]
        fn quotient_identity(f1 in arb_ps(3), g in arb_ps(3)) {
            prop_assume!(!f1.is_zero());
            let f2 = &f1 * &g;
            match divide(&f2, &f1) {
                Ok(Some(h)) => {
                    for n in -5..=20 {
                        prop_assert_eq!(f2.eval(n), f1.eval(n) * h.eval(n));
                    }
                }
                Ok(None) => prop_assert!(false, "product not divisible"),
                Err(PowerSumError::Degenerate) => {}
                Err(e) => prop_assert!(false, "{e}"),
            }
        }

        // values at n = 0..2k−1 determine a sum of at most k terms
        #[test]
        fn values_determine_terms(f in arb_ps(3), g in arb_ps(3)) {
            let k = 6;
            let diff = {
                let mut neg = g.clone();
                neg.terms.values_mut().for_each(|c| *c = -c.clone());
                let mut d = f.clone();
                for (r, c) in neg.terms { d.add_term(r, c); }
                d
            };
            let agree = (0..2 * k).all(|n| f.eval(n as i64) == g.eval(n as i64));
            prop_assert_eq!(agree, diff.is_zero());
            prop_assert_eq!(agree, f == g);
        }
    }
}
