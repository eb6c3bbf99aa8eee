//! Finitely generated subgroups of Q*.
//!
//! A group is stored as a list of independent generators plus a torsion order
//! (1 or 2, since ±1 are the only roots of unity in Q). When −1 belongs to
//! the group the generators are made positive. A torsion-free group such as
//! ⟨−2⟩ has no positive generator, so it keeps its signed one.

use std::collections::BTreeSet;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{format_rational, parse_rational, FactoredRational, Sign};
use crate::lattice::{hnf, left_kernel, snf, solve_integral, IntMatrix};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupBasis {
    basis: Vec<FactoredRational>,
    torsion_order: u8,
    prime_index: Vec<BigUint>,
    // rows: exponent vectors of `basis` over `prime_index`
    exps: IntMatrix,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum GroupError {
    #[error("generators are multiplicatively dependent")]
    Dependent,
    #[error("exponent {0} does not fit in 64 bits")]
    Overflow(BigInt),
}

fn union_primes<'a>(xs: impl IntoIterator<Item = &'a FactoredRational>) -> Vec<BigUint> {
    let mut set = BTreeSet::new();
    for x in xs {
        set.extend(x.primes().cloned());
    }
    set.into_iter().collect()
}

fn exponent_row(x: &FactoredRational, primes: &[BigUint]) -> Vec<BigInt> {
    primes.iter().map(|p| BigInt::from(x.valuation(p))).collect()
}

fn to_i64(x: &BigInt) -> Result<i64, GroupError> {
    x.to_i64().ok_or_else(|| GroupError::Overflow(x.clone()))
}

/// Π gᵢ^{cᵢ}.
pub fn product_power(gens: &[FactoredRational], coeffs: &[BigInt]) -> Result<FactoredRational, GroupError> {
    let mut acc = FactoredRational::one();
    for (g, c) in gens.iter().zip(coeffs) {
        if !c.is_zero() {
            acc = &acc * &g.pow(to_i64(c)?);
        }
    }
    Ok(acc)
}

fn sign_of_combination(gens: &[FactoredRational], coeffs: &[BigInt]) -> Sign {
    let odd = gens
        .iter()
        .zip(coeffs)
        .filter(|(g, c)| g.sign() == Sign::Negative && c.is_odd())
        .count();
    if odd % 2 == 1 {
        Sign::Negative
    } else {
        Sign::Positive
    }
}

impl GroupBasis {
    pub fn trivial() -> Self {
        Self {
            basis: Vec::new(),
            torsion_order: 1,
            prime_index: Vec::new(),
            exps: IntMatrix::zeros(0, 0),
        }
    }

    /// Uses `elements` verbatim as the basis; fails if they are dependent.
    pub fn from_independent(elements: Vec<FactoredRational>) -> Result<Self, GroupError> {
        let primes = union_primes(&elements);
        let exps = IntMatrix::from_rows_with_cols(
            elements.iter().map(|x| exponent_row(x, &primes)).collect(),
            primes.len(),
        );
        if crate::lattice::rank(&exps) != elements.len() {
            return Err(GroupError::Dependent);
        }
        Ok(Self {
            basis: elements,
            torsion_order: 1,
            prime_index: primes,
            exps,
        })
    }

    pub fn basis(&self) -> &[FactoredRational] {
        &self.basis
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn torsion_order(&self) -> u8 {
        self.torsion_order
    }

    pub fn prime_index(&self) -> &[BigUint] {
        &self.prime_index
    }

    /// Exponent vectors of the basis elements, one row each.
    pub fn exponent_matrix(&self) -> &IntMatrix {
        &self.exps
    }

    /// Π basisᵢ^{vᵢ}.
    pub fn element(&self, v: &[BigInt]) -> Result<FactoredRational, GroupError> {
        product_power(&self.basis, v)
    }

    pub fn contains(&self, x: &FactoredRational) -> bool {
        express(x, self).is_some()
    }

    fn coordinates_up_to_sign(&self, x: &FactoredRational) -> Option<Vec<BigInt>> {
        if x.primes().any(|p| self.prime_index.binary_search(p).is_err()) {
            return None;
        }
        let e = exponent_row(x, &self.prime_index);
        if self.basis.is_empty() {
            return e.iter().all(Zero::is_zero).then(Vec::new);
        }
        solve_integral(&self.exps, &e)
    }
}

pub fn group_basis(gens: &[FactoredRational]) -> GroupBasis {
    if gens.is_empty() {
        return GroupBasis::trivial();
    }
    let primes = union_primes(gens);
    let e = IntMatrix::from_rows_with_cols(gens.iter().map(|g| exponent_row(g, &primes)).collect(), primes.len());
    let (h, u) = hnf(&e);
    let r = (0..h.rows()).filter(|&i| h.row(i).iter().any(|x| !x.is_zero())).count();
    // some relation with vanishing exponents and odd sign parity produces −1
    let torsion = (r..gens.len()).any(|i| sign_of_combination(gens, u.row(i)) == Sign::Negative);
    let mut basis = Vec::with_capacity(r);
    for i in 0..r {
        let primes_part = FactoredRational::from_parts(
            Sign::Positive,
            primes
                .iter()
                .zip(h.row(i))
                .filter(|(_, x)| !x.is_zero())
                .map(|(p, x)| (p.clone(), x.to_i64().expect("exponent overflow"))),
        );
        let sign = if torsion {
            Sign::Positive
        } else {
            sign_of_combination(gens, u.row(i))
        };
        basis.push(match sign {
            Sign::Positive => primes_part,
            Sign::Negative => -primes_part,
        });
    }
    let exps = IntMatrix::from_rows_with_cols((0..r).map(|i| h.row(i).to_vec()).collect(), primes.len());
    GroupBasis {
        basis,
        torsion_order: if torsion { 2 } else { 1 },
        prime_index: primes,
        exps,
    }
}

/// Coordinates of `x` in the basis; `None` if `x` is outside the group.
/// With torsion order 2 the sign of `x` is absorbed by −1.
pub fn express(x: &FactoredRational, b: &GroupBasis) -> Option<Vec<BigInt>> {
    let v = b.coordinates_up_to_sign(x)?;
    if b.torsion_order == 1 && sign_of_combination(&b.basis, &v) != x.sign() {
        return None;
    }
    Some(v)
}

pub fn is_independent(gens: &[FactoredRational]) -> bool {
    let primes = union_primes(gens);
    let e = IntMatrix::from_rows_with_cols(gens.iter().map(|g| exponent_row(g, &primes)).collect(), primes.len());
    left_kernel(&e).rows() == 0
}

/// Exponents `v` with `Π gensᵢ^{vᵢ} = x`, for arbitrary (possibly dependent) generators.
pub fn solve_in_generators(x: &FactoredRational, gens: &[FactoredRational]) -> Option<Vec<BigInt>> {
    let primes = union_primes(gens);
    if x.primes().any(|p| primes.binary_search(p).is_err()) {
        return None;
    }
    let e = IntMatrix::from_rows_with_cols(gens.iter().map(|g| exponent_row(g, &primes)).collect(), primes.len());
    let mut v = solve_integral(&e, &exponent_row(x, &primes))?;
    if sign_of_combination(gens, &v) != x.sign() {
        let kernel = left_kernel(&e);
        let flip = (0..kernel.rows()).find(|&i| sign_of_combination(gens, kernel.row(i)) == Sign::Negative)?;
        for (a, b) in v.iter_mut().zip(kernel.row(flip)) {
            *a += b;
        }
    }
    Some(v)
}

/// Least `d ≥ 1` with `γ^d ∈ ⟨gens⟩`, or `None` if no power of `γ` lies in it.
pub fn power_index(gamma: &FactoredRational, gens: &[FactoredRational]) -> Option<BigInt> {
    let b = group_basis(gens);
    power_index_in(gamma, &b)
}

pub fn power_index_in(gamma: &FactoredRational, b: &GroupBasis) -> Option<BigInt> {
    if gamma.primes().any(|p| b.prime_index.binary_search(p).is_err()) {
        return None;
    }
    let e = exponent_row(gamma, &b.prime_index);
    let mut d0 = BigInt::one();
    if b.rank() > 0 {
        // U·H·V = D, so v·H = e becomes y·D = e·V with y = v·U⁻¹
        let (dm, _, v) = snf(&b.exps);
        let w = v.left_apply(&e);
        debug_assert_eq!(w.len(), dm.cols());
        for (j, wj) in w.iter().enumerate() {
            let dj = if j < dm.rows() { dm[(j, j)].clone() } else { BigInt::zero() };
            if dj.is_zero() {
                if !wj.is_zero() {
                    return None;
                }
                continue;
            }
            let need = &dj / dj.gcd(wj);
            d0 = d0.lcm(&need);
        }
    } else if e.iter().any(|x| !x.is_zero()) {
        return None;
    }
    if b.torsion_order == 2 {
        return Some(d0);
    }
    let gd = gamma.pow(d0.to_i64()?);
    if express(&gd, b).is_some() {
        Some(d0)
    } else {
        Some(d0 * 2)
    }
}

#[derive(Serialize, Deserialize)]
struct GroupBasisJson {
    basis: Vec<String>,
    torsion_order: u8,
}

impl Serialize for GroupBasis {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        GroupBasisJson {
            basis: self.basis.iter().map(|x| format_rational(&x.value())).collect(),
            torsion_order: self.torsion_order,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GroupBasis {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let j = GroupBasisJson::deserialize(d)?;
        let mut elems = Vec::new();
        for s in &j.basis {
            let q = parse_rational(s).map_err(D::Error::custom)?;
            let f = FactoredRational::factor_rational(&q, &crate::arith::Factorizer::default())
                .map_err(D::Error::custom)?;
            elems.push(f);
        }
        let mut b = GroupBasis::from_independent(elems.clone()).map_err(D::Error::custom)?;
        match j.torsion_order {
            1 => {}
            2 => {
                elems.push(FactoredRational::minus_one());
                b = group_basis(&elems);
            }
            t => return Err(D::Error::custom(format!("torsion order {t} is not 1 or 2"))),
        }
        Ok(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use proptest::prelude::*;

    fn fr(n: i64, d: i64) -> FactoredRational {
        FactoredRational::factor_rational(&BigRational::new(n.into(), d.into()), &Default::default()).unwrap()
    }

    fn int(x: i64) -> FactoredRational {
        fr(x, 1)
    }

    fn bi(xs: &[i64]) -> Vec<BigInt> {
        xs.iter().map(|&x| x.into()).collect()
    }

    #[test]
    fn basis_examples() {
        let b = group_basis(&[int(4), int(8)]);
        assert_eq!(b.basis(), &[int(2)]);
        assert_eq!(b.torsion_order(), 1);

        let b = group_basis(&[int(2), int(-2)]);
        assert_eq!(b.basis(), &[int(2)]);
        assert_eq!(b.torsion_order(), 2);

        let b = group_basis(&[int(2), int(3)]);
        assert_eq!(b.basis(), &[int(2), int(3)]);
        assert_eq!(b.torsion_order(), 1);

        let b = group_basis(&[int(-2)]);
        assert_eq!(b.basis(), &[int(-2)]);
        assert_eq!(b.torsion_order(), 1);

        let b = group_basis(&[int(-1)]);
        assert_eq!(b.rank(), 0);
        assert_eq!(b.torsion_order(), 2);

        assert_eq!(group_basis(&[]).rank(), 0);
    }

    #[test]
    fn express_examples() {
        assert_eq!(express(&int(8), &group_basis(&[int(2)])), Some(bi(&[3])));
        assert_eq!(express(&int(-2), &group_basis(&[int(2)])), None);
        assert_eq!(express(&int(6), &group_basis(&[int(2), int(3)])), Some(bi(&[1, 1])));
        assert_eq!(express(&int(-2), &group_basis(&[int(2), int(-2)])), Some(bi(&[1])));
        assert_eq!(express(&int(4), &group_basis(&[int(-2)])), Some(bi(&[2])));
        assert_eq!(express(&int(2), &group_basis(&[int(-2)])), None);
        assert_eq!(express(&fr(2, 3), &group_basis(&[int(2), int(3)])), Some(bi(&[1, -1])));
        assert_eq!(express(&int(5), &group_basis(&[int(2), int(3)])), None);
    }

    #[test]
    fn independence_examples() {
        assert!(is_independent(&[int(2), int(3)]));
        assert!(!is_independent(&[int(4), int(8)]));
        assert!(is_independent(&[int(2)]));
        assert!(!is_independent(&[int(-1)]));
        assert!(is_independent(&[int(-2), int(3)]));
    }

    #[test]
    fn power_index_examples() {
        assert_eq!(power_index(&int(2), &[int(-2)]), Some(BigInt::from(2)));
        assert_eq!(power_index(&int(2), &[int(2), int(3)]), Some(BigInt::from(1)));
        assert_eq!(power_index(&int(5), &[int(2), int(3)]), None);
        assert_eq!(power_index(&int(2), &[int(8)]), Some(BigInt::from(3)));
        assert_eq!(power_index(&int(4), &[int(8)]), Some(BigInt::from(3)));
        assert_eq!(power_index(&int(-1), &[int(2)]), Some(BigInt::from(2)));
        assert_eq!(power_index(&int(6), &[int(4), int(9)]), Some(BigInt::from(2)));
        assert_eq!(power_index(&int(-8), &[int(4)]), Some(BigInt::from(2)));
    }

    #[test]
    fn generator_solutions() {
        let check = |x: i64, gens: &[i64]| {
            let gs: Vec<_> = gens.iter().map(|&g| int(g)).collect();
            solve_in_generators(&int(x), &gs).map(|v| {
                assert_eq!(product_power(&gs, &v).unwrap(), int(x));
                v
            })
        };
        assert_eq!(check(6, &[2, 3]), Some(bi(&[1, 1])));
        assert!(check(-8, &[4, -2]).is_some());
        assert!(check(-4, &[4, 2]).is_none());
        assert!(check(2, &[4]).is_none());
        assert!(check(-1, &[2, -2]).is_some());
        assert!(check(5, &[2]).is_none());
    }

    #[test]
    fn json_round_trip() {
        let b = group_basis(&[int(2), int(-2), int(9)]);
        let s = serde_json::to_string(&b).unwrap();
        assert_eq!(s, r#"{"basis":["2","9"],"torsion_order":2}"#);
        let back: GroupBasis = serde_json::from_str(&s).unwrap();
        assert_eq!(back.torsion_order(), 2);
        for x in back.basis() {
            assert!(b.contains(x));
        }
    }

    fn arb_rat() -> impl Strategy<Value = FactoredRational> {
        (-100i64..=100, 1i64..=100)
            .prop_filter("nonzero", |(n, _)| *n != 0)
            .prop_map(|(n, d)| fr(n, d))
    }

    proptest! {
        #[test]
        fn generators_are_members(gens in proptest::collection::vec(arb_rat(), 0..6)) {
            let b = group_basis(&gens);
            prop_assert!(b.torsion_order() == 1 || b.torsion_order() == 2);
            prop_assert!(is_independent(b.basis()));
            for g in &gens {
                let v = express(g, &b);
                prop_assert!(v.is_some());
                let rebuilt = b.element(&v.unwrap()).unwrap();
                if b.torsion_order() == 1 {
                    prop_assert_eq!(&rebuilt, g);
                } else {
                    prop_assert_eq!(rebuilt.abs(), g.abs());
                }
            }
        }

        #[test]
        fn basis_is_idempotent(gens in proptest::collection::vec(arb_rat(), 0..6)) {
            let b = group_basis(&gens);
            let mut again: Vec<_> = b.basis().to_vec();
            if b.torsion_order() == 2 {
                again.push(FactoredRational::minus_one());
            }
            let c = group_basis(&again);
            prop_assert_eq!(c.torsion_order(), b.torsion_order());
            for x in c.basis() { prop_assert!(b.contains(x)); }
            for x in b.basis() { prop_assert!(c.contains(x)); }
            if b.torsion_order() == 2 {
                prop_assert!(c.contains(&FactoredRational::minus_one()));
            }
        }

        #[test]
        fn power_index_is_minimal(gamma in arb_rat(), gens in proptest::collection::vec(arb_rat(), 1..5)) {
            let b = group_basis(&gens);
            match power_index(&gamma, &gens) {
                Some(d) => {
                    let d = d.to_i64().unwrap();
                    prop_assert!(d >= 1);
                    prop_assert!(express(&gamma.pow(d), &b).is_some());
                    for dp in 1..d.min(200) {
                        prop_assert!(express(&gamma.pow(dp), &b).is_none());
                    }
                }
                None => {
                    for dp in 1..50 {
                        prop_assert!(express(&gamma.pow(dp), &b).is_none());
                    }
                }
            }
        }
    }
}
