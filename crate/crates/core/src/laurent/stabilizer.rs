use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::{exps_to_bigint, LaurentError, LaurentPoly};
use crate::lattice::{lattice_invariants, snf, IntMatrix};

/// Stabilizer of the divisor `F = 0` in the torus: dimension of its identity
/// component and the invariant factors (> 1) of its finite part.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilizerInfo {
    pub dimension: usize,
    #[serde(with = "bigint_strings")]
    pub invariant_factors: Vec<BigInt>,
}

impl StabilizerInfo {
    pub fn is_trivial(&self) -> bool {
        self.dimension == 0 && self.invariant_factors.is_empty()
    }
}

mod bigint_strings {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|x| x.to_string()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|s| s.parse().map_err(serde::de::Error::custom))
            .collect()
    }
}

fn support_lattice(f: &LaurentPoly) -> IntMatrix {
    let supp = f.support();
    let base = &supp[0];
    let rows: Vec<Vec<BigInt>> = supp[1..]
        .iter()
        .map(|u| exps_to_bigint(&u.iter().zip(base).map(|(a, b)| a - b).collect::<Vec<_>>()))
        .collect();
    IntMatrix::from_rows_with_cols(rows, f.dim())
}

/// `t` stabilizes `F = 0` iff `t^{u−u′} = 1` for all `u, u′` in the support,
/// so the stabilizer is dual to `Z^d / Λ` with `Λ` the difference lattice.
pub fn stabilizer(f: &LaurentPoly) -> Result<StabilizerInfo, LaurentError> {
    if f.is_zero() {
        return Err(LaurentError::ZeroPolynomial);
    }
    let (rank, invariant_factors) = lattice_invariants(&support_lattice(f));
    Ok(StabilizerInfo {
        dimension: f.dim() - rank,
        invariant_factors,
    })
}

/// A unimodular `change` such that `F ∘ φ_change` is, up to a monomial,
/// the polynomial `poly` in the first `effective_dim` variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OmittedVariables {
    pub change: IntMatrix,
    pub effective_dim: usize,
    pub poly: LaurentPoly,
}

pub fn omit_variables(f: &LaurentPoly) -> Result<Option<OmittedVariables>, LaurentError> {
    if f.is_zero() {
        return Err(LaurentError::ZeroPolynomial);
    }
    let lambda = support_lattice(f);
    let d = f.dim();
    let (dm, _, mut v) = snf(&lambda);
    let r = (0..dm.rows().min(dm.cols())).filter(|&i| !dm[(i, i)].is_zero()).count();
    if r == d {
        return Ok(None);
    }
    // Λ·V vanishes outside the first r columns, so F ∘ φ_V only involves
    // the first r variables after removing a monomial.
    let mut g = f.monomial_substitute(&v)?;
    for j in 0..r {
        let mut lo: Option<(i64, bool)> = None;
        let mut hi: Option<(i64, bool)> = None;
        for (e, c) in g.terms() {
            let neg = c.is_negative();
            if lo.is_none_or(|(x, _)| e[j] < x) {
                lo = Some((e[j], neg));
            }
            if hi.is_none_or(|(x, _)| e[j] > x) {
                hi = Some((e[j], neg));
            }
        }
        if let (Some((_, false)), Some((_, true))) = (lo, hi) {
            for i in 0..d {
                let x = -std::mem::take(&mut v[(i, j)]);
                v[(i, j)] = x;
            }
            g = f.monomial_substitute(&v)?;
        }
    }
    let (_, stripped) = g.strip_monomial();
    debug_assert!(stripped
        .terms()
        .all(|(e, _)| e[r..].iter().all(|&x| x == 0)));
    Ok(Some(OmittedVariables {
        change: v,
        effective_dim: r,
        poly: stripped.truncate_dim(r),
    }))
}

#[cfg(test)]
mod tests {
    use super::super::tests::arb_poly;
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str, d: usize) -> LaurentPoly {
        LaurentPoly::parse(s, d).unwrap()
    }

    fn info(dimension: usize, f: &[i64]) -> StabilizerInfo {
        StabilizerInfo {
            dimension,
            invariant_factors: f.iter().map(|&x| x.into()).collect(),
        }
    }

    #[test]
    fn stabilizer_examples() {
        assert_eq!(stabilizer(&p("X1*X2 - 1", 2)).unwrap(), info(1, &[]));
        assert_eq!(stabilizer(&p("X1^2 - 1", 1)).unwrap(), info(0, &[2]));
        assert_eq!(stabilizer(&p("X1*X2 - X1 - X2 + 1", 2)).unwrap(), info(0, &[]));
        assert_eq!(stabilizer(&p("X1^2*X2^2 - 1", 2)).unwrap(), info(1, &[2]));
        assert_eq!(stabilizer(&p("X1 + 5", 3)).unwrap(), info(2, &[]));
        assert_eq!(stabilizer(&p("7", 2)).unwrap(), info(2, &[]));
        assert!(stabilizer(&LaurentPoly::zero(2)).is_err());
    }

    #[test]
    fn omit_examples() {
        let o = omit_variables(&p("X1*X2 - 1", 2)).unwrap().unwrap();
        assert_eq!(o.effective_dim, 1);
        assert_eq!(o.poly, p("X1 - 1", 1));
        assert!(o.change.is_unimodular());

        let o = omit_variables(&p("X1^2*X2^2 - 1", 2)).unwrap().unwrap();
        assert_eq!(o.poly, p("X1^2 - 1", 1));

        assert!(omit_variables(&p("X1 + X2 - 1", 2)).unwrap().is_none());
    }

    fn arb_unimodular() -> impl Strategy<Value = IntMatrix> {
        proptest::collection::vec((0usize..2, -3i64..=3), 0..6).prop_map(|ops| {
            let mut m = IntMatrix::identity(2);
            for (i, k) in ops {
                let e = if i == 0 {
                    IntMatrix::from_i64(&[&[1, k], &[0, 1]])
                } else {
                    IntMatrix::from_i64(&[&[1, 0], &[k, 1]])
                };
                m = m.mul(&e);
            }
            m
        })
    }

    proptest! {
        #[test]
        fn dimension_is_invariant(f in arb_poly(2, 4, 3).prop_filter("nonzero", |f| !f.is_zero()), u in arb_unimodular(), shift in proptest::collection::vec(-3i64..=3, 2)) {
            let s = stabilizer(&f).unwrap().dimension;
            prop_assert_eq!(stabilizer(&f.monomial_substitute(&u).unwrap()).unwrap().dimension, s);
            prop_assert_eq!(stabilizer(&f.shift(&shift)).unwrap().dimension, s);
        }

        #[test]
        fn omit_iff_positive_dimension(f in arb_poly(3, 4, 2).prop_filter("nonzero", |f| !f.is_zero())) {
            let s = stabilizer(&f).unwrap();
            let o = omit_variables(&f).unwrap();
            prop_assert_eq!(s.dimension > 0, o.is_some());
            if let Some(o) = o {
                prop_assert!(o.change.is_unimodular());
                prop_assert_eq!(o.effective_dim, 3 - s.dimension);
                let g = f.monomial_substitute(&o.change).unwrap();
                let (_, stripped) = g.strip_monomial();
                prop_assert_eq!(stripped, o.poly.extend_dim(3));
            }
        }
    }
}
