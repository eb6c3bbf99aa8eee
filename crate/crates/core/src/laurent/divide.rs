use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Zero;

use super::{LaurentError, LaurentPoly};

// Remainder keyed by the reversed exponent vector, so the last variable is
// the most significant in the lexicographic order.
type Lex = BTreeMap<Vec<i64>, BigRational>;

fn to_lex(p: &LaurentPoly) -> Lex {
    p.terms()
        .map(|(e, c)| (e.iter().rev().copied().collect(), c.clone()))
        .collect()
}

/// `Q` with `F = G·Q` in the Laurent ring, or `None` if `G ∤ F`.
pub fn exact_divide(f: &LaurentPoly, g: &LaurentPoly) -> Result<Option<LaurentPoly>, LaurentError> {
    if f.dim() != g.dim() {
        return Err(LaurentError::Dimension {
            expected: f.dim(),
            got: g.dim(),
        });
    }
    if g.is_zero() {
        return Err(LaurentError::DivisionByZero);
    }
    let dim = f.dim();
    if f.is_zero() {
        return Ok(Some(LaurentPoly::zero(dim)));
    }
    let (fa, fp) = f.strip_monomial();
    let (ga, gp) = g.strip_monomial();
    let g_lex = to_lex(&gp);
    let (g_lead, g_lc) = g_lex.iter().next_back().map(|(e, c)| (e.clone(), c.clone())).expect("nonzero");
    let mut rem = to_lex(&fp);
    let mut quot: Vec<(Vec<i64>, BigRational)> = Vec::new();
    while let Some((lead, lc)) = rem.iter().next_back().map(|(e, c)| (e.clone(), c.clone())) {
        let shift: Vec<i64> = lead.iter().zip(&g_lead).map(|(a, b)| a - b).collect();
        if shift.iter().any(|&x| x < 0) {
            return Ok(None);
        }
        let c = &lc / &g_lc;
        for (ge, gc) in &g_lex {
            let e: Vec<i64> = ge.iter().zip(&shift).map(|(a, b)| a + b).collect();
            let v = rem.entry(e).or_insert_with(BigRational::zero);
            *v -= &c * gc;
            if v.is_zero() {
                let key: Vec<i64> = ge.iter().zip(&shift).map(|(a, b)| a + b).collect();
                rem.remove(&key);
            }
        }
        quot.push((shift.into_iter().rev().collect(), c));
    }
    let offset: Vec<i64> = fa.iter().zip(&ga).map(|(a, b)| a - b).collect();
    Ok(Some(LaurentPoly::from_terms(dim, quot).shift(&offset)))
}

#[cfg(test)]
mod tests {
    use super::super::tests::arb_poly;
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str, d: usize) -> LaurentPoly {
        LaurentPoly::parse(s, d).unwrap()
    }

    #[test]
    fn examples() {
        assert_eq!(exact_divide(&p("X1^2 - 1", 1), &p("X1 - 1", 1)).unwrap(), Some(p("X1 + 1", 1)));
        assert_eq!(
            exact_divide(&p("X1*X2 - X1 - X2 + 1", 2), &p("X1 - 1", 2)).unwrap(),
            Some(p("X2 - 1", 2))
        );
        assert_eq!(exact_divide(&p("X1^2 + 1", 1), &p("X1 - 1", 1)).unwrap(), None);
        assert_eq!(
            exact_divide(&p("X1^-3 - X1^-1", 1), &p("X1^2 - 1", 1)).unwrap(),
            Some(p("-X1^-3", 1))
        );
        assert_eq!(exact_divide(&p("X1", 1), &p("X1^5", 1)).unwrap(), Some(p("X1^-4", 1)));
        assert_eq!(exact_divide(&p("X2^2 - 1", 2), &p("X1 - 1", 2)).unwrap(), None);
        assert!(matches!(
            exact_divide(&p("X1", 1), &LaurentPoly::zero(1)),
            Err(LaurentError::DivisionByZero)
        ));
    }

    proptest! {
        #[test]
        fn divides_products(f in arb_poly(3, 6, 3), g in arb_poly(3, 6, 3)) {
            prop_assume!(!g.is_zero());
            let fg = &f * &g;
            prop_assert_eq!(exact_divide(&fg, &g).unwrap(), Some(f));
        }

        #[test]
        fn quotient_is_exact(f in arb_poly(2, 5, 3), g in arb_poly(2, 3, 2)) {
            prop_assume!(!g.is_zero());
            if let Some(q) = exact_divide(&f, &g).unwrap() {
                prop_assert_eq!(&q * &g, f);
            }
        }
    }
}
