//! Laurent polynomials over Q in `d` variables `X1..Xd`.

mod divide;
mod parse;
mod stabilizer;

pub use divide::exact_divide;
pub use parse::ParseError;
pub use stabilizer::{omit_variables, stabilizer, OmittedVariables, StabilizerInfo};

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{format_rational, parse_rational};
use crate::lattice::IntMatrix;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum LaurentError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("the zero polynomial has no stabilizer")]
    ZeroPolynomial,
    #[error("exponent vector {0:?} is not in the support")]
    NotInSupport(Vec<i64>),
    #[error("evaluation at a zero coordinate")]
    ZeroCoordinate,
}

/// Exponent vector ordered graded-lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<i64>);

impl Monomial {
    pub fn degree(&self) -> i64 {
        self.0.iter().sum()
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LaurentPoly {
    dim: usize,
    terms: BTreeMap<Monomial, BigRational>,
}

pub(crate) fn pow_rat(x: &BigRational, e: i64) -> BigRational {
    let base = if e < 0 { x.recip() } else { x.clone() };
    num_traits::pow::Pow::pow(&base, e.unsigned_abs())
}

impl LaurentPoly {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: BigRational) -> Self {
        Self::monomial(dim, vec![0; dim], c)
    }

    pub fn one(dim: usize) -> Self {
        Self::constant(dim, BigRational::one())
    }

    pub fn monomial(dim: usize, exps: Vec<i64>, c: BigRational) -> Self {
        assert_eq!(exps.len(), dim, "exponent length differs from dimension");
        let mut p = Self::zero(dim);
        if !c.is_zero() {
            p.terms.insert(Monomial(exps), c);
        }
        p
    }

    /// `X_i` (0-based) in `dim` variables.
    pub fn variable(dim: usize, i: usize) -> Self {
        let mut e = vec![0; dim];
        e[i] = 1;
        Self::monomial(dim, e, BigRational::one())
    }

    /// Sums repeated exponents and drops zeros.
    pub fn from_terms(dim: usize, terms: impl IntoIterator<Item = (Vec<i64>, BigRational)>) -> Self {
        let mut p = Self::zero(dim);
        for (e, c) in terms {
            assert_eq!(e.len(), dim, "exponent length differs from dimension");
            p.add_term(Monomial(e), c);
        }
        p
    }

    pub fn parse(text: &str, dim: usize) -> Result<Self, LaurentError> {
        Ok(parse::parse(text, dim)?)
    }

    fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&[i64], &BigRational)> {
        self.terms.iter().map(|(m, c)| (m.0.as_slice(), c))
    }

    pub fn support(&self) -> Vec<Vec<i64>> {
        self.terms.keys().map(|m| m.0.clone()).collect()
    }

    pub fn coeff(&self, e: &[i64]) -> BigRational {
        self.terms
            .get(&Monomial(e.to_vec()))
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    /// A single nonzero term: a unit of the Laurent ring.
    pub fn is_unit(&self) -> bool {
        self.terms.len() == 1
    }

    /// Constant (including zero).
    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.0.iter().all(|&x| x == 0))
    }

    /// Largest term in graded-lex order.
    pub fn leading(&self) -> Option<(&[i64], &BigRational)> {
        self.terms.iter().next_back().map(|(m, c)| (m.0.as_slice(), c))
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero(self.dim);
        }
        Self {
            dim: self.dim,
            terms: self.terms.iter().map(|(m, x)| (m.clone(), x * c)).collect(),
        }
    }

    /// `X^shift · self`.
    pub fn shift(&self, shift: &[i64]) -> Self {
        assert_eq!(shift.len(), self.dim);
        Self {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (Monomial(m.0.iter().zip(shift).map(|(a, b)| a + b).collect()), c.clone()))
                .collect(),
        }
    }

    /// Componentwise minimum of the support; zero vector for the zero polynomial.
    pub fn min_exponents(&self) -> Vec<i64> {
        let mut lo: Option<Vec<i64>> = None;
        for m in self.terms.keys() {
            lo = Some(match lo {
                None => m.0.clone(),
                Some(l) => l.iter().zip(&m.0).map(|(a, b)| *a.min(b)).collect(),
            });
        }
        lo.unwrap_or_else(|| vec![0; self.dim])
    }

    /// `(a, P)` with `self = X^a · P`, `P` a polynomial not divisible by any variable.
    pub fn strip_monomial(&self) -> (Vec<i64>, LaurentPoly) {
        let lo = self.min_exponents();
        let neg: Vec<i64> = lo.iter().map(|x| -x).collect();
        (lo, self.shift(&neg))
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one(self.dim);
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    pub fn evaluate(&self, x: &[BigRational]) -> Result<BigRational, LaurentError> {
        if x.len() != self.dim {
            return Err(LaurentError::Dimension {
                expected: self.dim,
                got: x.len(),
            });
        }
        if x.iter().any(Zero::is_zero) {
            return Err(LaurentError::ZeroCoordinate);
        }
        let mut total = BigRational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (xi, &e) in x.iter().zip(&m.0) {
                if e != 0 {
                    t *= pow_rat(xi, e);
                }
            }
            total += t;
        }
        Ok(total)
    }

    /// `F ∘ φ_A`, where `φ_A(y)_i = Π_j y_j^{A_ij}`; `A` is `dim × s`.
    pub fn monomial_substitute(&self, a: &IntMatrix) -> Result<Self, LaurentError> {
        if a.rows() != self.dim {
            return Err(LaurentError::Dimension {
                expected: self.dim,
                got: a.rows(),
            });
        }
        let s = a.cols();
        let rows = a.to_i64_rows().expect("substitution matrix entries exceed 64 bits");
        let mut out = Self::zero(s);
        for (m, c) in &self.terms {
            let mut e = vec![0i64; s];
            for (i, &ui) in m.0.iter().enumerate() {
                if ui != 0 {
                    for (j, ej) in e.iter_mut().enumerate() {
                        *ej += ui * rows[i][j];
                    }
                }
            }
            out.add_term(Monomial(e), c.clone());
        }
        Ok(out)
    }

    /// `F(t₁X₁, …, t_dX_d)`.
    pub fn scale_variables(&self, t: &[BigRational]) -> Result<Self, LaurentError> {
        if t.len() != self.dim {
            return Err(LaurentError::Dimension {
                expected: self.dim,
                got: t.len(),
            });
        }
        let mut out = Self::zero(self.dim);
        for (m, c) in &self.terms {
            let mut k = c.clone();
            for (ti, &e) in t.iter().zip(&m.0) {
                if e != 0 {
                    k *= pow_rat(ti, e);
                }
            }
            out.add_term(m.clone(), k);
        }
        Ok(out)
    }

    /// `X^{−u0}·F`.
    pub fn reduce_at(&self, u0: &[i64]) -> Result<Self, LaurentError> {
        if !self.terms.contains_key(&Monomial(u0.to_vec())) {
            return Err(LaurentError::NotInSupport(u0.to_vec()));
        }
        let neg: Vec<i64> = u0.iter().map(|x| -x).collect();
        Ok(self.shift(&neg))
    }

    /// Keep the first `k` variables; panics if a dropped variable occurs.
    pub fn truncate_dim(&self, k: usize) -> Self {
        let mut out = Self::zero(k);
        for (m, c) in &self.terms {
            assert!(m.0[k..].iter().all(|&x| x == 0), "dropped variable occurs");
            out.add_term(Monomial(m.0[..k].to_vec()), c.clone());
        }
        out
    }

    /// Same polynomial in more variables.
    pub fn extend_dim(&self, k: usize) -> Self {
        assert!(k >= self.dim);
        let mut out = Self::zero(k);
        for (m, c) in &self.terms {
            let mut e = m.0.clone();
            e.resize(k, 0);
            out.add_term(Monomial(e), c.clone());
        }
        out
    }

    /// Whether `other = c·X^u·self` for a constant `c` and monomial `X^u`.
    pub fn is_associate(&self, other: &Self) -> bool {
        if self.dim != other.dim || self.is_zero() || other.is_zero() {
            return false;
        }
        matches!(exact_divide(other, self), Ok(Some(q)) if q.is_unit())
    }

    /// Divides by the leading coefficient.
    pub fn monic(&self) -> Self {
        match self.leading() {
            Some((_, c)) => self.scale(&c.recip()),
            None => self.clone(),
        }
    }
}

impl std::ops::Add for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl std::ops::Sub for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl std::ops::Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        self.scale(&-BigRational::one())
    }
}

impl std::ops::Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let mut out = LaurentPoly::zero(self.dim);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                let e = m1.0.iter().zip(&m2.0).map(|(a, b)| a + b).collect();
                out.add_term(Monomial(e), c1 * c2);
            }
        }
        out
    }
}

fn write_monomial(f: &mut fmt::Formatter<'_>, e: &[i64]) -> fmt::Result {
    let mut first = true;
    for (i, &x) in e.iter().enumerate() {
        if x == 0 {
            continue;
        }
        if !first {
            write!(f, "*")?;
        }
        first = false;
        write!(f, "X{}", i + 1)?;
        if x != 1 {
            write!(f, "^{x}")?;
        }
    }
    Ok(())
}

/// Terms in descending graded-lex order, e.g. `X1*X2 - 1`, `3/2*X1^-1 + 2`.
impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            match (k == 0, neg) {
                (true, true) => write!(f, "-")?,
                (true, false) => {}
                (false, true) => write!(f, " - ")?,
                (false, false) => write!(f, " + ")?,
            }
            let a = c.abs();
            let is_const = m.0.iter().all(|&x| x == 0);
            if is_const {
                write!(f, "{}", format_rational(&a))?;
            } else {
                if !a.is_one() {
                    write!(f, "{}*", format_rational(&a))?;
                }
                write_monomial(f, &m.0)?;
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    exponents: Vec<i64>,
    coeff: String,
}

impl Serialize for LaurentPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<TermJson> = self
            .terms
            .iter()
            .rev()
            .map(|(m, c)| TermJson {
                exponents: m.0.clone(),
                coeff: format_rational(c),
            })
            .collect();
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for LaurentPoly {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let v = Vec::<TermJson>::deserialize(d)?;
        let dim = v.first().map_or(0, |t| t.exponents.len());
        let mut p = LaurentPoly::zero(dim);
        for t in v {
            if t.exponents.len() != dim {
                return Err(D::Error::custom("inconsistent exponent lengths"));
            }
            let c = parse_rational(&t.coeff).map_err(D::Error::custom)?;
            p.add_term(Monomial(t.exponents), c);
        }
        Ok(p)
    }
}

/// Exponents as integers, for lattice work over the support.
pub(crate) fn exps_to_bigint(e: &[i64]) -> Vec<BigInt> {
    e.iter().map(|&x| BigInt::from(x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn p(s: &str, d: usize) -> LaurentPoly {
        LaurentPoly::parse(s, d).unwrap()
    }

    #[test]
    fn parse_examples() {
        let f = p("X1*X2 - 1", 2);
        assert_eq!(f, LaurentPoly::from_terms(2, [(vec![1, 1], q(1, 1)), (vec![0, 0], q(-1, 1))]));
        let f = p("X1^-1 + 2", 1);
        assert_eq!(f, LaurentPoly::from_terms(1, [(vec![-1], q(1, 1)), (vec![0], q(2, 1))]));
        let f = p("X1^2 - 1", 1);
        assert_eq!(f, LaurentPoly::from_terms(1, [(vec![2], q(1, 1)), (vec![0], q(-1, 1))]));
    }

    #[test]
    fn display_round_trips() {
        for (s, d) in [
            ("X1*X2 - 1", 2),
            ("2 + X1^-1", 1),
            ("-3/2*X1^2*X2^-1 + X2 - 7", 2),
            ("0", 3),
            ("X1 + X2 + X3 - 1", 3),
        ] {
            let f = p(s, d);
            assert_eq!(p(&f.to_string(), d), f, "{s}");
            assert_eq!(f.to_string(), p(&f.to_string(), d).to_string());
        }
        assert_eq!(p("X1*X2 - 1", 2).to_string(), "X1*X2 - 1");
        assert_eq!(p("2 + X1^-1", 1).to_string(), "2 + X1^-1");
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(p("X1*X2 - 1", 2).evaluate(&[q(2, 1), q(1, 2)]).unwrap(), q(0, 1));
        assert_eq!(p("X1^2 - 1", 1).evaluate(&[q(3, 1)]).unwrap(), q(8, 1));
        assert_eq!(p("X1 + X2 - 1", 2).evaluate(&[q(2, 1), q(3, 1)]).unwrap(), q(4, 1));
        assert!(matches!(
            p("X1", 1).evaluate(&[q(1, 1), q(1, 1)]),
            Err(LaurentError::Dimension { .. })
        ));
    }

    #[test]
    fn substitute_examples() {
        let a = IntMatrix::from_i64(&[&[2]]);
        assert_eq!(p("X1 - 1", 1).monomial_substitute(&a).unwrap(), p("X1^2 - 1", 1));
        let a = IntMatrix::from_i64(&[&[1, 0]]);
        assert_eq!(p("X1 - 1", 1).monomial_substitute(&a).unwrap(), p("X1 - 1", 2));
        let a = IntMatrix::from_i64(&[&[1, 1]]);
        assert_eq!(p("X1 - 1", 1).monomial_substitute(&a).unwrap(), p("X1*X2 - 1", 2));
    }

    #[test]
    fn reduce_at_examples() {
        assert_eq!(p("X1^3 - X1", 1).reduce_at(&[1]).unwrap(), p("X1^2 - 1", 1));
        assert_eq!(p("X1*X2 - 1", 2).reduce_at(&[0, 0]).unwrap(), p("X1*X2 - 1", 2));
        assert_eq!(
            p("X1^-1*X2 - 2*X1", 2).reduce_at(&[-1, 1]).unwrap(),
            p("1 - 2*X1^2*X2^-1", 2)
        );
        assert!(p("X1 - 1", 1).reduce_at(&[2]).is_err());
    }

    #[test]
    fn json_form() {
        let f = p("X1*X2 - 1/2", 2);
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, r#"[{"exponents":[1,1],"coeff":"1"},{"exponents":[0,0],"coeff":"-1/2"}]"#);
        assert_eq!(serde_json::from_str::<LaurentPoly>(&s).unwrap(), f);
    }

    pub(crate) fn arb_poly(dim: usize, max_terms: usize, max_exp: i64) -> impl Strategy<Value = LaurentPoly> {
        proptest::collection::vec(
            (proptest::collection::vec(-max_exp..=max_exp, dim), -50i64..=50, 1i64..=5),
            1..=max_terms,
        )
        .prop_map(move |ts| LaurentPoly::from_terms(dim, ts.into_iter().map(|(e, n, d)| (e, q(n, d)))))
    }

    fn arb_matrix(r: usize, c: usize) -> impl Strategy<Value = IntMatrix> {
        proptest::collection::vec(-3i64..=3, r * c).prop_map(move |xs| {
            IntMatrix::from_rows_with_cols(
                xs.chunks(c.max(1)).take(r).map(|ch| ch.iter().map(|&x| BigInt::from(x)).collect()).collect(),
                c,
            )
        })
    }

    proptest! {
        #[test]
        fn substitution_is_functorial(f in arb_poly(2, 5, 3), a in arb_matrix(2, 3), b in arb_matrix(3, 2)) {
            let ab = a.mul(&b);
            let lhs = f.monomial_substitute(&ab).unwrap();
            let rhs = f.monomial_substitute(&a).unwrap().monomial_substitute(&b).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn substitution_matches_evaluation(f in arb_poly(2, 5, 3), a in arb_matrix(2, 2), y in proptest::collection::vec((1i64..=7, 1i64..=7), 2)) {
            let ys: Vec<BigRational> = y.iter().map(|&(n, d)| q(n, d)).collect();
            let image: Vec<BigRational> = (0..2)
                .map(|i| {
                    let mut t = BigRational::one();
                    for (j, yj) in ys.iter().enumerate() {
                        t *= pow_rat(yj, num_traits::ToPrimitive::to_i64(&a[(i, j)]).unwrap());
                    }
                    t
                })
                .collect();
            let g = f.monomial_substitute(&a).unwrap();
            prop_assert_eq!(g.evaluate(&ys).unwrap(), f.evaluate(&image).unwrap());
        }

        #[test]
        fn substitution_is_multiplicative(f in arb_poly(2, 4, 2), g in arb_poly(2, 4, 2), a in arb_matrix(2, 3)) {
            let lhs = (&f * &g).monomial_substitute(&a).unwrap();
            let rhs = &f.monomial_substitute(&a).unwrap() * &g.monomial_substitute(&a).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
