//! Nonzero rationals stored as a sign and a prime → exponent map, and the
//! S-integer divisibility and support built on them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Mul, Neg};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::factor::{Factorization, Factorizer};
use super::primes::PrimeSet;
use super::rational::format_rational;
use super::ArithError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn flip(self) -> Self {
        match self {
            Sign::Positive => Sign::Negative,
            Sign::Negative => Sign::Positive,
        }
    }

    pub fn times(self, other: Sign) -> Sign {
        if self == other {
            Sign::Positive
        } else {
            Sign::Negative
        }
    }

    /// `self^e`.
    pub fn pow(self, e: &BigInt) -> Sign {
        if self == Sign::Negative && e.is_odd() {
            Sign::Negative
        } else {
            Sign::Positive
        }
    }
}

/// `(−1)^s · Π p^e`, never zero. Zero exponents are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FactoredRational {
    sign: Sign,
    exponents: BTreeMap<BigUint, i64>,
}

impl FactoredRational {
    pub fn one() -> Self {
        Self {
            sign: Sign::Positive,
            exponents: BTreeMap::new(),
        }
    }

    pub fn minus_one() -> Self {
        Self {
            sign: Sign::Negative,
            exponents: BTreeMap::new(),
        }
    }

    /// Builds from parts, dropping zero exponents. Keys are trusted to be prime.
    pub fn from_parts(sign: Sign, exponents: impl IntoIterator<Item = (BigUint, i64)>) -> Self {
        let mut map = BTreeMap::new();
        for (p, e) in exponents {
            *map.entry(p).or_insert(0) += e;
        }
        map.retain(|_, e| *e != 0);
        Self { sign, exponents: map }
    }

    pub fn prime(p: BigUint) -> Self {
        Self::from_parts(Sign::Positive, [(p, 1)])
    }

    /// `factor(n)` for a nonzero integer.
    pub fn factor_integer(n: &BigInt, factorizer: &Factorizer) -> Result<Self, ArithError> {
        if n.is_zero() {
            return Err(ArithError::ZeroInput);
        }
        let f = factorizer.factor(n)?;
        Ok(Self::from_factorization(sign_of(n), &f, 1))
    }

    pub fn factor_rational(q: &BigRational, factorizer: &Factorizer) -> Result<Self, ArithError> {
        if q.is_zero() {
            return Err(ArithError::ZeroInput);
        }
        let num = factorizer.factor(q.numer())?;
        let den = factorizer.factor(q.denom())?;
        let sign = sign_of(q.numer()).times(sign_of(q.denom()));
        let mut out = Self::from_factorization(sign, &num, 1);
        for (p, e) in den {
            *out.exponents.entry(p).or_insert(0) -= e as i64;
        }
        out.exponents.retain(|_, e| *e != 0);
        Ok(out)
    }

    /// Factors `q` using only the given primes; `None` if anything is left.
    pub fn over_primes<'a>(q: &BigRational, primes: impl IntoIterator<Item = &'a BigUint>) -> Option<Self> {
        if q.is_zero() {
            return None;
        }
        let mut num = q.numer().magnitude().clone();
        let mut den = q.denom().magnitude().clone();
        let mut map = BTreeMap::new();
        for p in primes {
            let mut e = 0i64;
            while (&num % p).is_zero() {
                num /= p;
                e += 1;
            }
            while (&den % p).is_zero() {
                den /= p;
                e -= 1;
            }
            if e != 0 {
                map.insert(p.clone(), e);
            }
        }
        if !num.is_one() || !den.is_one() {
            return None;
        }
        Some(Self {
            sign: sign_of(q.numer()).times(sign_of(q.denom())),
            exponents: map,
        })
    }

    fn from_factorization(sign: Sign, f: &Factorization, scale: i64) -> Self {
        Self {
            sign,
            exponents: f.iter().map(|(p, &e)| (p.clone(), e as i64 * scale)).collect(),
        }
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn exponents(&self) -> &BTreeMap<BigUint, i64> {
        &self.exponents
    }

    pub fn primes(&self) -> impl Iterator<Item = &BigUint> {
        self.exponents.keys()
    }

    pub fn is_one(&self) -> bool {
        self.sign == Sign::Positive && self.exponents.is_empty()
    }

    pub fn abs(&self) -> Self {
        Self {
            sign: Sign::Positive,
            exponents: self.exponents.clone(),
        }
    }

    pub fn valuation(&self, p: &BigUint) -> i64 {
        self.exponents.get(p).copied().unwrap_or(0)
    }

    pub fn inv(&self) -> Self {
        Self {
            sign: self.sign,
            exponents: self.exponents.iter().map(|(p, e)| (p.clone(), -e)).collect(),
        }
    }

    pub fn pow(&self, e: i64) -> Self {
        if e == 0 {
            return Self::one();
        }
        Self {
            sign: self.sign.pow(&BigInt::from(e)),
            exponents: self.exponents.iter().map(|(p, x)| (p.clone(), x * e)).collect(),
        }
    }

    /// Exact rational value.
    pub fn value(&self) -> BigRational {
        let mut num = BigInt::one();
        let mut den = BigInt::one();
        for (p, &e) in &self.exponents {
            let pp = BigInt::from(p.clone()).pow(e.unsigned_abs() as u32);
            if e > 0 {
                num *= pp;
            } else {
                den *= pp;
            }
        }
        if self.sign == Sign::Negative {
            num = -num;
        }
        BigRational::new(num, den)
    }

    /// Valuation ≥ 0 at every prime outside `S`.
    pub fn is_s_integer(&self, s: &PrimeSet) -> bool {
        self.exponents.iter().all(|(p, &e)| e >= 0 || s.contains(p))
    }

    /// Valuation = 0 at every prime outside `S`.
    pub fn is_s_unit(&self, s: &PrimeSet) -> bool {
        self.exponents.keys().all(|p| s.contains(p))
    }
}

fn sign_of(n: &BigInt) -> Sign {
    if n.is_negative() {
        Sign::Negative
    } else {
        Sign::Positive
    }
}

impl Mul for &FactoredRational {
    type Output = FactoredRational;
    fn mul(self, rhs: &FactoredRational) -> FactoredRational {
        let mut exponents = self.exponents.clone();
        for (p, e) in &rhs.exponents {
            *exponents.entry(p.clone()).or_insert(0) += e;
        }
        exponents.retain(|_, e| *e != 0);
        FactoredRational {
            sign: self.sign.times(rhs.sign),
            exponents,
        }
    }
}

impl Neg for FactoredRational {
    type Output = FactoredRational;
    fn neg(mut self) -> FactoredRational {
        self.sign = self.sign.flip();
        self
    }
}

impl fmt::Display for FactoredRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", format_rational(&self.value()))
    }
}

/// Exponent of `p` in `q`; 0 when absent.
pub fn valuation(q: &FactoredRational, p: &BigUint) -> i64 {
    q.valuation(p)
}

/// `a | b` in `O_S`: `v_p(b) ≥ v_p(a)` for every prime `p ∉ S`.
pub fn s_divides(a: &FactoredRational, b: &FactoredRational, s: &PrimeSet) -> Result<bool, ArithError> {
    for q in [a, b] {
        if !q.is_s_integer(s) {
            return Err(ArithError::NotSInteger(q.to_string()));
        }
    }
    let primes: BTreeSet<&BigUint> = a.primes().chain(b.primes()).collect();
    Ok(primes
        .into_iter()
        .filter(|p| !s.contains(p))
        .all(|p| b.valuation(p) >= a.valuation(p)))
}

/// `{p ∉ S : v_p(q) ≥ 1}`.
pub fn s_support(q: &FactoredRational, s: &PrimeSet) -> Result<BTreeSet<BigUint>, ArithError> {
    if !q.is_s_integer(s) {
        return Err(ArithError::NotSInteger(q.to_string()));
    }
    Ok(q.exponents
        .iter()
        .filter(|(p, &e)| e >= 1 && !s.contains(p))
        .map(|(p, _)| p.clone())
        .collect())
}
