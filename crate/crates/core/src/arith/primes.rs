//! Primality testing and the finite prime sets `S` that define rings of
//! S-integers.
//!
//! Below 3.3·10²⁴ Miller–Rabin with the first thirteen prime bases is
//! deterministic. Above that bound we run Baillie–PSW (strong base-2
//! Miller–Rabin followed by a strong Lucas test with Selfridge parameters).

use std::collections::BTreeSet;
use std::fmt;
use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

use super::ArithError;

const SIEVE_LIMIT: usize = 1_000_000;

/// Primes up to 10⁶, computed once.
pub fn small_primes() -> &'static [u32] {
    static PRIMES: OnceLock<Vec<u32>> = OnceLock::new();
    PRIMES.get_or_init(|| sieve(SIEVE_LIMIT))
}

pub fn sieve(limit: usize) -> Vec<u32> {
    if limit < 2 {
        return Vec::new();
    }
    let mut composite = vec![false; limit + 1];
    let mut out = Vec::new();
    for i in 2..=limit {
        if !composite[i] {
            out.push(i as u32);
            let mut j = i * i;
            while j <= limit {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

const MR_BASES: [u64; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

fn deterministic_mr_bound() -> &'static BigUint {
    static BOUND: OnceLock<BigUint> = OnceLock::new();
    // psi_13 = 3317044064679887385961981
    BOUND.get_or_init(|| "3317044064679887385961981".parse().unwrap())
}

fn mulmod64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn powmod64(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u64 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod64(r, b, m);
        }
        b = mulmod64(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic primality for 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_BASES[..12] {
        if n % p == 0 {
            return n == p;
        }
    }
    let d0 = n - 1;
    let s = d0.trailing_zeros();
    let d = d0 >> s;
    'bases: for &a in &MR_BASES[..12] {
        let mut x = powmod64(a, d, n);
        if x == 1 || x == d0 {
            continue;
        }
        for _ in 1..s {
            x = mulmod64(x, x, n);
            if x == d0 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

fn strong_probable_prime(n: &BigUint, base: &BigUint) -> bool {
    let one = BigUint::one();
    let n1 = n - &one;
    let s = n1.trailing_zeros().unwrap_or(0);
    let d = &n1 >> s;
    let mut x = base.modpow(&d, n);
    if x == one || x == n1 {
        return true;
    }
    for _ in 1..s {
        x = (&x * &x) % n;
        if x == n1 {
            return true;
        }
        if x == one {
            return false;
        }
    }
    false
}

fn jacobi(a: &BigInt, n: &BigUint) -> i32 {
    let n_big = BigInt::from_biguint(Sign::Plus, n.clone());
    let mut a = a.mod_floor(&n_big).to_biguint().unwrap();
    let mut n = n.clone();
    let mut result = 1;
    while !a.is_zero() {
        while a.is_even() {
            a >>= 1;
            let r = (&n % 8u32).to_u32().unwrap();
            if r == 3 || r == 5 {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if (&a % 4u32).to_u32() == Some(3) && (&n % 4u32).to_u32() == Some(3) {
            result = -result;
        }
        a %= &n;
    }
    if n.is_one() {
        result
    } else {
        0
    }
}

fn is_perfect_square(n: &BigUint) -> bool {
    let r = n.sqrt();
    &r * &r == *n
}

/// Strong Lucas probable-prime test with Selfridge's method A parameters.
fn strong_lucas(n: &BigUint) -> bool {
    if is_perfect_square(n) {
        return false;
    }
    let mut d = BigInt::from(5);
    loop {
        match jacobi(&d, n) {
            -1 => break,
            0 => {
                let ad = d.magnitude();
                return ad == n;
            }
            _ => {}
        }
        let two = BigInt::from(2);
        d = if d.sign() == Sign::Plus { -(d + two) } else { -(d - two) };
    }
    let nn = BigInt::from_biguint(Sign::Plus, n.clone());
    let p = BigInt::one();
    let q: BigInt = (BigInt::one() - &d) / 4;
    let n1 = n + 1u32;
    let s = n1.trailing_zeros().unwrap_or(0);
    let k = &n1 >> s;

    let md = |x: BigInt| x.mod_floor(&nn);
    let half = |x: BigInt| {
        let x = if x.is_odd() { x + &nn } else { x };
        md(x / 2)
    };

    // binary Lucas chain for U_k, V_k, Q^k
    let mut u = BigInt::zero();
    let mut v = BigInt::from(2);
    let mut qk = BigInt::one();
    let bits = k.bits();
    for i in (0..bits).rev() {
        // double
        u = md(&u * &v);
        v = md(&v * &v - 2 * &qk);
        qk = md(&qk * &qk);
        if k.bit(i) {
            let nu = half(&p * &u + &v);
            let nv = half(&d * &u + &p * &v);
            u = nu;
            v = nv;
            qk = md(&qk * &q);
        }
    }
    if u.is_zero() || v.is_zero() {
        return true;
    }
    for _ in 1..s {
        v = md(&v * &v - 2 * &qk);
        if v.is_zero() {
            return true;
        }
        qk = md(&qk * &qk);
    }
    false
}

/// Primality test for arbitrary-precision naturals.
pub fn is_prime(n: &BigUint) -> bool {
    if let Some(small) = n.to_u64() {
        return is_prime_u64(small);
    }
    for &p in &small_primes()[..200] {
        if (n % p).is_zero() {
            return false;
        }
    }
    if n < deterministic_mr_bound() {
        MR_BASES
            .iter()
            .all(|&a| strong_probable_prime(n, &BigUint::from(a)))
    } else {
        strong_probable_prime(n, &BigUint::from(2u32)) && strong_lucas(n)
    }
}

/// The finite set `S` of rational primes defining `O_S`. The archimedean
/// place is always implicit.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct PrimeSet {
    primes: BTreeSet<BigUint>,
}

impl PrimeSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new<I>(primes: I) -> Result<Self, ArithError>
    where
        I: IntoIterator,
        I::Item: Into<BigUint>,
    {
        let mut set = BTreeSet::new();
        for p in primes {
            let p = p.into();
            if !is_prime(&p) {
                return Err(ArithError::NotPrime(p));
            }
            set.insert(p);
        }
        Ok(Self { primes: set })
    }

    pub fn contains(&self, p: &BigUint) -> bool {
        self.primes.contains(p)
    }

    pub fn iter(&self) -> impl Iterator<Item = &BigUint> {
        self.primes.iter()
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    /// Inserts an already-verified prime. Returns true if it was new.
    pub(crate) fn insert_prime(&mut self, p: BigUint) -> bool {
        debug_assert!(is_prime(&p));
        self.primes.insert(p)
    }

    pub fn union(&self, other: &PrimeSet) -> PrimeSet {
        PrimeSet {
            primes: self.primes.union(&other.primes).cloned().collect(),
        }
    }

    /// Divides out every prime of `S` from `n`.
    pub fn strip(&self, n: &BigUint) -> BigUint {
        let mut n = n.clone();
        if n.is_zero() {
            return n;
        }
        for p in &self.primes {
            while (&n % p).is_zero() {
                n /= p;
            }
        }
        n
    }
}

impl fmt::Display for PrimeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, p) in self.primes.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "}}")
    }
}

// Prime sets serialize as ascending JSON integer arrays. Primes that do
// not fit in a u64 are written as decimal strings.
impl Serialize for PrimeSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.primes.len()))?;
        for p in &self.primes {
            match p.to_u64() {
                Some(x) => seq.serialize_element(&x)?,
                None => seq.serialize_element(&p.to_string())?,
            }
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for PrimeSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Entry {
            Int(u64),
            Str(String),
        }
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = PrimeSet;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an array of primes")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<PrimeSet, A::Error> {
                let mut out = Vec::new();
                while let Some(e) = seq.next_element::<Entry>()? {
                    let p = match e {
                        Entry::Int(x) => BigUint::from(x),
                        Entry::Str(s) => s.trim().parse::<BigUint>().map_err(de::Error::custom)?,
                    };
                    out.push(p);
                }
                PrimeSet::new(out).map_err(de::Error::custom)
            }
        }
        deserializer.deserialize_seq(V)
    }
}
