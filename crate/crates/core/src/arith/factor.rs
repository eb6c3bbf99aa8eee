//! Integer factorization: trial division to a configured bound, then
//! Pollard rho with Brent's cycle detection over Montgomery arithmetic.
//!
//! Failure is never silent. A cofactor the rho budget cannot split is
//! returned inside [`FactorError::Incomplete`] together with everything
//! found so far.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::primes::{is_prime, small_primes};

/// Prime → multiplicity.
pub type Factorization = BTreeMap<BigUint, u32>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorConfig {
    /// Trial division covers every prime up to this bound.
    pub trial_bound: u32,
    /// Cofactors left after trial division must have at most this many bits.
    pub max_bits: u64,
    /// Total Pollard rho iterations allowed per cofactor.
    pub rho_iterations: u64,
    pub seed: u64,
}

impl Default for FactorConfig {
    fn default() -> Self {
        Self {
            trial_bound: 1_000_000,
            max_bits: 256,
            rho_iterations: 1 << 26,
            seed: 0x5eed,
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum FactorError {
    #[error("cannot factor zero")]
    Zero,
    #[error("cofactor {cofactor} has {bits} bits, above the configured {limit}-bit bound")]
    TooLarge {
        cofactor: BigUint,
        bits: u64,
        limit: u64,
        partial: Factorization,
    },
    #[error("rho budget exhausted on composite cofactor {cofactor}")]
    Incomplete {
        cofactor: BigUint,
        partial: Factorization,
    },
}

impl FactorError {
    pub fn cofactor(&self) -> Option<&BigUint> {
        match self {
            FactorError::Zero => None,
            FactorError::TooLarge { cofactor, .. } | FactorError::Incomplete { cofactor, .. } => {
                Some(cofactor)
            }
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Factorizer {
    config: FactorConfig,
}

impl Factorizer {
    pub fn new(config: FactorConfig) -> Self {
        Self { config }
    }

    pub fn config(&self) -> &FactorConfig {
        &self.config
    }

    /// Factors |n|. The sign is the caller's business.
    pub fn factor(&self, n: &BigInt) -> Result<Factorization, FactorError> {
        if n.is_zero() {
            return Err(FactorError::Zero);
        }
        self.factor_natural(n.magnitude(), &[])
    }

    /// Factors `n`, first dividing out the supplied primes. Hints must be
    /// prime; they let a scan reuse primes found at earlier steps.
    pub fn factor_natural(&self, n: &BigUint, hints: &[BigUint]) -> Result<Factorization, FactorError> {
        if n.is_zero() {
            return Err(FactorError::Zero);
        }
        let mut found = Factorization::new();
        let mut rest = n.clone();
        for p in hints {
            if rest.is_one() {
                break;
            }
            let e = divide_out(&mut rest, p);
            if e > 0 {
                *found.entry(p.clone()).or_default() += e;
            }
        }
        if rest.is_one() {
            return Ok(found);
        }

        let bound = self.config.trial_bound.min(1_000_000);
        if let Some(mut small) = rest.to_u64() {
            // fast path, entirely in machine words
            for &p in small_primes() {
                if p > bound {
                    break;
                }
                let p = p as u64;
                if p * p > small {
                    break;
                }
                let mut e = 0;
                while small % p == 0 {
                    small /= p;
                    e += 1;
                }
                if e > 0 {
                    *found.entry(BigUint::from(p)).or_default() += e;
                }
            }
            rest = BigUint::from(small);
        } else {
            for &p in small_primes() {
                if p > bound {
                    break;
                }
                let pb = BigUint::from(p);
                if &pb * &pb > rest {
                    break;
                }
                if (&rest % p).is_zero() {
                    let e = divide_out(&mut rest, &pb);
                    *found.entry(pb).or_default() += e;
                }
            }
        }
        if rest.is_one() {
            return Ok(found);
        }

        let bound_sq = BigUint::from(bound as u64) * BigUint::from(bound as u64);
        let mut stack = vec![rest];
        while let Some(m) = stack.pop() {
            if m.is_one() {
                continue;
            }
            // every prime factor of m exceeds the trial bound
            if m < bound_sq || is_prime(&m) {
                *found.entry(m).or_default() += 1;
                continue;
            }
            if let Some((base, k)) = perfect_power(&m) {
                for _ in 0..k {
                    stack.push(base.clone());
                }
                continue;
            }
            let bits = m.bits();
            if bits > self.config.max_bits {
                let mut partial = found.clone();
                absorb_rest(&mut partial, &stack);
                return Err(FactorError::TooLarge {
                    cofactor: m,
                    bits,
                    limit: self.config.max_bits,
                    partial,
                });
            }
            match self.split(&m) {
                Some(d) => {
                    let q = &m / &d;
                    stack.push(d);
                    stack.push(q);
                }
                None => {
                    let mut partial = found.clone();
                    absorb_rest(&mut partial, &stack);
                    return Err(FactorError::Incomplete { cofactor: m, partial });
                }
            }
        }
        Ok(found)
    }

    /// Finds a nontrivial divisor of an odd composite that is not a perfect power.
    fn split(&self, n: &BigUint) -> Option<BigUint> {
        let limbs = n.to_u64_digits().len();
        let seed = self.config.seed ^ (n.bits().wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let budget = self.config.rho_iterations;
        match limbs {
            1 => rho_brent::<1>(n, budget, seed),
            2 => rho_brent::<2>(n, budget, seed),
            3 => rho_brent::<3>(n, budget, seed),
            4 => rho_brent::<4>(n, budget, seed),
            5 => rho_brent::<5>(n, budget, seed),
            6 => rho_brent::<6>(n, budget, seed),
            7 => rho_brent::<7>(n, budget, seed),
            8 => rho_brent::<8>(n, budget, seed),
            _ => None,
        }
    }
}

// Primes recorded in `partial` plus the composite siblings still on the stack
// are reported; composites stay out of `partial`, so it lists primes only.
fn absorb_rest(partial: &mut Factorization, stack: &[BigUint]) {
    for m in stack {
        if !m.is_one() && is_prime(m) {
            *partial.entry(m.clone()).or_default() += 1;
        }
    }
}

fn divide_out(n: &mut BigUint, p: &BigUint) -> u32 {
    let mut e = 0;
    loop {
        let (q, r) = n.div_rem(p);
        if !r.is_zero() {
            break;
        }
        *n = q;
        e += 1;
    }
    e
}

fn perfect_power(n: &BigUint) -> Option<(BigUint, u32)> {
    let bits = n.bits() as u32;
    for &k in small_primes().iter().take_while(|&&p| p <= bits) {
        let r = n.nth_root(k);
        if r.pow(k) == *n {
            // prefer the smallest base
            return Some(match perfect_power(&r) {
                Some((b, j)) => (b, j * k),
                None => (r, k),
            });
        }
    }
    None
}

/// Montgomery arithmetic modulo an odd `n < 2^(64N)`.
struct Montgomery<const N: usize> {
    n: [u64; N],
    ninv: u64,
    r2: [u64; N],
}

fn limbs<const N: usize>(x: &BigUint) -> [u64; N] {
    let mut out = [0u64; N];
    for (o, d) in out.iter_mut().zip(x.to_u64_digits()) {
        *o = d;
    }
    out
}

fn from_limbs<const N: usize>(x: &[u64; N]) -> BigUint {
    let mut bytes = Vec::with_capacity(8 * N);
    for limb in x {
        bytes.extend_from_slice(&limb.to_le_bytes());
    }
    BigUint::from_bytes_le(&bytes)
}

fn geq<const N: usize>(a: &[u64; N], b: &[u64; N]) -> bool {
    for i in (0..N).rev() {
        if a[i] != b[i] {
            return a[i] > b[i];
        }
    }
    true
}

fn sub_in_place<const N: usize>(a: &mut [u64; N], b: &[u64; N]) -> bool {
    let mut borrow = false;
    for i in 0..N {
        let (d, b1) = a[i].overflowing_sub(b[i]);
        let (d, b2) = d.overflowing_sub(borrow as u64);
        a[i] = d;
        borrow = b1 || b2;
    }
    borrow
}

fn add_in_place<const N: usize>(a: &mut [u64; N], b: &[u64; N]) -> bool {
    let mut carry = false;
    for i in 0..N {
        let (s, c1) = a[i].overflowing_add(b[i]);
        let (s, c2) = s.overflowing_add(carry as u64);
        a[i] = s;
        carry = c1 || c2;
    }
    carry
}

impl<const N: usize> Montgomery<N> {
    fn new(n: &BigUint) -> Self {
        let nl = limbs::<N>(n);
        let n0 = nl[0];
        let mut inv: u64 = 1;
        for _ in 0..6 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(n0.wrapping_mul(inv)));
        }
        let r2 = (BigUint::one() << (128 * N)) % n;
        Self {
            n: nl,
            ninv: inv.wrapping_neg(),
            r2: limbs::<N>(&r2),
        }
    }

    // CIOS multiplication; inputs < n, output < n.
    fn mul(&self, a: &[u64; N], b: &[u64; N]) -> [u64; N] {
        let mut t = [0u64; 10];
        for i in 0..N {
            let mut carry = 0u64;
            for j in 0..N {
                let s = t[j] as u128 + (a[i] as u128) * (b[j] as u128) + carry as u128;
                t[j] = s as u64;
                carry = (s >> 64) as u64;
            }
            let s = t[N] as u128 + carry as u128;
            t[N] = s as u64;
            t[N + 1] = (s >> 64) as u64;

            let m = t[0].wrapping_mul(self.ninv);
            let s = t[0] as u128 + (m as u128) * (self.n[0] as u128);
            let mut carry = (s >> 64) as u64;
            for j in 1..N {
                let s = t[j] as u128 + (m as u128) * (self.n[j] as u128) + carry as u128;
                t[j - 1] = s as u64;
                carry = (s >> 64) as u64;
            }
            let s = t[N] as u128 + carry as u128;
            t[N - 1] = s as u64;
            t[N] = t[N + 1] + (s >> 64) as u64;
            t[N + 1] = 0;
        }
        let mut res = [0u64; N];
        res.copy_from_slice(&t[..N]);
        if t[N] != 0 || geq(&res, &self.n) {
            sub_in_place(&mut res, &self.n);
        }
        res
    }

    fn to_mont(&self, x: &BigUint) -> [u64; N] {
        self.mul(&limbs::<N>(x), &self.r2)
    }

    fn add(&self, a: &[u64; N], b: &[u64; N]) -> [u64; N] {
        let mut r = *a;
        let carry = add_in_place(&mut r, b);
        if carry || geq(&r, &self.n) {
            sub_in_place(&mut r, &self.n);
        }
        r
    }

    fn sub(&self, a: &[u64; N], b: &[u64; N]) -> [u64; N] {
        let mut r = *a;
        if sub_in_place(&mut r, b) {
            add_in_place(&mut r, &self.n);
        }
        r
    }
}

const BATCH: u64 = 128;

#[allow(unused_assignments)]
fn rho_brent<const N: usize>(n: &BigUint, budget: u64, seed: u64) -> Option<BigUint> {
    if n.is_even() {
        return Some(BigUint::from(2u32));
    }
    let mont = Montgomery::<N>::new(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spent = 0u64;
    while spent < budget {
        let c = mont.to_mont(&(BigUint::from(rng.gen_range(1u64..u64::MAX)) % n));
        let x0 = mont.to_mont(&(BigUint::from(rng.gen_range(2u64..u64::MAX)) % n));
        let f = |x: &[u64; N]| mont.add(&mont.mul(x, x), &c);

        let mut y = x0;
        let mut x;
        let mut ys = y;
        let mut q = mont.to_mont(&BigUint::one());
        let mut r = 1u64;
        let mut g = BigUint::one();
        'outer: loop {
            x = y;
            for _ in 0..r {
                y = f(&y);
            }
            spent += r;
            let mut k = 0;
            while k < r {
                ys = y;
                let steps = BATCH.min(r - k);
                for _ in 0..steps {
                    y = f(&y);
                    q = mont.mul(&q, &mont.sub(&x, &y));
                }
                spent += steps;
                g = from_limbs(&q).gcd(n);
                k += steps;
                if !g.is_one() {
                    break 'outer;
                }
                if spent >= budget {
                    break 'outer;
                }
            }
            r *= 2;
        }
        if g == *n {
            // the batch overshot; walk it one step at a time
            loop {
                ys = f(&ys);
                g = from_limbs(&mont.sub(&x, &ys)).gcd(n);
                if !g.is_one() {
                    break;
                }
            }
        }
        if !g.is_one() && g != *n {
            return Some(g);
        }
    }
    None
}
