//! Exact arithmetic: factored rationals, primality, factorization and
//! divisibility in rings of S-integers.

mod factor;
mod factored;
mod primes;
pub mod rational;

pub use factor::{FactorConfig, FactorError, Factorization, Factorizer};
pub use factored::{s_divides, s_support, valuation, FactoredRational, Sign};
pub use primes::{is_prime, is_prime_u64, sieve, small_primes, PrimeSet};
pub use rational::{format_rational, parse_rational};

use num_bigint::BigUint;
use thiserror::Error;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ArithError {
    #[error("zero has no factorization")]
    ZeroInput,
    #[error("{0} is not prime")]
    NotPrime(BigUint),
    #[error("{0} is not an S-integer")]
    NotSInteger(String),
    #[error("malformed rational {0:?}")]
    RationalParse(String),
    #[error(transparent)]
    Factorization(#[from] FactorError),
}
