//! Exact coefficient arithmetic: rationals, Gaussian rationals, the formal
//! parameters hbar, eps^(1/2) and mu, Bernoulli numbers and truncated
//! univariate power series.

mod bernoulli;
mod gaussian;
mod poly;
pub mod series;

use num_bigint::BigInt;
use num_traits::{One, Zero};

pub use bernoulli::{bernoulli, bernoulli_abs};
pub use gaussian::Gaussian;
pub use poly::{scalar_arith, Scalar, ScalarKey, ScalarOp, ScalarPoly, Trunc};
pub use series::TruncSeries;

pub type Rational = num_rational::BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

pub fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

pub fn factorial_q(n: u32) -> Rational {
    Rational::from_integer(factorial(n))
}

pub fn binomial(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

pub fn binomial_q(n: u32, k: u32) -> Rational {
    Rational::from_integer(binomial(n, k))
}

/// `p/q`, or `p` when the denominator is one.
pub fn fmt_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let d: BigInt = d.parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(Rational::new(n.parse().ok()?, d))
        }
        None => Some(Rational::from_integer(s.parse().ok()?)),
    }
}
