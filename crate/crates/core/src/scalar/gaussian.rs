use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_traits::{One, Signed, Zero};

use super::{fmt_rational, Rational};

/// An element `re + im*i` of the Gaussian rationals.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Gaussian {
    pub re: Rational,
    pub im: Rational,
}

impl Gaussian {
    pub fn new(re: Rational, im: Rational) -> Self {
        Gaussian { re, im }
    }

    pub fn real(re: Rational) -> Self {
        Gaussian { re, im: Rational::zero() }
    }

    pub fn from_int(n: i64) -> Self {
        Gaussian::real(Rational::from_integer(n.into()))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Gaussian::real(Rational::new(n.into(), d.into()))
    }

    pub fn i() -> Self {
        Gaussian { re: Rational::zero(), im: Rational::one() }
    }

    pub fn zero() -> Self {
        Gaussian::default()
    }

    pub fn one() -> Self {
        Gaussian::real(Rational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Gaussian { re: self.re.clone(), im: -&self.im }
    }

    pub fn scale(&self, r: &Rational) -> Self {
        Gaussian { re: &self.re * r, im: &self.im * r }
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let norm = &self.re * &self.re + &self.im * &self.im;
        Some(Gaussian { re: &self.re / &norm, im: -&self.im / &norm })
    }
}

impl From<Rational> for Gaussian {
    fn from(r: Rational) -> Self {
        Gaussian::real(r)
    }
}

impl Add<&Gaussian> for &Gaussian {
    type Output = Gaussian;
    fn add(self, rhs: &Gaussian) -> Gaussian {
        Gaussian { re: &self.re + &rhs.re, im: &self.im + &rhs.im }
    }
}

impl Sub<&Gaussian> for &Gaussian {
    type Output = Gaussian;
    fn sub(self, rhs: &Gaussian) -> Gaussian {
        Gaussian { re: &self.re - &rhs.re, im: &self.im - &rhs.im }
    }
}

impl Mul<&Gaussian> for &Gaussian {
    type Output = Gaussian;
    fn mul(self, rhs: &Gaussian) -> Gaussian {
        // most coefficients in practice are real
        match (self.im.is_zero(), rhs.im.is_zero()) {
            (true, true) => Gaussian::real(&self.re * &rhs.re),
            (true, false) => Gaussian { re: &self.re * &rhs.re, im: &self.re * &rhs.im },
            (false, true) => Gaussian { re: &self.re * &rhs.re, im: &self.im * &rhs.re },
            (false, false) => Gaussian {
                re: &self.re * &rhs.re - &self.im * &rhs.im,
                im: &self.re * &rhs.im + &self.im * &rhs.re,
            },
        }
    }
}

impl Neg for &Gaussian {
    type Output = Gaussian;
    fn neg(self) -> Gaussian {
        Gaussian { re: -&self.re, im: -&self.im }
    }
}

impl Neg for Gaussian {
    type Output = Gaussian;
    fn neg(self) -> Gaussian {
        Gaussian { re: -self.re, im: -self.im }
    }
}

impl AddAssign<&Gaussian> for Gaussian {
    fn add_assign(&mut self, rhs: &Gaussian) {
        self.re += &rhs.re;
        if !rhs.im.is_zero() {
            self.im += &rhs.im;
        }
    }
}

impl SubAssign<&Gaussian> for Gaussian {
    fn sub_assign(&mut self, rhs: &Gaussian) {
        self.re -= &rhs.re;
        if !rhs.im.is_zero() {
            self.im -= &rhs.im;
        }
    }
}

impl fmt::Display for Gaussian {
    /// `p/q`, `p/q*im`, or `(p/q+r/s*im)` when both parts are present.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", fmt_rational(&self.re)),
            (true, false) => write!(f, "{}*im", fmt_rational(&self.im)),
            (false, false) => {
                let sign = if self.im.is_negative() { "-" } else { "+" };
                write!(f, "({}{}{}*im)", fmt_rational(&self.re), sign, fmt_rational(&self.im.abs()))
            }
        }
    }
}
