//! Truncated univariate power series over the rationals and the Bernoulli
//! generating-function identities checked on them.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::{bernoulli, factorial_q, fmt_rational, int, rat, Rational};
use crate::error::{Error, Result};

/// `sum_{i <= order} c_i z^i`; coefficients past `order` are unknown.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncSeries {
    pub var: String,
    order: u32,
    coeffs: Vec<Rational>,
}

impl TruncSeries {
    pub fn zero(var: &str, order: u32) -> Self {
        TruncSeries { var: var.to_string(), order, coeffs: vec![Rational::zero(); order as usize + 1] }
    }

    pub fn one(var: &str, order: u32) -> Self {
        let mut s = Self::zero(var, order);
        s.coeffs[0] = Rational::one();
        s
    }

    /// Builds from the first `order + 1` values of `f`.
    pub fn from_fn(var: &str, order: u32, f: impl Fn(u32) -> Rational) -> Self {
        TruncSeries { var: var.to_string(), order, coeffs: (0..=order).map(f).collect() }
    }

    /// `c * z^power`, or the zero series when the power is past `order`.
    pub fn monomial(var: &str, order: u32, power: u32, c: Rational) -> Self {
        let mut s = Self::zero(var, order);
        if power <= order {
            s.coeffs[power as usize] = c;
        }
        s
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn coeff(&self, i: u32) -> Option<&Rational> {
        self.coeffs.get(i as usize)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn scale(&self, c: &Rational) -> Self {
        TruncSeries { var: self.var.clone(), order: self.order, coeffs: self.coeffs.iter().map(|x| x * c).collect() }
    }

    pub fn truncate(&self, order: u32) -> Self {
        let order = order.min(self.order);
        TruncSeries { var: self.var.clone(), order, coeffs: self.coeffs[..=order as usize].to_vec() }
    }

    /// `z^k * self`; known one degree further per power of z.
    pub fn shift(&self, k: u32) -> Self {
        let mut coeffs = vec![Rational::zero(); k as usize];
        coeffs.extend(self.coeffs.iter().cloned());
        TruncSeries { var: self.var.clone(), order: self.order + k, coeffs }
    }

    /// Formal derivative. `None` when nothing is known about it.
    pub fn derivative(&self) -> Option<Self> {
        if self.order == 0 {
            return None;
        }
        let coeffs = (1..=self.order).map(|i| &self.coeffs[i as usize] * int(i as i64)).collect();
        Some(TruncSeries { var: self.var.clone(), order: self.order - 1, coeffs })
    }

    pub fn nth_derivative(&self, n: u32) -> Option<Self> {
        (0..n).try_fold(self.clone(), |s, _| s.derivative())
    }

    /// First power (up to the common order) where the coefficients differ.
    pub fn first_difference(&self, other: &Self) -> Option<(u32, Rational, Rational)> {
        let order = self.order.min(other.order);
        (0..=order).find_map(|i| {
            let (a, b) = (&self.coeffs[i as usize], &other.coeffs[i as usize]);
            (a != b).then(|| (i, a.clone(), b.clone()))
        })
    }
}

impl Add for &TruncSeries {
    type Output = TruncSeries;
    fn add(self, rhs: &TruncSeries) -> TruncSeries {
        let order = self.order.min(rhs.order);
        TruncSeries::from_fn(&self.var, order, |i| &self.coeffs[i as usize] + &rhs.coeffs[i as usize])
    }
}

impl Sub for &TruncSeries {
    type Output = TruncSeries;
    fn sub(self, rhs: &TruncSeries) -> TruncSeries {
        let order = self.order.min(rhs.order);
        TruncSeries::from_fn(&self.var, order, |i| &self.coeffs[i as usize] - &rhs.coeffs[i as usize])
    }
}

impl Mul for &TruncSeries {
    type Output = TruncSeries;
    fn mul(self, rhs: &TruncSeries) -> TruncSeries {
        let order = self.order.min(rhs.order) as usize;
        let mut out = TruncSeries::zero(&self.var, order as u32);
        for (i, a) in self.coeffs.iter().enumerate().take(order + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate().take(order + 1 - i) {
                out.coeffs[i + j] += a * b;
            }
        }
        out
    }
}

impl fmt::Display for TruncSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| format!("{}*{}^{}", fmt_rational(c), self.var, i))
            .collect();
        let body = if terms.is_empty() { "0".to_string() } else { terms.join(" + ") };
        write!(f, "{} + O({}^{})", body, self.var, self.order + 1)
    }
}

/// Bernoulli numbers `B_0..=B_max`, optionally with entries overridden.
#[derive(Clone, Debug)]
pub struct BernoulliTable(Vec<Rational>);

impl BernoulliTable {
    pub fn exact(max: u32) -> Self {
        BernoulliTable((0..=max).map(bernoulli).collect())
    }

    /// Replaces `B_m`; used to build negative controls.
    pub fn with_override(mut self, m: u32, value: Rational) -> Self {
        if let Some(slot) = self.0.get_mut(m as usize) {
            *slot = value;
        }
        self
    }

    pub fn get(&self, m: u32) -> Rational {
        self.0.get(m as usize).cloned().unwrap_or_else(|| bernoulli(m))
    }

    pub fn abs(&self, m: u32) -> Rational {
        self.get(m).abs()
    }

    /// `phi(z) = sum_i B_{2i} z^{2i} / (2i)!`.
    pub fn phi(&self, order: u32) -> TruncSeries {
        TruncSeries::from_fn("z", order, |i| {
            if i % 2 == 0 {
                self.get(i) / factorial_q(i)
            } else {
                Rational::zero()
            }
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub passed: bool,
    /// First failing power of z (or index) with both sides.
    pub failure: Option<String>,
}

impl IdentityCheck {
    fn compare(name: String, lhs: &TruncSeries, rhs: &TruncSeries) -> Self {
        let failure = lhs.first_difference(rhs).map(|(i, a, b)| {
            format!("z^{i}: lhs {} != rhs {}", fmt_rational(&a), fmt_rational(&b))
        });
        IdentityCheck { name, passed: failure.is_none(), failure }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SeriesReport {
    pub z_order: u32,
    pub checks: Vec<IdentityCheck>,
}

impl SeriesReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub fn series_identity_suite(z_order: u32, k_max: Option<u32>) -> Result<SeriesReport> {
    series_identity_suite_with(&BernoulliTable::exact(z_order + 2), z_order, k_max)
}

/// Checks the Bernoulli generating-function identities up to `z^z_order`.
///
/// `k_max = None` skips the two `phi`-derivative families.
pub fn series_identity_suite_with(table: &BernoulliTable, z_order: u32, k_max: Option<u32>) -> Result<SeriesReport> {
    if let Some(k) = k_max {
        if z_order < 2 * k + 4 {
            return Err(Error::InvalidArgument(format!("z_order {z_order} < 2*k_max + 4 = {}", 2 * k + 4)));
        }
    }
    let phi = table.phi(z_order);
    let quarter_z2 = TruncSeries::monomial("z", z_order, 2, rat(1, 4));
    let mut checks = Vec::new();

    // z phi' = -phi^2 + phi + z^2/4
    let lhs = phi.derivative().map(|d| d.shift(1)).unwrap_or_else(|| TruncSeries::zero("z", 0));
    let rhs = &(&phi - &(&phi * &phi)) + &quarter_z2;
    checks.push(IdentityCheck::compare("riccati".into(), &lhs, &rhs));

    if let Some(k_max) = k_max {
        for k in 0..=k_max {
            checks.push(first_family(table, &phi, k, z_order));
            checks.push(second_family(table, &phi, k, z_order));
        }
    }

    checks.push(product_identity(table, z_order));
    checks.push(square_identity(table, z_order));
    checks.push(bernoulli_sum(table, z_order));
    Ok(SeriesReport { z_order, checks })
}

fn deriv(phi: &TruncSeries, n: u32) -> TruncSeries {
    phi.nth_derivative(n).expect("z_order precondition guarantees enough terms")
}

/// `phi phi^(2k)/(2k)! = B_2k phi/(2k)! - sum_i B_2i phi^(2k-2i+1) z/((2i)!(2k-2i+1)!) + [k=0] z^2/4`
fn first_family(table: &BernoulliTable, phi: &TruncSeries, k: u32, z_order: u32) -> IdentityCheck {
    let lhs = (phi * &deriv(phi, 2 * k)).scale(&(Rational::one() / factorial_q(2 * k)));
    let mut rhs = phi.scale(&(table.get(2 * k) / factorial_q(2 * k)));
    for i in 0..=k {
        let c = table.get(2 * i) / (factorial_q(2 * i) * factorial_q(2 * k - 2 * i + 1));
        rhs = &rhs - &deriv(phi, 2 * k - 2 * i + 1).shift(1).scale(&c);
    }
    if k == 0 {
        rhs = &rhs + &TruncSeries::monomial("z", z_order, 2, rat(1, 4));
    }
    IdentityCheck::compare(format!("first_family[k={k}]"), &lhs, &rhs)
}

/// `phi^(2k+1) phi/(2k+1)! = -sum_i B_2i phi^(2k+2-2i) z/((2i)!(2k+2-2i)!) + [k=0] z/4`
fn second_family(table: &BernoulliTable, phi: &TruncSeries, k: u32, z_order: u32) -> IdentityCheck {
    let lhs = (phi * &deriv(phi, 2 * k + 1)).scale(&(Rational::one() / factorial_q(2 * k + 1)));
    let mut rhs = TruncSeries::zero("z", z_order);
    for i in 0..=k {
        let c = table.get(2 * i) / (factorial_q(2 * i) * factorial_q(2 * k + 2 - 2 * i));
        rhs = &rhs - &deriv(phi, 2 * k + 2 - 2 * i).shift(1).scale(&c);
    }
    if k == 0 {
        rhs = &rhs + &TruncSeries::monomial("z", z_order, 1, rat(1, 4));
    }
    IdentityCheck::compare(format!("second_family[k={k}]"), &lhs, &rhs)
}

/// Coefficient `(2^{2g-1}-1)/2^{2g-1} * |B_2g|/(2g)!`.
pub fn lambda_g_prefactor(table: &BernoulliTable, g: u32) -> Rational {
    let p = Rational::from_integer(num_bigint::BigInt::from(2u32).pow(2 * g - 1));
    (&p - Rational::one()) / p * table.abs(2 * g) / factorial_q(2 * g)
}

/// Coefficient `(-1)^g / (2^{2g} (2g+1)!)`.
pub fn forward_shift_coeff(g: u32) -> Rational {
    let sign = if g.is_multiple_of(2) { 1 } else { -1 };
    let p = Rational::from_integer(num_bigint::BigInt::from(2u32).pow(2 * g));
    Rational::from_integer(sign.into()) / (p * factorial_q(2 * g + 1))
}

fn even_series(order: u32, f: impl Fn(u32) -> Rational) -> TruncSeries {
    TruncSeries::from_fn("z", order, |i| {
        if i == 0 {
            Rational::one()
        } else if i % 2 == 0 {
            f(i / 2)
        } else {
            Rational::zero()
        }
    })
}

fn product_identity(table: &BernoulliTable, z_order: u32) -> IdentityCheck {
    let a = even_series(z_order, |g| lambda_g_prefactor(table, g));
    let c = even_series(z_order, forward_shift_coeff);
    IdentityCheck::compare("inverse_product".into(), &(&a * &c), &TruncSeries::one("z", z_order))
}

/// `(1 + sum prefactor_g z^2g)^2 = 1 + sum (2g-1)|B_2g|/(2g)! z^2g`.
fn square_identity(table: &BernoulliTable, z_order: u32) -> IdentityCheck {
    let a = even_series(z_order, |g| lambda_g_prefactor(table, g));
    let rhs = even_series(z_order, |g| int(2 * g as i64 - 1) * table.abs(2 * g) / factorial_q(2 * g));
    IdentityCheck::compare("operator_square".into(), &(&a * &a), &rhs)
}

fn bernoulli_sum(table: &BernoulliTable, z_order: u32) -> IdentityCheck {
    let term = |m: u32| table.abs(2 * m) / factorial_q(2 * m);
    let failure = (2..=z_order / 2).find_map(|m| {
        let lhs = (1..m).fold(Rational::zero(), |acc, m1| acc + term(m1) * term(m - m1));
        let rhs = int(2 * m as i64 + 1) * term(m);
        (lhs != rhs).then(|| format!("m={m}: lhs {} != rhs {}", fmt_rational(&lhs), fmt_rational(&rhs)))
    });
    IdentityCheck { name: "bernoulli_sum".into(), passed: failure.is_none(), failure }
}
