use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::{fmt_rational, Rational, ScalarKey};

/// Maximum number of time variables `t_0 .. t_7`.
pub const MAX_VARS: usize = 8;

/// A monomial in `t_0 .. t_7`, one byte per exponent.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TMono(u64);

/// Product; exponents add and must stay below 256.
impl std::ops::Mul for TMono {
    type Output = TMono;

    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, other: TMono) -> TMono {
        TMono(self.0 + other.0)
    }
}

impl TMono {
    pub fn from_exponents(exps: &[u32]) -> Result<Self> {
        if exps.len() > MAX_VARS || exps.iter().any(|&e| e > 255) {
            return Err(Error::InvalidArgument(format!("monomial {exps:?} out of range")));
        }
        Ok(TMono(exps.iter().enumerate().fold(0, |acc, (i, &e)| acc | (e as u64) << (8 * i))))
    }

    pub fn var(i: usize) -> Self {
        TMono(1 << (8 * i))
    }

    pub fn exponent(self, i: usize) -> u32 {
        ((self.0 >> (8 * i)) & 0xff) as u32
    }

    pub fn exponents(self, nvars: usize) -> Vec<u32> {
        (0..nvars).map(|i| self.exponent(i)).collect()
    }

    pub fn degree(self) -> u32 {
        (0..MAX_VARS).map(|i| self.exponent(i)).sum()
    }

    /// Degree in `t_1, t_2, ...`.
    pub fn upper_degree(self) -> u32 {
        self.degree() - self.exponent(0)
    }

    pub fn div_var(self, i: usize) -> Option<TMono> {
        (self.exponent(i) > 0).then(|| TMono(self.0 - (1 << (8 * i))))
    }

    /// Index of the first nonzero exponent among `t_1, t_2, ...`.
    pub fn first_upper(self) -> Option<usize> {
        (1..MAX_VARS).find(|&i| self.exponent(i) > 0)
    }
}

/// Term key: powers of hbar and eps, then the t-monomial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TKey {
    pub hbar: u32,
    pub eps: u32,
    pub mono: TMono,
}

impl TKey {
    /// `t-degree + 2 * hbar`, the grading that truncation respects.
    pub fn weight(&self) -> u32 {
        self.mono.degree() + 2 * self.hbar
    }

    pub fn scalar_key(&self) -> ScalarKey {
        ScalarKey::new(self.hbar, 2 * self.eps as i32, 0)
    }
}

/// A power series in `t_0 .. t_{n-1}`, hbar and eps, exact for all terms of weight
/// `t-degree + 2 * hbar <= weight_bound`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TSeries {
    nvars: usize,
    weight_bound: u32,
    terms: BTreeMap<TKey, Rational>,
}

impl TSeries {
    pub fn zero(nvars: usize, weight_bound: u32) -> Self {
        assert!(nvars <= MAX_VARS, "at most {MAX_VARS} variables");
        TSeries { nvars, weight_bound, terms: BTreeMap::new() }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn weight_bound(&self) -> u32 {
        self.weight_bound
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, key: TKey, c: &Rational) {
        if c.is_zero() || key.weight() > self.weight_bound {
            return;
        }
        let entry = self.terms.entry(key).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn coeff(&self, hbar: u32, eps: u32, exps: &[u32]) -> Rational {
        let Ok(mono) = TMono::from_exponents(exps) else { return Rational::zero() };
        self.terms.get(&TKey { hbar, eps, mono }).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn get(&self, key: &TKey) -> Option<&Rational> {
        self.terms.get(key)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&TKey, &Rational)> {
        self.terms.iter()
    }

    pub fn filter(&self, pred: impl Fn(&TKey) -> bool) -> TSeries {
        TSeries {
            nvars: self.nvars,
            weight_bound: self.weight_bound,
            terms: self.terms.iter().filter(|(k, _)| pred(k)).map(|(k, c)| (*k, c.clone())).collect(),
        }
    }

    pub fn add(&self, other: &TSeries) -> TSeries {
        let mut out = self.clone();
        out.weight_bound = self.weight_bound.min(other.weight_bound);
        out.terms.retain(|k, _| k.weight() <= out.weight_bound);
        for (k, c) in other.iter() {
            out.add_term(*k, c);
        }
        out
    }

    /// Multiplies by `c * hbar^a * eps^b`; the exactness bound rises by `2a`.
    pub fn scale(&self, c: &Rational, hbar: u32, eps: u32) -> TSeries {
        let mut out = TSeries::zero(self.nvars, self.weight_bound + 2 * hbar);
        for (k, x) in self.iter() {
            out.add_term(TKey { hbar: k.hbar + hbar, eps: k.eps + eps, mono: k.mono }, &(x * c));
        }
        out
    }

    /// Lowers the exactness bound to `bound`, dropping heavier terms.
    pub fn with_bound(&self, bound: u32) -> TSeries {
        let bound = bound.min(self.weight_bound);
        let mut out = self.filter(|k| k.weight() <= bound);
        out.weight_bound = bound;
        out
    }

    /// `d/dt_i`. Weight drops by one, so the result is exact to `weight_bound - 1`.
    pub fn derivative(&self, i: usize) -> TSeries {
        let mut out = TSeries::zero(self.nvars, self.weight_bound.saturating_sub(1));
        for (k, c) in self.iter() {
            if let Some(mono) = k.mono.div_var(i) {
                let e = Rational::from_integer(k.mono.exponent(i).into());
                out.add_term(TKey { mono, ..*k }, &(c * e));
            }
        }
        out
    }

    pub fn d_t0(&self) -> TSeries {
        self.derivative(0)
    }

    pub fn d_t0_n(&self, n: u32) -> TSeries {
        (0..n).fold(self.clone(), |s, _| s.d_t0())
    }

    /// Product restricted to keys accepted by `keep`.
    pub fn mul_filtered(&self, other: &TSeries, keep: impl Fn(&TKey) -> bool) -> TSeries {
        let bound = self.weight_bound.min(other.weight_bound);
        let mut out = TSeries::zero(self.nvars, bound);
        let mut right: Vec<(&TKey, &Rational)> = other.iter().collect();
        right.sort_by_key(|(k, _)| k.weight());
        for (ka, ca) in self.iter() {
            let wa = ka.weight();
            for (kb, cb) in &right {
                if wa + kb.weight() > bound {
                    break;
                }
                let key = TKey { hbar: ka.hbar + kb.hbar, eps: ka.eps + kb.eps, mono: ka.mono * kb.mono };
                if keep(&key) {
                    out.add_term(key, &(ca * *cb));
                }
            }
        }
        out
    }

    pub fn mul(&self, other: &TSeries) -> TSeries {
        self.mul_filtered(other, |_| true)
    }

    /// Keeps terms of t-degree at most `d`.
    pub fn truncate_degree(&self, d: u32) -> TSeries {
        self.filter(|k| k.mono.degree() <= d)
    }
}

impl fmt::Display for TSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .iter()
            .map(|(k, c)| {
                let mut s = vec![fmt_rational(c)];
                s.extend(k.scalar_key().factors());
                for (i, e) in k.mono.exponents(self.nvars).into_iter().enumerate() {
                    match e {
                        0 => {}
                        1 => s.push(format!("t{i}")),
                        _ => s.push(format!("t{i}^{e}")),
                    }
                }
                s.join("*")
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}
