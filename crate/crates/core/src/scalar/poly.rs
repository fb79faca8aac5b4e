use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use super::Gaussian;

/// Exponents of the formal parameters: `hbar^hbar * eps^(eps_half/2) * mu^mu`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ScalarKey {
    pub hbar: u32,
    pub eps_half: i32,
    pub mu: u32,
}

impl ScalarKey {
    pub const ONE: ScalarKey = ScalarKey { hbar: 0, eps_half: 0, mu: 0 };

    pub fn new(hbar: u32, eps_half: i32, mu: u32) -> Self {
        ScalarKey { hbar, eps_half, mu }
    }

    pub fn hbar(a: u32) -> Self {
        ScalarKey { hbar: a, ..Self::ONE }
    }

    /// `eps^k` for an integer power `k`.
    pub fn eps(k: i32) -> Self {
        ScalarKey { eps_half: 2 * k, ..Self::ONE }
    }

    pub fn mu(c: u32) -> Self {
        ScalarKey { mu: c, ..Self::ONE }
    }

    /// Integer power of eps, if the half-exponent is even.
    pub fn eps_power(self) -> Option<i32> {
        (self.eps_half % 2 == 0).then_some(self.eps_half / 2)
    }

    pub(crate) fn factors(self) -> Vec<String> {
        let mut out = Vec::new();
        match self.hbar {
            0 => {}
            1 => out.push("hbar".to_string()),
            a => out.push(format!("hbar^{a}")),
        }
        match self.eps_half {
            0 => {}
            2 => out.push("eps".to_string()),
            b if b % 2 == 0 => out.push(format!("eps^{}", b / 2)),
            b => out.push(format!("eps^({b}/2)")),
        }
        match self.mu {
            0 => {}
            1 => out.push("mu".to_string()),
            c => out.push(format!("mu^{c}")),
        }
        out
    }
}

/// Product of monomials in the parameters: exponents add.
impl std::ops::Mul for ScalarKey {
    type Output = ScalarKey;

    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, other: ScalarKey) -> ScalarKey {
        ScalarKey {
            hbar: self.hbar + other.hbar,
            eps_half: self.eps_half + other.eps_half,
            mu: self.mu + other.mu,
        }
    }
}

/// Upper bounds on the hbar and mu exponents kept after each product.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Trunc {
    pub hbar: u32,
    pub mu: u32,
}

impl Trunc {
    pub const NONE: Trunc = Trunc { hbar: u32::MAX, mu: u32::MAX };

    pub fn hbar(order: u32) -> Self {
        Trunc { hbar: order, mu: u32::MAX }
    }

    pub fn mu(order: u32) -> Self {
        Trunc { hbar: u32::MAX, mu: order }
    }

    pub fn admits(&self, key: ScalarKey) -> bool {
        key.hbar <= self.hbar && key.mu <= self.mu
    }
}

/// A single coefficient term `c * hbar^a * eps^(b/2) * mu^c`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scalar {
    pub coeff: Gaussian,
    pub key: ScalarKey,
}

impl Scalar {
    pub fn new(coeff: Gaussian, key: ScalarKey) -> Self {
        Scalar { coeff, key }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = vec![self.coeff.to_string()];
        parts.extend(self.key.factors());
        write!(f, "{}", parts.join("*"))
    }
}

/// A finite sum of [`Scalar`] terms, at most one per exponent triple.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ScalarPoly {
    terms: BTreeMap<ScalarKey, Gaussian>,
}

impl ScalarPoly {
    pub fn zero() -> Self {
        ScalarPoly::default()
    }

    pub fn constant(c: Gaussian) -> Self {
        ScalarPoly::term(c, ScalarKey::ONE)
    }

    pub fn term(c: Gaussian, key: ScalarKey) -> Self {
        let mut p = ScalarPoly::zero();
        p.add_term(key, &c);
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ScalarKey, &Gaussian)> {
        self.terms.iter()
    }

    pub fn get(&self, key: ScalarKey) -> Gaussian {
        self.terms.get(&key).cloned().unwrap_or_default()
    }

    pub fn add_term(&mut self, key: ScalarKey, c: &Gaussian) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(key).or_default();
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn add(&self, other: &ScalarPoly) -> ScalarPoly {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(*k, c);
        }
        out
    }

    pub fn sub(&self, other: &ScalarPoly) -> ScalarPoly {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(*k, &-c);
        }
        out
    }

    pub fn neg(&self) -> ScalarPoly {
        ScalarPoly { terms: self.terms.iter().map(|(k, c)| (*k, -c)).collect() }
    }

    pub fn mul(&self, other: &ScalarPoly, trunc: Trunc) -> ScalarPoly {
        let mut out = ScalarPoly::zero();
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                let key = *ka * *kb;
                if trunc.admits(key) {
                    out.add_term(key, &(ca * cb));
                }
            }
        }
        out
    }

    pub fn truncate(&self, trunc: Trunc) -> ScalarPoly {
        ScalarPoly {
            terms: self.terms.iter().filter(|(k, _)| trunc.admits(**k)).map(|(k, c)| (*k, c.clone())).collect(),
        }
    }

    /// True if every coefficient has zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.terms.values().all(Gaussian::is_real)
    }
}

/// Sum or product of two scalar polynomials at a common truncation order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScalarOp {
    Add,
    Mul,
}

pub fn scalar_arith(a: &ScalarPoly, b: &ScalarPoly, op: ScalarOp, trunc: Trunc) -> ScalarPoly {
    match op {
        ScalarOp::Add => a.add(b).truncate(trunc),
        ScalarOp::Mul => a.mul(b, trunc),
    }
}

impl fmt::Display for ScalarPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> =
            self.terms.iter().map(|(k, c)| Scalar::new(c.clone(), *k).to_string()).collect();
        write!(f, "{}", parts.join(" + "))
    }
}
