use std::collections::BTreeMap;
use std::fmt;

use crate::diffpoly::{DiffPoly, Monomial};
use crate::scalar::{binomial_q, Gaussian, ScalarKey, Trunc};

/// A differential operator `sum_j f_j d^j/dx^j`; the coefficients carry their own hbar powers.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PoissonOperator {
    terms: BTreeMap<u32, DiffPoly>,
}

impl PoissonOperator {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn identity() -> Self {
        Self::term(0, DiffPoly::one())
    }

    pub fn dx() -> Self {
        Self::term(1, DiffPoly::one())
    }

    /// `f * d^j/dx^j`.
    pub fn term(j: u32, f: DiffPoly) -> Self {
        let mut op = Self::zero();
        op.add_term(j, &f);
        op
    }

    pub fn add_term(&mut self, j: u32, f: &DiffPoly) {
        let entry = self.terms.entry(j).or_default();
        *entry = &*entry + f;
        if entry.is_zero() {
            self.terms.remove(&j);
        }
    }

    pub fn coefficient(&self, j: u32) -> DiffPoly {
        self.terms.get(&j).cloned().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &DiffPoly)> {
        self.terms.iter().map(|(j, f)| (*j, f))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (j, f) in other.iter() {
            out.add_term(j, f);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (j, f) in other.iter() {
            out.add_term(j, &-f);
        }
        out
    }

    pub fn scale(&self, c: &Gaussian) -> Self {
        let mut out = Self::zero();
        for (j, f) in self.iter() {
            out.add_term(j, &f.scale(c));
        }
        out
    }

    pub fn truncate(&self, trunc: Trunc) -> Self {
        let mut out = Self::zero();
        for (j, f) in self.iter() {
            out.add_term(j, &f.truncate(trunc));
        }
        out
    }

    pub fn apply(&self, f: &DiffPoly, trunc: Trunc) -> DiffPoly {
        let mut out = DiffPoly::zero();
        let mut df = f.clone();
        let top = self.terms.keys().next_back().copied().unwrap_or(0);
        for j in 0..=top {
            if let Some(c) = self.terms.get(&j) {
                out = &out + &c.mul_trunc(&df, trunc);
            }
            if j < top {
                df = df.partial_x();
            }
        }
        out
    }

    /// `self o other`, using `d^p o b = sum_k C(p,k) (d^k b) d^(p-k)`.
    pub fn compose(&self, other: &Self, trunc: Trunc) -> Self {
        let mut out = Self::zero();
        for (p, a) in self.iter() {
            for (qq, b) in other.iter() {
                let mut db = b.clone();
                for k in 0..=p {
                    let coeff = a.mul_trunc(&db, trunc).scale_rational(&binomial_q(p, k));
                    out.add_term(p - k + qq, &coeff);
                    db = db.partial_x();
                }
            }
        }
        out
    }

    /// Rewrites every coefficient with `DiffPoly::substitute`.
    pub fn substitute_coefficients(&self, expr: &DiffPoly, trunc: Trunc) -> Self {
        let mut out = Self::zero();
        for (j, f) in self.iter() {
            out.add_term(j, &f.substitute(expr, trunc));
        }
        out
    }

    /// Checks `deg_dif f + j = 2i + 1` for every term `f hbar^i d^j`.
    pub fn is_graded(&self) -> bool {
        self.iter().all(|(j, f)| f.iter().all(|(k, m, _)| m.deg_dif() + j == 2 * k.hbar + 1))
    }

    /// `sum_j c_j * key_j * d^j` with constant coefficients.
    pub fn constant_coefficients(entries: impl IntoIterator<Item = (u32, Gaussian, ScalarKey)>) -> Self {
        let mut out = Self::zero();
        for (j, c, key) in entries {
            out.add_term(j, &DiffPoly::term(c, key, Monomial::one()));
        }
        out
    }
}

impl fmt::Display for PoissonOperator {
    /// Terms `f * hbar^i * dx^j` in order of `(i, j)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut entries: BTreeMap<(u32, u32), DiffPoly> = BTreeMap::new();
        for (j, coeff) in self.iter() {
            for (k, m, c) in coeff.iter() {
                let stripped = ScalarKey::new(0, k.eps_half, k.mu);
                entries.entry((k.hbar, j)).or_default().add_term(stripped, m.clone(), c);
            }
        }
        if entries.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> =
            entries.iter().map(|((i, j), c)| format!("({c}) * hbar^{i} * dx^{j}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}
