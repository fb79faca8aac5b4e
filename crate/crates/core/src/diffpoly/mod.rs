//! The ring of differential polynomials in `u0, u1, u2, ...` over the scalar ring.

mod monomial;
mod parse;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{Gaussian, Rational, ScalarKey, ScalarPoly, Trunc};

pub use monomial::Monomial;

type Key = (ScalarKey, Monomial);

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DiffPoly {
    terms: BTreeMap<Key, Gaussian>,
}

/// How `deg_dif` counts the parameters: hbar is always -2; mu is -1 in the mu-extended ring.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Grading {
    Standard,
    MuExtended,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TermGrading {
    pub deg_dif: i64,
    pub deg: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct TermRecord {
    pub coefficient: String,
    pub hbar: u32,
    pub eps_half: i32,
    pub mu: u32,
    pub exponents: BTreeMap<usize, u32>,
}

impl DiffPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Gaussian::one())
    }

    pub fn constant(c: Gaussian) -> Self {
        Self::term(c, ScalarKey::ONE, Monomial::one())
    }

    /// The variable `u_k`.
    pub fn u(k: usize) -> Self {
        Self::term(Gaussian::one(), ScalarKey::ONE, Monomial::var(k))
    }

    pub fn term(c: Gaussian, key: ScalarKey, m: Monomial) -> Self {
        let mut p = Self::zero();
        p.add_term(key, m, &c);
        p
    }

    /// `c * key * m` with a rational coefficient.
    pub fn rational_term(c: Rational, key: ScalarKey, m: Monomial) -> Self {
        Self::term(Gaussian::real(c), key, m)
    }

    pub fn from_scalar(s: &ScalarPoly) -> Self {
        let mut p = Self::zero();
        for (k, c) in s.iter() {
            p.add_term(*k, Monomial::one(), c);
        }
        p
    }

    pub fn add_term(&mut self, key: ScalarKey, m: Monomial, c: &Gaussian) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry((key, m)) {
            Entry::Vacant(e) => {
                e.insert(c.clone());
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
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

    /// Terms in canonical order: hbar, eps, mu exponents, then monomial.
    pub fn iter(&self) -> impl DoubleEndedIterator<Item = (&ScalarKey, &Monomial, &Gaussian)> {
        self.terms.iter().map(|((k, m), c)| (k, m, c))
    }

    pub fn coeff(&self, key: ScalarKey, m: &Monomial) -> Gaussian {
        self.terms.get(&(key, m.clone())).cloned().unwrap_or_else(Gaussian::zero)
    }

    /// The part multiplying exactly `key`, returned with the parameters stripped.
    pub fn component(&self, key: ScalarKey) -> DiffPoly {
        let mut out = Self::zero();
        for (k, m, c) in self.iter() {
            if *k == key {
                out.add_term(ScalarKey::ONE, m.clone(), c);
            }
        }
        out
    }

    pub fn by_key(&self) -> BTreeMap<ScalarKey, DiffPoly> {
        let mut out: BTreeMap<ScalarKey, DiffPoly> = BTreeMap::new();
        for (k, m, c) in self.iter() {
            out.entry(*k).or_default().add_term(ScalarKey::ONE, m.clone(), c);
        }
        out
    }

    pub fn keys(&self) -> Vec<ScalarKey> {
        let mut keys: Vec<ScalarKey> = self.iter().map(|(k, _, _)| *k).collect();
        keys.sort();
        keys.dedup();
        keys
    }

    /// Coefficient (as a scalar polynomial) of the monomial `m`.
    pub fn scalar_coeff(&self, m: &Monomial) -> ScalarPoly {
        let mut out = ScalarPoly::zero();
        for (k, mm, c) in self.iter() {
            if mm == m {
                out.add_term(*k, c);
            }
        }
        out
    }

    pub fn constant_term(&self) -> ScalarPoly {
        self.scalar_coeff(&Monomial::one())
    }

    pub fn max_index(&self) -> Option<usize> {
        self.iter().filter_map(|(_, m, _)| m.max_index()).max()
    }

    pub fn max_hbar(&self) -> Option<u32> {
        self.iter().map(|(k, _, _)| k.hbar).max()
    }

    pub fn is_real(&self) -> bool {
        self.iter().all(|(_, _, c)| c.is_real())
    }

    pub fn scale(&self, c: &Gaussian) -> DiffPoly {
        if c.is_zero() {
            return Self::zero();
        }
        DiffPoly { terms: self.terms.iter().map(|(k, x)| (k.clone(), x * c)).collect() }
    }

    pub fn scale_rational(&self, c: &Rational) -> DiffPoly {
        self.scale(&Gaussian::real(c.clone()))
    }

    /// Multiplies by `c * key`, dropping terms outside `trunc`.
    pub fn scale_term(&self, c: &Gaussian, key: ScalarKey, trunc: Trunc) -> DiffPoly {
        let mut out = Self::zero();
        if c.is_zero() {
            return out;
        }
        for ((k, m), x) in &self.terms {
            let nk = *k * key;
            if trunc.admits(nk) {
                out.terms.insert((nk, m.clone()), x * c);
            }
        }
        out
    }

    pub fn mul_trunc(&self, other: &DiffPoly, trunc: Trunc) -> DiffPoly {
        let mut out = Self::zero();
        for ((k1, m1), c1) in &self.terms {
            for ((k2, m2), c2) in &other.terms {
                let k = *k1 * *k2;
                if trunc.admits(k) {
                    out.add_term(k, m1.mul(m2), &(c1 * c2));
                }
            }
        }
        out
    }

    pub fn pow_trunc(&self, n: u32, trunc: Trunc) -> DiffPoly {
        (0..n).fold(Self::one(), |acc, _| acc.mul_trunc(self, trunc))
    }

    pub fn truncate(&self, trunc: Trunc) -> DiffPoly {
        DiffPoly { terms: self.terms.iter().filter(|((k, _), _)| trunc.admits(*k)).map(|(k, c)| (k.clone(), c.clone())).collect() }
    }

    /// Keeps terms satisfying `pred`.
    pub fn filter(&self, pred: impl Fn(&ScalarKey, &Monomial) -> bool) -> DiffPoly {
        DiffPoly { terms: self.terms.iter().filter(|((k, m), _)| pred(k, m)).map(|(k, c)| (k.clone(), c.clone())).collect() }
    }

    /// Total x-derivative `sum_s u_{s+1} d/du_s`.
    pub fn partial_x(&self) -> DiffPoly {
        let mut out = Self::zero();
        for ((k, m), c) in &self.terms {
            for (s, a) in m.factors() {
                let nm = m.without_factor(s).expect("factor present").with_factor(s + 1, 1);
                out.add_term(*k, nm, &c.scale(&Rational::from_integer(a.into())));
            }
        }
        out
    }

    pub fn partial_x_n(&self, n: u32) -> DiffPoly {
        (0..n).fold(self.clone(), |p, _| p.partial_x())
    }

    /// Formal partial derivative with respect to `u_s`.
    pub fn partial_u(&self, s: usize) -> DiffPoly {
        let mut out = Self::zero();
        for ((k, m), c) in &self.terms {
            let a = m.exponent(s);
            if a > 0 {
                let nm = m.without_factor(s).expect("factor present");
                out.add_term(*k, nm, &c.scale(&Rational::from_integer(a.into())));
            }
        }
        out
    }

    pub fn gradings(&self, grading: Grading) -> Vec<TermGrading> {
        self.iter().map(|(k, m, _)| TermGrading { deg_dif: term_deg_dif(k, m, grading), deg: m.degree() }).collect()
    }

    /// Whether every term has differential degree `d`.
    pub fn is_homogeneous(&self, d: i64, grading: Grading) -> bool {
        self.iter().all(|(k, m, _)| term_deg_dif(k, m, grading) == d)
    }

    /// Replaces every `u_k` by `d^k expr / dx^k`.
    pub fn substitute(&self, expr: &DiffPoly, trunc: Trunc) -> DiffPoly {
        let top = self.max_index().unwrap_or(0);
        let mut derivs = vec![expr.truncate(trunc)];
        for k in 0..top {
            let next = derivs[k].partial_x();
            derivs.push(next);
        }
        let mut powers: HashMap<(usize, u32), DiffPoly> = HashMap::new();
        let mut out = Self::zero();
        for ((key, m), c) in &self.terms {
            if !trunc.admits(*key) {
                continue;
            }
            let mut acc = DiffPoly::term(c.clone(), *key, Monomial::one());
            for (s, a) in m.factors() {
                let p = powers.entry((s, a)).or_insert_with(|| derivs[s].pow_trunc(a, trunc));
                acc = acc.mul_trunc(p, trunc);
            }
            out = &out + &acc;
        }
        out
    }

    /// Applies `f` to every scalar key, merging collisions.
    pub fn map_keys(&self, f: impl Fn(ScalarKey) -> ScalarKey) -> DiffPoly {
        let mut out = Self::zero();
        for ((k, m), c) in &self.terms {
            out.add_term(f(*k), m.clone(), c);
        }
        out
    }

    /// Rewrites `hbar^a` as `mu^(2a)`.
    pub fn hbar_to_mu_squared(&self) -> DiffPoly {
        self.map_keys(|k| ScalarKey::new(0, k.eps_half, k.mu + 2 * k.hbar))
    }

    /// Sets eps to zero; negative eps powers are rejected.
    pub fn at_eps_zero(&self) -> Result<DiffPoly> {
        if self.iter().any(|(k, _, _)| k.eps_half < 0) {
            return Err(Error::InvalidArgument("negative power of eps at eps = 0".into()));
        }
        Ok(self.filter(|k, _| k.eps_half == 0))
    }

    pub fn to_records(&self) -> Vec<TermRecord> {
        self.iter()
            .map(|(k, m, c)| TermRecord {
                coefficient: c.to_string(),
                hbar: k.hbar,
                eps_half: k.eps_half,
                mu: k.mu,
                exponents: m.factors().collect(),
            })
            .collect()
    }
}

fn term_deg_dif(k: &ScalarKey, m: &Monomial, grading: Grading) -> i64 {
    let base = m.deg_dif() as i64 - 2 * k.hbar as i64;
    match grading {
        Grading::Standard => base,
        Grading::MuExtended => base - k.mu as i64,
    }
}

impl Add for &DiffPoly {
    type Output = DiffPoly;
    fn add(self, rhs: &DiffPoly) -> DiffPoly {
        let (mut out, other) = if self.len() >= rhs.len() { (self.clone(), rhs) } else { (rhs.clone(), self) };
        for ((k, m), c) in &other.terms {
            out.add_term(*k, m.clone(), c);
        }
        out
    }
}

impl Sub for &DiffPoly {
    type Output = DiffPoly;
    fn sub(self, rhs: &DiffPoly) -> DiffPoly {
        let mut out = self.clone();
        for ((k, m), c) in &rhs.terms {
            out.add_term(*k, m.clone(), &-c);
        }
        out
    }
}

impl Neg for &DiffPoly {
    type Output = DiffPoly;
    fn neg(self) -> DiffPoly {
        DiffPoly { terms: self.terms.iter().map(|(k, c)| (k.clone(), -c)).collect() }
    }
}

impl Mul for &DiffPoly {
    type Output = DiffPoly;
    fn mul(self, rhs: &DiffPoly) -> DiffPoly {
        self.mul_trunc(rhs, Trunc::NONE)
    }
}

impl fmt::Display for DiffPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .iter()
            .map(|(k, m, c)| {
                let mut parts = vec![c.to_string()];
                parts.extend(k.factors());
                if !m.is_one() {
                    parts.push(m.to_string());
                }
                parts.join("*")
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};
    use proptest::prelude::*;

    fn u(k: usize) -> DiffPoly {
        DiffPoly::u(k)
    }

    fn q(c: Rational) -> DiffPoly {
        DiffPoly::constant(Gaussian::real(c))
    }

    fn hbar() -> DiffPoly {
        DiffPoly::term(Gaussian::one(), ScalarKey::hbar(1), Monomial::one())
    }

    #[test]
    fn partial_x_examples() {
        assert_eq!((&u(0) * &u(1)).partial_x(), &(&u(1) * &u(1)) + &(&u(0) * &u(2)));
        let cube = &q(rat(1, 6)) * &u(0).pow_trunc(3, Trunc::NONE);
        assert_eq!(cube.partial_x(), &(&q(rat(1, 2)) * &(&u(0) * &u(0))) * &u(1));
        assert_eq!((&hbar() * &u(2)).partial_x(), &hbar() * &u(3));
    }

    #[test]
    fn partial_u_examples() {
        assert_eq!((&u(0) * &u(2)).partial_u(2), u(0));
        assert_eq!((&u(1) * &u(1)).partial_u(1), &q(int(2)) * &u(1));
        assert!(u(0).pow_trunc(3, Trunc::NONE).partial_u(1).is_zero());
    }

    #[test]
    fn grading_examples() {
        let p = &hbar() * &u(3);
        assert_eq!(p.gradings(Grading::Standard), vec![TermGrading { deg_dif: 1, deg: 1 }]);
        let uu2 = &u(0) * &u(2);
        assert_eq!(uu2.gradings(Grading::Standard), vec![TermGrading { deg_dif: 2, deg: 2 }]);
        let mu2u2 = DiffPoly::term(Gaussian::one(), ScalarKey::mu(2), Monomial::var(2));
        assert!(mu2u2.is_homogeneous(0, Grading::MuExtended));
    }

    #[test]
    fn substitute_examples() {
        let trunc = Trunc::hbar(3);
        let sq = &u(0) * &u(0);
        assert_eq!(sq.substitute(&u(0), trunc), sq);
        let shift = DiffPoly::rational_term(rat(-1, 24), ScalarKey::new(1, 2, 0), Monomial::var(2));
        let expr = &u(0) + &shift;
        assert_eq!(u(0).substitute(&expr, trunc), expr);
        let expr = &u(0) + &(&hbar() * &u(2));
        assert_eq!(u(1).substitute(&expr, trunc), &u(1) + &(&hbar() * &u(3)));
    }

    #[test]
    fn canonical_text() {
        let p = &(&q(rat(1, 6)) * &u(0).pow_trunc(3, Trunc::NONE)) + &(&(&q(rat(1, 24)) * &hbar()) * &(&u(0) * &u(2)));
        assert_eq!(p.to_string(), "1/6*u0^3 + 1/24*hbar*u0*u2");
        assert_eq!(DiffPoly::zero().to_string(), "0");
    }

    #[test]
    fn eps_zero_rejects_negative_powers() {
        let p = DiffPoly::term(Gaussian::one(), ScalarKey::eps(-1), Monomial::var(0));
        assert!(p.at_eps_zero().is_err());
        let p = &u(0) + &DiffPoly::term(Gaussian::one(), ScalarKey::eps(1), Monomial::var(2));
        assert_eq!(p.at_eps_zero().unwrap(), u(0));
    }

    pub(crate) fn arb_diffpoly(max_index: usize, max_deg: u32) -> impl Strategy<Value = DiffPoly> {
        let term = (
            proptest::collection::vec(0u32..=max_deg, max_index + 1),
            -6i64..7,
            1i64..5,
            0u32..3,
            -2i32..3,
        )
            .prop_map(|(exps, p, d, h, e)| {
                DiffPoly::rational_term(rat(p, d), ScalarKey::new(h, e, 0), Monomial::from_exponents(exps))
            });
        proptest::collection::vec(term, 0..5).prop_map(|ts| ts.iter().fold(DiffPoly::zero(), |a, t| &a + t))
    }

    proptest! {
        #[test]
        fn partial_x_is_derivation(f in arb_diffpoly(2, 2), g in arb_diffpoly(2, 2)) {
            let lhs = (&f * &g).partial_x();
            let rhs = &(&f * &g.partial_x()) + &(&g * &f.partial_x());
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn partial_x_raises_deg_dif(f in arb_diffpoly(3, 2)) {
            let df = f.partial_x();
            let before: std::collections::BTreeSet<_> = f.gradings(Grading::Standard).into_iter().map(|g| (g.deg_dif + 1, g.deg)).collect();
            for g in df.gradings(Grading::Standard) {
                prop_assert!(before.contains(&(g.deg_dif, g.deg)));
            }
        }

        #[test]
        fn partial_u_commutation(f in arb_diffpoly(3, 2), s in 0usize..5) {
            let lhs = f.partial_x().partial_u(s);
            let mut rhs = f.partial_u(s).partial_x();
            if s > 0 {
                rhs = &rhs + &f.partial_u(s - 1);
            }
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn substitute_is_homomorphism(f in arb_diffpoly(2, 2), g in arb_diffpoly(2, 2), e in arb_diffpoly(1, 1)) {
            let trunc = Trunc::hbar(4);
            let expr = &u(0) + &(&hbar() * &e);
            let lhs = f.mul_trunc(&g, trunc).substitute(&expr, trunc);
            let rhs = f.substitute(&expr, trunc).mul_trunc(&g.substitute(&expr, trunc), trunc);
            prop_assert_eq!(lhs, rhs);
            prop_assert_eq!(f.substitute(&u(0), Trunc::NONE), f.clone());
        }

        #[test]
        fn text_round_trip(f in arb_diffpoly(3, 2)) {
            let back: DiffPoly = f.to_string().parse().unwrap();
            prop_assert_eq!(back, f);
        }

        #[test]
        fn truncation_is_an_ideal(f in arb_diffpoly(1, 2), g in arb_diffpoly(1, 2)) {
            let t = Trunc::hbar(2);
            let early = f.truncate(t).mul_trunc(&g.truncate(t), t);
            let late = (&f * &g).truncate(t);
            prop_assert_eq!(early, late);
        }
    }
}
