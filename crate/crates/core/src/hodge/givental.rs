use std::collections::BTreeMap;

use crate::diffpoly::DiffPoly;
use crate::error::{Error, Result};
use crate::hierarchy::dz_miura;
use crate::localfunc::{ibp_normal_form, LocalFunctional};
use crate::diffpoly::Monomial;
use crate::scalar::{binomial_q, Gaussian, Rational, ScalarKey, Trunc};

/// Two-point functions `Omega_{p,q}`, stored once per unordered pair.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OmegaTable {
    entries: BTreeMap<(u32, u32), DiffPoly>,
}

impl OmegaTable {
    /// A table holding only `Omega_{0,0} = u`.
    pub fn new() -> Self {
        let mut t = OmegaTable::default();
        t.insert(0, 0, DiffPoly::u(0));
        t
    }

    pub fn insert(&mut self, p: u32, q: u32, omega: DiffPoly) {
        self.entries.insert((p.min(q), p.max(q)), omega);
    }

    pub fn get(&self, p: u32, q: u32) -> Result<&DiffPoly> {
        self.entries.get(&(p.min(q), p.max(q))).ok_or(Error::MissingOmega(p, q))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(u32, u32), &DiffPoly)> {
        self.entries.iter()
    }
}

/// The genus-expanded two-point functions of the trivial theory needed at `l = 1`.
pub fn omega_kdv_table() -> OmegaTable {
    let mut t = OmegaTable::new();
    let entries = [
        (0, 1, "1/2*u0^2 + 1/12*hbar*u2"),
        (0, 2, "1/6*u0^3 + 1/24*hbar*u1^2 + 1/12*hbar*u0*u2 + 1/240*hbar^2*u4"),
        (
            0,
            3,
            "1/24*u0^4 + 1/24*hbar*u0*u1^2 + 1/24*hbar*u0^2*u2 + 1/120*hbar^2*u1*u3 \
             + 1/160*hbar^2*u2^2 + 1/240*hbar^2*u0*u4 + 1/6720*hbar^3*u6",
        ),
        (
            1,
            2,
            "1/8*u0^4 + 1/12*hbar*u0*u1^2 + 1/8*hbar*u0^2*u2 + 1/60*hbar^2*u1*u3 \
             + 23/1440*hbar^2*u2^2 + 1/90*hbar^2*u0*u4 + 1/2880*hbar^3*u6",
        ),
    ];
    for (p, q, text) in entries {
        t.insert(p, q, text.parse().expect("well-formed omega"));
    }
    t
}

fn sign(i: u32) -> Rational {
    // (-1)^{i+1}
    Rational::from_integer(if i.is_multiple_of(2) { (-1).into() } else { 1.into() })
}

/// `z^{2l-1}[u](Omega_{p,q})` integrated over x, at hbar-order `order`.
pub fn givental_z_apply(l: u32, omega: &OmegaTable, target: (u32, u32), order: u32) -> Result<LocalFunctional> {
    if l == 0 {
        return Err(Error::InvalidArgument("l must be at least 1".into()));
    }
    let trunc = Trunc::hbar(order);
    let (p, q) = target;
    let top = 2 * l - 1;
    let m = 2 * l - 2;
    let w = omega.get(p, q)?.truncate(trunc);
    let mut out = omega.get(p + top, q)? + omega.get(p, q + top)?;
    for i in 0..=m {
        out = &out + &omega.get(p, i)?.mul_trunc(omega.get(m - i, q)?, trunc).scale_rational(&sign(i));
    }

    let o0top = omega.get(0, top)?;
    let pairs: Vec<(Rational, &DiffPoly, &DiffPoly)> =
        (0..=m).map(|i| Ok((sign(i), omega.get(0, i)?, omega.get(m - i, 0)?))).collect::<Result<_>>()?;
    let max_n = w.max_index().unwrap_or(0);
    for n in 0..=max_n {
        let dw = w.partial_u(n);
        if dw.is_zero() {
            continue;
        }
        let nn = n as u32;
        let mut chain = o0top.partial_x_n(nn).scale_rational(&Rational::from_integer((nn + 2).into()));
        for (s, a, b) in &pairs {
            for k in 0..nn {
                let prod = a.partial_x_n(k + 1).mul_trunc(&b.partial_x_n(nn - k - 1), trunc);
                chain = &chain + &prod.scale_rational(&(s * binomial_q(nn, k)));
            }
            chain = &chain + &a.mul_trunc(b, trunc).partial_x_n(nn).scale_rational(s);
        }
        out = &out - &dw.mul_trunc(&chain, trunc);
    }

    let half_hbar = Gaussian::ratio(1, 2);
    for n in 0..=max_n {
        for k in 0..=max_n {
            let d2 = w.partial_u(n).partial_u(k);
            if d2.is_zero() {
                continue;
            }
            let mut inner = DiffPoly::zero();
            for (s, a, b) in &pairs {
                let prod = a.partial_x_n(n as u32 + 1).mul_trunc(&b.partial_x_n(k as u32 + 1), trunc);
                inner = &inner + &prod.scale_rational(s);
            }
            let term = d2.mul_trunc(&inner, trunc).scale_term(&half_hbar, ScalarKey::hbar(1), trunc);
            out = &out + &term;
        }
    }
    LocalFunctional::new(out.truncate(trunc))
}

/// Coefficients `c_g` of `hbar^g eps^{g-1} u~ u~_{2g}` in `int Omega_{0,2} dx` after the
/// Miura transformation, from the first-order deformation
/// `Omega_{0,2} = Omega^KdV_{0,2} - eps/12 z[u](Omega^KdV_{0,2}) + O(eps^2)`.
///
/// Only `g <= 2` are determined by the first-order term. Also returns the normal form
/// of the `hbar eps` component, which the transformation must remove.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransportedCoefficients {
    pub c: Vec<Rational>,
    pub hbar_eps_residue: DiffPoly,
}

pub fn transported_coefficients(omega: &OmegaTable) -> Result<TransportedCoefficients> {
    let order = 2;
    let trunc = Trunc::hbar(order);
    let z = givental_z_apply(1, omega, (0, 2), order)?;
    let deformation = z.integrand().scale_term(&Gaussian::ratio(-1, 12), ScalarKey::eps(1), trunc);
    let h1 = &omega.get(0, 2)?.truncate(trunc) + &deformation;
    let transformed = dz_miura(order).transform_poly(&h1, order);
    let mut c = Vec::new();
    for g in 1..=order {
        let nf = ibp_normal_form(&transformed.component(ScalarKey::new(g, 2 * (g as i32 - 1), 0)));
        let mono = Monomial::var_pow(g as usize, 2);
        let coeff = nf.coeff(ScalarKey::ONE, &mono);
        if !coeff.is_real() || nf.len() > usize::from(!coeff.is_zero()) {
            return Err(Error::CheckFailed(format!("hbar^{g} eps^{} component is {nf}", g - 1)));
        }
        let s = if g % 2 == 0 { coeff.re } else { -coeff.re };
        c.push(s);
    }
    let hbar_eps_residue = ibp_normal_form(&transformed.component(ScalarKey::new(1, 2, 0)));
    Ok(TransportedCoefficients { c, hbar_eps_residue })
}
