use super::{LocalFunctional, PoissonOperator};
use crate::diffpoly::DiffPoly;
use crate::error::{Error, Result};
use crate::scalar::{Gaussian, Trunc};

/// A change of variable `u -> u~ = u + sum_k hbar^k f_k` with `deg_dif f_k = 2k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MiuraTransformation {
    image: DiffPoly,
}

impl MiuraTransformation {
    pub fn new(image: DiffPoly) -> Result<Self> {
        let leading = image.filter(|k, _| k.hbar == 0);
        if leading != DiffPoly::u(0) {
            return Err(Error::InvalidArgument(format!("leading term of a Miura transformation must be u0, got {leading}")));
        }
        let graded = image.iter().all(|(k, m, _)| k.hbar == 0 || m.deg_dif() == 2 * k.hbar);
        if !graded {
            return Err(Error::InvalidArgument(format!("hbar^k coefficients must have deg_dif 2k: {image}")));
        }
        Ok(MiuraTransformation { image })
    }

    pub fn identity() -> Self {
        MiuraTransformation { image: DiffPoly::u(0) }
    }

    /// `u~` written in terms of `u`.
    pub fn image(&self) -> &DiffPoly {
        &self.image
    }

    /// `other` first, then `self`.
    pub fn compose(&self, other: &Self, order: u32) -> Self {
        MiuraTransformation { image: self.image.substitute(&other.image, Trunc::hbar(order)) }
    }

    /// Fixed-point iteration `S <- u - (T[S] - S)`, one hbar order per step.
    pub fn invert(&self, order: u32) -> Self {
        let trunc = Trunc::hbar(order);
        let u = DiffPoly::u(0);
        let mut s = u.clone();
        for _ in 0..order {
            let ts = self.image.substitute(&s, trunc);
            s = &u - &(&ts - &s);
        }
        MiuraTransformation { image: s }
    }

    /// Rewrites a differential polynomial in `u` as one in `u~`.
    pub fn transform_poly(&self, f: &DiffPoly, order: u32) -> DiffPoly {
        f.substitute(&self.invert(order).image, Trunc::hbar(order))
    }

    pub fn transform_functional(&self, h: &LocalFunctional, order: u32) -> Result<LocalFunctional> {
        LocalFunctional::new(self.transform_poly(h.integrand(), order))
    }

    /// `(sum_p du~/du_p d^p) o K o (sum_q (-d)^q o du~/du_q)`, coefficients rewritten in `u~`.
    pub fn apply_to_operator(&self, k: &PoissonOperator, order: u32) -> PoissonOperator {
        let trunc = Trunc::hbar(order);
        let top = self.image.max_index().unwrap_or(0) as u32;
        let mut left = PoissonOperator::zero();
        let mut right = PoissonOperator::zero();
        for p in 0..=top {
            let d = self.image.partial_u(p as usize);
            if d.is_zero() {
                continue;
            }
            left.add_term(p, &d);
            let sign = if p % 2 == 0 { Gaussian::one() } else { Gaussian::from_int(-1) };
            let dp = PoissonOperator::term(p, DiffPoly::constant(sign));
            right = right.add(&dp.compose(&PoissonOperator::term(0, d), trunc));
        }
        let composed = left.compose(&k.compose(&right, trunc), trunc);
        composed.substitute_coefficients(&self.invert(order).image, trunc)
    }
}

#[cfg(test)]
/// `u~ = u + c * key * u_k`.
pub(crate) fn shift(c: Gaussian, key: crate::scalar::ScalarKey, k: usize) -> DiffPoly {
    &DiffPoly::u(0) + &DiffPoly::term(c, key, crate::diffpoly::Monomial::var(k))
}
