//! The deformed KdV hierarchy: Hamiltonians, flows and the Dubrovin-Zhang operator.

mod construct;
mod context;

use std::fmt;

use crate::diffpoly::{DiffPoly, Monomial};
use crate::error::{Error, Result};
use crate::localfunc::{LocalFunctional, MiuraTransformation, PoissonOperator};
use crate::scalar::series::{forward_shift_coeff, lambda_g_prefactor, BernoulliTable};
use crate::scalar::{bernoulli_abs, factorial_q, int, rat, Gaussian, Rational, ScalarKey, Trunc};

pub use construct::construct_hamiltonian;
pub use context::HierarchyContext;

/// Whether eps is kept formal or set to zero (the classical KdV hierarchy).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Mode {
    #[default]
    Deformed,
    Classical,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hamiltonian {
    pub n: i32,
    /// hbar truncation order.
    pub order: u32,
    pub functional: LocalFunctional,
}

impl Hamiltonian {
    pub fn integrand(&self) -> &DiffPoly {
        self.functional.integrand()
    }

    /// `d/dx (delta h / delta u)`.
    pub fn flow(&self) -> DiffPoly {
        self.functional.variational_derivative().partial_x()
    }

    pub fn at_eps_zero(&self) -> Result<Hamiltonian> {
        Ok(Hamiltonian { functional: LocalFunctional::new(self.integrand().at_eps_zero()?)?, ..self.clone() })
    }

    /// Checks that every `hbar^g eps^j` term has `deg_dif = 2g` and degree `n + 2 + j - g`,
    /// with `max(0, g - n) <= j <= g`.
    pub fn check_gradings(&self) -> Result<()> {
        let n = self.n;
        for (k, m, _) in self.integrand().iter() {
            let g = k.hbar as i32;
            let j = k
                .eps_power()
                .ok_or_else(|| Error::CheckFailed(format!("h_{n}: half-integer eps power in {m}")))?;
            let ok = k.mu == 0
                && m.deg_dif() as i32 == 2 * g
                && m.degree() as i32 == n + 2 + j - g
                && (g - n).max(0) <= j
                && j <= g;
            if !ok {
                return Err(Error::CheckFailed(format!("h_{n}: term hbar^{g} eps^{j} {m} violates the gradings")));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Hamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.functional.fmt(f)
    }
}

fn term(c: Rational, hbar: u32, eps: i32, pairs: &[(usize, u32)]) -> DiffPoly {
    DiffPoly::rational_term(c, ScalarKey::new(hbar, 2 * eps, 0), Monomial::from_pairs(pairs))
}

fn hamiltonian(n: i32, order: u32, integrand: DiffPoly) -> Hamiltonian {
    let functional = LocalFunctional::new(integrand).expect("closed forms have no constant term");
    Hamiltonian { n, order, functional }
}

/// `int u dx`.
pub fn h_minus_one(order: u32) -> Hamiltonian {
    hamiltonian(-1, order, DiffPoly::u(0))
}

/// `int u^2/2 dx`.
pub fn h_zero(order: u32) -> Hamiltonian {
    hamiltonian(0, order, term(rat(1, 2), 0, 0, &[(0, 2)]))
}

/// `int (u^3/6 + sum_g hbar^g eps^(g-1) |B_2g|/(2 (2g)!) u u_2g) dx`.
pub fn h1_closed_form(order: u32) -> Hamiltonian {
    let mut p = term(rat(1, 6), 0, 0, &[(0, 3)]);
    for g in 1..=order {
        let c = bernoulli_abs(2 * g) / (int(2) * factorial_q(2 * g));
        p = &p + &term(c, g, g as i32 - 1, &[(0, 1), (2 * g as usize, 1)]);
    }
    hamiltonian(1, order, p)
}

pub fn h2_closed_form(order: u32) -> Hamiltonian {
    let mut p = term(rat(1, 24), 0, 0, &[(0, 4)]);
    for g in 1..=order {
        let b = bernoulli_abs(2 * g) / factorial_q(2 * g);
        let k = 2 * g as usize;
        p = &p + &term(&b * rat(1, 4), g, g as i32 - 1, &[(0, 2), (k, 1)]);
        if g >= 2 {
            p = &p + &term(&b * rat(g as i64 + 1, 2), g, g as i32 - 2, &[(0, 1), (k, 1)]);
        }
    }
    hamiltonian(2, order, p)
}

/// `K = d + sum_g (2g-1)|B_2g|/(2g)! (hbar eps)^g d^(2g+1)`.
pub fn dz_operator(order: u32) -> PoissonOperator {
    PoissonOperator::constant_coefficients((0..=order).map(|g| {
        let c = if g == 0 { int(1) } else { int(2 * g as i64 - 1) * bernoulli_abs(2 * g) / factorial_q(2 * g) };
        (2 * g + 1, Gaussian::real(c), ScalarKey::new(g, 2 * g as i32, 0))
    }))
}

/// `P o d o P` with `P = 1 + sum_g prefactor_g (hbar eps)^g d^(2g)`.
pub fn dz_operator_product(order: u32) -> PoissonOperator {
    let table = BernoulliTable::exact(2 * order);
    let p = PoissonOperator::constant_coefficients((0..=order).map(|g| {
        let c = if g == 0 { int(1) } else { lambda_g_prefactor(&table, g) };
        (2 * g, Gaussian::real(c), ScalarKey::new(g, 2 * g as i32, 0))
    }));
    let trunc = Trunc::hbar(order);
    p.compose(&PoissonOperator::dx(), trunc).compose(&p, trunc)
}

/// The closed form, after checking it against the product form.
pub fn dz_operator_verified(order: u32) -> Result<PoissonOperator> {
    let closed = dz_operator(order);
    let product = dz_operator_product(order);
    if closed != product {
        return Err(Error::CheckFailed(format!("product form {product} != closed form {closed}")));
    }
    Ok(closed)
}

/// `u -> u + sum_g (-1)^g/(2^2g (2g+1)!) (hbar eps)^g u_2g`, sending the DZ operator to `d/dx`.
pub fn dz_miura(order: u32) -> MiuraTransformation {
    let mut image = DiffPoly::u(0);
    for g in 1..=order {
        image = &image + &term(forward_shift_coeff(g), g, g as i32, &[(2 * g as usize, 1)]);
    }
    MiuraTransformation::new(image).expect("well-formed Miura transformation")
}
