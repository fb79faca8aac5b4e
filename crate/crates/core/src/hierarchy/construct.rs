use std::collections::BTreeMap;

use super::{h1_closed_form, Hamiltonian, Mode};
use crate::diffpoly::{DiffPoly, Monomial};
use crate::error::{Error, Result};
use crate::linalg::{self, PivotOrder};
use crate::localfunc::{ibp_normal_form, variational_derivative, LocalFunctional};
use crate::scalar::{factorial_q, Gaussian, Rational, ScalarKey, Trunc};

/// `vd( (u^2/2) * d/dx vd(m) )`: the linearized bracket with the cubic term.
fn cubic_column(m: &DiffPoly) -> DiffPoly {
    let half_sq = DiffPoly::rational_term(Rational::new(1.into(), 2.into()), ScalarKey::ONE, Monomial::var_pow(0, 2));
    variational_derivative(&(&half_sq * &variational_derivative(m).partial_x()))
}

/// `vd` of the integrand of `{h1, h}` under `d/dx`.
fn bracket_density(h1: &DiffPoly, h: &DiffPoly, trunc: Trunc) -> DiffPoly {
    let rhs = variational_derivative(h).partial_x();
    variational_derivative(&variational_derivative(h1).mul_trunc(&rhs, trunc))
}

/// The `(g, j)` slots of `h_n`: the coefficient of `hbar^g eps^j`.
pub(crate) fn slots(n: u32, g: u32, mode: Mode) -> Vec<u32> {
    match mode {
        Mode::Deformed => (g.saturating_sub(n)..=g).collect(),
        Mode::Classical => if g <= n { vec![0] } else { vec![] },
    }
}

pub(crate) fn slot_degree(n: u32, g: u32, j: u32) -> Option<u32> {
    (n + 2 + j).checked_sub(g).filter(|&d| d > 0)
}

/// Builds `h_n` (`n >= 2`) from a general ansatz by requiring it to commute with `h_1`.
pub fn construct_hamiltonian(n: u32, order: u32, mode: Mode, pivots: PivotOrder) -> Result<Hamiltonian> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("construction needs n >= 2, got {n}")));
    }
    let h1 = match mode {
        Mode::Deformed => h1_closed_form(order),
        Mode::Classical => h1_closed_form(order).at_eps_zero()?,
    };
    let h1 = h1.functional.integrand().clone();
    let mut h = DiffPoly::rational_term(
        Rational::from_integer(1.into()) / factorial_q(n + 2),
        ScalarKey::ONE,
        Monomial::var_pow(0, n + 2),
    );
    for g in 1..=order {
        let trunc = Trunc::hbar(g);
        let known = bracket_density(&h1, &h, trunc).filter(|k, _| k.hbar == g);
        let mut unknowns: Vec<(ScalarKey, Monomial)> = Vec::new();
        let mut columns: Vec<DiffPoly> = Vec::new();
        for j in slots(n, g, mode) {
            let Some(deg) = slot_degree(n, g, j) else { continue };
            let key = ScalarKey::new(g, 2 * j as i32, 0);
            for m in Monomial::enumerate(2 * g, deg) {
                let col = cubic_column(&DiffPoly::term(Gaussian::one(), ScalarKey::ONE, m.clone()));
                columns.push(col.map_keys(|k| k * key));
                unknowns.push((key, m));
            }
        }
        let mut row_index: BTreeMap<(ScalarKey, Monomial), usize> = BTreeMap::new();
        for p in columns.iter().chain(std::iter::once(&known)) {
            for (k, m, _) in p.iter() {
                let next = row_index.len();
                row_index.entry((*k, m.clone())).or_insert(next);
            }
        }
        let mut a = vec![vec![Rational::from_integer(0.into()); unknowns.len()]; row_index.len()];
        let mut b = vec![Rational::from_integer(0.into()); row_index.len()];
        for (c, col) in columns.iter().enumerate() {
            for (k, m, v) in col.iter() {
                a[row_index[&(*k, m.clone())]][c] = real_part(v)?;
            }
        }
        for (k, m, v) in known.iter() {
            b[row_index[&(*k, m.clone())]] = -real_part(v)?;
        }
        let x = linalg::solve(&a, &b, unknowns.len(), pivots)
            .ok_or_else(|| Error::Inconsistent(format!("h_{n} at hbar^{g}")))?;
        for ((key, m), xi) in unknowns.into_iter().zip(x) {
            h.add_term(key, m, &Gaussian::real(xi));
        }
    }
    Ok(Hamiltonian { n: n as i32, order, functional: LocalFunctional::new(ibp_normal_form(&h))? })
}

fn real_part(v: &Gaussian) -> Result<Rational> {
    if v.is_real() {
        Ok(v.re.clone())
    } else {
        Err(Error::InvalidArgument(format!("unexpected imaginary coefficient {v}")))
    }
}
