//! The Intermediate Long Wave equation: its rescaling to the first deformed KdV flow,
//! the conserved densities `sigma_n`, and their expansion in the Hamiltonians.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Pow};

use crate::diffpoly::{DiffPoly, Grading, Monomial};
use crate::error::{Error, Result};
use crate::hierarchy::{h1_closed_form, HierarchyContext};
use crate::localfunc::{ibp_normal_form, variational_derivative, LocalFunctional};
use crate::scalar::{bernoulli_abs, factorial, factorial_q, int, Gaussian, Rational, ScalarKey, ScalarPoly, Trunc};

/// `R f = sum_g mu^(2g-1) eps^(g-1) |B_2g|/(2g)! d^(2g-1) f`, keeping `mu^(<= order)`.
pub fn op_r(f: &DiffPoly, order: u32) -> DiffPoly {
    let trunc = Trunc::mu(order);
    let mut out = DiffPoly::zero();
    let mut g = 1;
    while 2 * g - 1 <= order {
        let c = Gaussian::real(bernoulli_abs(2 * g) / factorial_q(2 * g));
        let key = ScalarKey::new(0, 2 * (g as i32 - 1), 2 * g - 1);
        out = &out + &f.partial_x_n(2 * g - 1).scale_term(&c, key, trunc);
        g += 1;
    }
    out
}

/// `T f = sum_n delta^(2n-1) 2^(2n) |B_2n|/(2n)! d^(2n-1) f` as a series in `delta`, up to `delta^order`.
pub fn op_t(f: &DiffPoly, order: u32) -> BTreeMap<u32, DiffPoly> {
    let mut out = BTreeMap::new();
    let mut n = 1;
    while 2 * n - 1 <= order {
        let c = Rational::from_integer(BigInt::from(2).pow(2 * n)) * bernoulli_abs(2 * n) / factorial_q(2 * n);
        let term = f.partial_x_n(2 * n - 1).scale_rational(&c);
        if !term.is_zero() {
            out.insert(2 * n - 1, term);
        }
        n += 1;
    }
    out
}

/// Right-hand side of the ILW equation after `w = sqrt(eps) u / mu`, `tau = -mu t / (2 sqrt(eps))`,
/// `delta = mu sqrt(eps) / 2`, so that `u_t = mu^2/(2 eps) (2 w w_x + T(w_xx))`.
pub fn rescaled_ilw_flow(order: u32) -> Result<DiffPoly> {
    let w = DiffPoly::u(0);
    let mut series = op_t(&w.partial_x_n(2), order + 1);
    let nonlinear = (&w * &w.partial_x()).scale_rational(&int(2));
    let entry = series.entry(0).or_default();
    *entry = &*entry + &nonlinear;

    let mut out = DiffPoly::zero();
    for (a, p) in &series {
        for (_, m, c) in p.iter() {
            let d = m.degree() as i64;
            let mu = *a as i64 - d + 2;
            if mu < 0 {
                return Err(Error::CheckFailed(format!("negative power of mu from delta^{a} {m}")));
            }
            let eps_half = *a as i64 + d - 2;
            let scale = Rational::new(BigInt::one(), BigInt::from(2).pow(*a + 1));
            let key = ScalarKey::new(0, eps_half as i32, mu as u32);
            out.add_term(key, m.clone(), &c.scale(&scale));
        }
    }
    Ok(out.truncate(Trunc::mu(order)))
}

/// The conserved densities `sigma_1 .. sigma_{n_max}`, truncated at `mu^order`.
#[derive(Clone, Debug)]
pub struct SigmaExpansion {
    pub order: u32,
    terms: Vec<DiffPoly>,
}

impl SigmaExpansion {
    pub fn n_max(&self) -> usize {
        self.terms.len()
    }

    /// `sigma_n` for `1 <= n <= n_max`.
    pub fn sigma(&self, n: usize) -> &DiffPoly {
        &self.terms[n - 1]
    }

    /// Every `mu^i` coefficient has differential degree `i`.
    pub fn is_graded(&self) -> bool {
        self.terms.iter().all(|s| s.is_homogeneous(0, Grading::MuExtended))
    }
}

/// Solves `e^sigma - 1 = (2 sigma / eps - mu (i/sqrt(eps) + 2R) sigma_x + 2u) / lambda`
/// order by order in `1/lambda`.
pub fn sigma_sequence(n_max: usize, order: u32) -> SigmaExpansion {
    let trunc = Trunc::mu(order);
    let two_over_eps = Gaussian::from_int(2);
    let i_over_root_eps = ScalarKey::new(0, -1, 1);
    // powers[k][m] = [lambda^-m] sigma^k for k >= 2
    let mut powers: Vec<Vec<DiffPoly>> = vec![Vec::new(); n_max + 1];
    let mut sigma: Vec<DiffPoly> = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let mut next = if n == 1 {
            DiffPoly::u(0).scale_rational(&int(2))
        } else {
            let prev = &sigma[n - 2];
            let dx = prev.partial_x();
            let linear = prev.scale_term(&two_over_eps, ScalarKey::eps(-1), trunc);
            let imaginary = dx.scale_term(&Gaussian::i(), i_over_root_eps, trunc);
            let nonlocal = op_r(&dx, order.saturating_sub(1)).scale_term(&Gaussian::from_int(2), ScalarKey::mu(1), trunc);
            &(&linear - &imaginary) - &nonlocal
        };
        for k in 2..=n {
            let mut acc = DiffPoly::zero();
            for a in 1..=(n + 1 - k) {
                let lower = if k == 2 { &sigma[n - a - 1] } else { &powers[k - 1][n - a] };
                acc = &acc + &sigma[a - 1].mul_trunc(lower, trunc);
            }
            next = &next - &acc.scale_rational(&(Rational::one() / factorial_q(k as u32)));
            let row = &mut powers[k];
            row.resize(n + 1, DiffPoly::zero());
            row[n] = acc;
        }
        sigma.push(next);
    }
    SigmaExpansion { order, terms: sigma }
}

/// First deformed KdV flow with `hbar = mu^2`, truncated at `mu^order`.
pub fn ilw_flow(order: u32) -> DiffPoly {
    h1_closed_form(order / 2).flow().hbar_to_mu_squared().truncate(Trunc::mu(order))
}

/// Whether `d/dt int sigma_n dx` vanishes along the first flow, up to `mu^order`.
pub fn conservation_check(sigmas: &SigmaExpansion, n: usize, order: u32) -> bool {
    let trunc = Trunc::mu(order);
    let flow = ilw_flow(order);
    let sigma = sigmas.sigma(n).truncate(trunc);
    let top = sigma.max_index().unwrap_or(0);
    let mut derivative = DiffPoly::zero();
    let mut dflow = flow;
    for s in 0..=top {
        derivative = &derivative + &sigma.partial_u(s).mul_trunc(&dflow, trunc);
        dflow = dflow.partial_x();
    }
    variational_derivative(&derivative).is_zero()
}

#[derive(Clone, Debug)]
pub struct HamiltonianDecomposition {
    pub n: usize,
    /// Coefficient of `h_k` for `k = -1 .. n-2`.
    pub coefficients: BTreeMap<i32, ScalarPoly>,
    pub residual: LocalFunctional,
}

impl HamiltonianDecomposition {
    pub fn all_real(&self) -> bool {
        self.coefficients.values().all(ScalarPoly::is_real)
    }
}

impl fmt::Display for HamiltonianDecomposition {
    /// `k<TAB>coefficient` lines from the top index down, then the residual.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, c) in self.coefficients.iter().rev() {
            writeln!(f, "{k}\t{c}")?;
        }
        write!(f, "residual: {}", self.residual.integrand())
    }
}

/// `(-1)^(n+1) 2^n (n-1)!`.
pub fn leading_coefficient(n: usize) -> Rational {
    let sign = if n % 2 == 1 { 1 } else { -1 };
    Rational::from_integer(BigInt::from(sign) * BigInt::from(2).pow(n as u32) * factorial(n as u32 - 1))
}

/// Writes `int sigma_n dx` as `sum_k c_k h_k` with `hbar = mu^2`, checked up to `mu^order`.
pub fn decompose_in_hamiltonians(
    sigmas: &SigmaExpansion,
    n: usize,
    ctx: &HierarchyContext,
    order: u32,
) -> Result<HamiltonianDecomposition> {
    if ctx.order() < order / 2 {
        return Err(Error::InvalidArgument(format!("Hamiltonians at hbar order {} needed, context has {}", order / 2, ctx.order())));
    }
    let trunc = Trunc::mu(order);
    let sigma = sigmas.sigma(n).truncate(trunc);
    let mut coefficients: BTreeMap<i32, ScalarPoly> = (-1..=n as i32 - 2).map(|k| (k, ScalarPoly::zero())).collect();
    for (key, m, c) in sigma.iter().filter(|(k, _, _)| k.mu == 0) {
        let d = m.degree();
        if m != &Monomial::var_pow(0, d) || d < 1 || d > n as u32 {
            return Err(Error::CheckFailed(format!("unexpected mu^0 term {m} in sigma_{n}")));
        }
        let slot = coefficients.get_mut(&(d as i32 - 2)).expect("slot exists");
        slot.add_term(*key, &c.scale(&factorial_q(d)));
    }
    let mut residual = sigma;
    for (k, c) in &coefficients {
        let h = ctx.hamiltonian(*k)?.integrand().hbar_to_mu_squared();
        residual = &residual - &DiffPoly::from_scalar(c).mul_trunc(&h, trunc);
    }
    if !variational_derivative(&residual).is_zero() {
        return Err(Error::NonzeroResidual(format!("sigma_{n}: {}", ibp_normal_form(&residual))));
    }
    let expected = leading_coefficient(n);
    let lead = &coefficients[&(n as i32 - 2)];
    if lead != &ScalarPoly::constant(Gaussian::real(expected.clone())) {
        return Err(Error::CheckFailed(format!("leading coefficient of sigma_{n} is {lead}, expected {expected}")));
    }
    let residual = LocalFunctional::new(ibp_normal_form(&residual))?;
    Ok(HamiltonianDecomposition { n, coefficients, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn parse(s: &str) -> DiffPoly {
        s.parse().unwrap()
    }

    #[test]
    fn r_operator() {
        assert_eq!(op_r(&DiffPoly::u(1), 3), parse("1/12*mu*u2 + 1/720*eps*mu^3*u4"));
        assert!(op_r(&DiffPoly::zero(), 5).is_zero());
        assert!(op_r(&DiffPoly::u(1), 5).is_homogeneous(1, Grading::MuExtended));
    }

    #[test]
    fn t_operator() {
        let t = op_t(&DiffPoly::u(2), 1);
        assert_eq!(t.len(), 1);
        assert_eq!(t[&1], parse("1/3*u3"));
        assert!(op_t(&DiffPoly::zero(), 5).is_empty());
    }

    #[test]
    fn rescaling_gives_first_flow() {
        for order in 0..=6 {
            assert_eq!(rescaled_ilw_flow(order).unwrap(), ilw_flow(order), "order {order}");
        }
    }

    #[test]
    fn first_sigmas() {
        let s = sigma_sequence(2, 3);
        assert_eq!(s.sigma(1), &parse("2*u0"));
        let u1 = DiffPoly::u(1);
        let mut expected = parse("-2*u0^2 + 4*eps^-1*u0");
        expected = &expected - &u1.scale_term(&Gaussian::new(rat(0, 1), rat(2, 1)), ScalarKey::new(0, -1, 1), Trunc::NONE);
        expected = &expected - &op_r(&u1, 2).scale_term(&Gaussian::from_int(4), ScalarKey::mu(1), Trunc::NONE);
        assert_eq!(s.sigma(2), &expected);
        assert!(sigma_sequence(4, 5).is_graded());
    }

    #[test]
    fn truncations_are_prefixes() {
        let long = sigma_sequence(4, 6);
        let short = sigma_sequence(4, 3);
        for n in 1..=4 {
            assert_eq!(long.sigma(n).truncate(Trunc::mu(3)), *short.sigma(n));
        }
    }

    #[test]
    fn conservation() {
        let s = sigma_sequence(3, 4);
        for n in 1..=3 {
            assert!(conservation_check(&s, n, 4), "sigma_{n}");
        }
    }

    #[test]
    fn small_decompositions() {
        let ctx = HierarchyContext::new(2);
        let s = sigma_sequence(3, 4);
        let d1 = decompose_in_hamiltonians(&s, 1, &ctx, 4).unwrap();
        assert_eq!(d1.to_string(), "-1\t2\nresidual: 0");
        let d2 = decompose_in_hamiltonians(&s, 2, &ctx, 4).unwrap();
        assert_eq!(d2.to_string(), "0\t-4\n-1\t4*eps^-1\nresidual: 0");
        let d3 = decompose_in_hamiltonians(&s, 3, &ctx, 4).unwrap();
        assert_eq!(d3.coefficients[&1], ScalarPoly::constant(Gaussian::from_int(16)));
        assert_eq!(leading_coefficient(3), int(16));
    }

    #[test]
    fn decompositions_up_to_five() {
        let ctx = HierarchyContext::new(3);
        let s = sigma_sequence(5, 6);
        for n in 1..=5 {
            let d = decompose_in_hamiltonians(&s, n, &ctx, 6).unwrap();
            println!("{d}");
            assert!(d.residual.integrand().is_zero());
            assert!(d.all_real(), "{d}");
        }
    }
}
