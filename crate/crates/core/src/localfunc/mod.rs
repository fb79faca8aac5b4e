//! Local functionals, variational calculus, Poisson operators and the Miura group.

mod miura;
mod operator;

use std::fmt;

use crate::diffpoly::{DiffPoly, Monomial};
use crate::error::{Error, Result};
use crate::scalar::{Gaussian, Rational, Trunc};

pub use miura::MiuraTransformation;
pub use operator::PoissonOperator;

/// `int f dx`, an integrand taken modulo total x-derivatives.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalFunctional {
    integrand: DiffPoly,
}

impl LocalFunctional {
    pub fn new(integrand: DiffPoly) -> Result<Self> {
        if !integrand.constant_term().is_zero() {
            return Err(Error::ConstantTerm);
        }
        Ok(LocalFunctional { integrand })
    }

    pub fn zero() -> Self {
        LocalFunctional { integrand: DiffPoly::zero() }
    }

    pub fn integrand(&self) -> &DiffPoly {
        &self.integrand
    }

    pub fn variational_derivative(&self) -> DiffPoly {
        variational_derivative(&self.integrand)
    }

    pub fn is_zero(&self) -> bool {
        self.variational_derivative().is_zero()
    }

    /// Equality of classes modulo the image of d/dx.
    pub fn equals(&self, other: &LocalFunctional) -> bool {
        self.sub(other).is_zero()
    }

    pub fn add(&self, other: &LocalFunctional) -> LocalFunctional {
        LocalFunctional { integrand: &self.integrand + &other.integrand }
    }

    pub fn sub(&self, other: &LocalFunctional) -> LocalFunctional {
        LocalFunctional { integrand: &self.integrand - &other.integrand }
    }

    pub fn scale(&self, c: &Gaussian) -> LocalFunctional {
        LocalFunctional { integrand: self.integrand.scale(c) }
    }

    pub fn truncate(&self, trunc: Trunc) -> LocalFunctional {
        LocalFunctional { integrand: self.integrand.truncate(trunc) }
    }

    /// The same class with the integrand in normal form.
    pub fn normalized(&self) -> LocalFunctional {
        LocalFunctional { integrand: ibp_normal_form(&self.integrand) }
    }
}

impl fmt::Display for LocalFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "int( {} ) dx", self.integrand)
    }
}

/// `sum_i (-d/dx)^i df/du_i`.
pub fn variational_derivative(f: &DiffPoly) -> DiffPoly {
    let top = f.max_index().unwrap_or(0);
    let mut out = DiffPoly::zero();
    for i in 0..=top {
        let mut term = f.partial_u(i).partial_x_n(i as u32);
        if i % 2 == 1 {
            term = -&term;
        }
        out = &out + &term;
    }
    out
}

pub fn functional_is_zero(h: &LocalFunctional) -> bool {
    h.is_zero()
}

/// Top derivative index of `m` when `m` is linear in it and that index is at least 1.
fn reducible_top(m: &Monomial) -> Option<usize> {
    let top = m.max_index()?;
    (top >= 1 && m.exponent(top) == 1).then_some(top)
}

/// Canonical representative of `int f dx`: no monomial is linear in its top derivative.
///
/// `c * s * u_{m-1}^a * u_m` is replaced by `-c/(a+1) * u_{m-1}^{a+1} * d(s)/dx`,
/// which differs from it by an exact term and involves only indices below `m`.
pub fn ibp_normal_form(f: &DiffPoly) -> DiffPoly {
    let mut p = f.clone();
    loop {
        let found = p.iter().rev().find_map(|(k, m, c)| reducible_top(m).map(|top| (*k, m.clone(), c.clone(), top)));
        let Some((key, m, c, top)) = found else {
            return p;
        };
        let a = m.exponent(top - 1);
        let lifted = m.without_factor(top).expect("top factor").with_factor(top - 1, 1);
        let exact = DiffPoly::term(c, key, lifted).partial_x();
        p = &p - &exact.scale_rational(&Rational::new(1.into(), (a + 1).into()));
    }
}

/// `{g, h}_K = int (dg/du) K (dh/du) dx`, reported in normal form.
pub fn poisson_bracket(g: &LocalFunctional, h: &LocalFunctional, k: &PoissonOperator, trunc: Trunc) -> Result<LocalFunctional> {
    let lhs = g.variational_derivative();
    let rhs = k.apply(&h.variational_derivative(), trunc);
    LocalFunctional::new(ibp_normal_form(&lhs.mul_trunc(&rhs, trunc)))
}

/// `[q, r] = sum_s (d^s q) dr/du_s - (d^s r) dq/du_s`.
pub fn evolutionary_bracket(q: &DiffPoly, r: &DiffPoly, trunc: Trunc) -> DiffPoly {
    let top = q.max_index().into_iter().chain(r.max_index()).max().unwrap_or(0);
    let mut out = DiffPoly::zero();
    let (mut dq, mut dr) = (q.clone(), r.clone());
    for s in 0..=top {
        out = &out + &dq.mul_trunc(&r.partial_u(s), trunc);
        out = &out - &dr.mul_trunc(&q.partial_u(s), trunc);
        dq = dq.partial_x();
        dr = dr.partial_x();
    }
    out
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::linalg;
    use crate::scalar::{int, rat, ScalarKey};
    use proptest::prelude::*;

    pub fn u(k: usize) -> DiffPoly {
        DiffPoly::u(k)
    }

    pub fn q(r: Rational) -> DiffPoly {
        DiffPoly::constant(Gaussian::real(r))
    }

    pub fn mono(pairs: &[(usize, u32)]) -> DiffPoly {
        DiffPoly::term(Gaussian::one(), ScalarKey::ONE, Monomial::from_pairs(pairs))
    }

    pub fn func(p: DiffPoly) -> LocalFunctional {
        LocalFunctional::new(p).unwrap()
    }

    #[test]
    fn variational_derivative_examples() {
        assert_eq!(variational_derivative(&mono(&[(0, 1), (2, 1)])), &q(int(2)) * &u(2));
        assert_eq!(variational_derivative(&mono(&[(0, 2), (3, 1)])), &q(int(-6)) * &mono(&[(1, 1), (2, 1)]));
        let expected = &(&q(int(-4)) * &mono(&[(1, 1), (4, 1)])) - &(&q(int(8)) * &mono(&[(2, 1), (3, 1)]));
        assert_eq!(variational_derivative(&mono(&[(1, 2), (3, 1)])), expected);
    }

    #[test]
    fn vanishing_functionals() {
        assert!(func(mono(&[(0, 1), (1, 1)]).partial_x()).is_zero());
        assert!(func(&mono(&[(1, 1), (3, 1)]) + &mono(&[(2, 2)])).is_zero());
        assert!(!func(mono(&[(0, 1), (2, 1)])).is_zero());
        assert!(matches!(LocalFunctional::new(&u(0) + &q(int(1))), Err(Error::ConstantTerm)));
    }

    #[test]
    fn normal_form_examples() {
        assert_eq!(ibp_normal_form(&mono(&[(1, 2)])), mono(&[(1, 2)]));
        assert_eq!(ibp_normal_form(&mono(&[(0, 1), (2, 1)])), -&mono(&[(1, 2)]));
        assert_eq!(ibp_normal_form(&mono(&[(1, 1), (3, 1)])), -&mono(&[(2, 2)]));
        assert_eq!(ibp_normal_form(&mono(&[(0, 3)])), mono(&[(0, 3)]));
        // int u u_{2g} = (-1)^g int u_g^2
        assert_eq!(ibp_normal_form(&mono(&[(0, 1), (4, 1)])), mono(&[(2, 2)]));
        assert_eq!(ibp_normal_form(&mono(&[(0, 1), (6, 1)])), -&mono(&[(3, 2)]));
    }

    #[test]
    fn bracket_examples() {
        let dx = PoissonOperator::dx();
        let t = Trunc::NONE;
        let cube = func(&q(rat(1, 6)) * &mono(&[(0, 3)]));
        assert!(poisson_bracket(&cube, &cube, &dx, t).unwrap().integrand().is_zero());
        let a = func(mono(&[(0, 1), (2, 1)]));
        let b = func(mono(&[(0, 1), (4, 1)]));
        assert!(poisson_bracket(&a, &b, &dx, t).unwrap().is_zero());
        let quartic = func(&q(rat(1, 24)) * &mono(&[(0, 4)]));
        let lhs = poisson_bracket(&cube, &func(mono(&[(0, 2), (4, 1)])), &dx, t).unwrap();
        let rhs = poisson_bracket(&b, &quartic, &dx, t).unwrap();
        assert!(lhs.add(&rhs).add(&rhs).is_zero());
    }

    #[test]
    fn evolutionary_bracket_examples() {
        let t = Trunc::NONE;
        let uu1 = mono(&[(0, 1), (1, 1)]);
        assert!(evolutionary_bracket(&uu1, &uu1, t).is_zero());
        assert_eq!(evolutionary_bracket(&uu1, &mono(&[(1, 2)]), t), mono(&[(1, 3)]));
    }

    #[test]
    fn leading_monomial_law() {
        let t = Trunc::NONE;
        let uu1 = mono(&[(0, 1), (1, 1)]);
        // f(u) = u^2, alpha_2 = alpha_3 = 1: 3 + 4 - 0 - 1 = 6
        let br = evolutionary_bracket(&uu1, &mono(&[(0, 2), (2, 1), (3, 1)]), t);
        assert_eq!(br.coeff(ScalarKey::ONE, &Monomial::from_pairs(&[(0, 2), (1, 1), (2, 1), (3, 1)])), Gaussian::from_int(6));
        // alpha_1 = 2, alpha_4 = 1: 4 + 5 - 2 - 1 = 6
        let br = evolutionary_bracket(&uu1, &mono(&[(0, 1), (1, 2), (4, 1)]), t);
        assert_eq!(br.coeff(ScalarKey::ONE, &Monomial::from_pairs(&[(0, 1), (1, 3), (4, 1)])), Gaussian::from_int(6));
    }

    #[test]
    fn bracket_with_cubic_is_exact_bracket() {
        let t = Trunc::NONE;
        let uu1 = mono(&[(0, 1), (1, 1)]);
        let cube = func(&q(rat(1, 6)) * &mono(&[(0, 3)]));
        let p = &mono(&[(0, 2), (2, 2)]) + &mono(&[(1, 2), (3, 1)]);
        let via_bracket = poisson_bracket(&func(p.clone()), &cube, &PoissonOperator::dx(), t).unwrap();
        assert!(via_bracket.equals(&func(evolutionary_bracket(&uu1, &p, t))));
    }

    /// Nonconstant monomials of bounded differential degree and degree.
    fn monomials(max_dif: u32, max_deg: u32) -> Vec<Monomial> {
        (0..=max_dif).flat_map(|d| (1..=max_deg).flat_map(move |n| Monomial::enumerate(d, n))).collect()
    }

    /// `f` is exact iff it lies in the span of `{d/dx m}` with deg_dif m <= 5.
    fn is_exact_oracle(f: &DiffPoly, basis: &[Monomial], images: &[DiffPoly], rows: &[Monomial]) -> bool {
        let mut a: Vec<Vec<Rational>> = rows.iter().map(|_| Vec::with_capacity(basis.len())).collect();
        for img in images {
            for (r, m) in rows.iter().enumerate() {
                a[r].push(img.coeff(ScalarKey::ONE, m).re);
            }
        }
        let b: Vec<Rational> = rows.iter().map(|m| f.coeff(ScalarKey::ONE, m).re).collect();
        linalg::solve(&a, &b, basis.len(), linalg::PivotOrder::Forward).is_some()
    }

    #[test]
    fn functional_is_zero_matches_linear_algebra() {
        let basis = monomials(5, 3);
        let images: Vec<DiffPoly> = basis.iter().map(|m| DiffPoly::term(Gaussian::one(), ScalarKey::ONE, m.clone()).partial_x()).collect();
        let rows = monomials(6, 3);
        let mut exact_count = 0;
        for m in &rows {
            let f = DiffPoly::term(Gaussian::one(), ScalarKey::ONE, m.clone());
            let oracle = is_exact_oracle(&f, &basis, &images, &rows);
            assert_eq!(func(f).is_zero(), oracle, "{m}");
            exact_count += oracle as usize;
        }
        assert!(exact_count > 0);
        // sums of a nonexact monomial with exact images stay nonexact, and exact sums are detected
        for (i, img) in images.iter().enumerate().take(20) {
            assert!(func(img.clone()).is_zero());
            let f = img + &mono(&[(0, 1), (2, 1)]);
            assert!(!func(f.clone()).is_zero());
            assert!(!is_exact_oracle(&f, &basis, &images, &rows), "{i}");
        }
    }

    fn arb_functional() -> impl Strategy<Value = DiffPoly> {
        let term = (proptest::collection::vec(0u32..=2, 4), -5i64..6, 1i64..4).prop_filter_map("nonconstant", |(e, p, d)| {
            let m = Monomial::from_exponents(e);
            (!m.is_one() && m.degree() <= 4 && m.deg_dif() <= 4)
                .then(|| DiffPoly::rational_term(rat(p, d), ScalarKey::ONE, m))
        });
        proptest::collection::vec(term, 1..4).prop_map(|ts| ts.iter().fold(DiffPoly::zero(), |a, t| &a + t))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn vd_kills_derivatives(f in arb_functional()) {
            prop_assert!(variational_derivative(&f.partial_x()).is_zero());
        }

        #[test]
        fn normal_form_is_equivalent_and_idempotent(f in arb_functional()) {
            let nf = ibp_normal_form(&f);
            prop_assert!(func(&nf - &f).is_zero());
            prop_assert_eq!(ibp_normal_form(&nf), nf.clone());
            prop_assert_eq!(ibp_normal_form(&(&f + &f.partial_x())), nf);
        }

        #[test]
        fn bracket_antisymmetry(f in arb_functional(), g in arb_functional()) {
            let dx = PoissonOperator::dx();
            let fg = poisson_bracket(&func(f.clone()), &func(g.clone()), &dx, Trunc::NONE).unwrap();
            let gf = poisson_bracket(&func(g), &func(f), &dx, Trunc::NONE).unwrap();
            prop_assert!(fg.add(&gf).is_zero());
        }

        #[test]
        fn jacobi(f in arb_functional(), g in arb_functional(), h in arb_functional()) {
            let dx = PoissonOperator::dx();
            let t = Trunc::hbar(0);
            let br = |a: &LocalFunctional, b: &LocalFunctional| poisson_bracket(a, b, &dx, t).unwrap();
            let (f, g, h) = (func(f), func(g), func(h));
            let total = br(&f, &br(&g, &h)).add(&br(&g, &br(&h, &f))).add(&br(&h, &br(&f, &g)));
            prop_assert!(total.is_zero());
        }
    }
}
