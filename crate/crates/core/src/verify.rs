//! Named check suites shared by the command-line tool and the acceptance tests.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::diffpoly::{DiffPoly, Monomial};
use crate::error::{Error, Result};
use crate::hierarchy::{
    construct_hamiltonian, dz_miura, dz_operator_verified, h1_closed_form, h2_closed_form, HierarchyContext, Mode,
};
use crate::hodge::{givental_z_apply, omega_kdv_table, transported_coefficients};
use crate::ilw::{conservation_check, decompose_in_hamiltonians, op_r, sigma_sequence};
use crate::linalg::PivotOrder;
use crate::localfunc::{functional_is_zero, poisson_bracket, LocalFunctional, PoissonOperator};
use crate::scalar::series::{series_identity_suite_with, BernoulliTable, IdentityCheck};
use crate::scalar::{bernoulli, bernoulli_abs, factorial_q, int, rat, Gaussian, ScalarKey, Trunc};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Suite {
    Series,
    Brackets,
    Hamiltonians,
    Operator,
    AppendixA,
    AppendixB,
    Ilw,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Series,
        Suite::Brackets,
        Suite::Hamiltonians,
        Suite::Operator,
        Suite::AppendixA,
        Suite::AppendixB,
        Suite::Ilw,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Series => "series",
            Suite::Brackets => "brackets",
            Suite::Hamiltonians => "hamiltonians",
            Suite::Operator => "operator",
            Suite::AppendixA => "appendixA",
            Suite::AppendixB => "appendixB",
            Suite::Ilw => "ilw",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown suite {s}")))
    }
}

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub hbar_order: u32,
    pub mu_order: u32,
    pub z_order: u32,
    pub bernoulli: BernoulliTable,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { hbar_order: 3, mu_order: 6, z_order: 16, bernoulli: BernoulliTable::exact(16) }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub suite: String,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(suite: Suite, name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        CheckResult { suite: suite.name().to_string(), name: name.into(), passed, detail: detail.into() }
    }

    fn from_result(suite: Suite, name: impl Into<String>, r: Result<String>) -> Self {
        match r {
            Ok(detail) => CheckResult::new(suite, name, true, detail),
            Err(e) => CheckResult::new(suite, name, false, e.to_string()),
        }
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{status} {}/{}", self.suite, self.name)?;
        if !self.detail.is_empty() {
            write!(f, ": {}", self.detail)?;
        }
        Ok(())
    }
}

/// Runs the given suites; results keep suite order, then check order.
pub fn run_suites(suites: &[Suite], config: &VerifyConfig) -> Vec<CheckResult> {
    suites.par_iter().map(|s| run_suite(*s, config)).collect::<Vec<_>>().into_iter().flatten().collect()
}

pub fn run_suite(suite: Suite, config: &VerifyConfig) -> Vec<CheckResult> {
    match suite {
        Suite::Series => series_checks(config),
        Suite::Brackets => bracket_checks(config),
        Suite::Hamiltonians => hamiltonian_checks(config),
        Suite::Operator => operator_checks(config),
        Suite::AppendixA => appendix_a_checks(),
        Suite::AppendixB => appendix_b_checks(config),
        Suite::Ilw => ilw_checks(config),
    }
}

fn identity_results(suite: Suite, checks: Vec<IdentityCheck>) -> Vec<CheckResult> {
    checks
        .into_iter()
        .map(|c| CheckResult::new(suite, c.name, c.passed, c.failure.unwrap_or_default()))
        .collect()
}

/// Largest family index the series suite can check at `z_order`, capped at 4.
fn family_bound(z_order: u32) -> Option<u32> {
    (z_order >= 4).then(|| ((z_order - 4) / 2).min(4))
}

fn series_checks(config: &VerifyConfig) -> Vec<CheckResult> {
    match series_identity_suite_with(&config.bernoulli, config.z_order, family_bound(config.z_order)) {
        Ok(report) => identity_results(Suite::Series, report.checks),
        Err(e) => vec![CheckResult::new(Suite::Series, "setup", false, e.to_string())],
    }
}

fn bracket_checks(config: &VerifyConfig) -> Vec<CheckResult> {
    let g = config.hbar_order;
    let r = poisson_bracket(
        &h1_closed_form(g).functional,
        &h2_closed_form(g).functional,
        &PoissonOperator::dx(),
        Trunc::hbar(g),
    )
    .and_then(|br| {
        if br.is_zero() {
            Ok(format!("{{h1, h2}} = 0 at hbar^{g}"))
        } else {
            Err(Error::CheckFailed(format!("{{h1, h2}} = {br}")))
        }
    });
    vec![CheckResult::from_result(Suite::Brackets, "h1_h2_commute", r)]
}

/// `sum_i B_2i B_{2g-2i} / ((2i)! (2g-2i)!) (u_2i u_{2g-2i+1} - d^{2i}(u_1 u_{2g-2i}))`.
pub fn bernoulli_lemma_polynomial(g: u32) -> DiffPoly {
    let mut out = DiffPoly::zero();
    for i in 0..=g {
        let c = bernoulli(2 * i) * bernoulli(2 * g - 2 * i) / (factorial_q(2 * i) * factorial_q(2 * g - 2 * i));
        let a = &DiffPoly::u(2 * i as usize) * &DiffPoly::u((2 * g - 2 * i + 1) as usize);
        let b = (&DiffPoly::u(1) * &DiffPoly::u((2 * g - 2 * i) as usize)).partial_x_n(2 * i);
        out = &out + &(&a - &b).scale_rational(&c);
    }
    out
}

fn bernoulli_lemma_check(g: u32) -> Result<String> {
    let lhs = bernoulli_lemma_polynomial(g);
    let rhs = if g == 1 {
        DiffPoly::rational_term(rat(-1, 4), ScalarKey::ONE, Monomial::from_pairs(&[(1, 1), (2, 1)]))
    } else {
        DiffPoly::zero()
    };
    if lhs != rhs {
        return Err(Error::CheckFailed(format!("g={g}: {lhs} != {rhs}")));
    }
    if g != 1 && !functional_is_zero(&LocalFunctional::new(lhs)?) {
        return Err(Error::CheckFailed(format!("g={g}: not a total derivative")));
    }
    Ok(String::new())
}

fn hamiltonian_checks(config: &VerifyConfig) -> Vec<CheckResult> {
    let s = Suite::Hamiltonians;
    let order = config.hbar_order;
    let mut out = vec![CheckResult::from_result(
        s,
        format!("construct_h2_matches_closed_form[G={order}]"),
        construct_hamiltonian(2, order, Mode::Deformed, PivotOrder::Forward).and_then(|h| {
            h.check_gradings()?;
            if h.functional.equals(&h2_closed_form(order).functional) {
                Ok(String::new())
            } else {
                Err(Error::CheckFailed(format!("constructed {h}")))
            }
        }),
    )];
    let ctx = HierarchyContext::new(2);
    let hs: Result<Vec<_>> = (1..=4).map(|n| ctx.hamiltonian(n)).collect();
    let r = hs.and_then(|hs| {
        for h in &hs {
            h.check_gradings()?;
        }
        for (a, ha) in hs.iter().enumerate() {
            for hb in &hs[a + 1..] {
                let br = poisson_bracket(&ha.functional, &hb.functional, &PoissonOperator::dx(), Trunc::hbar(2))?;
                if !br.is_zero() {
                    return Err(Error::CheckFailed(format!("{{h{}, h{}}} = {br}", ha.n, hb.n)));
                }
            }
        }
        Ok("h1..h4 graded and commuting at hbar^2".to_string())
    });
    out.push(CheckResult::from_result(s, "pairwise_brackets", r));
    out.extend(flow_checks(s));
    out
}

/// The first flow written out: `u u_x + sum_g |B_2g|/(2g)! hbar^g eps^{g-1} u_{2g+1}`.
pub fn first_flow_display(order: u32) -> DiffPoly {
    let mut out = &DiffPoly::u(0) * &DiffPoly::u(1);
    for g in 1..=order {
        let c = bernoulli_abs(2 * g) / factorial_q(2 * g);
        out = &out + &DiffPoly::rational_term(c, ScalarKey::new(g, 2 * (g as i32 - 1), 0), Monomial::var(2 * g as usize + 1));
    }
    out
}

/// The second flow written out:
/// `u^2 u_x / 2 + sum_g |B_2g|/(2g)! hbar^g eps^{g-1}/4 (2 (u u_2g)_x + d^{2g+1}(u^2))
///  + sum_{g>=2} |B_2g|/(2g)! hbar^g eps^{g-2} (g+1) u_{2g+1}`.
pub fn second_flow_display(order: u32) -> DiffPoly {
    let u = DiffPoly::u(0);
    let usq = &u * &u;
    let mut out = (&usq * &DiffPoly::u(1)).scale_rational(&rat(1, 2));
    for g in 1..=order {
        let c = bernoulli_abs(2 * g) / factorial_q(2 * g);
        let key = ScalarKey::new(g, 2 * (g as i32 - 1), 0);
        let inner = &(&u * &DiffPoly::u(2 * g as usize)).partial_x().scale_rational(&int(2)) + &usq.partial_x_n(2 * g + 1);
        out = &out + &inner.scale_term(&Gaussian::real(&c / int(4)), key, Trunc::NONE);
        if g >= 2 {
            let key = ScalarKey::new(g, 2 * (g as i32 - 2), 0);
            out = &out + &DiffPoly::rational_term(&c * int(g as i64 + 1), key, Monomial::var(2 * g as usize + 1));
        }
    }
    out
}

fn flow_checks(s: Suite) -> Vec<CheckResult> {
    let order = 4;
    let compare = |name: &str, got: DiffPoly, expected: DiffPoly| {
        let r = if got == expected { Ok(String::new()) } else { Err(Error::CheckFailed(format!("{got} != {expected}"))) };
        CheckResult::from_result(s, name, r)
    };
    let kdv1: DiffPoly = "1*u0*u1 + 1/12*hbar*u3".parse().expect("literal");
    let kdv2: DiffPoly = "1/2*u0^2*u1 + 1/6*hbar*u1*u2 + 1/12*hbar*u0*u3 + 1/240*hbar^2*u5".parse().expect("literal");
    let eps_zero = |h: crate::hierarchy::Hamiltonian| h.at_eps_zero().map(|h| h.flow());
    vec![
        compare("flow_t1", h1_closed_form(order).flow(), first_flow_display(order)),
        compare("flow_t2", h2_closed_form(order).flow(), second_flow_display(order)),
        CheckResult::from_result(
            s,
            "flow_t1_eps0",
            eps_zero(h1_closed_form(order)).and_then(|f| {
                if f == kdv1 {
                    Ok(f.to_string())
                } else {
                    Err(Error::CheckFailed(f.to_string()))
                }
            }),
        ),
        CheckResult::from_result(
            s,
            "flow_t2_eps0",
            eps_zero(h2_closed_form(order)).and_then(|f| {
                if f == kdv2 {
                    Ok(f.to_string())
                } else {
                    Err(Error::CheckFailed(f.to_string()))
                }
            }),
        ),
    ]
}

fn operator_checks(config: &VerifyConfig) -> Vec<CheckResult> {
    let s = Suite::Operator;
    let order = config.hbar_order;
    let product = dz_operator_verified(order).map(|k| format!("K = {k}"));
    let ok = product.is_ok();
    let mut out = vec![CheckResult::from_result(s, format!("product_form[G={order}]"), product)];
    if ok {
        let k = dz_operator_verified(order).expect("checked above");
        let flat = dz_miura(order).apply_to_operator(&k, order);
        let r = if flat == PoissonOperator::dx() {
            Ok(String::new())
        } else {
            Err(Error::CheckFailed(format!("transformed operator {flat}")))
        };
        out.push(CheckResult::from_result(s, format!("miura_flattens[G={order}]"), r));
    }
    out
}

fn appendix_a_checks() -> Vec<CheckResult> {
    let s = Suite::AppendixA;
    let omega = omega_kdv_table();
    let expected: DiffPoly = "1/4*hbar*u0^2*u2 + 1/30*hbar^2*u0*u4".parse().expect("literal");
    let z = givental_z_apply(1, &omega, (0, 2), 2);
    let mut out = Vec::new();
    let zr = z.and_then(|z| {
        let target = LocalFunctional::new(expected)?;
        if z.equals(&target) {
            Ok((z, target.to_string()))
        } else {
            Err(Error::CheckFailed(format!("got {}", z.normalized())))
        }
    });
    match zr {
        Ok((z, text)) => {
            out.push(CheckResult::new(s, "z_hat_omega_02", true, text));
            let coeff = z.integrand().component(ScalarKey::hbar(2)).scale_rational(&rat(-1, 12));
            let target = DiffPoly::rational_term(rat(-1, 360), ScalarKey::ONE, Monomial::from_pairs(&[(0, 1), (4, 1)]));
            let r = LocalFunctional::new(&coeff - &target).and_then(|d| {
                if d.is_zero() {
                    Ok(format!("int( {target} ) dx"))
                } else {
                    Err(Error::CheckFailed(format!("got {coeff}")))
                }
            });
            out.push(CheckResult::from_result(s, "hbar2_eps_coefficient", r));
        }
        Err(e) => out.push(CheckResult::new(s, "z_hat_omega_02", false, e.to_string())),
    }
    let r = transported_coefficients(&omega).and_then(|t| {
        let expected = [rat(1, 24), rat(1, 1440)];
        if t.c != expected {
            let got: Vec<String> = t.c.iter().map(ToString::to_string).collect();
            return Err(Error::CheckFailed(format!("c = [{}]", got.join(", "))));
        }
        if !t.hbar_eps_residue.is_zero() {
            return Err(Error::CheckFailed(format!("hbar eps component survives: {}", t.hbar_eps_residue)));
        }
        Ok("c1 = 1/24, c2 = 1/1440".to_string())
    });
    out.push(CheckResult::from_result(s, "transported_c", r));
    out
}

fn appendix_b_checks(config: &VerifyConfig) -> Vec<CheckResult> {
    let s = Suite::AppendixB;
    let mut out: Vec<CheckResult> = match series_identity_suite_with(&config.bernoulli, config.z_order, family_bound(config.z_order)) {
        Ok(report) => identity_results(
            s,
            report.checks.into_iter().filter(|c| c.name == "riccati" || c.name.contains("family")).collect(),
        ),
        Err(e) => vec![CheckResult::new(s, "setup", false, e.to_string())],
    };
    out.extend((0..=8).map(|g| CheckResult::from_result(s, format!("bernoulli_lemma[g={g}]"), bernoulli_lemma_check(g))));
    out
}

fn ilw_checks(config: &VerifyConfig) -> Vec<CheckResult> {
    let s = Suite::Ilw;
    let m = config.mu_order;
    let mut out = Vec::new();
    let sigmas = sigma_sequence(5, m.max(4));
    let sigma2 = {
        let u1 = DiffPoly::u(1);
        let base: DiffPoly = "-2*u0^2 + 4*eps^-1*u0".parse().expect("literal");
        let i_term = u1.scale_term(&Gaussian::new(int(0), int(2)), ScalarKey::new(0, -1, 1), Trunc::NONE);
        let r_term = op_r(&u1, m).scale_term(&Gaussian::from_int(4), ScalarKey::mu(1), Trunc::NONE);
        &(&base - &i_term) - &r_term
    };
    let trunc = Trunc::mu(m);
    let pass = |ok: bool, msg: String| if ok { Ok(String::new()) } else { Err(Error::CheckFailed(msg)) };
    out.push(CheckResult::from_result(s, "sigma_1", pass(sigmas.sigma(1) == &DiffPoly::u(0).scale_rational(&int(2)), sigmas.sigma(1).to_string())));
    out.push(CheckResult::from_result(
        s,
        "sigma_2",
        pass(sigmas.sigma(2).truncate(trunc) == sigma2.truncate(trunc), sigmas.sigma(2).to_string()),
    ));
    let short = sigma_sequence(3, 4);
    for n in 1..=3 {
        out.push(CheckResult::from_result(s, format!("conservation[n={n}]"), pass(conservation_check(&short, n, 4), format!("sigma_{n}"))));
    }
    let ctx = HierarchyContext::new(m / 2);
    let decs: Vec<(usize, Result<String>)> = (1..=5usize)
        .into_par_iter()
        .map(|n| {
            let r = decompose_in_hamiltonians(&sigmas, n, &ctx, m).and_then(|d| {
                if d.residual.is_zero() {
                    let (k, c) = d.coefficients.iter().next_back().expect("at least one slot");
                    Ok(format!("coefficient of h_{k} is {c}"))
                } else {
                    Err(Error::NonzeroResidual(d.residual.to_string()))
                }
            });
            (n, r)
        })
        .collect();
    for (n, r) in decs {
        out.push(CheckResult::from_result(s, format!("decompose[n={n}]"), r));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bernoulli_lemma() {
        assert!(bernoulli_lemma_polynomial(0).is_zero());
        assert_eq!(bernoulli_lemma_polynomial(1).to_string(), "-1/4*u1*u2");
        for g in 0..=8 {
            assert!(bernoulli_lemma_check(g).is_ok(), "g={g}");
        }
    }

    #[test]
    fn displayed_flows() {
        assert_eq!(first_flow_display(1).to_string(), "1*u0*u1 + 1/12*hbar*u3");
        let f2 = second_flow_display(2);
        assert_eq!(f2.component(ScalarKey::new(2, 0, 0)), "1/240*u5".parse().unwrap());
        assert!(flow_checks(Suite::Hamiltonians).iter().all(|c| c.passed));
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("bogus".parse::<Suite>().is_err());
    }

    #[test]
    fn corrupted_table_fails() {
        let config = VerifyConfig {
            z_order: 2,
            bernoulli: BernoulliTable::exact(16).with_override(2, rat(1, 5)),
            ..VerifyConfig::default()
        };
        let results = run_suite(Suite::Series, &config);
        assert!(results.iter().any(|c| !c.passed));
    }
}
