//! One PASS/FAIL line per acceptance criterion; every comparison is exact.

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rayon::prelude::*;

use hodge_kdv::diffpoly::{DiffPoly, Monomial};
use hodge_kdv::hierarchy::{construct_hamiltonian, h2_closed_form, HierarchyContext, Mode};
use hodge_kdv::hodge::{check_lambda_g, hodge_table, Bounds};
use hodge_kdv::linalg::{self, PivotOrder};
use hodge_kdv::localfunc::{
    functional_is_zero, poisson_bracket, variational_derivative, LocalFunctional, MiuraTransformation, PoissonOperator,
};
use hodge_kdv::scalar::{rat, Gaussian, Rational, ScalarKey, Trunc};
use hodge_kdv::verify::{run_suite, CheckResult, Suite, VerifyConfig};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn suite_outcome(results: &[CheckResult], keep: impl Fn(&CheckResult) -> bool) -> Outcome {
    let selected: Vec<&CheckResult> = results.iter().filter(|c| keep(c)).collect();
    if selected.is_empty() {
        return Err("no checks selected".into());
    }
    match selected.iter().find(|c| !c.passed) {
        Some(c) => Err(c.to_string()),
        None if selected.len() == 1 => Ok(selected[0].detail.clone()),
        None => Ok(format!("{} checks", selected.len())),
    }
}

fn config(hbar_order: u32) -> VerifyConfig {
    VerifyConfig { hbar_order, ..VerifyConfig::default() }
}

fn commutativity() -> Outcome {
    suite_outcome(&run_suite(Suite::Brackets, &config(8)), |_| true)
}

fn bernoulli_lemma() -> Outcome {
    suite_outcome(&run_suite(Suite::AppendixB, &config(3)), |c| c.name.starts_with("bernoulli_lemma"))
}

fn series_identities() -> Outcome {
    let results = run_suite(Suite::Series, &VerifyConfig { z_order: 16, ..config(3) });
    for name in ["riccati", "first_family[k=4]", "second_family[k=4]", "inverse_product", "bernoulli_sum"] {
        if !results.iter().any(|c| c.name == name) {
            return Err(format!("missing {name}"));
        }
    }
    suite_outcome(&results, |_| true)
}

fn poisson_operator() -> Outcome {
    suite_outcome(&run_suite(Suite::Operator, &config(8)), |_| true)
}

fn construction() -> Outcome {
    let h2 = construct_hamiltonian(2, 3, Mode::Deformed, PivotOrder::Forward).map_err(|e| e.to_string())?;
    if !h2.functional.equals(&h2_closed_form(3).functional) {
        return Err(format!("constructed h2 = {h2}"));
    }
    let hs = run_suite(Suite::Hamiltonians, &config(3));
    suite_outcome(&hs, |c| c.name.starts_with("construct") || c.name == "pairwise_brackets")
}

fn flows() -> Outcome {
    suite_outcome(&run_suite(Suite::Hamiltonians, &config(3)), |c| c.name.starts_with("flow_"))
}

fn hodge_integrals() -> Outcome {
    let bounds = Bounds { genus: 3, descendants: 6, degree: 8 };
    let table = hodge_table(&HierarchyContext::new(3), bounds).map_err(|e| e.to_string())?;
    let expect = [
        (0, 0, vec![0, 0, 0], rat(1, 1)),
        (1, 1, vec![0], rat(1, 24)),
        (1, 0, vec![1], rat(1, 24)),
        (2, 2, vec![2], rat(7, 5760)),
    ];
    for (g, j, ks, v) in expect {
        let got = table.get(g, j, &ks);
        if got != v {
            return Err(format!("<lambda_{j} {ks:?}>_{g} = {got}, expected {v}"));
        }
    }
    let n = check_lambda_g(&table).map_err(|e| e.to_string())?;
    Ok(format!("{} correlators, {n} lambda_g comparisons", table.len()))
}

fn appendix_a() -> Outcome {
    suite_outcome(&run_suite(Suite::AppendixA, &config(3)), |_| true)
}

fn ilw() -> Outcome {
    suite_outcome(&run_suite(Suite::Ilw, &VerifyConfig { mu_order: 6, ..config(3) }), |_| true)
}

fn arb_functional() -> impl Strategy<Value = DiffPoly> {
    let term = (proptest::collection::vec(0u32..=2, 4), -5i64..6, 1i64..4).prop_filter_map("nonconstant", |(e, p, d)| {
        let m = Monomial::from_exponents(e);
        (!m.is_one() && m.degree() <= 4 && m.deg_dif() <= 4).then(|| DiffPoly::rational_term(rat(p, d), ScalarKey::ONE, m))
    });
    proptest::collection::vec(term, 1..4).prop_map(|ts| ts.iter().fold(DiffPoly::zero(), |a, t| &a + t))
}

fn arb_miura() -> impl Strategy<Value = MiuraTransformation> {
    (-3i64..4, -3i64..4, -3i64..4).prop_map(|(a, b, c)| {
        let term = |c: Rational, h: u32, pairs: &[(usize, u32)]| {
            DiffPoly::rational_term(c, ScalarKey::hbar(h), Monomial::from_pairs(pairs))
        };
        let image = [term(rat(a, 2), 1, &[(2, 1)]), term(rat(b, 3), 1, &[(1, 2)]), term(rat(c, 5), 2, &[(0, 1), (4, 1)])]
            .iter()
            .fold(DiffPoly::u(0), |acc, t| &acc + t);
        MiuraTransformation::new(image).expect("valid image")
    })
}

fn func(p: DiffPoly) -> LocalFunctional {
    LocalFunctional::new(p).expect("no constant term")
}

fn run_property<S: Strategy>(cases: u32, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String>
where
    S::Value: std::fmt::Debug,
{
    let mut runner = TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() });
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

fn monomials(max_dif: u32, max_deg: u32) -> Vec<Monomial> {
    (0..=max_dif).flat_map(|d| (1..=max_deg).flat_map(move |n| Monomial::enumerate(d, n))).collect()
}

fn properties() -> Outcome {
    let dx = PoissonOperator::dx();
    run_property(64, arb_functional(), |f| {
        prop_assert!(variational_derivative(&f.partial_x()).is_zero());
        Ok(())
    })?;
    run_property(48, (arb_functional(), arb_functional()), |(f, g)| {
        let fg = poisson_bracket(&func(f.clone()), &func(g.clone()), &dx, Trunc::NONE).unwrap();
        let gf = poisson_bracket(&func(g), &func(f), &dx, Trunc::NONE).unwrap();
        prop_assert!(fg.add(&gf).is_zero());
        Ok(())
    })?;
    run_property(24, (arb_functional(), arb_functional(), arb_functional()), |(f, g, h)| {
        let t = Trunc::hbar(0);
        let br = |a: &LocalFunctional, b: &LocalFunctional| poisson_bracket(a, b, &dx, t).unwrap();
        let (f, g, h) = (func(f), func(g), func(h));
        prop_assert!(br(&f, &br(&g, &h)).add(&br(&g, &br(&h, &f))).add(&br(&h, &br(&f, &g))).is_zero());
        Ok(())
    })?;
    run_property(12, (arb_miura(), arb_miura()), |(t1, t2)| {
        let order = 2;
        let stepwise = t2.apply_to_operator(&t1.apply_to_operator(&dx, order), order);
        prop_assert_eq!(stepwise, t2.compose(&t1, order).apply_to_operator(&dx, order));
        let back = t1.invert(3).apply_to_operator(&t1.apply_to_operator(&dx, 3), 3);
        prop_assert_eq!(back, dx.clone());
        Ok(())
    })?;

    let basis = monomials(5, 3);
    let images: Vec<DiffPoly> =
        basis.iter().map(|m| DiffPoly::term(Gaussian::one(), ScalarKey::ONE, m.clone()).partial_x()).collect();
    let rows = monomials(6, 3);
    let matrix: Vec<Vec<Rational>> =
        rows.iter().map(|r| images.iter().map(|img| img.coeff(ScalarKey::ONE, r).re).collect()).collect();
    for m in &rows {
        let f = DiffPoly::term(Gaussian::one(), ScalarKey::ONE, m.clone());
        let b: Vec<Rational> = rows.iter().map(|r| f.coeff(ScalarKey::ONE, r).re).collect();
        let oracle = linalg::solve(&matrix, &b, basis.len(), PivotOrder::Forward).is_some();
        if functional_is_zero(&func(f)) != oracle {
            return Err(format!("functional_is_zero disagrees with linear algebra on {m}"));
        }
    }
    Ok(format!("{} monomials against the oracle", rows.len()))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("commutativity", commutativity),
        ("bernoulli_lemma", bernoulli_lemma),
        ("series_identities", series_identities),
        ("poisson_operator", poisson_operator),
        ("construction", construction),
        ("flows", flows),
        ("hodge_integrals", hodge_integrals),
        ("appendix_a", appendix_a),
        ("ilw", ilw),
        ("properties", properties),
    ];
    let outcomes: Vec<Outcome> = criteria.par_iter().map(|(_, f)| f()).collect();
    let mut failed = Vec::new();
    for (i, ((name, _), outcome)) in criteria.iter().zip(&outcomes).enumerate() {
        match outcome {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(detail) => {
                println!("FAIL {} {name}: {detail}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
