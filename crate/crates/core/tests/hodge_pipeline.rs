use hodge_kdv::hierarchy::{HierarchyContext, Mode};
use hodge_kdv::hodge::{check_lambda_g, check_string_identity, extract_base_correlators, hodge_table, Bounds};
use hodge_kdv::hodge::{apply_inverse_transformation, solve_hierarchy};
use hodge_kdv::scalar::rat;

#[test]
fn default_bounds_pipeline() {
    let bounds = Bounds::default();
    let ctx = HierarchyContext::new(bounds.genus);
    let u = apply_inverse_transformation(&solve_hierarchy(&ctx, 6, 8).unwrap(), 3);
    // u restricted to t_1 = t_2 = ... = 0 is exactly t_0
    let initial: Vec<_> = u.iter().filter(|(k, _)| k.mono.upper_degree() == 0).collect();
    assert_eq!(initial.len(), 1);
    assert_eq!(u.coeff(0, 0, &[1]), rat(1, 1));
    let base = extract_base_correlators(&u, bounds).unwrap();
    assert!(base.iter().all(|(k, _)| k.satisfies_dimension() && k.is_stable()));
    assert!(check_string_identity(&base).unwrap() > 0);
    let table = hodge_table(&ctx, bounds).unwrap();
    assert_eq!(table.get(0, 0, &[0, 0, 0]), rat(1, 1));
    // F at t_{>=1} = 0 has hbar eps t_0 <lambda_1 tau_0>_1 as its only correction to t_0^3/6
    assert_eq!(table.get(1, 1, &[0]), rat(1, 24));
    assert!(table.iter().filter(|(k, _)| k.ks.iter().all(|&x| x == 0)).all(|(k, _)| k.ks.len() == 3 || k.ks == [0]));
    assert_eq!(table.get(1, 0, &[1]), rat(1, 24));
    assert_eq!(table.get(2, 2, &[2]), rat(7, 5760));
    let n = check_lambda_g(&table).unwrap();
    eprintln!("{} entries, {n} lambda_g checks", table.len());

    let wk = hodge_table(&HierarchyContext::with_mode(3, Mode::Classical), bounds).unwrap();
    assert_eq!(wk, table.j_zero());
    assert_eq!(wk.get(0, 0, &[0, 0, 0, 1]), rat(1, 1));
    assert_eq!(wk.get(2, 0, &[4]), rat(1, 1152));
    assert!(!wk.contains(2, 0, &[2, 3]));

    let wide = Bounds { descendants: 7, ..bounds };
    let wk = hodge_table(&HierarchyContext::with_mode(3, Mode::Classical), wide).unwrap();
    assert_eq!(wk.get(2, 0, &[2, 3]), rat(29, 5760));
}
