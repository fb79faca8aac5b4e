use std::collections::{BTreeSet, HashMap};

use num_traits::Zero;
use rayon::prelude::*;

use super::tseries::{TKey, TMono, TSeries, MAX_VARS};
use crate::diffpoly::DiffPoly;
use crate::error::{Error, Result};
use crate::hierarchy::HierarchyContext;
use crate::scalar::series::{forward_shift_coeff, lambda_g_prefactor, BernoulliTable};
use crate::scalar::Rational;

/// One term `c * hbar^g * eps^j * u_{k_1} ... u_{k_r}` of a flow, with sorted indices.
#[derive(Clone, Debug)]
struct FlowTerm {
    hbar: u32,
    eps: u32,
    coeff: Rational,
    factors: Vec<usize>,
}

fn flow_terms(flow: &DiffPoly) -> Result<Vec<FlowTerm>> {
    flow.iter()
        .map(|(key, m, c)| {
            let eps = key.eps_power().filter(|e| *e >= 0 && key.mu == 0);
            match (eps, c.is_real()) {
                (Some(eps), true) => Ok(FlowTerm {
                    hbar: key.hbar,
                    eps: eps as u32,
                    coeff: c.re.clone(),
                    factors: m.factors().flat_map(|(k, a)| std::iter::repeat_n(k, a as usize)).collect(),
                }),
                _ => Err(Error::InvalidArgument(format!("flow coefficient {c} at {key:?} is not a real eps polynomial"))),
            }
        })
        .collect()
}

/// Series split by degree in `t_1, t_2, ...`.
type Graded = Vec<TSeries>;

/// The solution `u(t_0..t_N)` of the hierarchy with `u|_{t>=1 = 0} = t_0`.
///
/// Coefficients are exact for `t-degree + 2*hbar <= degree + 2*G`, which covers every
/// term of t-degree at most `degree` and hbar-order at most `G`. The Taylor expansion
/// proceeds in the degree in `t_1, t_2, ...`: the part of degree `B` is the integral of
/// the flows evaluated on the part of degree below `B`, and every flow that can produce
/// a given monomial is checked against the others.
pub fn solve_hierarchy(ctx: &HierarchyContext, descendants: usize, degree: u32) -> Result<TSeries> {
    let nvars = descendants + 1;
    if descendants == 0 || nvars > MAX_VARS {
        return Err(Error::InvalidArgument(format!("descendant bound must lie in 1..={}", MAX_VARS - 1)));
    }
    let g_max = ctx.order();
    let bound = degree + 2 * g_max;

    let flows: Vec<Vec<FlowTerm>> = (1..=descendants as i32)
        .into_par_iter()
        .map(|n| flow_terms(&ctx.flow_rhs(n)?))
        .collect::<Result<_>>()?;

    // every prefix of every factor list, shortest first
    let mut products: BTreeSet<Vec<usize>> = BTreeSet::new();
    for t in flows.iter().flatten() {
        for l in 1..=t.factors.len() {
            products.insert(t.factors[..l].to_vec());
        }
    }
    let mut by_len: Vec<Vec<Vec<usize>>> = Vec::new();
    for p in products {
        by_len.resize(by_len.len().max(p.len()), Vec::new());
        by_len[p.len() - 1].push(p);
    }
    let max_deriv = flows.iter().flatten().flat_map(|t| t.factors.iter().copied()).max().unwrap_or(0);

    let mut u: Graded = vec![TSeries::zero(nvars, bound)];
    u[0].add_term(TKey { hbar: 0, eps: 0, mono: TMono::var(0) }, &Rational::from_integer(1.into()));
    let mut derivs: Vec<Graded> = vec![Vec::new(); max_deriv + 1];
    let mut memo: HashMap<Vec<usize>, Graded> = HashMap::new();
    let keep = |k: &TKey| k.hbar <= g_max && k.weight() < bound;

    for d in 0..bound as usize {
        for (k, dk) in derivs.iter_mut().enumerate() {
            dk.push(u[d].d_t0_n(k as u32));
        }
        // graded piece d of every product, using pieces 0..=d of shorter prefixes
        for level in &by_len {
            let pieces: Vec<(Vec<usize>, TSeries)> = level
                .par_iter()
                .map(|p| {
                    let last = &derivs[*p.last().expect("nonempty")];
                    let piece = if p.len() == 1 {
                        last[d].filter(keep)
                    } else {
                        let prefix = &memo[&p[..p.len() - 1]];
                        let mut acc = TSeries::zero(nvars, bound);
                        for b in 0..=d {
                            acc = acc.add(&prefix[b].mul_filtered(&last[d - b], |k| keep(k)));
                        }
                        acc
                    };
                    (p.clone(), piece)
                })
                .collect();
            for (p, piece) in pieces {
                memo.entry(p).or_default().push(piece);
            }
        }
        let rhs: Vec<TSeries> = flows
            .par_iter()
            .map(|terms| {
                let mut f = TSeries::zero(nvars, bound - 1);
                for t in terms {
                    let prod = memo[&t.factors][d].scale(&t.coeff, t.hbar, t.eps);
                    f = f.add(&prod.filter(keep));
                }
                f.with_bound(bound - 1)
            })
            .collect();
        let next = integrate(&rhs, nvars, bound);
        for (i, f) in rhs.iter().enumerate() {
            let check = next.derivative(i + 1);
            if &check != f {
                return Err(Error::Inconsistent(format!(
                    "flow t_{} disagrees with the other flows at t-degree {}",
                    i + 1,
                    d + 1
                )));
            }
        }
        u.push(next);
    }
    Ok(u.into_iter().fold(TSeries::zero(nvars, bound), |acc, p| acc.add(&p)))
}

/// The series whose `t_i`-derivative is `rhs[i-1]`, read off through the first upper variable.
fn integrate(rhs: &[TSeries], nvars: usize, bound: u32) -> TSeries {
    let mut out = TSeries::zero(nvars, bound);
    for (idx, f) in rhs.iter().enumerate() {
        let i = idx + 1;
        for (k, c) in f.iter() {
            let mono = k.mono * TMono::var(i);
            if mono.first_upper() == Some(i) {
                let e = Rational::from_integer(mono.exponent(i).into());
                out.add_term(TKey { mono, ..*k }, &(c / e));
            }
        }
    }
    out
}

fn shift_by(series: &TSeries, order: u32, coeff: impl Fn(u32) -> Rational) -> TSeries {
    let mut out = series.clone();
    for g in 1..=order {
        let c = coeff(g);
        if !c.is_zero() {
            out = out.add(&series.d_t0_n(2 * g).scale(&c, g, g));
        }
    }
    out.filter(|k| k.hbar <= order)
}

/// `u = u~ + sum_g (2^{2g-1}-1)/2^{2g-1} |B_2g|/(2g)! (hbar eps)^g d^{2g} u~ / dt_0^{2g}`.
pub fn apply_inverse_transformation(u_tilde: &TSeries, order: u32) -> TSeries {
    let table = BernoulliTable::exact(2 * order.max(1));
    shift_by(u_tilde, order, |g| lambda_g_prefactor(&table, g))
}

/// `u~ = u + sum_g (-1)^g / (2^{2g} (2g+1)!) (hbar eps)^g d^{2g} u / dt_0^{2g}`.
pub fn apply_forward_transformation(u: &TSeries, order: u32) -> TSeries {
    shift_by(u, order, forward_shift_coeff)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hierarchy::Mode;
    use crate::scalar::{int, rat};

    #[test]
    fn initial_terms() {
        let ctx = HierarchyContext::new(2);
        let u = solve_hierarchy(&ctx, 2, 6).unwrap();
        assert_eq!(u.coeff(0, 0, &[1]), int(1));
        assert_eq!(u.coeff(0, 0, &[1, 1]), int(1));
        // u_t1 = u u_x + ..., so t0 t1^2 comes with 2 * 1/2
        assert_eq!(u.coeff(0, 0, &[1, 2]), int(1));
        // u_t2 = u^2 u_x / 2 + ..., so t0^2 t2 / 2
        assert_eq!(u.coeff(0, 0, &[2, 0, 1]), rat(1, 2));
        assert!(u.coeff(1, 0, &[1]).is_zero());
    }

    #[test]
    fn classical_genus_one() {
        // <tau_0 tau_0 tau_3>_1 = <tau_1>_1
        let ctx = HierarchyContext::with_mode(1, Mode::Classical);
        let u = solve_hierarchy(&ctx, 3, 4).unwrap();
        assert_eq!(u.coeff(1, 0, &[0, 0, 0, 1]), rat(1, 24));
        assert!(u.iter().all(|(k, _)| k.eps == 0));
    }

    #[test]
    fn transformations_are_inverse() {
        let ctx = HierarchyContext::new(2);
        let ut = solve_hierarchy(&ctx, 3, 5).unwrap();
        let u = apply_inverse_transformation(&ut, 2);
        assert_ne!(u, ut);
        assert_eq!(apply_forward_transformation(&u, 2), ut);
    }

    #[test]
    fn pure_t0_is_fixed() {
        let mut t0 = TSeries::zero(2, 6);
        t0.add_term(TKey { hbar: 0, eps: 0, mono: TMono::var(0) }, &int(1));
        assert_eq!(apply_inverse_transformation(&t0, 3), t0);
        let table = BernoulliTable::exact(2);
        assert_eq!(lambda_g_prefactor(&table, 1), rat(1, 24));
    }
}
