//! Fraction-free (Bareiss) elimination for exact linear systems over the rationals.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::scalar::Rational;

/// Order in which columns are tried as pivots.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PivotOrder {
    #[default]
    Forward,
    Reverse,
}

/// Row echelon form of an integer augmented matrix `[A | b]`.
struct Echelon {
    rows: Vec<Vec<BigInt>>,
    /// `(row, column)` of each pivot, in elimination order.
    pivots: Vec<(usize, usize)>,
    ncols: usize,
}

fn integer_row(row: &[Rational], rhs: &Rational) -> Vec<BigInt> {
    let lcm = row.iter().chain(std::iter::once(rhs)).fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
    row.iter()
        .chain(std::iter::once(rhs))
        .map(|r| r.numer() * (&lcm / r.denom()))
        .collect()
}

fn eliminate(a: &[Vec<Rational>], b: &[Rational], ncols: usize, order: PivotOrder) -> Echelon {
    let mut rows: Vec<Vec<BigInt>> = a.iter().zip(b).map(|(r, c)| integer_row(r, c)).collect();
    let columns: Vec<usize> = match order {
        PivotOrder::Forward => (0..ncols).collect(),
        PivotOrder::Reverse => (0..ncols).rev().collect(),
    };
    let mut pivots = Vec::new();
    let mut prev = BigInt::one();
    let mut r = 0;
    for &c in &columns {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let (head, tail) = rows.split_at_mut(r + 1);
        let pivot_row = &head[r];
        let pv = &pivot_row[c];
        for row in tail.iter_mut() {
            let f = row[c].clone();
            for (x, y) in row.iter_mut().zip(pivot_row) {
                *x = (&*x * pv - &f * y) / &prev;
            }
        }
        prev = pv.clone();
        pivots.push((r, c));
        r += 1;
    }
    Echelon { rows, pivots, ncols }
}

/// Solves `A x = b`, returning `None` when the system is inconsistent.
///
/// Free variables are set to zero; which variables are free is determined by `order`.
pub fn solve(a: &[Vec<Rational>], b: &[Rational], ncols: usize, order: PivotOrder) -> Option<Vec<Rational>> {
    let ech = eliminate(a, b, ncols, order);
    let rank = ech.pivots.len();
    if ech.rows[rank..].iter().any(|row| !row[ncols].is_zero()) {
        return None;
    }
    let mut x = vec![Rational::zero(); ech.ncols];
    for &(r, c) in ech.pivots.iter().rev() {
        let row = &ech.rows[r];
        let mut acc = Rational::from_integer(row[ncols].clone());
        for (j, xj) in x.iter().enumerate() {
            if j != c && !xj.is_zero() && !row[j].is_zero() {
                acc -= Rational::from_integer(row[j].clone()) * xj;
            }
        }
        x[c] = acc / Rational::from_integer(row[c].clone());
    }
    Some(x)
}

pub fn rank(a: &[Vec<Rational>], ncols: usize) -> usize {
    let zeros = vec![Rational::zero(); a.len()];
    eliminate(a, &zeros, ncols, PivotOrder::Forward).pivots.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};
    use proptest::prelude::*;

    fn apply(a: &[Vec<Rational>], x: &[Rational]) -> Vec<Rational> {
        a.iter().map(|row| row.iter().zip(x).map(|(p, q)| p * q).sum()).collect()
    }

    #[test]
    fn unique_solution() {
        let a = vec![vec![int(2), int(1)], vec![int(1), int(3)]];
        let b = vec![int(3), rat(5, 2)];
        let x = solve(&a, &b, 2, PivotOrder::Forward).unwrap();
        assert_eq!(x, vec![rat(13, 10), rat(2, 5)]);
    }

    #[test]
    fn inconsistent() {
        let a = vec![vec![int(1), int(1)], vec![int(2), int(2)]];
        assert!(solve(&a, &[int(1), int(3)], 2, PivotOrder::Forward).is_none());
    }

    #[test]
    fn free_variables_follow_order() {
        let a = vec![vec![int(1), int(1)]];
        let b = vec![int(4)];
        assert_eq!(solve(&a, &b, 2, PivotOrder::Forward).unwrap(), vec![int(4), int(0)]);
        assert_eq!(solve(&a, &b, 2, PivotOrder::Reverse).unwrap(), vec![int(0), int(4)]);
    }

    #[test]
    fn rank_of_dependent_rows() {
        let a = vec![vec![int(1), int(2), int(3)], vec![int(2), int(4), int(6)], vec![int(0), int(1), int(1)]];
        assert_eq!(rank(&a, 3), 2);
    }

    fn arb_matrix() -> impl Strategy<Value = (Vec<Vec<Rational>>, Vec<Rational>)> {
        (1usize..5, 1usize..5).prop_flat_map(|(m, n)| {
            let entry = (-4i64..5, 1i64..4).prop_map(|(p, q)| rat(p, q));
            (
                proptest::collection::vec(proptest::collection::vec(entry.clone(), n), m),
                proptest::collection::vec(entry, n),
            )
        })
    }

    proptest! {
        #[test]
        fn consistent_systems_are_solved((a, x0) in arb_matrix()) {
            let b = apply(&a, &x0);
            let n = x0.len();
            for order in [PivotOrder::Forward, PivotOrder::Reverse] {
                let x = solve(&a, &b, n, order).expect("consistent by construction");
                prop_assert_eq!(apply(&a, &x), b.clone());
            }
        }
    }
}
