use std::sync::RwLock;

use num_traits::{Signed, Zero};

use super::{binomial_q, Rational};

static CACHE: RwLock<Vec<Rational>> = RwLock::new(Vec::new());

/// The Bernoulli number `B_m` with `B_1 = -1/2`.
///
/// Computed from `sum_{k=0}^{m} C(m+1, k) B_k = 0` and memoized.
pub fn bernoulli(m: u32) -> Rational {
    let m = m as usize;
    if let Some(b) = CACHE.read().expect("bernoulli cache poisoned").get(m) {
        return b.clone();
    }
    let mut cache = CACHE.write().expect("bernoulli cache poisoned");
    while cache.len() <= m {
        let n = cache.len() as u32;
        let b = if n == 0 {
            Rational::from_integer(1.into())
        } else if n > 1 && n % 2 == 1 {
            Rational::zero()
        } else {
            let s = (0..n).fold(Rational::zero(), |acc, k| acc + binomial_q(n + 1, k) * &cache[k as usize]);
            -s / Rational::from_integer((n + 1).into())
        };
        cache.push(b);
    }
    cache[m].clone()
}

pub fn bernoulli_abs(m: u32) -> Rational {
    bernoulli(m).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    /// Akiyama-Tanigawa; yields the `B_1 = +1/2` convention.
    fn akiyama_tanigawa(m: usize) -> Rational {
        let mut a: Vec<Rational> = (0..=m).map(|j| rat(1, j as i64 + 1)).collect();
        for k in 1..=m {
            for j in 0..=(m - k) {
                a[j] = Rational::from_integer((j + 1).into()) * (&a[j] - &a[j + 1]);
            }
        }
        a[0].clone()
    }

    #[test]
    fn known_values() {
        assert_eq!(bernoulli(0), rat(1, 1));
        assert_eq!(bernoulli(1), rat(-1, 2));
        assert_eq!(bernoulli(2), rat(1, 6));
        assert_eq!(bernoulli(3), rat(0, 1));
        assert_eq!(bernoulli(4), rat(-1, 30));
        assert_eq!(bernoulli(12), rat(-691, 2730));
    }

    #[test]
    fn agrees_with_akiyama_tanigawa() {
        for m in 2..=30 {
            assert_eq!(bernoulli(m as u32), akiyama_tanigawa(m), "B_{m}");
        }
    }

    #[test]
    fn odd_vanish_and_even_signs_alternate() {
        for m in (3..40).step_by(2) {
            assert!(bernoulli(m).is_zero());
        }
        for g in 1..20u32 {
            let b = bernoulli(2 * g);
            if g % 2 == 1 {
                assert!(b.is_positive());
            } else {
                assert!(b.is_negative());
            }
        }
    }

    #[test]
    fn concurrent_reads() {
        let handles: Vec<_> = (0..8).map(|t| std::thread::spawn(move || bernoulli(20 + 2 * t))).collect();
        for (t, h) in handles.into_iter().enumerate() {
            assert_eq!(h.join().unwrap(), akiyama_tanigawa(20 + 2 * t));
        }
    }
}
