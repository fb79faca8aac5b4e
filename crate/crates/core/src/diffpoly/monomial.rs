use std::cmp::Ordering;
use std::fmt;

/// `prod_k u_k^{alpha_k}` stored densely by derivative index, trailing zeros trimmed.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    /// The single variable `u_k`.
    pub fn var(k: usize) -> Self {
        Self::var_pow(k, 1)
    }

    pub fn var_pow(k: usize, a: u32) -> Self {
        let mut v = vec![0; k + 1];
        v[k] = a;
        Monomial::from_exponents(v)
    }

    pub fn from_exponents(mut exps: Vec<u32>) -> Self {
        while exps.last() == Some(&0) {
            exps.pop();
        }
        Monomial(exps)
    }

    /// Builds from `(index, exponent)` pairs; repeated indices add up.
    pub fn from_pairs(pairs: &[(usize, u32)]) -> Self {
        let len = pairs.iter().map(|&(k, _)| k + 1).max().unwrap_or(0);
        let mut v = vec![0; len];
        for &(k, a) in pairs {
            v[k] += a;
        }
        Monomial::from_exponents(v)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn exponent(&self, k: usize) -> u32 {
        self.0.get(k).copied().unwrap_or(0)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn deg_dif(&self) -> u32 {
        self.0.iter().enumerate().map(|(k, &a)| k as u32 * a).sum()
    }

    /// Highest derivative index present.
    pub fn max_index(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    /// Nonzero `(index, exponent)` pairs in increasing index order.
    pub fn factors(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.0.iter().enumerate().filter(|(_, &a)| a > 0).map(|(k, &a)| (k, a))
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (long, short) = if self.0.len() >= other.0.len() { (self, other) } else { (other, self) };
        let mut v = long.0.clone();
        for (x, y) in v.iter_mut().zip(&short.0) {
            *x += y;
        }
        Monomial(v)
    }

    /// Multiplies by `u_k^a`.
    pub fn with_factor(&self, k: usize, a: u32) -> Monomial {
        let mut v = self.0.clone();
        if v.len() <= k {
            v.resize(k + 1, 0);
        }
        v[k] += a;
        Monomial(v)
    }

    /// Divides by one power of `u_k`; `None` if `u_k` is absent.
    pub fn without_factor(&self, k: usize) -> Option<Monomial> {
        (self.exponent(k) > 0).then(|| {
            let mut v = self.0.clone();
            v[k] -= 1;
            Monomial::from_exponents(v)
        })
    }

    /// All monomials with the given differential degree and degree.
    pub fn enumerate(deg_dif: u32, degree: u32) -> Vec<Monomial> {
        let mut out = Vec::new();
        let mut parts = Vec::new();
        partitions(deg_dif, degree, deg_dif, &mut parts, &mut out);
        out.sort();
        out
    }
}

/// Partitions of `total` into exactly `count` nonnegative parts, each at most `max_part`.
fn partitions(total: u32, count: u32, max_part: u32, parts: &mut Vec<usize>, out: &mut Vec<Monomial>) {
    if count == 0 {
        if total == 0 {
            let pairs: Vec<(usize, u32)> = parts.iter().map(|&k| (k, 1)).collect();
            out.push(Monomial::from_pairs(&pairs));
        }
        return;
    }
    let hi = max_part.min(total);
    for p in (0..=hi).rev() {
        if p * count < total {
            break;
        }
        parts.push(p as usize);
        partitions(total - p, count - 1, p, parts, out);
        parts.pop();
    }
}

impl Ord for Monomial {
    /// Total degree first, then exponents from the highest index down.
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| {
            let n = self.0.len().max(other.0.len());
            (0..n).rev().map(|k| self.exponent(k).cmp(&other.exponent(k))).find(|o| o.is_ne()).unwrap_or(Ordering::Equal)
        })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .factors()
            .map(|(k, a)| if a == 1 { format!("u{k}") } else { format!("u{k}^{a}") })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}
