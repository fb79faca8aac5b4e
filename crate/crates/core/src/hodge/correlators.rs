use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use num_traits::{One, Zero};
use serde::Serialize;

use super::tseries::TSeries;
use crate::error::{Error, Result};
use crate::scalar::series::{lambda_g_prefactor, BernoulliTable};
use crate::scalar::{factorial_q, fmt_rational, Rational};

/// Working bound: genus, largest descendant index and t-degree of `u`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Bounds {
    pub genus: u32,
    pub descendants: u32,
    pub degree: u32,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds { genus: 3, descendants: 6, degree: 8 }
    }
}

impl Bounds {
    /// Inside the range read directly off `u`: at most `degree + 2` insertions.
    fn in_base_range(&self, g: u32, ks: &[u32]) -> bool {
        g <= self.genus && ks.len() as u32 <= self.degree + 2 && ks.iter().all(|&k| k <= self.descendants)
    }

    /// Targets with at most one `tau_0` whose string recursion stays in the base range.
    fn completable(&self, ks: &[u32]) -> bool {
        let n = ks.len() as u32;
        let s: u32 = ks.iter().sum();
        match ks.iter().filter(|&&k| k == 0).count() {
            0 => s + 2 <= self.descendants && n + 2 <= self.degree + 2,
            1 if s == 0 => self.descendants >= 2 && self.degree >= 1,
            1 => s < self.descendants && n < self.degree + 2,
            _ => false,
        }
    }
}

/// `<lambda_j tau_{k_1} ... tau_{k_n}>_g` with `k` sorted ascending.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CorrelatorKey {
    pub g: u32,
    pub j: u32,
    pub ks: Vec<u32>,
}

impl CorrelatorKey {
    pub fn new(g: u32, j: u32, mut ks: Vec<u32>) -> Self {
        ks.sort_unstable();
        CorrelatorKey { g, j, ks }
    }

    pub fn is_stable(&self) -> bool {
        2 * self.g + self.ks.len() as u32 > 2
    }

    pub fn satisfies_dimension(&self) -> bool {
        let s: u32 = self.ks.iter().sum();
        self.j <= self.g && s + self.j + 3 == 3 * self.g + self.ks.len() as u32
    }

    fn tau0_count(&self) -> usize {
        self.ks.iter().take_while(|&&k| k == 0).count()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CorrelatorRow {
    pub g: u32,
    pub j: u32,
    pub insertions: Vec<u32>,
    pub value: String,
}

/// Hodge integrals inside a working bound; missing keys are zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorrelatorTable {
    bounds: Bounds,
    entries: BTreeMap<CorrelatorKey, Rational>,
}

impl CorrelatorTable {
    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    pub fn get(&self, g: u32, j: u32, ks: &[u32]) -> Rational {
        self.entries.get(&CorrelatorKey::new(g, j, ks.to_vec())).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn contains(&self, g: u32, j: u32, ks: &[u32]) -> bool {
        self.entries.contains_key(&CorrelatorKey::new(g, j, ks.to_vec()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&CorrelatorKey, &Rational)> {
        self.entries.iter()
    }

    /// Entries with `eps`-degree zero, i.e. the Witten-Kontsevich part.
    pub fn j_zero(&self) -> CorrelatorTable {
        CorrelatorTable {
            bounds: self.bounds,
            entries: self.entries.iter().filter(|(k, _)| k.j == 0).map(|(k, v)| (k.clone(), v.clone())).collect(),
        }
    }

    /// Lines `g<TAB>j<TAB>k1,k2,...<TAB>p/q`.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for row in self.rows() {
            let ks: Vec<String> = row.insertions.iter().map(u32::to_string).collect();
            writeln!(out, "{}\t{}\t{}\t{}", row.g, row.j, ks.join(","), row.value).expect("write to string");
        }
        out
    }

    pub fn rows(&self) -> Vec<CorrelatorRow> {
        self.entries
            .iter()
            .map(|(k, v)| CorrelatorRow { g: k.g, j: k.j, insertions: k.ks.clone(), value: fmt_rational(v) })
            .collect()
    }
}

/// Reads `<lambda_j tau_0 tau_0 prod tau_k^{m_k}>_g = c * prod m_k!` off each term of `u`.
pub fn extract_base_correlators(u: &TSeries, bounds: Bounds) -> Result<CorrelatorTable> {
    let mut entries = BTreeMap::new();
    for (key, c) in u.iter() {
        let exps = key.mono.exponents(u.nvars());
        let mut ks = vec![0, 0];
        let mut mult = Rational::one();
        for (k, &m) in exps.iter().enumerate() {
            ks.extend(std::iter::repeat_n(k as u32, m as usize));
            mult *= factorial_q(m);
        }
        let ck = CorrelatorKey::new(key.hbar, key.eps, ks);
        if !ck.satisfies_dimension() {
            return Err(Error::Dimension(format!("u has a term {c} at {ck:?}")));
        }
        if bounds.in_base_range(ck.g, &ck.ks) {
            entries.insert(ck, c * mult);
        }
    }
    Ok(CorrelatorTable { bounds, entries })
}

/// Sorted tuples of `n` indices in `0..=max` with sum `s`.
fn partitions(n: usize, s: u32, max: u32) -> Vec<Vec<u32>> {
    fn go(n: usize, s: u32, lo: u32, max: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if n == 0 {
            if s == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for k in lo..=max.min(s) {
            if k * n as u32 > s {
                break;
            }
            cur.push(k);
            go(n - 1, s - k, k, max, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(n, s, 0, max, &mut Vec::new(), &mut out);
    out
}

struct Completer<'a> {
    base: &'a CorrelatorTable,
    memo: HashMap<CorrelatorKey, Rational>,
}

impl Completer<'_> {
    fn value(&mut self, key: &CorrelatorKey) -> Result<Rational> {
        if key.tau0_count() >= 2 {
            if !self.base.bounds.in_base_range(key.g, &key.ks) {
                return Err(Error::Unreachable(format!("{key:?}")));
            }
            return Ok(self.base.entries.get(key).cloned().unwrap_or_else(Rational::zero));
        }
        if let Some(v) = self.memo.get(key) {
            return Ok(v.clone());
        }
        // string equation for tau_0 times the tuple with its largest entry raised
        let last = key.ks.len() - 1;
        let mut raised = key.ks.clone();
        raised[last] += 1;
        let mut with_tau0 = raised.clone();
        with_tau0.push(0);
        let mut v = self.value(&CorrelatorKey::new(key.g, key.j, with_tau0))?;
        for i in 0..last {
            if raised[i] >= 1 {
                let mut lowered = raised.clone();
                lowered[i] -= 1;
                v -= self.value(&CorrelatorKey::new(key.g, key.j, lowered))?;
            }
        }
        self.memo.insert(key.clone(), v.clone());
        Ok(v)
    }
}

/// Fills in correlators with at most one `tau_0` via the string equation
/// `<tau_0 lambda_j prod tau_{k_i}>_g = sum_i <lambda_j tau_{k_i - 1} prod_{others}>_g`.
pub fn string_complete(base: &CorrelatorTable) -> Result<CorrelatorTable> {
    let b = base.bounds;
    let mut completer = Completer { base, memo: HashMap::new() };
    let mut entries: BTreeMap<CorrelatorKey, Rational> =
        base.entries.iter().filter(|(k, v)| k.tau0_count() >= 2 && !v.is_zero()).map(|(k, v)| (k.clone(), v.clone())).collect();
    for g in 0..=b.genus {
        for j in 0..=g {
            for n in 1..=b.degree + 2 {
                let Some(s) = (3 * g + n).checked_sub(3 + j) else { continue };
                if 2 * g + n <= 2 {
                    continue;
                }
                for ks in partitions(n as usize, s, b.descendants) {
                    if ks.iter().filter(|&&k| k == 0).count() > 1 || !b.completable(&ks) {
                        continue;
                    }
                    let key = CorrelatorKey::new(g, j, ks);
                    let v = completer.value(&key)?;
                    if !v.is_zero() {
                        entries.insert(key, v);
                    }
                }
            }
        }
    }
    Ok(CorrelatorTable { bounds: b, entries })
}

/// Checks the string equation on base entries with at least three `tau_0`'s.
/// Returns the number of identities checked.
pub fn check_string_identity(base: &CorrelatorTable) -> Result<usize> {
    let b = base.bounds;
    let mut checked = 0;
    for g in 0..=b.genus {
        for j in 0..=g {
            for n in 3..=b.degree + 2 {
                let Some(s) = (3 * g + n).checked_sub(3 + j) else { continue };
                for ks in partitions(n as usize, s, b.descendants) {
                    if ks.iter().take_while(|&&k| k == 0).count() < 3 || 2 * g + n <= 3 {
                        continue;
                    }
                    let rest = &ks[1..];
                    let mut rhs = Rational::zero();
                    for i in 0..rest.len() {
                        if rest[i] >= 1 {
                            let mut lowered = rest.to_vec();
                            lowered[i] -= 1;
                            rhs += base.get(g, j, &lowered);
                        }
                    }
                    let lhs = base.get(g, j, &ks);
                    if lhs != rhs {
                        return Err(Error::CheckFailed(format!(
                            "string equation at g={g} j={j} {ks:?}: {} != {}",
                            fmt_rational(&lhs),
                            fmt_rational(&rhs)
                        )));
                    }
                    checked += 1;
                }
            }
        }
    }
    Ok(checked)
}

/// `(2^{2g-1}-1)/2^{2g-1} |B_2g|/(2g)! (2g-3+n)! / (d_1! ... d_n!)`.
pub fn lambda_g_value(g: u32, ds: &[u32]) -> Result<Rational> {
    let n = ds.len() as u32;
    let s: u32 = ds.iter().sum();
    if g == 0 || n == 0 || s + 3 != 2 * g + n {
        return Err(Error::Dimension(format!("lambda_g with g={g} and insertions {ds:?}")));
    }
    let table = BernoulliTable::exact(2 * g);
    let denom: Rational = ds.iter().map(|&d| factorial_q(d)).product();
    Ok(lambda_g_prefactor(&table, g) * factorial_q(s) / denom)
}

/// Compares every `j = g` entry with `lambda_g_value`; returns how many were compared.
pub fn check_lambda_g(table: &CorrelatorTable) -> Result<usize> {
    let b = table.bounds;
    let mut checked = 0;
    for g in 1..=b.genus {
        for n in 1..=b.degree + 2 {
            for ks in partitions(n as usize, 2 * g + n - 3, b.descendants) {
                let zeros = ks.iter().filter(|&&k| k == 0).count();
                let covered = if zeros >= 2 { b.in_base_range(g, &ks) } else { b.completable(&ks) };
                if !covered {
                    continue;
                }
                let expected = lambda_g_value(g, &ks)?;
                let got = table.get(g, g, &ks);
                if got != expected {
                    return Err(Error::CheckFailed(format!(
                        "lambda_{g} {ks:?}: {} != {}",
                        fmt_rational(&got),
                        fmt_rational(&expected)
                    )));
                }
                checked += 1;
            }
        }
    }
    Ok(checked)
}
