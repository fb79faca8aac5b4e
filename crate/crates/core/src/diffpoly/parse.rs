use std::str::FromStr;

use super::{DiffPoly, Monomial};
use crate::error::Error;
use crate::scalar::{parse_rational, Gaussian, ScalarKey};

fn bad(s: &str) -> Error {
    Error::Parse(format!("unrecognized term `{s}`"))
}

fn parse_gaussian(s: &str) -> Option<Gaussian> {
    let inner = s.strip_prefix('(')?.strip_suffix(')')?;
    let body = inner.strip_suffix("*im")?;
    let split = body.char_indices().skip(1).filter(|&(_, c)| c == '+' || c == '-').map(|(i, _)| i).last()?;
    let re = parse_rational(&body[..split])?;
    let im = parse_rational(body[split..].trim_start_matches('+'))?;
    Some(Gaussian::new(re, im))
}

fn parse_exponent(s: &str) -> Option<i64> {
    match s.strip_prefix('^') {
        None if s.is_empty() => Some(1),
        None => None,
        Some(e) => e.parse().ok(),
    }
}

/// Splits on `*` outside parentheses.
fn factors(term: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let (mut depth, mut start) = (0i32, 0);
    for (i, c) in term.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            '*' if depth == 0 => {
                out.push(&term[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&term[start..]);
    out
}

fn parse_term(term: &str) -> Result<(Gaussian, ScalarKey, Monomial), Error> {
    let fs = factors(term.trim());
    let mut it = fs.iter().peekable();
    let first = it.next().ok_or_else(|| bad(term))?;
    let mut coeff = if first.starts_with('(') {
        parse_gaussian(first).ok_or_else(|| bad(term))?
    } else {
        Gaussian::real(parse_rational(first).ok_or_else(|| bad(term))?)
    };
    if it.peek() == Some(&&"im") {
        it.next();
        coeff = Gaussian::new(coeff.im.clone(), coeff.re.clone());
    }
    let mut key = ScalarKey::ONE;
    let mut pairs = Vec::new();
    for f in it {
        if let Some(rest) = f.strip_prefix("hbar") {
            key.hbar += u32::try_from(parse_exponent(rest).ok_or_else(|| bad(term))?).map_err(|_| bad(term))?;
        } else if let Some(rest) = f.strip_prefix("eps") {
            key.eps_half += match rest.strip_prefix("^(").and_then(|r| r.strip_suffix("/2)")) {
                Some(b) => b.parse::<i32>().map_err(|_| bad(term))?,
                None => 2 * parse_exponent(rest).ok_or_else(|| bad(term))? as i32,
            };
        } else if let Some(rest) = f.strip_prefix("mu") {
            key.mu += u32::try_from(parse_exponent(rest).ok_or_else(|| bad(term))?).map_err(|_| bad(term))?;
        } else if let Some(rest) = f.strip_prefix('u') {
            let end = rest.find('^').unwrap_or(rest.len());
            let k: usize = rest[..end].parse().map_err(|_| bad(term))?;
            let a = u32::try_from(parse_exponent(&rest[end..]).ok_or_else(|| bad(term))?).map_err(|_| bad(term))?;
            pairs.push((k, a));
        } else {
            return Err(bad(term));
        }
    }
    Ok((coeff, key, Monomial::from_pairs(&pairs)))
}

impl FromStr for DiffPoly {
    type Err = Error;

    /// Parses the canonical text form produced by `Display`.
    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        let mut out = DiffPoly::zero();
        if s == "0" {
            return Ok(out);
        }
        for term in s.split(" + ") {
            let (c, k, m) = parse_term(term)?;
            out.add_term(k, m, &c);
        }
        Ok(out)
    }
}
