use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::sync::RwLock;

use super::{construct_hamiltonian, h1_closed_form, h2_closed_form, h_minus_one, h_zero, Hamiltonian, Mode};
use crate::diffpoly::DiffPoly;
use crate::error::{Error, Result};
use crate::linalg::PivotOrder;
use crate::localfunc::LocalFunctional;

/// Hamiltonians at a fixed hbar order, built on demand and cached.
#[derive(Debug)]
pub struct HierarchyContext {
    order: u32,
    mode: Mode,
    cache: RwLock<BTreeMap<i32, Hamiltonian>>,
}

impl HierarchyContext {
    pub fn new(order: u32) -> Self {
        Self::with_mode(order, Mode::Deformed)
    }

    pub fn with_mode(order: u32, mode: Mode) -> Self {
        HierarchyContext { order, mode, cache: RwLock::new(BTreeMap::new()) }
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// `h_n` for `n >= -1`; `h_1`, `h_2` are the closed forms, higher ones are constructed.
    pub fn hamiltonian(&self, n: i32) -> Result<Hamiltonian> {
        if let Some(h) = self.cache.read().expect("cache lock").get(&n) {
            return Ok(h.clone());
        }
        let order = self.order;
        let h = match n {
            i32::MIN..=-2 => return Err(Error::InvalidArgument(format!("no Hamiltonian h_{n}"))),
            -1 => h_minus_one(order),
            0 => h_zero(order),
            1 | 2 => {
                let h = if n == 1 { h1_closed_form(order) } else { h2_closed_form(order) };
                match self.mode {
                    Mode::Deformed => h,
                    Mode::Classical => h.at_eps_zero()?,
                }
            }
            _ => construct_hamiltonian(n as u32, order, self.mode, PivotOrder::Forward)?,
        };
        self.cache.write().expect("cache lock").insert(n, h.clone());
        Ok(h)
    }

    /// `d/dx (delta h_n / delta u)`.
    pub fn flow_rhs(&self, n: i32) -> Result<DiffPoly> {
        Ok(self.hamiltonian(n)?.flow())
    }

    /// Loads `n<TAB>order<TAB>text` records matching this context's order.
    pub fn load_cache(&self, path: &Path) -> Result<usize> {
        if self.mode != Mode::Deformed || !path.exists() {
            return Ok(0);
        }
        let text = fs::read_to_string(path)?;
        let mut loaded = 0;
        let mut cache = self.cache.write().expect("cache lock");
        for (lineno, line) in text.lines().enumerate() {
            let bad = || Error::Parse(format!("{}:{}: malformed cache record", path.display(), lineno + 1));
            let mut fields = line.splitn(3, '\t');
            let (Some(n), Some(order), Some(body)) = (fields.next(), fields.next(), fields.next()) else {
                return Err(bad());
            };
            let n: i32 = n.parse().map_err(|_| bad())?;
            let order: u32 = order.parse().map_err(|_| bad())?;
            if order != self.order {
                continue;
            }
            let body = body.strip_prefix("int( ").and_then(|b| b.strip_suffix(" ) dx")).ok_or_else(bad)?;
            let functional = LocalFunctional::new(body.parse()?)?;
            cache.insert(n, Hamiltonian { n, order, functional });
            loaded += 1;
        }
        Ok(loaded)
    }

    /// Writes every cached Hamiltonian, merged with records for other orders already on disk.
    pub fn save_cache(&self, path: &Path) -> Result<()> {
        let mut records: BTreeMap<(i32, u32), String> = BTreeMap::new();
        if path.exists() {
            for line in fs::read_to_string(path)?.lines() {
                let mut fields = line.splitn(3, '\t');
                if let (Some(n), Some(order), Some(body)) = (fields.next(), fields.next(), fields.next()) {
                    if let (Ok(n), Ok(order)) = (n.parse(), order.parse()) {
                        records.insert((n, order), body.to_string());
                    }
                }
            }
        }
        for (n, h) in self.cache.read().expect("cache lock").iter() {
            records.insert((*n, self.order), h.to_string());
        }
        let out: String = records.iter().map(|((n, order), body)| format!("{n}\t{order}\t{body}\n")).collect();
        fs::write(path, out)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conventions() {
        let ctx = HierarchyContext::new(2);
        assert_eq!(ctx.hamiltonian(0).unwrap().to_string(), "int( 1/2*u0^2 ) dx");
        assert_eq!(ctx.hamiltonian(-1).unwrap().to_string(), "int( 1*u0 ) dx");
        assert!(ctx.hamiltonian(-2).is_err());
    }

    #[test]
    fn cache_round_trip() {
        let dir = std::env::temp_dir().join(format!("hodge-kdv-cache-{}", std::process::id()));
        let ctx = HierarchyContext::new(2);
        let h3 = ctx.hamiltonian(3).unwrap();
        ctx.save_cache(&dir).unwrap();
        let fresh = HierarchyContext::new(2);
        assert_eq!(fresh.load_cache(&dir).unwrap(), 1);
        assert_eq!(fresh.hamiltonian(3).unwrap(), h3);
        assert_eq!(HierarchyContext::new(1).load_cache(&dir).unwrap(), 0);
        std::fs::remove_file(&dir).unwrap();
    }
}
