// SPDX-License-Identifier: Apache-2.0

//! Streams of structures: exhaustive within budget, seeded samples beyond.

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::eval::{Compiled, Vocab};
use super::structure::{FiniteStructure, Space};
use super::{Mode, OracleConfig, OracleError, Sizes};
use crate::fol::{symbols, Formula, Signature, SymbolDecl};

/// Which symbols a stream interprets.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Symbols {
    #[default]
    All,
    Immutable,
    Mutable,
}

impl Symbols {
    fn keeps(self, d: &SymbolDecl) -> bool {
        match self {
            Symbols::All => true,
            Symbols::Immutable => !d.mutable,
            Symbols::Mutable => d.mutable,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct EnumRequest {
    pub symbols: Symbols,
    /// Tables held fixed instead of enumerated.
    pub fixed: FiniteStructure,
    /// Structures must satisfy every axiom whose symbols they interpret.
    pub axioms: Vec<Formula>,
}

pub struct Enumeration<'a> {
    /// Size of the underlying space (saturating).
    pub cases: u128,
    pub sampled: bool,
    items: Box<dyn Iterator<Item = FiniteStructure> + Send + 'a>,
}

impl Iterator for Enumeration<'_> {
    type Item = FiniteStructure;
    fn next(&mut self) -> Option<FiniteStructure> {
        self.items.next()
    }
}

/// Structures for `sig` over `sizes`. Exhaustive when a staged search
/// (one symbol at a time, pruning with every axiom whose symbols are already
/// interpreted) stays within `cfg.budget` table extensions, or when forced,
/// failing with `BudgetExceeded` beyond it. Otherwise `cfg.samples` draws
/// from a ChaCha stream seeded with `cfg.seed`; sampled streams may repeat
/// structures.
pub fn enumerate_structures<'a>(
    sig: &'a Signature,
    sizes: &Sizes,
    req: &EnumRequest,
    cfg: &OracleConfig,
) -> Result<Enumeration<'a>, OracleError> {
    let fixed = req.fixed.clone();
    let symbols_kind = req.symbols;
    let free = |d: &SymbolDecl| symbols_kind.keeps(d) && !fixed.tables.contains_key(&d.name);
    let space = Space::new(sig, sizes, free)?;
    let cases = space.cases();

    let present: BTreeSet<String> = sig
        .symbols()
        .iter()
        .filter(|d| symbols_kind.keeps(d) || fixed.tables.contains_key(&d.name))
        .map(|d| d.name.clone())
        .collect();
    let vocab = Vocab::new(sig, space.sizes(), &[crate::fol::Tag::Plain]);
    let mut filters = Vec::new();
    for a in &req.axioms {
        let syms: BTreeSet<String> = symbols(a).into_iter().map(|s| s.name).collect();
        if syms.iter().all(|s| present.contains(s)) {
            filters.push((syms, Compiled::new(a, &vocab, &[])?));
        }
    }

    let staged = match cfg.mode {
        Mode::Sample => None,
        _ => {
            let free_syms: Vec<&SymbolDecl> = sig.symbols().iter().filter(|d| free(d)).collect();
            staged_search(sig, sizes, &fixed, &free_syms, &filters, &vocab, cfg.budget)?
        }
    };
    if let Some(all) = staged {
        return Ok(Enumeration {
            cases,
            sampled: false,
            items: Box::new(all.into_iter()),
        });
    }
    if cfg.mode == Mode::Exhaustive {
        return Err(OracleError::BudgetExceeded {
            cases,
            budget: cfg.budget,
        });
    }

    let keep = move |s: &FiniteStructure| {
        let tables = vocab.partial_tables(&[s]);
        filters.iter().all(|(_, c)| c.eval_partial(&tables, &[]))
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.samples;
    let items = (0..n)
        .map(move |_| space.sample(&mut rng).merged(&fixed))
        .filter(move |s| keep(s));
    Ok(Enumeration {
        cases,
        sampled: true,
        items: Box::new(items),
    })
}

/// Extends partial structures one symbol at a time, choosing next the symbol
/// that completes the most axioms (fewest tables on ties). `None` once the
/// number of extensions tried exceeds `budget`.
fn staged_search(
    sig: &Signature,
    sizes: &Sizes,
    fixed: &FiniteStructure,
    free: &[&SymbolDecl],
    filters: &[(BTreeSet<String>, Compiled)],
    vocab: &Vocab,
    budget: u128,
) -> Result<Option<Vec<FiniteStructure>>, OracleError> {
    let mut known: BTreeSet<String> = fixed.tables.keys().cloned().collect();
    let mut done = vec![false; filters.len()];
    let mut left: Vec<(&SymbolDecl, Space)> = free
        .iter()
        .map(|d| Ok((*d, Space::new(sig, sizes, |e| e.name == d.name)?)))
        .collect::<Result<_, OracleError>>()?;
    let start = FiniteStructure {
        sizes: sizes.resolve(sig)?,
        tables: fixed.tables.clone(),
    };
    let check = |s: &FiniteStructure, which: &[usize]| {
        let tables = vocab.partial_tables(&[s]);
        which
            .iter()
            .all(|&i| filters[i].1.eval_partial(&tables, &[]))
    };
    let ready: Vec<usize> = (0..filters.len())
        .filter(|&i| filters[i].0.iter().all(|s| known.contains(s)))
        .collect();
    for &i in &ready {
        done[i] = true;
    }
    let mut partial = if check(&start, &ready) {
        vec![start]
    } else {
        vec![]
    };
    let mut work: u128 = 0;

    while !left.is_empty() {
        let completes = |name: &str| -> Vec<usize> {
            (0..filters.len())
                .filter(|&i| {
                    !done[i]
                        && filters[i].0.contains(name)
                        && filters[i].0.iter().all(|s| s == name || known.contains(s))
                })
                .collect()
        };
        let pick = (0..left.len())
            .max_by_key(|&k| {
                let (d, sp) = &left[k];
                (
                    completes(&d.name).len(),
                    std::cmp::Reverse(sp.cases()),
                    std::cmp::Reverse(k),
                )
            })
            .expect("nonempty");
        let (d, sp) = left.remove(pick);
        let now = completes(&d.name);
        work = work.saturating_add((partial.len() as u128).saturating_mul(sp.cases()));
        if work > budget {
            return Ok(None);
        }
        let mut next = Vec::new();
        for p in &partial {
            for ext in sp.iter() {
                let s = p.merged(&ext);
                if check(&s, &now) {
                    next.push(s);
                }
            }
        }
        partial = next;
        known.insert(d.name.clone());
        for i in now {
            done[i] = true;
        }
    }
    Ok(Some(partial))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budget_switches_to_sampling() {
        let sig = Signature::new()
            .sort("s", true)
            .relation("r", &["s", "s"], false);
        let cfg = OracleConfig {
            budget: 10,
            samples: 5,
            ..OracleConfig::default()
        };
        let e =
            enumerate_structures(&sig, &Sizes::uniform(3), &EnumRequest::default(), &cfg).unwrap();
        assert!(e.sampled);
        assert_eq!(e.cases, 512);
        assert_eq!(e.count(), 5);
        let forced = OracleConfig {
            mode: Mode::Exhaustive,
            ..cfg
        };
        assert!(matches!(
            enumerate_structures(&sig, &Sizes::uniform(3), &EnumRequest::default(), &forced),
            Err(OracleError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn sampling_is_seeded() {
        let sig = Signature::new()
            .sort("s", true)
            .relation("r", &["s", "s"], false);
        let cfg = OracleConfig {
            mode: Mode::Sample,
            samples: 20,
            seed: 9,
            ..OracleConfig::default()
        };
        let a: Vec<_> =
            enumerate_structures(&sig, &Sizes::uniform(4), &EnumRequest::default(), &cfg)
                .unwrap()
                .collect();
        let b: Vec<_> =
            enumerate_structures(&sig, &Sizes::uniform(4), &EnumRequest::default(), &cfg)
                .unwrap()
                .collect();
        assert_eq!(a, b);
    }
}
