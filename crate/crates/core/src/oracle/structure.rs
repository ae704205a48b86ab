// SPDX-License-Identifier: Apache-2.0

//! Explicit finite structures and their enumeration.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use serde::Serialize;

use super::{OracleError, Sizes};
use crate::fol::{Signature, SymbolDecl, SymbolKind};

/// Interpretation of one symbol: a total map from the argument grid (first
/// argument most significant) to an element index, or to 0/1 for relations.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Table {
    pub dims: Vec<usize>,
    pub values: Vec<usize>,
}

impl Table {
    pub fn constant(v: usize) -> Self {
        Table {
            dims: vec![],
            values: vec![v],
        }
    }

    /// Relation table holding exactly the given tuples.
    pub fn relation(dims: Vec<usize>, tuples: &[Vec<usize>]) -> Self {
        let mut t = Table {
            values: vec![0; dims.iter().product()],
            dims,
        };
        for tup in tuples {
            let i = t.index(tup);
            t.values[i] = 1;
        }
        t
    }

    pub fn index(&self, args: &[usize]) -> usize {
        args.iter()
            .zip(&self.dims)
            .fold(0, |acc, (a, d)| acc * d + a)
    }

    pub fn get(&self, args: &[usize]) -> usize {
        self.values[self.index(args)]
    }

    /// Argument tuple of cell `i`.
    fn args_of(&self, mut i: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for (slot, d) in out.iter_mut().zip(&self.dims).rev() {
            *slot = i % d;
            i /= d;
        }
        out
    }
}

/// A structure for the plain signature: per-sort domain sizes (elements are
/// `0..n`) and a table for every symbol present.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct FiniteStructure {
    pub sizes: BTreeMap<String, usize>,
    pub tables: BTreeMap<String, Table>,
}

impl FiniteStructure {
    pub fn new(sizes: BTreeMap<String, usize>) -> Self {
        FiniteStructure {
            sizes,
            tables: BTreeMap::new(),
        }
    }

    pub fn with(mut self, name: &str, t: Table) -> Self {
        self.tables.insert(name.to_string(), t);
        self
    }

    /// Union of the tables of `self` and `other` (entries of `other` win).
    pub fn merged(&self, other: &FiniteStructure) -> FiniteStructure {
        let mut out = self.clone();
        out.tables
            .extend(other.tables.iter().map(|(k, v)| (k.clone(), v.clone())));
        out
    }

    /// Human-readable listing, one symbol per line, in `sig` order.
    pub fn render(&self, sig: &Signature) -> String {
        let mut lines = Vec::new();
        for d in sig.symbols() {
            let Some(t) = self.tables.get(&d.name) else {
                continue;
            };
            let el = |s: &str, v: usize| format!("{s}{v}");
            let args = d.kind.arg_sorts();
            let show_args = |a: &[usize]| -> String {
                let parts: Vec<String> = a.iter().zip(args).map(|(v, s)| el(s, *v)).collect();
                parts.join(",")
            };
            let body = match &d.kind {
                SymbolKind::Constant { sort } => el(sort, t.values[0]),
                SymbolKind::Relation { .. } => {
                    let held: Vec<String> = (0..t.values.len())
                        .filter(|&i| t.values[i] == 1)
                        .map(|i| format!("({})", show_args(&t.args_of(i))))
                        .collect();
                    format!("{{{}}}", held.join(" "))
                }
                SymbolKind::Function { result, .. } => {
                    let maps: Vec<String> = (0..t.values.len())
                        .map(|i| {
                            format!(
                                "({})->{}",
                                show_args(&t.args_of(i)),
                                el(result, t.values[i])
                            )
                        })
                        .collect();
                    format!("{{{}}}", maps.join(" "))
                }
            };
            lines.push(format!("{} = {body}", d.name));
        }
        lines.join("\n")
    }
}

impl fmt::Display for FiniteStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, t) in &self.tables {
            writeln!(f, "{name} = {:?}", t.values)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
struct Grid {
    name: String,
    dims: Vec<usize>,
    range: usize,
}

/// All interpretations of a chosen set of symbols over fixed domain sizes.
#[derive(Clone, Debug)]
pub struct Space {
    sizes: BTreeMap<String, usize>,
    grids: Vec<Grid>,
}

impl Space {
    pub fn new(
        sig: &Signature,
        sizes: &Sizes,
        keep: impl Fn(&SymbolDecl) -> bool,
    ) -> Result<Self, OracleError> {
        let sizes = sizes.resolve(sig)?;
        let grids = sig
            .symbols()
            .iter()
            .filter(|d| keep(d))
            .map(|d| Grid {
                name: d.name.clone(),
                dims: d.kind.arg_sorts().iter().map(|s| sizes[s]).collect(),
                range: d.kind.result_sort().map_or(2, |s| sizes[s]),
            })
            .collect();
        Ok(Space { sizes, grids })
    }

    pub fn sizes(&self) -> &BTreeMap<String, usize> {
        &self.sizes
    }

    /// Number of interpretations, saturating at `u128::MAX`.
    pub fn cases(&self) -> u128 {
        let mut n: u128 = 1;
        for g in &self.grids {
            let cells: u128 = g.dims.iter().map(|&d| d as u128).product();
            for _ in 0..cells {
                n = n.saturating_mul(g.range as u128);
            }
        }
        n
    }

    fn first(&self) -> FiniteStructure {
        let mut s = FiniteStructure::new(self.sizes.clone());
        for g in &self.grids {
            let t = Table {
                values: vec![0; g.dims.iter().product()],
                dims: g.dims.clone(),
            };
            s.tables.insert(g.name.clone(), t);
        }
        s
    }

    /// Exhaustive, deterministic enumeration; the last cell of the last
    /// symbol varies fastest.
    pub fn iter(&self) -> SpaceIter<'_> {
        SpaceIter {
            space: self,
            next: Some(self.first()),
        }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> FiniteStructure {
        let mut s = self.first();
        for g in &self.grids {
            let t = s.tables.get_mut(&g.name).expect("created above");
            for v in &mut t.values {
                *v = rng.gen_range(0..g.range);
            }
        }
        s
    }
}

pub struct SpaceIter<'a> {
    space: &'a Space,
    next: Option<FiniteStructure>,
}

impl Iterator for SpaceIter<'_> {
    type Item = FiniteStructure;

    fn next(&mut self) -> Option<FiniteStructure> {
        let cur = self.next.take()?;
        let mut succ = cur.clone();
        let mut carried = true;
        'outer: for g in self.space.grids.iter().rev() {
            let t = succ.tables.get_mut(&g.name).expect("present");
            for v in t.values.iter_mut().rev() {
                *v += 1;
                if *v < g.range {
                    carried = false;
                    break 'outer;
                }
                *v = 0;
            }
        }
        if !carried {
            self.next = Some(succ);
        }
        Some(cur)
    }
}

/// Every assignment of elements to a list of sorts, in odometer order.
pub fn tuples(sorts: &[usize]) -> Vec<Vec<usize>> {
    let total: usize = sorts.iter().product();
    let mut out = Vec::with_capacity(total);
    if sorts.contains(&0) {
        return out;
    }
    let mut cur = vec![0; sorts.len()];
    loop {
        out.push(cur.clone());
        let mut i = sorts.len();
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            cur[i] += 1;
            if cur[i] < sorts[i] {
                break;
            }
            cur[i] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unary_relation_size_two() {
        let sig = Signature::new()
            .sort("s", true)
            .relation("r", &["s"], false);
        let sizes = Sizes::uniform(2);
        let space = Space::new(&sig, &sizes, |_| true).unwrap();
        assert_eq!(space.cases(), 4);
        let all: Vec<_> = space.iter().collect();
        assert_eq!(all.len(), 4);
        assert_eq!(all[1].tables["r"].values, vec![0, 1]);
        assert_eq!(all[3].tables["r"].values, vec![1, 1]);
    }

    #[test]
    fn tuple_order() {
        assert_eq!(
            tuples(&[2, 2]),
            vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]
        );
        assert_eq!(tuples(&[]), vec![Vec::<usize>::new()]);
        let t = Table::relation(vec![3, 3], &[vec![1, 2]]);
        assert_eq!(t.get(&[1, 2]), 1);
        assert_eq!(t.args_of(t.index(&[2, 1])), vec![2, 1]);
    }
}
