// SPDX-License-Identifier: Apache-2.0

//! Numeric ranking functions denoted by constructor trees.
//!
//! | node | value | bound |
//! |---|---|---|
//! | Bin(α) | \[α\] | 1 |
//! | Pos(t̄, ℓ) | #{ē : ℓ(ē, t̄)} | m − 1 |
//! | PW(r…) | Σ fᵢ | Σ hᵢ |
//! | Lex(r…) | Σ fᵢ ∏_{j>i} (hⱼ+1) | ∏ (hᵢ+1) − 1 |
//! | Lin((αᵢ, rᵢ)…) | Σ_{j<i} (hⱼ+1) + fᵢ for the first i with αᵢ | Σ (hᵢ+1) |
//! | DomPW / DomPerm(ȳ, r) | Σ_ȳ f | m·h |
//! | DomLex(ℓ, y, r) | Σ_y (h+1)^(n−1−pos(y)) f(y) | (h+1)^n − 1 |
//! | DomLin(ℓ, α, y, r) | pos(w)·(h+1) + f(w), w the ℓ-least α-element | n·(h+1) |
//!
//! m and n count the tuples over ȳ, pos counts ℓ-predecessors.
//! Lin without an active branch and DomLin without a witness take the
//! bound as value. Orders must be strict total orders on the structure.

use std::fmt;

use num_traits::{CheckedAdd, CheckedMul, FromPrimitive, Unsigned};
use serde::Serialize;

use super::eval::{Assignment, Compiled, CompiledTerm, Vocab};
use super::structure::{tuples, FiniteStructure};
use super::OracleError;
use crate::fol::{Formula, Signature, Tag, Var};
use crate::ranking::{OrderFormula, RankingExpr};

/// Scalar types usable for heights.
pub trait HeightNum:
    Clone + Ord + fmt::Debug + fmt::Display + Unsigned + CheckedAdd + CheckedMul + FromPrimitive
{
}

impl<T> HeightNum for T where
    T: Clone + Ord + fmt::Debug + fmt::Display + Unsigned + CheckedAdd + CheckedMul + FromPrimitive
{
}

/// A height together with the bound for its node and domain sizes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HeightValue<N> {
    pub value: N,
    pub bound: N,
}

fn add<N: HeightNum>(a: &N, b: &N) -> Result<N, OracleError> {
    a.checked_add(b).ok_or(OracleError::Overflow)
}

fn mul<N: HeightNum>(a: &N, b: &N) -> Result<N, OracleError> {
    a.checked_mul(b).ok_or(OracleError::Overflow)
}

fn num<N: HeightNum>(k: usize) -> Result<N, OracleError> {
    N::from_usize(k).ok_or(OracleError::Overflow)
}

struct Ctx<'a> {
    s: &'a FiniteStructure,
    vocab: Vocab,
}

impl Ctx<'_> {
    fn holds(&self, f: &Formula, v: &Assignment) -> Result<bool, OracleError> {
        let free: Vec<Var> = v.keys().cloned().collect();
        let args: Vec<usize> = v.values().copied().collect();
        let c = Compiled::new(f, &self.vocab, &free)?;
        Ok(c.eval(&self.vocab.tables(&[self.s]), &args))
    }

    fn size(&self, sort: &str) -> Result<usize, OracleError> {
        self.s
            .sizes
            .get(sort)
            .copied()
            .ok_or_else(|| OracleError::MissingSize(sort.to_string()))
    }

    fn domain(&self, vars: &[Var]) -> Result<Vec<Vec<usize>>, OracleError> {
        let sizes = vars
            .iter()
            .map(|v| self.size(&v.sort))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(tuples(&sizes))
    }

    /// The tuples of `order`'s sort list, sorted by ℓ, after checking that ℓ
    /// is a strict total order on them.
    fn chain(&self, order: &OrderFormula, v: &Assignment) -> Result<Vec<Vec<usize>>, OracleError> {
        let elems = self.domain(&order.lower)?;
        let mut free: Vec<Var> = v.keys().cloned().collect();
        free.extend(order.lower.iter().cloned());
        free.extend(order.upper.iter().cloned());
        let c = Compiled::new(&order.body, &self.vocab, &free)?;
        let tables = self.vocab.tables(&[self.s]);
        let base: Vec<usize> = v.values().copied().collect();
        let m = elems.len();
        let mut rel = vec![false; m * m];
        for (i, a) in elems.iter().enumerate() {
            for (j, b) in elems.iter().enumerate() {
                let mut args = base.clone();
                args.extend(a);
                args.extend(b);
                rel[i * m + j] = c.eval(&tables, &args);
            }
        }
        let lt = |i: usize, j: usize| rel[i * m + j];
        for i in 0..m {
            if lt(i, i) {
                return Err(OracleError::NonTotalOrder);
            }
            for j in 0..m {
                if i != j && lt(i, j) == lt(j, i) {
                    return Err(OracleError::NonTotalOrder);
                }
                for k in 0..m {
                    if lt(i, j) && lt(j, k) && !lt(i, k) {
                        return Err(OracleError::NonTotalOrder);
                    }
                }
            }
        }
        let mut idx: Vec<usize> = (0..m).collect();
        idx.sort_by_key(|&i| (0..m).filter(|&j| lt(j, i)).count());
        Ok(idx.into_iter().map(|i| elems[i].clone()).collect())
    }

    fn bind(v: &Assignment, vars: &[Var], vals: &[usize]) -> Assignment {
        let mut w = v.clone();
        for (x, e) in vars.iter().zip(vals) {
            w.insert(x.clone(), *e);
        }
        w
    }

    fn height<N: HeightNum>(
        &self,
        e: &RankingExpr,
        v: &Assignment,
    ) -> Result<HeightValue<N>, OracleError> {
        let one = N::one();
        Ok(match e {
            RankingExpr::Bin { alpha, .. } => HeightValue {
                value: if self.holds(alpha, v)? {
                    N::one()
                } else {
                    N::zero()
                },
                bound: N::one(),
            },
            RankingExpr::Pos { terms, order, .. } => {
                let chain = self.chain(order, v)?;
                let free: Vec<Var> = v.keys().cloned().collect();
                let args: Vec<usize> = v.values().copied().collect();
                let tables = self.vocab.tables(&[self.s]);
                let at: Vec<usize> = terms
                    .iter()
                    .map(|t| Ok(CompiledTerm::new(t, &self.vocab, &free)?.eval(&tables, &args)))
                    .collect::<Result<_, OracleError>>()?;
                let pos = chain
                    .iter()
                    .position(|c| *c == at)
                    .expect("tuple in domain");
                HeightValue {
                    value: num(pos)?,
                    bound: num(chain.len() - 1)?,
                }
            }
            RankingExpr::Pw(rs) => {
                let (mut value, mut bound) = (N::zero(), N::zero());
                for r in rs {
                    let h = self.height::<N>(r, v)?;
                    value = add(&value, &h.value)?;
                    bound = add(&bound, &h.bound)?;
                }
                HeightValue { value, bound }
            }
            RankingExpr::Lex(rs) => {
                let (mut value, mut span) = (N::zero(), N::one());
                for r in rs.iter().rev() {
                    let h = self.height::<N>(r, v)?;
                    value = add(&value, &mul(&h.value, &span)?)?;
                    span = mul(&span, &add(&h.bound, &one)?)?;
                }
                HeightValue {
                    value,
                    bound: span - N::one(),
                }
            }
            RankingExpr::Lin(branches) => {
                let mut offset = N::zero();
                let mut found = None;
                for (alpha, r) in branches {
                    let h = self.height::<N>(r, v)?;
                    if found.is_none() && self.holds(alpha, v)? {
                        found = Some(add(&offset, &h.value)?);
                    }
                    offset = add(&offset, &add(&h.bound, &one)?)?;
                }
                HeightValue {
                    value: found.unwrap_or_else(|| offset.clone()),
                    bound: offset,
                }
            }
            RankingExpr::DomPw { vars, inner } | RankingExpr::DomPerm { vars, inner, .. } => {
                let (mut value, mut bound) = (N::zero(), N::zero());
                for t in self.domain(vars)? {
                    let h = self.height::<N>(inner, &Self::bind(v, vars, &t))?;
                    value = add(&value, &h.value)?;
                    bound = add(&bound, &h.bound)?;
                }
                HeightValue { value, bound }
            }
            RankingExpr::DomLex { order, vars, inner } => {
                let chain = self.chain(order, v)?;
                let (mut value, mut span) = (N::zero(), N::one());
                for e in chain.iter().rev() {
                    let h = self.height::<N>(inner, &Self::bind(v, vars, e))?;
                    value = add(&value, &mul(&h.value, &span)?)?;
                    span = mul(&span, &add(&h.bound, &one)?)?;
                }
                HeightValue {
                    value,
                    bound: span - N::one(),
                }
            }
            RankingExpr::DomLin {
                order,
                guard,
                vars,
                inner,
            } => {
                let chain = self.chain(order, v)?;
                let mut witness = None;
                let mut h_max = N::zero();
                for (pos, e) in chain.iter().enumerate() {
                    let w = Self::bind(v, vars, e);
                    let h = self.height::<N>(inner, &w)?;
                    h_max = h_max.max(h.bound.clone());
                    if witness.is_none() && self.holds(guard, &w)? {
                        witness = Some((pos, h.value));
                    }
                }
                let step = add(&h_max, &one)?;
                let bound = mul(&num(chain.len())?, &step)?;
                let value = match witness {
                    Some((pos, f)) => add(&mul(&num(pos)?, &step)?, &f)?,
                    None => bound.clone(),
                };
                HeightValue { value, bound }
            }
        })
    }
}

/// Height of `node` at (s, v). `v` must assign the node's parameters.
pub fn height<N: HeightNum>(
    node: &RankingExpr,
    sig: &Signature,
    s: &FiniteStructure,
    v: &Assignment,
) -> Result<HeightValue<N>, OracleError> {
    for p in node.params() {
        if !v.contains_key(&p) {
            return Err(OracleError::MissingAssignment(p.to_string()));
        }
    }
    let ctx = Ctx {
        s,
        vocab: Vocab::new(sig, &s.sizes, &[Tag::Plain]),
    };
    ctx.height(node, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fol::Term;
    use crate::oracle::structure::Table;
    use crate::BigHeight;
    use std::collections::BTreeMap;

    fn one_sort(n: usize) -> BTreeMap<String, usize> {
        BTreeMap::from([("m".to_string(), n)])
    }

    #[test]
    fn bin_true_is_one() {
        let sig = Signature::new().sort("m", true);
        let s = FiniteStructure::new(one_sort(2));
        let e = RankingExpr::Bin {
            alpha: Formula::True,
            params: vec![],
        };
        let h: HeightValue<u64> = height(&e, &sig, &s, &Assignment::new()).unwrap();
        assert_eq!((h.value, h.bound), (1, 1));
        let h: BigHeight = height(&e, &sig, &s, &Assignment::new()).unwrap();
        assert_eq!(h.value, 1u32.into());
    }

    #[test]
    fn dom_lex_weights_smallest_first() {
        let sig = Signature::new()
            .sort("m", true)
            .relation("lt", &["m", "m"], false)
            .relation("a", &["m"], true);
        let i = Var::new("i", "m");
        let e = RankingExpr::DomLex {
            order: OrderFormula::from_relation("lt", "m"),
            vars: vec![i.clone()],
            inner: Box::new(RankingExpr::Bin {
                alpha: Formula::rel("a", vec![Term::var(&i)]),
                params: vec![i],
            }),
        };
        let lt = Table::relation(vec![3, 3], &[vec![0, 1], vec![0, 2], vec![1, 2]]);
        let s = FiniteStructure::new(one_sort(3))
            .with("lt", lt.clone())
            .with("a", Table::relation(vec![3], &[vec![0], vec![2]]));
        let h: HeightValue<u64> = height(&e, &sig, &s, &Assignment::new()).unwrap();
        assert_eq!((h.value, h.bound), (0b101, 7));

        let partial = Table::relation(vec![3, 3], &[vec![0, 1]]);
        let s = s.with("lt", partial);
        assert_eq!(
            height::<u64>(&e, &sig, &s, &Assignment::new()),
            Err(OracleError::NonTotalOrder)
        );
    }
}
