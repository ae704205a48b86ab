// SPDX-License-Identifier: Apache-2.0

//! Problem-file reader.

use std::collections::BTreeSet;

use super::{
    Fairness, Helpful, LivenessProperty, Meta, Problem, ProblemError, ProofSkeleton,
    TransitionSystem, DEFAULT_FAIRNESS,
};
use crate::fol::{
    check_formula, sort_of, Formula, Signature, SignatureError, SortError, Sym, SymbolKind, Tag,
    Term, Var,
};
use crate::ranking::{
    Hint, HintBlock, OrderFormula, RankingBuilder, RankingDecl, RankingError, RankingExpr,
};
use crate::sexp::{read_all, Pos, Sexp};

type Result<T> = std::result::Result<T, ProblemError>;

fn perr<T>(pos: Pos, msg: impl Into<String>) -> Result<T> {
    Err(ProblemError::Parse {
        pos,
        msg: msg.into(),
    })
}

const KEYWORDS: &[&str] = &[
    "and", "or", "not", "=>", "iff", "=", "forall", "exists", "ite", "true", "false",
];

fn valid_ident(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && cs.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        && !KEYWORDS.contains(&s)
}

fn atom<'a>(x: &'a Sexp, what: &str) -> Result<&'a str> {
    x.atom().map_or_else(
        || perr(x.pos(), format!("expected {what}, found `{x}`")),
        Ok,
    )
}

fn list<'a>(x: &'a Sexp, what: &str) -> Result<&'a [Sexp]> {
    x.list().map_or_else(
        || perr(x.pos(), format!("expected {what}, found `{x}`")),
        Ok,
    )
}

fn arity(x: &Sexp, items: &[Sexp], n: usize) -> Result<()> {
    if items.len() != n {
        return perr(
            x.pos(),
            format!(
                "`{}` expects {} arguments, got {}",
                items[0],
                n - 1,
                items.len() - 1
            ),
        );
    }
    Ok(())
}

struct Parser {
    sig: Signature,
}

impl Parser {
    fn sort_err(&self, pos: Pos, e: SortError) -> ProblemError {
        ProblemError::Sort { pos, source: e }
    }

    fn binders(&self, x: &Sexp) -> Result<Vec<Var>> {
        let mut out: Vec<Var> = Vec::new();
        for b in list(x, "binder list")? {
            let items = list(b, "binder `(name sort)`")?;
            if items.len() != 2 {
                return perr(b.pos(), "binder must be `(name sort)`");
            }
            let name = atom(&items[0], "variable name")?;
            let sort = atom(&items[1], "sort name")?;
            if !valid_ident(name) {
                return perr(items[0].pos(), format!("invalid variable name `{name}`"));
            }
            if !self.sig.has_sort(sort) {
                return Err(self.sort_err(
                    items[1].pos(),
                    SortError::UndeclaredSort {
                        sort: sort.to_string(),
                        location: format!("binder of `{name}`"),
                    },
                ));
            }
            if out.iter().any(|v| v.name == name) {
                return perr(b.pos(), format!("variable `{name}` bound twice"));
            }
            out.push(Var::new(name, sort));
        }
        Ok(out)
    }

    fn symbol(&self, name: &str, pos: Pos, primed_ok: bool) -> Result<Sym> {
        let (base, tag) = match name.strip_suffix('\'') {
            Some(b) => (b, Tag::Primed),
            None => (name, Tag::Plain),
        };
        let Some(d) = self.sig.get_symbol(base) else {
            return Err(self.sort_err(
                pos,
                SortError::UnsortedSymbol {
                    name: base.to_string(),
                    location: format!("line {}", pos.line),
                },
            ));
        };
        if tag == Tag::Primed {
            if !primed_ok {
                return perr(pos, format!("primed symbol `{name}` not allowed here"));
            }
            if !d.mutable {
                return Err(self.sort_err(pos, SortError::TaggedImmutable(base.to_string())));
            }
        }
        Ok(Sym::tagged(base, tag))
    }

    fn term(&self, x: &Sexp, scope: &[Var], primed_ok: bool) -> Result<Term> {
        match x {
            Sexp::Atom(a, pos) => {
                if let Some(v) = scope.iter().rev().find(|v| &v.name == a) {
                    return Ok(Term::Var(v.clone()));
                }
                Ok(Term::App(self.symbol(a, *pos, primed_ok)?, vec![]))
            }
            Sexp::List(items, pos) => {
                let Some(head) = items.first() else {
                    return perr(*pos, "empty term");
                };
                let h = atom(head, "function symbol")?;
                if h == "ite" {
                    arity(x, items, 4)?;
                    return Ok(Term::Ite(
                        Box::new(self.formula(&items[1], scope, primed_ok)?),
                        Box::new(self.term(&items[2], scope, primed_ok)?),
                        Box::new(self.term(&items[3], scope, primed_ok)?),
                    ));
                }
                let sym = self.symbol(h, head.pos(), primed_ok)?;
                let args = items[1..]
                    .iter()
                    .map(|a| self.term(a, scope, primed_ok))
                    .collect::<Result<_>>()?;
                Ok(Term::App(sym, args))
            }
        }
    }

    fn formula(&self, x: &Sexp, scope: &[Var], primed_ok: bool) -> Result<Formula> {
        let items = match x {
            Sexp::Atom(a, pos) => {
                return match a.as_str() {
                    "true" => Ok(Formula::True),
                    "false" => Ok(Formula::False),
                    _ if scope.iter().any(|v| &v.name == a) => {
                        perr(*pos, format!("variable `{a}` used as a formula"))
                    }
                    _ => Ok(Formula::Rel(self.symbol(a, *pos, primed_ok)?, vec![])),
                }
            }
            Sexp::List(items, pos) if items.is_empty() => return perr(*pos, "empty formula"),
            Sexp::List(items, _) => items,
        };
        let sub = |y: &Sexp| self.formula(y, scope, primed_ok);
        let head = atom(&items[0], "connective or relation")?;
        Ok(match head {
            "and" | "or" => {
                let args = items[1..].iter().map(sub).collect::<Result<Vec<_>>>()?;
                if head == "and" {
                    Formula::And(args)
                } else {
                    Formula::Or(args)
                }
            }
            "not" => {
                arity(x, items, 2)?;
                Formula::Not(Box::new(sub(&items[1])?))
            }
            "=>" | "iff" => {
                arity(x, items, 3)?;
                let (a, b) = (Box::new(sub(&items[1])?), Box::new(sub(&items[2])?));
                if head == "=>" {
                    Formula::Implies(a, b)
                } else {
                    Formula::Iff(a, b)
                }
            }
            "=" => {
                arity(x, items, 3)?;
                Formula::Eq(
                    self.term(&items[1], scope, primed_ok)?,
                    self.term(&items[2], scope, primed_ok)?,
                )
            }
            "forall" | "exists" => {
                arity(x, items, 3)?;
                let vs = self.binders(&items[1])?;
                let inner: Vec<Var> = scope.iter().chain(&vs).cloned().collect();
                let body = Box::new(self.formula(&items[2], &inner, primed_ok)?);
                if head == "forall" {
                    Formula::Forall(vs, body)
                } else {
                    Formula::Exists(vs, body)
                }
            }
            "ite" => {
                arity(x, items, 4)?;
                let c = sub(&items[1])?;
                Formula::Or(vec![
                    Formula::And(vec![c.clone(), sub(&items[2])?]),
                    Formula::And(vec![Formula::Not(Box::new(c)), sub(&items[3])?]),
                ])
            }
            _ => {
                let sym = self.symbol(head, items[0].pos(), primed_ok)?;
                let args = items[1..]
                    .iter()
                    .map(|a| self.term(a, scope, primed_ok))
                    .collect::<Result<_>>()?;
                Formula::Rel(sym, args)
            }
        })
    }

    /// Parse and sort-check a formula.
    fn checked(&self, x: &Sexp, scope: &[Var], primed_ok: bool) -> Result<Formula> {
        let f = self.formula(x, scope, primed_ok)?;
        check_formula(&f, &self.sig).map_err(|e| self.sort_err(x.pos(), e))?;
        Ok(f)
    }

    fn order(&self, x: &Sexp) -> Result<OrderFormula> {
        if let Some(name) = x.atom() {
            let d = self.sig.get_symbol(name).ok_or_else(|| {
                self.sort_err(
                    x.pos(),
                    SortError::UnsortedSymbol {
                        name: name.to_string(),
                        location: "order".into(),
                    },
                )
            })?;
            return match &d.kind {
                SymbolKind::Relation { args } if args.len() == 2 && args[0] == args[1] => {
                    Ok(OrderFormula::from_relation(name, &args[0]))
                }
                _ => perr(
                    x.pos(),
                    format!("`{name}` is not a binary relation over a single sort"),
                ),
            };
        }
        let items = list(x, "order")?;
        if items.first().and_then(Sexp::atom) != Some("order") || items.len() != 4 {
            return perr(
                x.pos(),
                "expected a relation name or `(order (lo...) (hi...) F)`",
            );
        }
        let lower = self.binders(&items[1])?;
        let upper = self.binders(&items[2])?;
        let scope: Vec<Var> = lower.iter().chain(&upper).cloned().collect();
        let body = self.checked(&items[3], &scope, false)?;
        Ok(OrderFormula::new(lower, upper, body))
    }

    fn ranking(&self, x: &Sexp) -> Result<RankingExpr> {
        let items = list(x, "ranking expression")?;
        let Some(head) = items.first().and_then(Sexp::atom) else {
            return perr(x.pos(), "expected a ranking constructor");
        };
        let n = items.len();
        let need = |k: usize| arity(x, items, k);
        Ok(match head {
            "bin" => {
                need(3)?;
                let params = self.binders(&items[2])?;
                RankingExpr::Bin {
                    alpha: self.checked(&items[1], &params, false)?,
                    params,
                }
            }
            "pos" => {
                need(4)?;
                let params = self.binders(&items[3])?;
                let terms = list(&items[1], "term list")?
                    .iter()
                    .map(|t| {
                        let t2 = self.term(t, &params, false)?;
                        sort_of(&t2, &self.sig).map_err(|e| self.sort_err(t.pos(), e))?;
                        Ok(t2)
                    })
                    .collect::<Result<_>>()?;
                RankingExpr::Pos {
                    terms,
                    order: self.order(&items[2])?,
                    params,
                }
            }
            "pw" | "lex" => {
                let rs = items[1..]
                    .iter()
                    .map(|r| self.ranking(r))
                    .collect::<Result<Vec<_>>>()?;
                if head == "pw" {
                    RankingExpr::Pw(rs)
                } else {
                    RankingExpr::Lex(rs)
                }
            }
            "lin" => {
                let mut branches = Vec::new();
                for b in &items[1..] {
                    let bi = list(b, "`(branch F R)`")?;
                    if bi.len() != 3 || bi[0].atom() != Some("branch") {
                        return perr(b.pos(), "expected `(branch F R)`");
                    }
                    let r = self.ranking(&bi[2])?;
                    let g = self.checked(&bi[1], &r.params(), false)?;
                    branches.push((g, r));
                }
                RankingExpr::Lin(branches)
            }
            "dom-pw" => {
                need(3)?;
                RankingExpr::DomPw {
                    vars: self.binders(&items[1])?,
                    inner: Box::new(self.ranking(&items[2])?),
                }
            }
            "dom-perm" => {
                let strict = n == 5 && items[2].atom() == Some(":strict");
                need(if strict { 5 } else { 4 })?;
                let ktext = atom(&items[1], "permutation bound")?;
                let k = ktext.parse::<usize>().map_err(|_| ProblemError::Ranking {
                    pos: items[1].pos(),
                    source: RankingError::BadK(ktext.to_string()),
                })?;
                let off = usize::from(strict);
                RankingExpr::DomPerm {
                    k,
                    strict,
                    vars: self.binders(&items[2 + off])?,
                    inner: Box::new(self.ranking(&items[3 + off])?),
                }
            }
            "dom-lex" => {
                need(4)?;
                RankingExpr::DomLex {
                    order: self.order(&items[1])?,
                    vars: self.binders(&items[2])?,
                    inner: Box::new(self.ranking(&items[3])?),
                }
            }
            "dom-lin" => {
                need(5)?;
                let inner = self.ranking(&items[4])?;
                RankingExpr::DomLin {
                    order: self.order(&items[1])?,
                    guard: self.checked(&items[2], &inner.params(), false)?,
                    vars: self.binders(&items[3])?,
                    inner: Box::new(inner),
                }
            }
            other => {
                return Err(ProblemError::UnknownConstructor {
                    pos: items[0].pos(),
                    name: other.to_string(),
                })
            }
        })
    }

    fn hint(&self, x: &Sexp, root: &RankingExpr) -> Result<Hint> {
        let items = list(x, "hint")?;
        let bad = |msg: String| ProblemError::BadHintPath { pos: x.pos(), msg };
        let (block, rest) = match items.get(2).and_then(Sexp::atom) {
            Some(":block") => {
                let name = items
                    .get(3)
                    .and_then(Sexp::atom)
                    .ok_or_else(|| bad("`:block` needs a name".into()))?;
                let b = HintBlock::from_name(name)
                    .ok_or_else(|| bad(format!("unknown block `{name}`")))?;
                (Some(b), &items[4..])
            }
            _ => (None, items.get(2..).unwrap_or(&[])),
        };
        let path_items = items.get(1).and_then(Sexp::list).unwrap_or(&[]);
        if path_items.first().and_then(Sexp::atom) != Some("path") || rest.len() != 1 {
            return perr(
                x.pos(),
                "expected `(hint (path i...) [:block b] ((t...)...))`",
            );
        }
        let path = path_items[1..]
            .iter()
            .map(|p| {
                atom(p, "path index")?
                    .parse::<usize>()
                    .map_err(|_| bad(format!("bad path index `{p}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        let node = root
            .at_path(&path)
            .ok_or_else(|| bad(format!("path {path:?} addresses no node")))?;
        let scope = node.params();
        let tuples = list(&rest[0], "hint tuples")?
            .iter()
            .map(|t| {
                list(t, "hint tuple")?
                    .iter()
                    .map(|y| {
                        let term = self.term(y, &scope, true)?;
                        sort_of(&term, &self.sig).map_err(|e| self.sort_err(y.pos(), e))?;
                        Ok(term)
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let hint = Hint {
            path,
            block,
            tuples,
        };
        RankingBuilder::new(&self.sig)
            .register_hints(root, std::slice::from_ref(&hint))
            .map_err(|e| match e {
                RankingError::BadHintPath(msg) => bad(msg),
                source => ProblemError::Ranking {
                    pos: x.pos(),
                    source,
                },
            })?;
        Ok(hint)
    }

    fn declare(&mut self, x: &Sexp, items: &[Sexp]) -> Result<bool> {
        let head = items[0].atom().unwrap_or("");
        if !matches!(head, "sort" | "constant" | "function" | "relation") {
            return Ok(false);
        }
        let name = atom(
            items.get(1).ok_or_else(|| ProblemError::Parse {
                pos: x.pos(),
                msg: format!("`{head}` needs a name"),
            })?,
            "name",
        )?;
        if !valid_ident(name) {
            return perr(items[1].pos(), format!("invalid name `{name}`"));
        }
        let (flags, body): (Vec<&str>, Vec<&Sexp>) = {
            let mut flags = Vec::new();
            let mut body = Vec::new();
            for it in &items[2..] {
                match it.atom() {
                    Some(a) if a.starts_with(':') => flags.push(a),
                    _ => body.push(it),
                }
            }
            (flags, body)
        };
        let allowed: &[&str] = if head == "sort" {
            &[":finite"]
        } else {
            &[":mutable", ":immutable"]
        };
        if let Some(f) = flags.iter().find(|f| !allowed.contains(f)) {
            return perr(x.pos(), format!("unknown flag `{f}` for `{head}`"));
        }
        let mutable = flags.contains(&":mutable");
        let sorts = |x: &Sexp| -> Result<Vec<String>> {
            list(x, "argument sort list")?
                .iter()
                .map(|s| atom(s, "sort").map(str::to_string))
                .collect()
        };
        let res = match (head, body.as_slice()) {
            ("sort", []) => self.sig.add_sort(name, flags.contains(&":finite")),
            ("constant", [s]) => self.sig.add_symbol(
                name,
                SymbolKind::Constant {
                    sort: atom(s, "sort")?.to_string(),
                },
                mutable,
            ),
            ("function", [a, r]) => self.sig.add_symbol(
                name,
                SymbolKind::Function {
                    args: sorts(a)?,
                    result: atom(r, "sort")?.to_string(),
                },
                mutable,
            ),
            ("relation", [a]) => {
                self.sig
                    .add_symbol(name, SymbolKind::Relation { args: sorts(a)? }, mutable)
            }
            _ => return perr(x.pos(), format!("malformed `{head}` declaration")),
        };
        res.map_err(|e| match e {
            SignatureError::UnknownSort { symbol, sort } => ProblemError::Sort {
                pos: x.pos(),
                source: SortError::UndeclaredSort {
                    sort,
                    location: format!("declaration of `{symbol}`"),
                },
            },
            source => ProblemError::Signature {
                pos: x.pos(),
                source,
            },
        })?;
        Ok(true)
    }
}

fn once<'a>(slot: &mut Option<&'a Sexp>, x: &'a Sexp, what: &str) -> Result<()> {
    if slot.is_some() {
        return perr(x.pos(), format!("`{what}` given twice"));
    }
    *slot = Some(x);
    Ok(())
}

/// Parse, sort-check and normalize a problem file. Omitted parts take their
/// defaults: fairness □◇true, p = init, ρ = true, φ = ¬q, ψᵢ = true.
pub fn parse_problem(text: &str) -> Result<Problem> {
    let forms = read_all(text)?;
    let mut p = Parser {
        sig: Signature::new(),
    };
    let mut rest = Vec::new();
    for x in &forms {
        let items = list(x, "top-level form")?;
        if items.is_empty() || items[0].atom().is_none() {
            return perr(x.pos(), "expected `(keyword ...)`");
        }
        if !p.declare(x, items)? {
            rest.push(x);
        }
    }

    let (mut init, mut trans, mut property, mut rho, mut trigger, mut ranking) =
        (None, None, None, None, None, None);
    let mut axioms = Vec::new();
    let mut fairness: Vec<Fairness> = Vec::new();
    let mut helpful_raw: Vec<(Pos, Helpful)> = Vec::new();
    let mut hints = Vec::new();
    let mut meta = Meta::default();

    for x in rest {
        let items = x.list().expect("checked above");
        let head = items[0].atom().expect("checked above");
        match head {
            "init" => once(&mut init, x, head)?,
            "transition" => once(&mut trans, x, head)?,
            "property" => once(&mut property, x, head)?,
            "rho" => once(&mut rho, x, head)?,
            "trigger" => once(&mut trigger, x, head)?,
            "ranking" => once(&mut ranking, x, head)?,
            "hint" => hints.push(x),
            "axiom" => {
                arity(x, items, 2)?;
                axioms.push(p.checked(&items[1], &[], false)?);
            }
            "fairness" | "helpful" => {
                arity(x, items, 4)?;
                let name = atom(&items[1], "name")?.to_string();
                let params = p.binders(&items[2])?;
                let formula = p.checked(&items[3], &params, false)?;
                if head == "fairness" {
                    if fairness.iter().any(|f| f.name == name) {
                        return perr(x.pos(), format!("fairness `{name}` declared twice"));
                    }
                    fairness.push(Fairness {
                        name,
                        params,
                        formula,
                    });
                } else {
                    helpful_raw.push((
                        x.pos(),
                        Helpful {
                            name,
                            params,
                            formula,
                        },
                    ));
                }
            }
            "meta" => {
                for m in &items[1..] {
                    match m.atom() {
                        Some(":slow") => meta.slow = true,
                        _ => return perr(m.pos(), format!("unknown meta flag `{m}`")),
                    }
                }
            }
            other => return perr(items[0].pos(), format!("unknown form `{other}`")),
        }
    }

    let single = |slot: Option<&Sexp>, primed_ok: bool| -> Result<Option<Formula>> {
        match slot {
            None => Ok(None),
            Some(x) => {
                let items = x.list().expect("list");
                arity(x, items, 2)?;
                p.checked(&items[1], &[], primed_ok).map(Some)
            }
        }
    };
    let Some(init) = single(init, false)? else {
        return perr(Pos::default(), "missing `(init ...)`");
    };
    let Some(trans) = single(trans, true)? else {
        return perr(Pos::default(), "missing `(transition ...)`");
    };
    let rho = single(rho, false)?.unwrap_or(Formula::True);

    let Some(px) = property else {
        return perr(Pos::default(), "missing `(property ...)`");
    };
    let pitems = px.list().expect("list");
    let (mut pf, mut qf) = (None, None);
    let mut i = 1;
    while i < pitems.len() {
        let key = pitems[i].atom();
        let Some(val) = pitems.get(i + 1) else {
            return perr(pitems[i].pos(), "keyword without value");
        };
        let slot = match key {
            Some(":p") => &mut pf,
            Some(":q") => &mut qf,
            _ => return perr(pitems[i].pos(), "expected `:p` or `:q`"),
        };
        if slot.is_some() {
            return perr(pitems[i].pos(), "property keyword given twice");
        }
        *slot = Some(p.checked(val, &[], false)?);
        i += 2;
    }
    let Some(q) = qf else {
        return perr(px.pos(), "property needs `:q`");
    };
    let pform = pf.unwrap_or_else(|| init.clone());
    let trigger = single(trigger, false)?.unwrap_or_else(|| Formula::Not(Box::new(q.clone())));

    if fairness.is_empty() {
        fairness.push(Fairness {
            name: DEFAULT_FAIRNESS.to_string(),
            params: vec![],
            formula: Formula::True,
        });
    }
    let mut seen = BTreeSet::new();
    for (pos, h) in &helpful_raw {
        if !fairness.iter().any(|f| f.name == h.name) {
            return perr(
                *pos,
                format!("helpful formula for unknown fairness `{}`", h.name),
            );
        }
        if !seen.insert(h.name.clone()) {
            return perr(*pos, format!("helpful formula `{}` given twice", h.name));
        }
    }
    let helpful = fairness
        .iter()
        .map(|f| {
            helpful_raw
                .iter()
                .find(|(_, h)| h.name == f.name)
                .map(|(_, h)| h.clone())
                .unwrap_or_else(|| Helpful {
                    name: f.name.clone(),
                    params: f.params.clone(),
                    formula: Formula::True,
                })
        })
        .collect();

    let ranking = match ranking {
        None => {
            if let Some(h) = hints.first() {
                return Err(ProblemError::BadHintPath {
                    pos: h.pos(),
                    msg: "hint without a ranking".into(),
                });
            }
            None
        }
        Some(x) => {
            let items = x.list().expect("list");
            arity(x, items, 2)?;
            let expr = p.ranking(&items[1])?;
            let hints = hints
                .iter()
                .map(|h| p.hint(h, &expr))
                .collect::<Result<Vec<_>>>()?;
            Some(RankingDecl { expr, hints })
        }
    };

    Ok(Problem {
        system: TransitionSystem {
            sig: p.sig,
            init,
            trans,
            axioms,
        },
        property: LivenessProperty {
            fairness,
            p: pform,
            q,
        },
        skeleton: ProofSkeleton {
            rho,
            trigger,
            helpful,
            ranking,
        },
        meta,
    })
}
