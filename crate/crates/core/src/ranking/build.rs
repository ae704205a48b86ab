// SPDX-License-Identifier: Apache-2.0

//! The nine ranking constructors, hint instantiation and elaboration.

use std::collections::{BTreeMap, BTreeSet};

use super::expr::{Hint, HintBlock, OrderFormula, RankingDecl, RankingExpr};
use super::{show_vars, ImplicitRanking, RankingError};
use crate::fol::{
    check_formula, copy_term_to, copy_to, free_vars, map_syms, sort_of, substitute,
    substitute_term, term_free_vars, FolError, Formula, Signature, SortError, Subst, Sym, Tag,
    Term, Var,
};

type Result<T> = std::result::Result<T, RankingError>;

fn vars_to_terms(vs: &[Var]) -> Vec<Term> {
    vs.iter().map(Term::var).collect()
}

fn tags_of(vs: &[Var], tag: Tag) -> Vec<Var> {
    vs.iter().map(|v| v.with_tag(tag)).collect()
}

/// Builds implicit rankings over a fixed signature. Fresh bound variables
/// are numbered by a counter owned by the builder, so output is
/// deterministic for a fixed sequence of calls.
pub struct RankingBuilder<'a> {
    sig: &'a Signature,
    fresh: usize,
    hints: BTreeMap<(Vec<usize>, HintBlock), Vec<Vec<Term>>>,
    used: BTreeSet<(Vec<usize>, HintBlock)>,
    path: Vec<usize>,
}

impl<'a> RankingBuilder<'a> {
    pub fn new(sig: &'a Signature) -> Self {
        RankingBuilder {
            sig,
            fresh: 0,
            hints: BTreeMap::new(),
            used: BTreeSet::new(),
            path: Vec::new(),
        }
    }

    fn fresh_tuple(&mut self, proto: &[Var]) -> Vec<Var> {
        self.fresh += 1;
        proto
            .iter()
            .map(|v| Var::new(&format!("{}!{}", v.name, self.fresh), &v.sort))
            .collect()
    }

    fn check_fv(&self, constructor: &'static str, f: &Formula, allowed: &[Var]) -> Result<()> {
        match free_vars(f).into_iter().find(|v| !allowed.contains(v)) {
            Some(v) => Err(RankingError::FreeVarEscape {
                constructor,
                var: v.to_string(),
            }),
            None => Ok(()),
        }
    }

    fn check_sorted(&self, f: &Formula) -> Result<()> {
        check_formula(f, self.sig).map_err(|e| RankingError::Fol(e.into()))
    }

    fn check_order(&self, constructor: &'static str, l: &OrderFormula) -> Result<()> {
        if l.lower.len() != l.upper.len() {
            return Err(RankingError::ArityMismatch {
                constructor,
                expected: l.lower.len(),
                found: l.upper.len(),
            });
        }
        for (a, b) in l.lower.iter().zip(&l.upper) {
            if a.sort != b.sort {
                return Err(sort_mismatch(
                    format!("order slots of {constructor}"),
                    &a.sort,
                    &b.sort,
                ));
            }
        }
        let slots: Vec<Var> = l.lower.iter().chain(&l.upper).cloned().collect();
        self.check_fv(constructor, &l.body, &slots)?;
        self.check_sorted(&l.body)
    }

    fn check_order_matches(
        &self,
        constructor: &'static str,
        l: &OrderFormula,
        sorts: &[String],
    ) -> Result<()> {
        self.check_order(constructor, l)?;
        if l.arity() != sorts.len() {
            return Err(RankingError::ArityMismatch {
                constructor,
                expected: l.arity(),
                found: sorts.len(),
            });
        }
        for (v, s) in l.lower.iter().zip(sorts) {
            if &v.sort != s {
                return Err(sort_mismatch(format!("order of {constructor}"), &v.sort, s));
            }
        }
        Ok(())
    }

    /// ℓ_tag(a, b): the order body in signature copy `tag` with its slots
    /// filled by `a` and `b`.
    fn order_app(&self, l: &OrderFormula, tag: Tag, a: &[Term], b: &[Term]) -> Formula {
        let body = copy_to(&l.body, self.sig, tag, &[]);
        let map: Subst = l
            .lower
            .iter()
            .cloned()
            .zip(a.iter().cloned())
            .chain(l.upper.iter().cloned().zip(b.iter().cloned()))
            .collect();
        substitute(&body, &map)
    }

    /// order(ℓ): agreement of the two copies, asymmetry and transitivity.
    pub fn mk_immut_order(&mut self, l: &OrderFormula) -> Formula {
        let y1 = self.fresh_tuple(&l.lower);
        let y2 = self.fresh_tuple(&l.lower);
        let y3 = self.fresh_tuple(&l.lower);
        let (t1, t2, t3) = (vars_to_terms(&y1), vars_to_terms(&y2), vars_to_terms(&y3));
        let both: Vec<Var> = y1.iter().chain(&y2).cloned().collect();
        let all: Vec<Var> = both.iter().chain(&y3).cloned().collect();
        let agree = Formula::forall(
            both.clone(),
            Formula::iff(
                self.order_app(l, Tag::Sub0, &t1, &t2),
                self.order_app(l, Tag::Sub1, &t1, &t2),
            ),
        );
        let asym = Formula::forall(
            both,
            Formula::implies(
                self.order_app(l, Tag::Sub0, &t1, &t2),
                Formula::not(self.order_app(l, Tag::Sub0, &t2, &t1)),
            ),
        );
        let trans = Formula::forall(
            all,
            Formula::implies(
                Formula::and2(
                    self.order_app(l, Tag::Sub0, &t1, &t2),
                    self.order_app(l, Tag::Sub0, &t2, &t3),
                ),
                self.order_app(l, Tag::Sub0, &t1, &t3),
            ),
        );
        Formula::and([agree, asym, trans])
    }

    /// ∃ over `tuples` of `body`, or the disjunction over hint instantiations
    /// when the current node has hints for `block`.
    fn exists_block(&mut self, block: HintBlock, tuples: &[Vec<Var>], body: Formula) -> Formula {
        let key = (self.path.clone(), block);
        let Some(hs) = self.hints.get(&key) else {
            return Formula::exists(tuples.concat(), body);
        };
        self.used.insert(key);
        if hs.is_empty() {
            return Formula::False;
        }
        let mut disjuncts = Vec::new();
        let mut choice = vec![0usize; tuples.len()];
        loop {
            let mut map = Subst::new();
            for (slot, &h) in choice.iter().enumerate() {
                for (v, t) in tuples[slot].iter().zip(&hs[h]) {
                    map.insert(v.clone(), t.clone());
                }
            }
            disjuncts.push(substitute(&body, &map));
            // Odometer over hint choices, last slot fastest.
            let mut i = tuples.len();
            loop {
                if i == 0 {
                    return Formula::or(disjuncts);
                }
                i -= 1;
                choice[i] += 1;
                if choice[i] < hs.len() {
                    break;
                }
                choice[i] = 0;
            }
        }
    }

    fn finish(
        &self,
        constructor: &'static str,
        params: Vec<Var>,
        conserved: Formula,
        reduced: Formula,
        node: RankingExpr,
    ) -> Result<ImplicitRanking> {
        let allowed: Vec<Var> = tags_of(&params, Tag::Sub0)
            .into_iter()
            .chain(tags_of(&params, Tag::Sub1))
            .collect();
        self.check_fv(constructor, &conserved, &allowed)?;
        self.check_fv(constructor, &reduced, &allowed)?;
        Ok(ImplicitRanking {
            params,
            conserved,
            reduced,
            finite_domain: node.finite_domain(),
            node,
        })
    }

    pub fn bin(&mut self, alpha: Formula, params: Vec<Var>) -> Result<ImplicitRanking> {
        self.check_sorted(&alpha)?;
        self.check_fv("bin", &alpha, &params)?;
        let a0 = copy_to(&alpha, self.sig, Tag::Sub0, &params);
        let a1 = copy_to(&alpha, self.sig, Tag::Sub1, &params);
        let conserved = Formula::implies(a0.clone(), a1.clone());
        let reduced = Formula::and2(a1, Formula::not(a0));
        let node = RankingExpr::Bin { alpha, params };
        self.finish("bin", node.params(), conserved, reduced, node)
    }

    pub fn pos(
        &mut self,
        terms: Vec<Term>,
        order: OrderFormula,
        params: Vec<Var>,
    ) -> Result<ImplicitRanking> {
        let mut sorts = Vec::new();
        for t in &terms {
            sorts.push(sort_of(t, self.sig).map_err(FolError::from)?);
            if let Some(v) = term_free_vars(t).into_iter().find(|v| !params.contains(v)) {
                return Err(RankingError::FreeVarEscape {
                    constructor: "pos",
                    var: v.to_string(),
                });
            }
        }
        self.check_order_matches("pos", &order, &sorts)?;
        let t0: Vec<Term> = terms
            .iter()
            .map(|t| copy_term_to(t, self.sig, Tag::Sub0, &params))
            .collect();
        let t1: Vec<Term> = terms
            .iter()
            .map(|t| copy_term_to(t, self.sig, Tag::Sub1, &params))
            .collect();
        let ord = self.mk_immut_order(&order);
        let less = self.order_app(&order, Tag::Sub0, &t0, &t1);
        let conserved = Formula::and([
            ord.clone(),
            Formula::or2(less.clone(), Formula::tuple_eq(&t0, &t1)),
        ]);
        let reduced = Formula::and2(ord, less);
        let node = RankingExpr::Pos {
            terms,
            order,
            params,
        };
        self.finish("pos", node.params(), conserved, reduced, node)
    }

    fn shared_params(constructor: &'static str, rs: &[&ImplicitRanking]) -> Result<Vec<Var>> {
        let first = rs.first().ok_or(RankingError::EmptyList(constructor))?;
        for r in &rs[1..] {
            if r.params != first.params {
                return Err(RankingError::ParamMismatch {
                    constructor,
                    left: show_vars(&first.params),
                    right: show_vars(&r.params),
                });
            }
        }
        Ok(first.params.clone())
    }

    pub fn pw(&mut self, rs: Vec<ImplicitRanking>) -> Result<ImplicitRanking> {
        let params = Self::shared_params("pw", &rs.iter().collect::<Vec<_>>())?;
        let conserved = Formula::and(rs.iter().map(|r| r.conserved.clone()));
        let reduced = Formula::and2(
            conserved.clone(),
            Formula::or(rs.iter().map(|r| r.reduced.clone())),
        );
        let node = RankingExpr::Pw(rs.into_iter().map(|r| r.node).collect());
        self.finish("pw", params, conserved, reduced, node)
    }

    pub fn lex(&mut self, rs: Vec<ImplicitRanking>) -> Result<ImplicitRanking> {
        let params = Self::shared_params("lex", &rs.iter().collect::<Vec<_>>())?;
        let reduced = Formula::or((0..rs.len()).map(|i| {
            Formula::and(
                std::iter::once(rs[i].reduced.clone())
                    .chain(rs[..i].iter().map(|r| r.conserved.clone())),
            )
        }));
        let conserved = Formula::or2(
            reduced.clone(),
            Formula::and(rs.iter().map(|r| r.conserved.clone())),
        );
        let node = RankingExpr::Lex(rs.into_iter().map(|r| r.node).collect());
        self.finish("lex", params, conserved, reduced, node)
    }

    pub fn lin(&mut self, branches: Vec<(Formula, ImplicitRanking)>) -> Result<ImplicitRanking> {
        let params =
            Self::shared_params("lin", &branches.iter().map(|(_, r)| r).collect::<Vec<_>>())?;
        for (g, _) in &branches {
            self.check_sorted(g)?;
            self.check_fv("lin", g, &params)?;
        }
        let betas: Vec<Formula> = (0..branches.len())
            .map(|i| {
                Formula::and(
                    std::iter::once(branches[i].0.clone())
                        .chain(branches[..i].iter().map(|(g, _)| Formula::not(g.clone()))),
                )
            })
            .collect();
        let b0: Vec<Formula> = betas
            .iter()
            .map(|b| copy_to(b, self.sig, Tag::Sub0, &params))
            .collect();
        let b1: Vec<Formula> = betas
            .iter()
            .map(|b| copy_to(b, self.sig, Tag::Sub1, &params))
            .collect();
        let combine = |inner: &dyn Fn(&ImplicitRanking) -> Formula| {
            let mut ds = Vec::new();
            for (i, (_, r)) in branches.iter().enumerate() {
                ds.push(Formula::and([inner(r), b0[i].clone(), b1[i].clone()]));
            }
            for (i, lower) in b0.iter().enumerate() {
                for higher in &b1[i + 1..] {
                    ds.push(Formula::and2(lower.clone(), higher.clone()));
                }
            }
            Formula::or(ds)
        };
        let conserved = combine(&|r| r.conserved.clone());
        let reduced = combine(&|r| r.reduced.clone());
        let node = RankingExpr::Lin(branches.into_iter().map(|(g, r)| (g, r.node)).collect());
        self.finish("lin", params, conserved, reduced, node)
    }

    /// Remaining parameters z̄ after aggregating over `ys`.
    fn split(constructor: &'static str, r: &ImplicitRanking, ys: &[Var]) -> Result<Vec<Var>> {
        if let Some(y) = ys.iter().find(|y| !r.params.contains(y)) {
            return Err(RankingError::NotAParam {
                constructor,
                var: y.name.clone(),
            });
        }
        Ok(r.params
            .iter()
            .filter(|p| !ys.contains(p))
            .cloned()
            .collect())
    }

    /// φ°(ȳ:=lo ·z̄₀, ȳ:=hi ·z̄₁).
    fn inst(f: &Formula, ys: &[Var], lo: &[Term], hi: &[Term]) -> Formula {
        let map: Subst = ys
            .iter()
            .zip(lo)
            .map(|(y, t)| (y.with_tag(Tag::Sub0), t.clone()))
            .chain(
                ys.iter()
                    .zip(hi)
                    .map(|(y, t)| (y.with_tag(Tag::Sub1), t.clone())),
            )
            .collect();
        substitute(f, &map)
    }

    fn dom_pw_formulas(&mut self, r: &ImplicitRanking, ys: &[Var]) -> (Formula, Formula) {
        let yt = vars_to_terms(ys);
        let conserved = Formula::forall(ys.to_vec(), Self::inst(&r.conserved, ys, &yt, &yt));
        let witness = self.exists_block(
            HintBlock::Exists,
            &[ys.to_vec()],
            Self::inst(&r.reduced, ys, &yt, &yt),
        );
        let reduced = Formula::and2(conserved.clone(), witness);
        (conserved, reduced)
    }

    pub fn dom_pw(&mut self, r: ImplicitRanking, ys: Vec<Var>) -> Result<ImplicitRanking> {
        let params = Self::split("dom-pw", &r, &ys)?;
        let (conserved, reduced) = self.dom_pw_formulas(&r, &ys);
        let node = RankingExpr::DomPw {
            vars: ys,
            inner: Box::new(r.node),
        };
        self.finish("dom-pw", params, conserved, reduced, node)
    }

    pub fn dom_perm(
        &mut self,
        r: ImplicitRanking,
        ys: Vec<Var>,
        k: usize,
        strict: bool,
    ) -> Result<ImplicitRanking> {
        let params = Self::split("dom-perm", &r, &ys)?;
        let (conserved, reduced) = if k == 0 {
            self.dom_pw_formulas(&r, &ys)
        } else {
            self.dom_perm_formulas(&r, &ys, k, strict)
        };
        let node = RankingExpr::DomPerm {
            k,
            strict,
            vars: ys,
            inner: Box::new(r.node),
        };
        self.finish("dom-perm", params, conserved, reduced, node)
    }

    fn dom_perm_formulas(
        &mut self,
        r: &ImplicitRanking,
        ys: &[Var],
        k: usize,
        strict: bool,
    ) -> (Formula, Formula) {
        let mut fwd = Vec::new();
        let mut bwd = Vec::new();
        for _ in 0..k {
            fwd.push(self.fresh_tuple(ys));
            bwd.push(self.fresh_tuple(ys));
        }
        let (ft, bt): (Vec<Vec<Term>>, Vec<Vec<Term>>) = (
            fwd.iter().map(|t| vars_to_terms(t)).collect(),
            bwd.iter().map(|t| vars_to_terms(t)).collect(),
        );
        let mut distinct = Vec::new();
        for i in 0..k {
            for j in i + 1..k {
                distinct.push(Formula::tuple_neq(&ft[i], &ft[j]));
                distinct.push(Formula::tuple_neq(&bt[i], &bt[j]));
                distinct.push(Formula::tuple_neq(&ft[i], &bt[j]));
                if strict {
                    distinct.push(Formula::tuple_neq(&bt[i], &ft[j]));
                }
            }
        }
        let distinct = Formula::and(distinct);
        let yt = vars_to_terms(ys);
        let ysigma: Vec<Term> = (0..ys.len())
            .map(|c| {
                let mut acc = yt[c].clone();
                for i in (0..k).rev() {
                    acc = Term::ite(Formula::tuple_eq(&yt, &bt[i]), ft[i][c].clone(), acc);
                    acc = Term::ite(Formula::tuple_eq(&yt, &ft[i]), bt[i][c].clone(), acc);
                }
                acc
            })
            .collect();
        let sigma_vars: Vec<Vec<Var>> = fwd
            .iter()
            .zip(&bwd)
            .flat_map(|(f, b)| [f.clone(), b.clone()])
            .collect();
        let all_le = Formula::forall(ys.to_vec(), Self::inst(&r.conserved, ys, &yt, &ysigma));
        let conserved = self.exists_block(
            HintBlock::Sigma,
            &sigma_vars,
            Formula::and2(distinct.clone(), all_le.clone()),
        );
        let witness = self.exists_block(
            HintBlock::Exists,
            &[ys.to_vec()],
            Self::inst(&r.reduced, ys, &yt, &ysigma),
        );
        let reduced = self.exists_block(
            HintBlock::Sigma,
            &sigma_vars,
            Formula::and([distinct, all_le, witness]),
        );
        (conserved, reduced)
    }

    pub fn dom_lex(
        &mut self,
        r: ImplicitRanking,
        ys: Vec<Var>,
        order: OrderFormula,
    ) -> Result<ImplicitRanking> {
        let params = Self::split("dom-lex", &r, &ys)?;
        let sorts: Vec<String> = ys.iter().map(|y| y.sort.clone()).collect();
        self.check_order_matches("dom-lex", &order, &sorts)?;
        let ord = self.mk_immut_order(&order);
        let yt = vars_to_terms(&ys);
        let star = self.fresh_tuple(&ys);
        let st = vars_to_terms(&star);
        let star_body = Formula::and2(
            self.order_app(&order, Tag::Sub0, &st, &yt),
            Self::inst(&r.reduced, &ys, &st, &st),
        );
        let dominated = self.exists_block(HintBlock::Star, &[star], star_body);
        let conserved = Formula::and2(
            ord,
            Formula::forall(
                ys.clone(),
                Formula::or2(Self::inst(&r.conserved, &ys, &yt, &yt), dominated),
            ),
        );
        let witness = self.exists_block(
            HintBlock::Exists,
            std::slice::from_ref(&ys),
            Self::inst(&r.reduced, &ys, &yt, &yt),
        );
        let reduced = Formula::and2(conserved.clone(), witness);
        let node = RankingExpr::DomLex {
            order,
            vars: ys,
            inner: Box::new(r.node),
        };
        self.finish("dom-lex", params, conserved, reduced, node)
    }

    /// β_tag(ā·z̄): ā satisfies the guard and is ℓ-minimal among those that do.
    fn dom_lin_beta(
        &mut self,
        order: &OrderFormula,
        guard: &Formula,
        ys: &[Var],
        zs: &[Var],
        tag: Tag,
        a: &[Term],
    ) -> Formula {
        let g = copy_to(guard, self.sig, tag, zs);
        let at = |args: &[Term]| -> Formula {
            substitute(&g, &ys.iter().cloned().zip(args.iter().cloned()).collect())
        };
        let other = self.fresh_tuple(ys);
        let ot = vars_to_terms(&other);
        let minimal = Formula::forall(
            other,
            Formula::or([
                self.order_app(order, tag, a, &ot),
                Formula::tuple_eq(a, &ot),
                Formula::not(at(&ot)),
            ]),
        );
        Formula::and2(at(a), minimal)
    }

    pub fn dom_lin(
        &mut self,
        r: ImplicitRanking,
        ys: Vec<Var>,
        order: OrderFormula,
        guard: Formula,
    ) -> Result<ImplicitRanking> {
        let params = Self::split("dom-lin", &r, &ys)?;
        let sorts: Vec<String> = ys.iter().map(|y| y.sort.clone()).collect();
        self.check_order_matches("dom-lin", &order, &sorts)?;
        self.check_sorted(&guard)?;
        self.check_fv("dom-lin", &guard, &r.params)?;
        let ord = self.mk_immut_order(&order);
        let yt = vars_to_terms(&ys);
        let other = self.fresh_tuple(&ys);
        let ot = vars_to_terms(&other);
        let build = |this: &mut Self, inner: &Formula| -> Formula {
            let same = Formula::and([
                Self::inst(inner, &ys, &yt, &yt),
                this.dom_lin_beta(&order, &guard, &ys, &params, Tag::Sub0, &yt),
                this.dom_lin_beta(&order, &guard, &ys, &params, Tag::Sub1, &yt),
            ]);
            let same = this.exists_block(HintBlock::Exists, std::slice::from_ref(&ys), same);
            let cross = Formula::and([
                this.dom_lin_beta(&order, &guard, &ys, &params, Tag::Sub0, &yt),
                this.dom_lin_beta(&order, &guard, &ys, &params, Tag::Sub1, &ot),
                this.order_app(&order, Tag::Sub0, &yt, &ot),
            ]);
            let cross = this.exists_block(HintBlock::Cross, &[ys.clone(), other.clone()], cross);
            Formula::and2(ord.clone(), Formula::or2(same, cross))
        };
        let conserved = build(self, &r.conserved);
        let reduced = build(self, &r.reduced);
        let node = RankingExpr::DomLin {
            order,
            guard,
            vars: ys,
            inner: Box::new(r.node),
        };
        self.finish("dom-lin", params, conserved, reduced, node)
    }

    fn with_child<T>(&mut self, i: usize, f: impl FnOnce(&mut Self) -> T) -> T {
        self.path.push(i);
        let out = f(self);
        self.path.pop();
        out
    }

    /// Build the ranking denoted by `e`, instantiating registered hints.
    pub fn build(&mut self, e: &RankingExpr) -> Result<ImplicitRanking> {
        match e {
            RankingExpr::Bin { alpha, params } => self.bin(alpha.clone(), params.clone()),
            RankingExpr::Pos {
                terms,
                order,
                params,
            } => self.pos(terms.clone(), order.clone(), params.clone()),
            RankingExpr::Pw(rs) | RankingExpr::Lex(rs) => {
                let mut built = Vec::new();
                for (i, c) in rs.iter().enumerate() {
                    built.push(self.with_child(i, |b| b.build(c))?);
                }
                if matches!(e, RankingExpr::Pw(_)) {
                    self.pw(built)
                } else {
                    self.lex(built)
                }
            }
            RankingExpr::Lin(bs) => {
                let mut built = Vec::new();
                for (i, (g, c)) in bs.iter().enumerate() {
                    built.push((g.clone(), self.with_child(i, |b| b.build(c))?));
                }
                self.lin(built)
            }
            RankingExpr::DomPw { vars, inner } => {
                let r = self.with_child(0, |b| b.build(inner))?;
                self.dom_pw(r, vars.clone())
            }
            RankingExpr::DomPerm {
                k,
                strict,
                vars,
                inner,
            } => {
                let r = self.with_child(0, |b| b.build(inner))?;
                self.dom_perm(r, vars.clone(), *k, *strict)
            }
            RankingExpr::DomLex { order, vars, inner } => {
                let r = self.with_child(0, |b| b.build(inner))?;
                self.dom_lex(r, vars.clone(), order.clone())
            }
            RankingExpr::DomLin {
                order,
                guard,
                vars,
                inner,
            } => {
                let r = self.with_child(0, |b| b.build(inner))?;
                self.dom_lin(r, vars.clone(), order.clone(), guard.clone())
            }
        }
    }

    /// Validate and register hints against the tree `root`.
    pub fn register_hints(&mut self, root: &RankingExpr, hints: &[Hint]) -> Result<()> {
        for h in hints {
            let node = root.at_path(&h.path).ok_or_else(|| {
                RankingError::BadHintPath(format!("path {:?} addresses no node", h.path))
            })?;
            let available = node.hint_blocks();
            let blocks: Vec<HintBlock> = match h.block {
                Some(b) if available.contains(&b) => vec![b],
                Some(b) => {
                    return Err(RankingError::BadHintPath(format!(
                        "{} at {:?} has no `{}` block",
                        node.constructor_name(),
                        h.path,
                        b.name()
                    )))
                }
                None if available.is_empty() => {
                    return Err(RankingError::BadHintPath(format!(
                        "{} at {:?} introduces no existential quantifier",
                        node.constructor_name(),
                        h.path
                    )))
                }
                None => available.to_vec(),
            };
            let vars = match node {
                RankingExpr::DomPw { vars, .. }
                | RankingExpr::DomPerm { vars, .. }
                | RankingExpr::DomLex { vars, .. }
                | RankingExpr::DomLin { vars, .. } => vars,
                _ => unreachable!("only aggregation nodes have blocks"),
            };
            let scope = node.params();
            let mut tuples = Vec::new();
            for t in &h.tuples {
                if t.len() != vars.len() {
                    return Err(RankingError::BadHintPath(format!(
                        "hint tuple of length {} for {} aggregation variables at {:?}",
                        t.len(),
                        vars.len(),
                        h.path
                    )));
                }
                let mut converted = Vec::new();
                for (term, v) in t.iter().zip(vars) {
                    let s = sort_of(term, self.sig).map_err(FolError::from)?;
                    if s != v.sort {
                        return Err(sort_mismatch(format!("hint for `{}`", v.name), &v.sort, &s));
                    }
                    if let Some(x) = term_free_vars(term)
                        .into_iter()
                        .find(|x| !scope.contains(x))
                    {
                        return Err(RankingError::BadHintPath(format!(
                            "hint term mentions `{x}`, which is not a parameter at {:?}",
                            h.path
                        )));
                    }
                    converted.push(hint_term(term, self.sig));
                }
                tuples.push(converted);
            }
            for b in blocks {
                self.hints
                    .entry((h.path.clone(), b))
                    .or_default()
                    .extend(tuples.iter().cloned());
            }
        }
        Ok(())
    }
}

fn sort_mismatch(context: String, expected: &str, found: &str) -> RankingError {
    RankingError::Fol(FolError::Sort(SortError::Mismatch {
        context,
        expected: expected.to_string(),
        found: found.to_string(),
    }))
}

impl From<SortError> for RankingError {
    fn from(e: SortError) -> Self {
        RankingError::Fol(e.into())
    }
}

/// Hint terms are written over the transition signature: plain symbols
/// denote the pre-state (higher copy), primed ones the post-state (lower
/// copy). Variables refer to the higher copy of a parameter.
fn hint_term(t: &Term, sig: &Signature) -> Term {
    let retagged = match map_syms(&Formula::Eq(t.clone(), t.clone()), &|s: &Sym| {
        if !sig.is_mutable(&s.name) {
            s.clone()
        } else if s.tag == Tag::Primed {
            Sym::tagged(&s.name, Tag::Sub0)
        } else {
            Sym::tagged(&s.name, Tag::Sub1)
        }
    }) {
        Formula::Eq(a, _) => a,
        _ => unreachable!(),
    };
    let map: Subst = term_free_vars(&retagged)
        .into_iter()
        .map(|v| {
            let t = Term::var(&v.with_tag(Tag::Sub1));
            (v, t)
        })
        .collect();
    substitute_term(&retagged, &map)
}

/// Elaborate a declaration into a closed ranking with hints applied.
pub fn elaborate(decl: &RankingDecl, sig: &Signature) -> Result<ImplicitRanking> {
    let r = apply_hints(&decl.expr, &decl.hints, sig)?;
    if !r.is_closed() {
        return Err(RankingError::NotClosed(show_vars(&r.params)));
    }
    Ok(r)
}

/// Build `expr` with the given hints replacing the addressed existential
/// blocks by disjunctions over the hint tuples.
pub fn apply_hints(expr: &RankingExpr, hints: &[Hint], sig: &Signature) -> Result<ImplicitRanking> {
    let mut b = RankingBuilder::new(sig);
    b.register_hints(expr, hints)?;
    let r = b.build(expr)?;
    if let Some((path, block)) = b.hints.keys().find(|k| !b.used.contains(*k)) {
        return Err(RankingError::BadHintPath(format!(
            "hint for `{}` block at {:?} was never used",
            block.name(),
            path
        )));
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> Signature {
        Signature::new()
            .sort("machine", true)
            .constant("bot", "machine", false)
            .constant("skd", "machine", true)
            .function("next", &["machine"], "machine", false)
            .relation("priv", &["machine"], true)
            .relation("lt", &["machine", "machine"], false)
    }

    fn m(n: &str) -> Var {
        Var::new(n, "machine")
    }

    fn alpha() -> Formula {
        Formula::and2(
            Formula::rel("priv", vec![Term::var(&m("i"))]),
            Formula::rel("lt", vec![Term::var(&m("i")), Term::var(&m("j"))]),
        )
    }

    #[test]
    fn bin_shape() {
        let sig = toy();
        let mut b = RankingBuilder::new(&sig);
        let r = b.bin(alpha(), vec![m("i"), m("j")]).unwrap();
        assert_eq!(
            r.reduced.to_string(),
            "(and (and (priv₁ i₁) (lt i₁ j₁)) (not (and (priv₀ i₀) (lt i₀ j₀))))"
        );
        assert_eq!(
            r.conserved.to_string(),
            "(=> (and (priv₀ i₀) (lt i₀ j₀)) (and (priv₁ i₁) (lt i₁ j₁)))"
        );
        assert!(!r.finite_domain);
        let t = b.bin(Formula::True, vec![]).unwrap();
        assert!(t.reduced.is_false());
    }

    #[test]
    fn bin_rejects_escaping_variable() {
        let sig = toy();
        let err = RankingBuilder::new(&sig)
            .bin(alpha(), vec![m("i")])
            .unwrap_err();
        assert!(matches!(err, RankingError::FreeVarEscape { .. }));
    }

    #[test]
    fn pos_with_empty_order_never_reduces() {
        let sig = toy();
        let x = m("x");
        let l = OrderFormula::new(vec![m("a")], vec![m("b")], Formula::False);
        let r = RankingBuilder::new(&sig)
            .pos(vec![Term::var(&x)], l, vec![x.clone()])
            .unwrap();
        assert!(r.reduced.is_false());
        assert!(r.finite_domain);
        let l = OrderFormula::new(vec![m("a"), m("c")], vec![m("b"), m("d")], Formula::False);
        let err = RankingBuilder::new(&sig)
            .pos(vec![Term::var(&x)], l, vec![x])
            .unwrap_err();
        assert!(matches!(err, RankingError::ArityMismatch { .. }));
    }

    #[test]
    fn aggregation_bookkeeping() {
        let sig = toy();
        let mut b = RankingBuilder::new(&sig);
        let inner = b.bin(alpha(), vec![m("i"), m("j")]).unwrap();
        let pw = b.dom_pw(inner.clone(), vec![m("j")]).unwrap();
        assert_eq!(pw.params, vec![m("i")]);
        assert!(pw.finite_domain);
        let err = b.dom_pw(inner, vec![m("k")]).unwrap_err();
        assert!(matches!(err, RankingError::NotAParam { .. }));
        let single = b.pw(vec![pw.clone()]).unwrap();
        assert_eq!(single.conserved, pw.conserved);
        let other = b.bin(Formula::True, vec![]).unwrap();
        assert!(matches!(
            b.lex(vec![pw, other]),
            Err(RankingError::ParamMismatch { .. })
        ));
        assert!(matches!(b.pw(vec![]), Err(RankingError::EmptyList("pw"))));
    }

    fn toy_expr() -> RankingExpr {
        RankingExpr::DomPerm {
            k: 1,
            strict: false,
            vars: vec![m("i")],
            inner: Box::new(RankingExpr::DomPw {
                vars: vec![m("j")],
                inner: Box::new(RankingExpr::Bin {
                    alpha: alpha(),
                    params: vec![m("i"), m("j")],
                }),
            }),
        }
    }

    #[test]
    fn elaborate_toy_with_hints() {
        let sig = toy();
        let skd = Term::constant("skd");
        let hints = vec![Hint {
            path: vec![],
            block: Some(HintBlock::Sigma),
            tuples: vec![vec![skd.clone()], vec![Term::app("next", vec![skd])]],
        }];
        let decl = RankingDecl {
            expr: toy_expr(),
            hints,
        };
        let r = elaborate(&decl, &sig).unwrap();
        assert!(r.is_closed());
        let s = r.conserved.to_string();
        assert!(s.contains("skd₁") && s.contains("(next skd₁)"), "{s}");
        assert!(!s.starts_with("(exists"));
        let plain = elaborate(
            &RankingDecl {
                expr: toy_expr(),
                hints: vec![],
            },
            &sig,
        )
        .unwrap();
        assert!(plain.conserved.to_string().starts_with("(exists"));
    }

    #[test]
    fn bad_hints_and_open_rankings() {
        let sig = toy();
        let bad = |path: Vec<usize>, block| RankingDecl {
            expr: toy_expr(),
            hints: vec![Hint {
                path,
                block,
                tuples: vec![vec![Term::constant("skd")]],
            }],
        };
        for d in [
            bad(vec![0, 0], None),
            bad(vec![3], None),
            bad(vec![], Some(HintBlock::Star)),
        ] {
            assert!(
                matches!(elaborate(&d, &sig), Err(RankingError::BadHintPath(_))),
                "{d:?}"
            );
        }
        let open = RankingDecl {
            expr: RankingExpr::DomPw {
                vars: vec![m("j")],
                inner: Box::new(RankingExpr::Bin {
                    alpha: alpha(),
                    params: vec![m("i"), m("j")],
                }),
            },
            hints: vec![],
        };
        assert!(matches!(
            elaborate(&open, &sig),
            Err(RankingError::NotClosed(_))
        ));
    }

    #[test]
    fn dom_perm_zero_is_dom_pw() {
        let sig = toy();
        let mut b = RankingBuilder::new(&sig);
        let inner = b.bin(alpha(), vec![m("i"), m("j")]).unwrap();
        let pw = b.dom_pw(inner.clone(), vec![m("j")]).unwrap();
        let perm = b.dom_perm(inner, vec![m("j")], 0, false).unwrap();
        assert_eq!(pw.conserved, perm.conserved);
        assert_eq!(pw.reduced, perm.reduced);
    }
}
