// SPDX-License-Identifier: Apache-2.0

//! Free variables, capture-avoiding substitution and signature-copy retagging.

use std::collections::{BTreeMap, BTreeSet};

use super::signature::Signature;
use super::sorting::{sort_of, SortError};
use super::syntax::{Formula, Sym, Tag, Term, Var};
use super::FolError;

/// Simultaneous substitution of variables by terms.
pub type Subst = BTreeMap<Var, Term>;

pub fn term_free_vars(t: &Term) -> BTreeSet<Var> {
    let mut out = BTreeSet::new();
    collect_term_fv(t, &mut Vec::new(), &mut out);
    out
}

pub fn free_vars(f: &Formula) -> BTreeSet<Var> {
    let mut out = BTreeSet::new();
    collect_fv(f, &mut Vec::new(), &mut out);
    out
}

fn collect_term_fv(t: &Term, bound: &mut Vec<Var>, out: &mut BTreeSet<Var>) {
    match t {
        Term::Var(v) => {
            if !bound.contains(v) {
                out.insert(v.clone());
            }
        }
        Term::App(_, args) => args.iter().for_each(|a| collect_term_fv(a, bound, out)),
        Term::Ite(c, a, b) => {
            collect_fv(c, bound, out);
            collect_term_fv(a, bound, out);
            collect_term_fv(b, bound, out);
        }
    }
}

fn collect_fv(f: &Formula, bound: &mut Vec<Var>, out: &mut BTreeSet<Var>) {
    match f {
        Formula::True | Formula::False => {}
        Formula::Eq(a, b) => {
            collect_term_fv(a, bound, out);
            collect_term_fv(b, bound, out);
        }
        Formula::Rel(_, args) => args.iter().for_each(|a| collect_term_fv(a, bound, out)),
        Formula::Not(g) => collect_fv(g, bound, out),
        Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|g| collect_fv(g, bound, out)),
        Formula::Implies(a, b) | Formula::Iff(a, b) => {
            collect_fv(a, bound, out);
            collect_fv(b, bound, out);
        }
        Formula::Forall(vs, body) | Formula::Exists(vs, body) => {
            let n = bound.len();
            bound.extend(vs.iter().cloned());
            collect_fv(body, bound, out);
            bound.truncate(n);
        }
    }
}

/// Every variable name occurring anywhere (free or bound).
fn all_var_names(f: &Formula, out: &mut BTreeSet<String>) {
    fn term(t: &Term, out: &mut BTreeSet<String>) {
        match t {
            Term::Var(v) => {
                out.insert(v.name.clone());
            }
            Term::App(_, args) => args.iter().for_each(|a| term(a, out)),
            Term::Ite(c, a, b) => {
                all_var_names(c, out);
                term(a, out);
                term(b, out);
            }
        }
    }
    match f {
        Formula::True | Formula::False => {}
        Formula::Eq(a, b) => {
            term(a, out);
            term(b, out);
        }
        Formula::Rel(_, args) => args.iter().for_each(|a| term(a, out)),
        Formula::Not(g) => all_var_names(g, out),
        Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|g| all_var_names(g, out)),
        Formula::Implies(a, b) | Formula::Iff(a, b) => {
            all_var_names(a, out);
            all_var_names(b, out);
        }
        Formula::Forall(vs, body) | Formula::Exists(vs, body) => {
            out.extend(vs.iter().map(|v| v.name.clone()));
            all_var_names(body, out);
        }
    }
}

fn fresh_name(base: &str, avoid: &BTreeSet<String>) -> String {
    (1..)
        .map(|k| format!("{base}_{k}"))
        .find(|n| !avoid.contains(n))
        .expect("unbounded supply of names")
}

pub fn substitute_term(t: &Term, map: &Subst) -> Term {
    match t {
        Term::Var(v) => map.get(v).cloned().unwrap_or_else(|| t.clone()),
        Term::App(s, args) => Term::App(
            s.clone(),
            args.iter().map(|a| substitute_term(a, map)).collect(),
        ),
        Term::Ite(c, a, b) => Term::Ite(
            Box::new(substitute(c, map)),
            Box::new(substitute_term(a, map)),
            Box::new(substitute_term(b, map)),
        ),
    }
}

/// Capture-avoiding simultaneous substitution. Bound variables are renamed
/// when a replacement term would otherwise be captured. No sort checking is
/// performed; see [`substitute_checked`].
pub fn substitute(f: &Formula, map: &Subst) -> Formula {
    if map.is_empty() {
        return f.clone();
    }
    match f {
        Formula::True | Formula::False => f.clone(),
        Formula::Eq(a, b) => Formula::Eq(substitute_term(a, map), substitute_term(b, map)),
        Formula::Rel(s, args) => Formula::Rel(
            s.clone(),
            args.iter().map(|a| substitute_term(a, map)).collect(),
        ),
        Formula::Not(g) => Formula::Not(Box::new(substitute(g, map))),
        Formula::And(fs) => Formula::And(fs.iter().map(|g| substitute(g, map)).collect()),
        Formula::Or(fs) => Formula::Or(fs.iter().map(|g| substitute(g, map)).collect()),
        Formula::Implies(a, b) => {
            Formula::Implies(Box::new(substitute(a, map)), Box::new(substitute(b, map)))
        }
        Formula::Iff(a, b) => {
            Formula::Iff(Box::new(substitute(a, map)), Box::new(substitute(b, map)))
        }
        Formula::Forall(vs, body) | Formula::Exists(vs, body) => {
            let is_forall = matches!(f, Formula::Forall(..));
            let body_fv = free_vars(body);
            // Only entries that actually reach the body matter.
            let inner: Subst = map
                .iter()
                .filter(|(k, _)| !vs.contains(k) && body_fv.contains(*k))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect();
            if inner.is_empty() {
                return f.clone();
            }
            let incoming: BTreeSet<Var> = inner.values().flat_map(term_free_vars).collect();
            let mut avoid: BTreeSet<String> = BTreeSet::new();
            all_var_names(body, &mut avoid);
            avoid.extend(incoming.iter().map(|v| v.name.clone()));
            avoid.extend(inner.keys().map(|v| v.name.clone()));
            let mut renamed = inner;
            let mut new_vs = Vec::with_capacity(vs.len());
            for v in vs {
                if incoming.contains(v) {
                    let name = fresh_name(&v.name, &avoid);
                    avoid.insert(name.clone());
                    let nv = Var {
                        name,
                        sort: v.sort.clone(),
                        tag: v.tag,
                    };
                    renamed.insert(v.clone(), Term::Var(nv.clone()));
                    new_vs.push(nv);
                } else {
                    new_vs.push(v.clone());
                }
            }
            let body = substitute(body, &renamed);
            if is_forall {
                Formula::Forall(new_vs, Box::new(body))
            } else {
                Formula::Exists(new_vs, Box::new(body))
            }
        }
    }
}

/// [`substitute`] after checking that every replacement term has the sort of
/// the variable it replaces.
pub fn substitute_checked(f: &Formula, map: &Subst, sig: &Signature) -> Result<Formula, FolError> {
    for (v, t) in map {
        let s = sort_of(t, sig)?;
        if s != v.sort {
            return Err(SortError::Mismatch {
                context: format!("substitution for {v}"),
                expected: v.sort.clone(),
                found: s,
            }
            .into());
        }
    }
    Ok(substitute(f, map))
}

fn map_syms_term(t: &Term, g: &impl Fn(&Sym) -> Sym) -> Term {
    match t {
        Term::Var(_) => t.clone(),
        Term::App(s, args) => Term::App(g(s), args.iter().map(|a| map_syms_term(a, g)).collect()),
        Term::Ite(c, a, b) => Term::Ite(
            Box::new(map_syms(c, g)),
            Box::new(map_syms_term(a, g)),
            Box::new(map_syms_term(b, g)),
        ),
    }
}

/// Structural map over symbol occurrences.
pub fn map_syms(f: &Formula, g: &impl Fn(&Sym) -> Sym) -> Formula {
    match f {
        Formula::True | Formula::False => f.clone(),
        Formula::Eq(a, b) => Formula::Eq(map_syms_term(a, g), map_syms_term(b, g)),
        Formula::Rel(s, args) => {
            Formula::Rel(g(s), args.iter().map(|a| map_syms_term(a, g)).collect())
        }
        Formula::Not(h) => Formula::Not(Box::new(map_syms(h, g))),
        Formula::And(fs) => Formula::And(fs.iter().map(|h| map_syms(h, g)).collect()),
        Formula::Or(fs) => Formula::Or(fs.iter().map(|h| map_syms(h, g)).collect()),
        Formula::Implies(a, b) => {
            Formula::Implies(Box::new(map_syms(a, g)), Box::new(map_syms(b, g)))
        }
        Formula::Iff(a, b) => Formula::Iff(Box::new(map_syms(a, g)), Box::new(map_syms(b, g))),
        Formula::Forall(vs, b) => Formula::Forall(vs.clone(), Box::new(map_syms(b, g))),
        Formula::Exists(vs, b) => Formula::Exists(vs.clone(), Box::new(map_syms(b, g))),
    }
}

fn visit_syms_term(t: &Term, out: &mut BTreeSet<Sym>) {
    match t {
        Term::Var(_) => {}
        Term::App(s, args) => {
            out.insert(s.clone());
            args.iter().for_each(|a| visit_syms_term(a, out));
        }
        Term::Ite(c, a, b) => {
            visit_syms(c, out);
            visit_syms_term(a, out);
            visit_syms_term(b, out);
        }
    }
}

fn visit_syms(f: &Formula, out: &mut BTreeSet<Sym>) {
    match f {
        Formula::True | Formula::False => {}
        Formula::Eq(a, b) => {
            visit_syms_term(a, out);
            visit_syms_term(b, out);
        }
        Formula::Rel(s, args) => {
            out.insert(s.clone());
            args.iter().for_each(|a| visit_syms_term(a, out));
        }
        Formula::Not(g) => visit_syms(g, out),
        Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|g| visit_syms(g, out)),
        Formula::Implies(a, b) | Formula::Iff(a, b) => {
            visit_syms(a, out);
            visit_syms(b, out);
        }
        Formula::Forall(_, b) | Formula::Exists(_, b) => visit_syms(b, out),
    }
}

/// Every symbol occurrence (name + tag) in `f`.
pub fn symbols(f: &Formula) -> BTreeSet<Sym> {
    let mut out = BTreeSet::new();
    visit_syms(f, &mut out);
    out
}

pub fn term_symbols(t: &Term) -> BTreeSet<Sym> {
    let mut out = BTreeSet::new();
    visit_syms_term(t, &mut out);
    out
}

/// The set of tags carried by symbol occurrences of `f`.
pub fn tags(f: &Formula) -> BTreeSet<Tag> {
    symbols(f).into_iter().map(|s| s.tag).collect()
}

fn retag_filtered(
    f: &Formula,
    sig: &Signature,
    from: Tag,
    to: Tag,
    rename_var: impl Fn(&Var) -> bool,
) -> Result<Formula, FolError> {
    if from == to {
        return Ok(f.clone());
    }
    if let Some(s) = symbols(f)
        .into_iter()
        .find(|s| s.tag == to && sig.is_mutable(&s.name))
    {
        return Err(FolError::TagMismatch(format!(
            "symbol {}{} already carries tag {to}",
            s.name,
            to.marker()
        )));
    }
    let retagged = map_syms(f, &|s: &Sym| {
        if s.tag == from && sig.is_mutable(&s.name) {
            Sym::tagged(&s.name, to)
        } else {
            s.clone()
        }
    });
    let fv = free_vars(&retagged);
    let mut map = Subst::new();
    for v in fv.iter().filter(|v| v.tag == from && rename_var(v)) {
        let nv = v.with_tag(to);
        if fv.contains(&nv) {
            return Err(FolError::TagMismatch(format!(
                "variable {nv} already occurs free"
            )));
        }
        map.insert(v.clone(), Term::Var(nv));
    }
    Ok(substitute(&retagged, &map))
}

/// Move every mutable-symbol occurrence tagged `from` to `to`; with
/// `include_vars`, free variables tagged `from` move as well. Immutable
/// symbols are never tagged. Fails with `TagMismatch` if the target copy is
/// already present, since the two copies would be conflated.
pub fn retag(
    f: &Formula,
    sig: &Signature,
    from: Tag,
    to: Tag,
    include_vars: bool,
) -> Result<Formula, FolError> {
    retag_filtered(f, sig, from, to, |_| include_vars)
}

/// Copy a plain single-state formula into signature copy `tag`, moving the
/// listed free variables to their `tag` copies.
pub fn copy_to(f: &Formula, sig: &Signature, tag: Tag, vars: &[Var]) -> Formula {
    retag_filtered(f, sig, Tag::Plain, tag, |v| vars.contains(v))
        .expect("plain formulas carry no tagged symbols")
}

pub fn copy_term_to(t: &Term, sig: &Signature, tag: Tag, vars: &[Var]) -> Term {
    // Route through a dummy atom so terms share the formula machinery.
    match copy_to(&Formula::Eq(t.clone(), t.clone()), sig, tag, vars) {
        Formula::Eq(a, _) => a,
        _ => unreachable!(),
    }
}

/// Post-state copy of a single-state formula.
pub fn prime(f: &Formula, sig: &Signature) -> Formula {
    copy_to(f, sig, Tag::Primed, &[])
}
