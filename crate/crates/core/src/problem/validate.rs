// SPDX-License-Identifier: Apache-2.0

//! Structural checks that go beyond sort checking.

use std::fmt;

use super::Problem;
use crate::fol::{free_vars, tags, Formula, Signature, Tag};
use crate::ranking::{elaborate, RankingExpr};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{s}: {}", self.message)
    }
}

fn error(message: String) -> Diagnostic {
    Diagnostic {
        severity: Severity::Error,
        message,
    }
}

fn check_state_formula(out: &mut Vec<Diagnostic>, what: &str, f: &Formula, allow_primed: bool) {
    let fv = free_vars(f);
    if !fv.is_empty() {
        let names: Vec<String> = fv.iter().map(|v| v.to_string()).collect();
        out.push(error(format!(
            "{what} is not closed (free: {})",
            names.join(", ")
        )));
    }
    let bad: Vec<Tag> = tags(f)
        .into_iter()
        .filter(|t| !(*t == Tag::Plain || allow_primed && *t == Tag::Primed))
        .collect();
    if !bad.is_empty() {
        out.push(error(format!("{what} mentions post-state symbols")));
    }
}

/// Sorts aggregated over by finite-domain constructors in `e`.
fn finite_sorts(e: &RankingExpr, out: &mut Vec<(String, &'static str)>) {
    match e {
        RankingExpr::Pos { order, .. } => {
            out.extend(order.lower.iter().map(|v| (v.sort.clone(), "pos")))
        }
        RankingExpr::DomPw { vars, .. }
        | RankingExpr::DomPerm { vars, .. }
        | RankingExpr::DomLex { vars, .. }
        | RankingExpr::DomLin { vars, .. } => {
            out.extend(vars.iter().map(|v| (v.sort.clone(), e.constructor_name())))
        }
        _ => {}
    }
    for c in e.children() {
        finite_sorts(c, out);
    }
}

fn check_finite(out: &mut Vec<Diagnostic>, e: &RankingExpr, sig: &Signature, strict: bool) {
    let mut used = Vec::new();
    finite_sorts(e, &mut used);
    used.sort();
    used.dedup();
    for (sort, cons) in used {
        if sig.get_sort(&sort).is_some_and(|s| !s.finite) {
            out.push(Diagnostic {
                severity: if strict {
                    Severity::Error
                } else {
                    Severity::Warning
                },
                message: format!(
                    "finite-domain constructor over non-finite sort `{sort}` ({cons})"
                ),
            });
        }
    }
}

/// Diagnostics for a parsed problem. With `strict_finite`, aggregation over
/// sorts not declared `:finite` is an error rather than a warning.
pub fn validate_problem(p: &Problem, strict_finite: bool) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let sys = &p.system;
    check_state_formula(&mut out, "init", &sys.init, false);
    check_state_formula(&mut out, "transition", &sys.trans, true);
    for (i, a) in sys.axioms.iter().enumerate() {
        check_state_formula(&mut out, &format!("axiom {}", i + 1), a, false);
    }
    check_state_formula(&mut out, "p", &p.property.p, false);
    check_state_formula(&mut out, "q", &p.property.q, false);
    check_state_formula(&mut out, "rho", &p.skeleton.rho, false);
    check_state_formula(&mut out, "trigger", &p.skeleton.trigger, false);

    for (f, h) in p.property.fairness.iter().zip(&p.skeleton.helpful) {
        if let Some(v) = free_vars(&f.formula).iter().find(|v| !f.params.contains(v)) {
            out.push(error(format!(
                "fairness `{}` has free variable `{v}`",
                f.name
            )));
        }
        if h.params != f.params {
            out.push(error(format!(
                "helpful formula `{}` must have exactly the parameters of its fairness assumption",
                h.name
            )));
        }
        if let Some(v) = free_vars(&h.formula).iter().find(|v| !f.params.contains(v)) {
            out.push(error(format!(
                "helpful formula `{}` has free variable `{v}` beyond the fairness parameters",
                h.name
            )));
        }
    }

    match &p.skeleton.ranking {
        None => out.push(Diagnostic {
            severity: Severity::Warning,
            message: "no ranking declared".into(),
        }),
        Some(decl) => {
            check_finite(&mut out, &decl.expr, &sys.sig, strict_finite);
            if let Err(e) = elaborate(decl, &sys.sig) {
                out.push(error(format!("ranking: {e}")));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::parse_problem;

    const BASE: &str = r#"
        (sort machine :finite)
        (sort task)
        (constant skd machine :mutable)
        (relation priv (machine) :mutable)
        (relation busy (task) :mutable)
        (init (priv skd))
        (transition (priv skd'))
        (property :q (priv skd))
    "#;

    #[test]
    fn clean_and_dirty() {
        let ok = format!("{BASE}(ranking (dom-pw ((m machine)) (bin (priv m) ((m machine)))))");
        assert!(validate_problem(&parse_problem(&ok).unwrap(), true).is_empty());

        let infinite = format!("{BASE}(ranking (dom-pw ((t task)) (bin (busy t) ((t task)))))");
        let d = validate_problem(&parse_problem(&infinite).unwrap(), false);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].severity, Severity::Warning);
        assert!(d[0]
            .message
            .contains("finite-domain constructor over non-finite sort"));
        let d = validate_problem(&parse_problem(&infinite).unwrap(), true);
        assert_eq!(d[0].severity, Severity::Error);

        let extra = format!(
            "{BASE}(fairness f ((x machine)) (= skd x)) (helpful f ((x machine) (y machine)) (= x y)) (ranking (bin (priv skd) ()))"
        );
        let d = validate_problem(&parse_problem(&extra).unwrap(), false);
        assert!(
            d.iter().any(|d| d.message.contains("helpful formula `f`")),
            "{d:?}"
        );
    }
}
