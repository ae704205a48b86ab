// SPDX-License-Identifier: Apache-2.0

//! SMT-LIB script generation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use super::SolverConfig;
use crate::fol::smtlib::{formula_to_smt, smt_name};
use crate::fol::{tags, Formula, Signature, SymbolKind, Tag};
use crate::vcgen::{premise_negation, ProofObligation};

/// Script checking satisfiability of `assertion`. Plain and primed copies of
/// the signature are always declared; the ranking copies only when used.
pub fn emit_formula_query(
    title: &str,
    assertion: &Formula,
    sig: &Signature,
    cfg: &SolverConfig,
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "; {title}");
    let _ = writeln!(out, "(set-option :produce-models true)");
    for (k, v) in &cfg.options {
        let _ = writeln!(out, "(set-option :{k} {v})");
    }
    let _ = writeln!(out, "(set-logic {})", cfg.logic);
    for s in sig.sorts() {
        let _ = writeln!(out, "(declare-sort {} 0)", smt_name(&s.name, Tag::Plain));
    }
    let used = tags(assertion);
    let copies: Vec<Tag> = Tag::ALL
        .into_iter()
        .filter(|t| matches!(t, Tag::Plain | Tag::Primed) || used.contains(t))
        .collect();
    for tag in copies {
        for d in sig.symbols() {
            if tag != Tag::Plain && !d.mutable {
                continue;
            }
            let args: Vec<String> = d
                .kind
                .arg_sorts()
                .iter()
                .map(|s| smt_name(s, Tag::Plain))
                .collect();
            let result = match &d.kind {
                SymbolKind::Relation { .. } => "Bool".to_string(),
                k => smt_name(k.result_sort().expect("has result"), Tag::Plain),
            };
            let _ = writeln!(
                out,
                "(declare-fun {} ({}) {result})",
                smt_name(&d.name, tag),
                args.join(" ")
            );
        }
    }
    let _ = writeln!(out, "(assert {})", formula_to_smt(assertion));
    let _ = writeln!(out, "(check-sat)");
    let _ = writeln!(out, "(get-model)");
    out
}

/// Script whose unsatisfiability establishes the obligation.
pub fn emit_query(ob: &ProofObligation, sig: &Signature, cfg: &SolverConfig) -> String {
    emit_formula_query(
        &format!("obligation {}", ob.name()),
        &premise_negation(ob),
        sig,
        cfg,
    )
}

/// A function symbol on a cycle of the sort graph (argument sort → result
/// sort), if any.
pub fn function_cycle(sig: &Signature) -> Option<String> {
    let mut edges: BTreeMap<&str, Vec<(&str, &str)>> = BTreeMap::new();
    for d in sig.symbols() {
        if let SymbolKind::Function { args, result } = &d.kind {
            for a in args {
                edges.entry(a).or_default().push((result, &d.name));
            }
        }
    }
    // A sort reaches itself iff some edge out of it leads back.
    for start in edges.keys() {
        let mut stack: Vec<&str> = vec![start];
        let mut seen = BTreeSet::new();
        while let Some(s) = stack.pop() {
            for &(next, f) in edges.get(s).into_iter().flatten() {
                if next == *start {
                    return Some(f.to_string());
                }
                if seen.insert(next) {
                    stack.push(next);
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycles() {
        let sig =
            Signature::new()
                .sort("a", true)
                .sort("b", true)
                .function("f", &["a"], "b", false);
        assert_eq!(function_cycle(&sig), None);
        let sig = sig.function("g", &["b"], "a", false);
        assert!(function_cycle(&sig).is_some());
        let sig = Signature::new()
            .sort("m", true)
            .function("next", &["m"], "m", false);
        assert_eq!(function_cycle(&sig), Some("next".into()));
    }

    #[test]
    fn declares_copies() {
        let sig = Signature::new()
            .sort("m", true)
            .constant("bot", "m", false)
            .relation("priv", &["m"], true);
        let s = emit_formula_query("t", &Formula::True, &sig, &SolverConfig::default());
        assert!(s.contains("(declare-fun bot () m)"));
        assert!(s.contains("(declare-fun priv (m) Bool)"));
        assert!(s.contains("(declare-fun |priv'| (m) Bool)"));
        assert!(!s.contains("|bot'|"));
        assert!(!s.contains("priv.0"));
    }
}
