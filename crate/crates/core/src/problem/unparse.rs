// SPDX-License-Identifier: Apache-2.0

//! Problem-file writer. Every defaulted part is written out explicitly, so
//! parsing the output yields the same problem.

use std::fmt::Write;

use super::Problem;
use crate::fol::{SymbolKind, Var};

fn binders(vs: &[Var]) -> String {
    let items: Vec<String> = vs
        .iter()
        .map(|v| format!("({} {})", v.name, v.sort))
        .collect();
    format!("({})", items.join(" "))
}

pub fn unparse_problem(p: &Problem) -> String {
    let mut out = String::new();
    let sig = p.sig();
    for s in sig.sorts() {
        let fin = if s.finite { " :finite" } else { "" };
        let _ = writeln!(out, "(sort {}{fin})", s.name);
    }
    for d in sig.symbols() {
        let m = if d.mutable { ":mutable" } else { ":immutable" };
        let _ = match &d.kind {
            SymbolKind::Constant { sort } => writeln!(out, "(constant {} {sort} {m})", d.name),
            SymbolKind::Function { args, result } => {
                writeln!(
                    out,
                    "(function {} ({}) {result} {m})",
                    d.name,
                    args.join(" ")
                )
            }
            SymbolKind::Relation { args } => {
                writeln!(out, "(relation {} ({}) {m})", d.name, args.join(" "))
            }
        };
    }
    let sys = &p.system;
    let _ = writeln!(out, "(init {})", sys.init.to_surface());
    let _ = writeln!(out, "(transition {})", sys.trans.to_surface());
    for a in &sys.axioms {
        let _ = writeln!(out, "(axiom {})", a.to_surface());
    }
    for f in &p.property.fairness {
        let _ = writeln!(
            out,
            "(fairness {} {} {})",
            f.name,
            binders(&f.params),
            f.formula.to_surface()
        );
    }
    let _ = writeln!(
        out,
        "(property :p {} :q {})",
        p.property.p.to_surface(),
        p.property.q.to_surface()
    );
    let sk = &p.skeleton;
    let _ = writeln!(out, "(rho {})", sk.rho.to_surface());
    let _ = writeln!(out, "(trigger {})", sk.trigger.to_surface());
    for h in &sk.helpful {
        let _ = writeln!(
            out,
            "(helpful {} {} {})",
            h.name,
            binders(&h.params),
            h.formula.to_surface()
        );
    }
    if let Some(r) = &sk.ranking {
        let _ = writeln!(out, "(ranking {})", r.expr.to_surface());
        for h in &r.hints {
            let _ = writeln!(out, "{}", h.to_surface());
        }
    }
    if p.meta.slow {
        let _ = writeln!(out, "(meta :slow)");
    }
    out
}
