// SPDX-License-Identifier: Apache-2.0

//! SMT-LIB rendering of terms and formulas.

use super::syntax::{Formula, Tag, Term, Var};

fn is_simple(name: &str) -> bool {
    const EXTRA: &str = "~!@$%^&*_-+=<>.?/";
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || EXTRA.contains(c) => {}
        _ => return false,
    }
    name.chars()
        .all(|c| c.is_ascii_alphanumeric() || EXTRA.contains(c))
}

/// Solver-level identifier for a tagged name. Tagged copies are always
/// quoted so they cannot collide with user identifiers.
pub fn smt_name(name: &str, tag: Tag) -> String {
    if tag == Tag::Plain && is_simple(name) {
        name.to_string()
    } else {
        format!("|{}{}|", name, tag.ascii_suffix())
    }
}

pub fn smt_var(v: &Var) -> String {
    smt_name(&v.name, v.tag)
}

pub fn write_term(out: &mut String, t: &Term) {
    match t {
        Term::Var(v) => out.push_str(&smt_var(v)),
        Term::App(s, args) if args.is_empty() => out.push_str(&smt_name(&s.name, s.tag)),
        Term::App(s, args) => {
            out.push('(');
            out.push_str(&smt_name(&s.name, s.tag));
            for a in args {
                out.push(' ');
                write_term(out, a);
            }
            out.push(')');
        }
        Term::Ite(c, a, b) => {
            out.push_str("(ite ");
            write_formula(out, c);
            out.push(' ');
            write_term(out, a);
            out.push(' ');
            write_term(out, b);
            out.push(')');
        }
    }
}

fn write_nary(out: &mut String, op: &str, unit: &str, fs: &[Formula]) {
    match fs {
        [] => out.push_str(unit),
        [g] => write_formula(out, g),
        _ => {
            out.push('(');
            out.push_str(op);
            for g in fs {
                out.push(' ');
                write_formula(out, g);
            }
            out.push(')');
        }
    }
}

pub fn write_formula(out: &mut String, f: &Formula) {
    match f {
        Formula::True => out.push_str("true"),
        Formula::False => out.push_str("false"),
        Formula::Eq(a, b) => {
            out.push_str("(= ");
            write_term(out, a);
            out.push(' ');
            write_term(out, b);
            out.push(')');
        }
        Formula::Rel(s, args) => write_term(out, &Term::App(s.clone(), args.clone())),
        Formula::Not(g) => {
            out.push_str("(not ");
            write_formula(out, g);
            out.push(')');
        }
        Formula::And(fs) => write_nary(out, "and", "true", fs),
        Formula::Or(fs) => write_nary(out, "or", "false", fs),
        Formula::Implies(a, b) | Formula::Iff(a, b) => {
            out.push_str(if matches!(f, Formula::Implies(..)) {
                "(=> "
            } else {
                "(= "
            });
            write_formula(out, a);
            out.push(' ');
            write_formula(out, b);
            out.push(')');
        }
        Formula::Forall(vs, b) | Formula::Exists(vs, b) => {
            if vs.is_empty() {
                return write_formula(out, b);
            }
            out.push_str(if matches!(f, Formula::Forall(..)) {
                "(forall ("
            } else {
                "(exists ("
            });
            for (i, v) in vs.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                out.push('(');
                out.push_str(&smt_var(v));
                out.push(' ');
                out.push_str(&smt_name(&v.sort, Tag::Plain));
                out.push(')');
            }
            out.push_str(") ");
            write_formula(out, b);
            out.push(')');
        }
    }
}

pub fn formula_to_smt(f: &Formula) -> String {
    let mut s = String::new();
    write_formula(&mut s, f);
    s
}
