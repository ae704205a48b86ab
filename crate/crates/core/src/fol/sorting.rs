// SPDX-License-Identifier: Apache-2.0

//! Well-sortedness. Variables carry their sort, so the variable context is
//! implicit in the term itself; binders and occurrences must agree on it.

use thiserror::Error;

use super::signature::{Signature, SymbolKind};
use super::syntax::{Formula, Sym, Tag, Term, Var};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum SortError {
    #[error("undeclared symbol `{name}` in {location}")]
    UnsortedSymbol { name: String, location: String },
    #[error("undeclared sort `{sort}` in {location}")]
    UndeclaredSort { sort: String, location: String },
    #[error("sort mismatch in {context}: expected `{expected}`, found `{found}`")]
    Mismatch {
        context: String,
        expected: String,
        found: String,
    },
    #[error("`{name}` expects {expected} arguments, got {found}")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("`{0}` is a relation and cannot be used as a term")]
    RelationAsTerm(String),
    #[error("`{0}` is not a relation")]
    NotARelation(String),
    #[error("immutable symbol `{0}` cannot carry a signature-copy tag")]
    TaggedImmutable(String),
}

fn decl<'a>(
    s: &Sym,
    sig: &'a Signature,
    location: &dyn Fn() -> String,
) -> Result<&'a SymbolKind, SortError> {
    let d = sig
        .get_symbol(&s.name)
        .ok_or_else(|| SortError::UnsortedSymbol {
            name: s.name.clone(),
            location: location(),
        })?;
    if !d.mutable && s.tag != Tag::Plain {
        return Err(SortError::TaggedImmutable(s.name.clone()));
    }
    Ok(&d.kind)
}

fn check_var(v: &Var, sig: &Signature) -> Result<(), SortError> {
    if sig.has_sort(&v.sort) {
        Ok(())
    } else {
        Err(SortError::UndeclaredSort {
            sort: v.sort.clone(),
            location: format!("binder of `{}`", v.name),
        })
    }
}

fn check_args(s: &Sym, formal: &[String], args: &[Term], sig: &Signature) -> Result<(), SortError> {
    if formal.len() != args.len() {
        return Err(SortError::Arity {
            name: s.name.clone(),
            expected: formal.len(),
            found: args.len(),
        });
    }
    for (i, (want, a)) in formal.iter().zip(args).enumerate() {
        let got = sort_of(a, sig)?;
        if &got != want {
            return Err(SortError::Mismatch {
                context: format!("argument {} of `{}`", i + 1, s.name),
                expected: want.clone(),
                found: got,
            });
        }
    }
    Ok(())
}

/// Sort of a well-sorted term.
pub fn sort_of(t: &Term, sig: &Signature) -> Result<String, SortError> {
    match t {
        Term::Var(v) => {
            check_var(v, sig)?;
            Ok(v.sort.clone())
        }
        Term::App(s, args) => {
            let kind = decl(s, sig, &|| t.to_surface())?;
            match kind {
                SymbolKind::Relation { .. } => Err(SortError::RelationAsTerm(s.name.clone())),
                SymbolKind::Constant { sort } => {
                    check_args(s, &[], args, sig)?;
                    Ok(sort.clone())
                }
                SymbolKind::Function {
                    args: formal,
                    result,
                } => {
                    check_args(s, formal, args, sig)?;
                    Ok(result.clone())
                }
            }
        }
        Term::Ite(c, a, b) => {
            check_formula(c, sig)?;
            let sa = sort_of(a, sig)?;
            let sb = sort_of(b, sig)?;
            if sa != sb {
                return Err(SortError::Mismatch {
                    context: format!("branches of {}", t.to_surface()),
                    expected: sa,
                    found: sb,
                });
            }
            Ok(sa)
        }
    }
}

/// Check that every atom of `f` is well-sorted under `sig`.
pub fn check_formula(f: &Formula, sig: &Signature) -> Result<(), SortError> {
    match f {
        Formula::True | Formula::False => Ok(()),
        Formula::Eq(a, b) => {
            let sa = sort_of(a, sig)?;
            let sb = sort_of(b, sig)?;
            if sa != sb {
                return Err(SortError::Mismatch {
                    context: f.to_surface(),
                    expected: sa,
                    found: sb,
                });
            }
            Ok(())
        }
        Formula::Rel(s, args) => match decl(s, sig, &|| f.to_surface())? {
            SymbolKind::Relation { args: formal } => check_args(s, formal, args, sig),
            _ => Err(SortError::NotARelation(s.name.clone())),
        },
        Formula::Not(g) => check_formula(g, sig),
        Formula::And(fs) | Formula::Or(fs) => fs.iter().try_for_each(|g| check_formula(g, sig)),
        Formula::Implies(a, b) | Formula::Iff(a, b) => {
            check_formula(a, sig)?;
            check_formula(b, sig)
        }
        Formula::Forall(vs, body) | Formula::Exists(vs, body) => {
            vs.iter().try_for_each(|v| check_var(v, sig))?;
            check_formula(body, sig)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> Signature {
        Signature::new()
            .sort("machine", true)
            .sort("index", true)
            .constant("bot", "machine", false)
            .constant("ptr", "index", true)
            .function("next", &["machine"], "machine", false)
            .relation("priv", &["machine"], true)
            .relation("lt", &["machine", "machine"], false)
    }

    #[test]
    fn examples() {
        let sig = toy();
        let t = Term::app("next", vec![Term::constant("bot")]);
        assert_eq!(sort_of(&t, &sig).unwrap(), "machine");

        let m = Var::new("m", "machine");
        let f = Formula::and2(
            Formula::rel("priv", vec![Term::constant("bot")]),
            Formula::forall(vec![m.clone()], Formula::rel("priv", vec![Term::var(&m)])),
        );
        assert!(check_formula(&f, &sig).is_ok());

        let bad = Formula::rel("lt", vec![Term::constant("ptr"), Term::constant("bot")]);
        assert!(matches!(
            check_formula(&bad, &sig),
            Err(SortError::Mismatch { .. })
        ));
    }

    #[test]
    fn errors() {
        let sig = toy();
        let f = Formula::rel("held", vec![]);
        assert!(matches!(
            check_formula(&f, &sig),
            Err(SortError::UnsortedSymbol { .. })
        ));
        let f = Formula::Rel(
            Sym::tagged("lt", Tag::Primed),
            vec![Term::constant("bot"), Term::constant("bot")],
        );
        assert_eq!(
            check_formula(&f, &sig),
            Err(SortError::TaggedImmutable("lt".into()))
        );
        let f = Formula::rel("priv", vec![]);
        assert!(matches!(
            check_formula(&f, &sig),
            Err(SortError::Arity { .. })
        ));
    }
}
