// SPDX-License-Identifier: Apache-2.0

//! Terms and formulas of many-sorted first-order logic with equality.
//!
//! Every symbol occurrence and every variable carries a [`Tag`] saying which
//! copy of the signature (or of the variable) it belongs to. Plain symbols
//! describe a single state; `Primed` symbols describe the post-state of a
//! transition; `Sub0`/`Sub1` are the lower- and higher-ranked copies used
//! inside implicit rankings. Immutable symbols are always `Plain`.

use std::fmt;

/// Which copy of the signature an occurrence belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tag {
    Plain,
    Primed,
    Sub0,
    Sub1,
}

impl Tag {
    pub const ALL: [Tag; 4] = [Tag::Plain, Tag::Primed, Tag::Sub0, Tag::Sub1];

    /// Marker appended by the pretty-printer.
    pub fn marker(self) -> &'static str {
        match self {
            Tag::Plain => "",
            Tag::Primed => "′",
            Tag::Sub0 => "₀",
            Tag::Sub1 => "₁",
        }
    }

    /// ASCII suffix used in solver scripts.
    pub fn ascii_suffix(self) -> &'static str {
        match self {
            Tag::Plain => "",
            Tag::Primed => "'",
            Tag::Sub0 => ".0",
            Tag::Sub1 => ".1",
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tag::Plain => "plain",
            Tag::Primed => "primed",
            Tag::Sub0 => "sub0",
            Tag::Sub1 => "sub1",
        };
        f.write_str(s)
    }
}

/// An occurrence of a constant, function or relation symbol.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sym {
    pub name: String,
    pub tag: Tag,
}

impl Sym {
    pub fn plain(name: &str) -> Self {
        Sym {
            name: name.to_string(),
            tag: Tag::Plain,
        }
    }

    pub fn tagged(name: &str, tag: Tag) -> Self {
        Sym {
            name: name.to_string(),
            tag,
        }
    }
}

/// A sorted variable. Two variables are the same iff name, sort and tag agree.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    pub name: String,
    pub sort: String,
    pub tag: Tag,
}

impl Var {
    pub fn new(name: &str, sort: &str) -> Self {
        Var {
            name: name.to_string(),
            sort: sort.to_string(),
            tag: Tag::Plain,
        }
    }

    pub fn with_tag(&self, tag: Tag) -> Self {
        Var {
            tag,
            ..self.clone()
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.name, self.tag.marker())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(Var),
    /// Constants are applications with no arguments.
    App(Sym, Vec<Term>),
    Ite(Box<Formula>, Box<Term>, Box<Term>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Eq(Term, Term),
    Rel(Sym, Vec<Term>),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Forall(Vec<Var>, Box<Formula>),
    Exists(Vec<Var>, Box<Formula>),
}

impl Term {
    pub fn var(v: &Var) -> Term {
        Term::Var(v.clone())
    }

    pub fn constant(name: &str) -> Term {
        Term::App(Sym::plain(name), vec![])
    }

    pub fn app(name: &str, args: Vec<Term>) -> Term {
        Term::App(Sym::plain(name), args)
    }

    pub fn ite(cond: Formula, then: Term, els: Term) -> Term {
        Term::Ite(Box::new(cond), Box::new(then), Box::new(els))
    }
}

impl From<Var> for Term {
    fn from(v: Var) -> Self {
        Term::Var(v)
    }
}

impl From<&Var> for Term {
    fn from(v: &Var) -> Self {
        Term::Var(v.clone())
    }
}

// Smart constructors. The only simplification performed is absorption of
// the literal `true`/`false`.
impl Formula {
    pub fn rel(name: &str, args: Vec<Term>) -> Formula {
        Formula::Rel(Sym::plain(name), args)
    }

    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::Eq(a, b)
    }

    pub fn neq(a: Term, b: Term) -> Formula {
        Formula::not(Formula::Eq(a, b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        match f {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            f => Formula::Not(Box::new(f)),
        }
    }

    pub fn and(fs: impl IntoIterator<Item = Formula>) -> Formula {
        let mut out = Vec::new();
        for f in fs {
            match f {
                Formula::True => {}
                Formula::False => return Formula::False,
                f => out.push(f),
            }
        }
        match out.len() {
            0 => Formula::True,
            1 => out.pop().unwrap(),
            _ => Formula::And(out),
        }
    }

    pub fn or(fs: impl IntoIterator<Item = Formula>) -> Formula {
        let mut out = Vec::new();
        for f in fs {
            match f {
                Formula::False => {}
                Formula::True => return Formula::True,
                f => out.push(f),
            }
        }
        match out.len() {
            0 => Formula::False,
            1 => out.pop().unwrap(),
            _ => Formula::Or(out),
        }
    }

    pub fn and2(a: Formula, b: Formula) -> Formula {
        Formula::and([a, b])
    }

    pub fn or2(a: Formula, b: Formula) -> Formula {
        Formula::or([a, b])
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        match (a, b) {
            (Formula::True, b) => b,
            (Formula::False, _) => Formula::True,
            (_, Formula::True) => Formula::True,
            (a, Formula::False) => Formula::not(a),
            (a, b) => Formula::Implies(Box::new(a), Box::new(b)),
        }
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        match (a, b) {
            (Formula::True, b) => b,
            (a, Formula::True) => a,
            (Formula::False, b) => Formula::not(b),
            (a, Formula::False) => Formula::not(a),
            (a, b) => Formula::Iff(Box::new(a), Box::new(b)),
        }
    }

    pub fn forall(vars: Vec<Var>, body: Formula) -> Formula {
        match body {
            Formula::True | Formula::False => body,
            body if vars.is_empty() => body,
            body => Formula::Forall(vars, Box::new(body)),
        }
    }

    pub fn exists(vars: Vec<Var>, body: Formula) -> Formula {
        match body {
            Formula::True | Formula::False => body,
            body if vars.is_empty() => body,
            body => Formula::Exists(vars, Box::new(body)),
        }
    }

    /// Element-wise equality of two equally long term tuples.
    pub fn tuple_eq(a: &[Term], b: &[Term]) -> Formula {
        debug_assert_eq!(a.len(), b.len());
        Formula::and(
            a.iter()
                .zip(b)
                .map(|(x, y)| Formula::Eq(x.clone(), y.clone())),
        )
    }

    pub fn tuple_neq(a: &[Term], b: &[Term]) -> Formula {
        Formula::not(Formula::tuple_eq(a, b))
    }

    pub fn is_true(&self) -> bool {
        matches!(self, Formula::True)
    }

    pub fn is_false(&self) -> bool {
        matches!(self, Formula::False)
    }

    /// Number of AST nodes, counting terms.
    pub fn size(&self) -> usize {
        fn term_size(t: &Term) -> usize {
            match t {
                Term::Var(_) => 1,
                Term::App(_, args) => 1 + args.iter().map(term_size).sum::<usize>(),
                Term::Ite(c, a, b) => 1 + c.size() + term_size(a) + term_size(b),
            }
        }
        match self {
            Formula::True | Formula::False => 1,
            Formula::Eq(a, b) => 1 + term_size(a) + term_size(b),
            Formula::Rel(_, args) => 1 + args.iter().map(term_size).sum::<usize>(),
            Formula::Not(f) => 1 + f.size(),
            Formula::And(fs) | Formula::Or(fs) => 1 + fs.iter().map(Formula::size).sum::<usize>(),
            Formula::Implies(a, b) | Formula::Iff(a, b) => 1 + a.size() + b.size(),
            Formula::Forall(_, b) | Formula::Exists(_, b) => 1 + b.size(),
        }
    }
}

/// Controls how tags are rendered by the s-expression printer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Markers {
    /// `′`, `₀`, `₁`.
    Unicode,
    /// Problem-file syntax: `'` for primed; subscripts are not expressible and
    /// render as `.0`/`.1`.
    Surface,
}

impl Markers {
    fn suffix(self, tag: Tag) -> &'static str {
        match self {
            Markers::Unicode => tag.marker(),
            Markers::Surface => tag.ascii_suffix(),
        }
    }
}

pub(crate) fn write_term(out: &mut String, t: &Term, m: Markers) {
    match t {
        Term::Var(v) => {
            out.push_str(&v.name);
            out.push_str(m.suffix(v.tag));
        }
        Term::App(s, args) if args.is_empty() => {
            out.push_str(&s.name);
            out.push_str(m.suffix(s.tag));
        }
        Term::App(s, args) => {
            out.push('(');
            out.push_str(&s.name);
            out.push_str(m.suffix(s.tag));
            for a in args {
                out.push(' ');
                write_term(out, a, m);
            }
            out.push(')');
        }
        Term::Ite(c, a, b) => {
            out.push_str("(ite ");
            write_formula(out, c, m);
            out.push(' ');
            write_term(out, a, m);
            out.push(' ');
            write_term(out, b, m);
            out.push(')');
        }
    }
}

pub(crate) fn write_binders(out: &mut String, vars: &[Var], m: Markers) {
    out.push('(');
    for (i, v) in vars.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push('(');
        out.push_str(&v.name);
        out.push_str(m.suffix(v.tag));
        out.push(' ');
        out.push_str(&v.sort);
        out.push(')');
    }
    out.push(')');
}

pub(crate) fn write_formula(out: &mut String, f: &Formula, m: Markers) {
    let nary = |out: &mut String, op: &str, fs: &[&Formula]| {
        out.push('(');
        out.push_str(op);
        for g in fs {
            out.push(' ');
            write_formula(out, g, m);
        }
        out.push(')');
    };
    match f {
        Formula::True => out.push_str("true"),
        Formula::False => out.push_str("false"),
        Formula::Eq(a, b) => {
            out.push_str("(= ");
            write_term(out, a, m);
            out.push(' ');
            write_term(out, b, m);
            out.push(')');
        }
        Formula::Rel(s, args) => write_term(out, &Term::App(s.clone(), args.clone()), m),
        Formula::Not(g) => nary(out, "not", &[g]),
        Formula::And(fs) => nary(out, "and", &fs.iter().collect::<Vec<_>>()),
        Formula::Or(fs) => nary(out, "or", &fs.iter().collect::<Vec<_>>()),
        Formula::Implies(a, b) => nary(out, "=>", &[a, b]),
        Formula::Iff(a, b) => nary(out, "iff", &[a, b]),
        Formula::Forall(vs, b) | Formula::Exists(vs, b) => {
            out.push_str(if matches!(f, Formula::Forall(..)) {
                "(forall "
            } else {
                "(exists "
            });
            write_binders(out, vs, m);
            out.push(' ');
            write_formula(out, b, m);
            out.push(')');
        }
    }
}

impl Formula {
    /// Problem-file rendering (`'` marks primed symbols).
    pub fn to_surface(&self) -> String {
        let mut s = String::new();
        write_formula(&mut s, self, Markers::Surface);
        s
    }
}

impl Term {
    pub fn to_surface(&self) -> String {
        let mut s = String::new();
        write_term(&mut s, self, Markers::Surface);
        s
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_term(&mut s, self, Markers::Unicode);
        f.write_str(&s)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_formula(&mut s, self, Markers::Unicode);
        f.write_str(&s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn absorption() {
        assert_eq!(
            Formula::implies(Formula::True, Formula::True),
            Formula::True
        );
        assert_eq!(Formula::not(Formula::True), Formula::False);
        assert_eq!(Formula::and([Formula::True, Formula::True]), Formula::True);
        assert_eq!(Formula::or(Vec::new()), Formula::False);
        let p = Formula::rel("p", vec![]);
        assert_eq!(Formula::and([Formula::True, p.clone()]), p);
        assert_eq!(Formula::implies(p.clone(), Formula::False), Formula::not(p));
    }

    #[test]
    fn display_markers() {
        let i = Var::new("i", "machine");
        let f = Formula::Implies(
            Box::new(Formula::Rel(
                Sym::tagged("priv", Tag::Sub0),
                vec![Term::var(&i.with_tag(Tag::Sub0))],
            )),
            Box::new(Formula::Rel(
                Sym::tagged("priv", Tag::Primed),
                vec![Term::var(&i)],
            )),
        );
        assert_eq!(f.to_string(), "(=> (priv₀ i₀) (priv′ i))");
        assert_eq!(f.to_surface(), "(=> (priv.0 i.0) (priv' i))");
    }
}
