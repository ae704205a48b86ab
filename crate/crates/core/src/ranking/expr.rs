// SPDX-License-Identifier: Apache-2.0

//! Ranking declarations: the constructor tree as written in a problem file.

use std::fmt;

use crate::fol::{Formula, Term, Var};

/// A strict-order formula ℓ(ȳ_lo, ȳ_hi) over the plain signature. `lower`
/// and `upper` are the two variable-tuple slots.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderFormula {
    pub lower: Vec<Var>,
    pub upper: Vec<Var>,
    pub body: Formula,
}

impl OrderFormula {
    pub fn new(lower: Vec<Var>, upper: Vec<Var>, body: Formula) -> Self {
        OrderFormula { lower, upper, body }
    }

    /// `rel` viewed as an order on single elements of `sort`.
    pub fn from_relation(rel: &str, sort: &str) -> Self {
        let lo = Var::new("lo", sort);
        let hi = Var::new("hi", sort);
        let body = Formula::rel(rel, vec![Term::var(&lo), Term::var(&hi)]);
        OrderFormula::new(vec![lo], vec![hi], body)
    }

    pub fn arity(&self) -> usize {
        self.lower.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RankingExpr {
    Bin {
        alpha: Formula,
        params: Vec<Var>,
    },
    Pos {
        terms: Vec<Term>,
        order: OrderFormula,
        params: Vec<Var>,
    },
    Pw(Vec<RankingExpr>),
    Lex(Vec<RankingExpr>),
    Lin(Vec<(Formula, RankingExpr)>),
    DomPw {
        vars: Vec<Var>,
        inner: Box<RankingExpr>,
    },
    DomPerm {
        k: usize,
        /// Adds the fourth transposition-distinctness inequality.
        strict: bool,
        vars: Vec<Var>,
        inner: Box<RankingExpr>,
    },
    DomLex {
        order: OrderFormula,
        vars: Vec<Var>,
        inner: Box<RankingExpr>,
    },
    DomLin {
        order: OrderFormula,
        guard: Formula,
        vars: Vec<Var>,
        inner: Box<RankingExpr>,
    },
}

impl RankingExpr {
    /// Parameters of the ranking this expression denotes. Composite nodes
    /// take the parameters of their first child.
    pub fn params(&self) -> Vec<Var> {
        match self {
            RankingExpr::Bin { params, .. } | RankingExpr::Pos { params, .. } => params.clone(),
            RankingExpr::Pw(rs) | RankingExpr::Lex(rs) => {
                rs.first().map(RankingExpr::params).unwrap_or_default()
            }
            RankingExpr::Lin(bs) => bs.first().map(|(_, r)| r.params()).unwrap_or_default(),
            RankingExpr::DomPw { vars, inner }
            | RankingExpr::DomPerm { vars, inner, .. }
            | RankingExpr::DomLex { vars, inner, .. }
            | RankingExpr::DomLin { vars, inner, .. } => inner
                .params()
                .into_iter()
                .filter(|p| !vars.contains(p))
                .collect(),
        }
    }

    /// True iff the tree contains a finite-domain constructor.
    pub fn finite_domain(&self) -> bool {
        match self {
            RankingExpr::Bin { .. } => false,
            RankingExpr::Pos { .. } => true,
            RankingExpr::Pw(rs) | RankingExpr::Lex(rs) => rs.iter().any(RankingExpr::finite_domain),
            RankingExpr::Lin(bs) => bs.iter().any(|(_, r)| r.finite_domain()),
            _ => true,
        }
    }

    pub fn children(&self) -> Vec<&RankingExpr> {
        match self {
            RankingExpr::Bin { .. } | RankingExpr::Pos { .. } => vec![],
            RankingExpr::Pw(rs) | RankingExpr::Lex(rs) => rs.iter().collect(),
            RankingExpr::Lin(bs) => bs.iter().map(|(_, r)| r).collect(),
            RankingExpr::DomPw { inner, .. }
            | RankingExpr::DomPerm { inner, .. }
            | RankingExpr::DomLex { inner, .. }
            | RankingExpr::DomLin { inner, .. } => vec![inner],
        }
    }

    pub fn at_path(&self, path: &[usize]) -> Option<&RankingExpr> {
        match path.split_first() {
            None => Some(self),
            Some((&i, rest)) => self.children().get(i)?.at_path(rest),
        }
    }

    pub fn constructor_name(&self) -> &'static str {
        match self {
            RankingExpr::Bin { .. } => "bin",
            RankingExpr::Pos { .. } => "pos",
            RankingExpr::Pw(_) => "pw",
            RankingExpr::Lex(_) => "lex",
            RankingExpr::Lin(_) => "lin",
            RankingExpr::DomPw { .. } => "dom-pw",
            RankingExpr::DomPerm { .. } => "dom-perm",
            RankingExpr::DomLex { .. } => "dom-lex",
            RankingExpr::DomLin { .. } => "dom-lin",
        }
    }

    /// Existential blocks a node introduces, in the order they are built.
    pub fn hint_blocks(&self) -> &'static [HintBlock] {
        match self {
            RankingExpr::DomPw { .. } => &[HintBlock::Exists],
            RankingExpr::DomPerm { k: 0, .. } => &[HintBlock::Exists],
            RankingExpr::DomPerm { .. } => &[HintBlock::Sigma, HintBlock::Exists],
            RankingExpr::DomLex { .. } => &[HintBlock::Star, HintBlock::Exists],
            RankingExpr::DomLin { .. } => &[HintBlock::Exists, HintBlock::Cross],
            _ => &[],
        }
    }

    /// Number of constructor nodes.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }
}

/// Which existential block of a node a hint instantiates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum HintBlock {
    /// ∃ȳ in the reduced formula (DomPW, DomPerm, DomLex) or the same-part
    /// witness of DomLin.
    Exists,
    /// The transposition block ∃̃σ of DomPerm.
    Sigma,
    /// ∃ȳ* of DomLex.
    Star,
    /// The cross-part witnesses ∃ȳ,ȳ′ of DomLin.
    Cross,
}

impl HintBlock {
    pub fn name(self) -> &'static str {
        match self {
            HintBlock::Exists => "exists",
            HintBlock::Sigma => "sigma",
            HintBlock::Star => "star",
            HintBlock::Cross => "cross",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [
            HintBlock::Exists,
            HintBlock::Sigma,
            HintBlock::Star,
            HintBlock::Cross,
        ]
        .into_iter()
        .find(|b| b.name() == s)
    }
}

/// Hint terms for existential blocks of the node at `path` (child indices
/// from the root). Without `block`, the hint applies to every block of the
/// node. Plain symbols refer to the higher (pre-state) copy and primed ones
/// to the lower (post-state) copy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hint {
    pub path: Vec<usize>,
    pub block: Option<HintBlock>,
    pub tuples: Vec<Vec<Term>>,
}

/// A ranking as declared: constructor tree plus hints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankingDecl {
    pub expr: RankingExpr,
    pub hints: Vec<Hint>,
}

fn write_binders(out: &mut String, vs: &[Var]) {
    out.push('(');
    for (i, v) in vs.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&format!("({} {})", v.name, v.sort));
    }
    out.push(')');
}

fn write_order(out: &mut String, l: &OrderFormula) {
    out.push_str("(order ");
    write_binders(out, &l.lower);
    out.push(' ');
    write_binders(out, &l.upper);
    out.push(' ');
    out.push_str(&l.body.to_surface());
    out.push(')');
}

fn write_expr(out: &mut String, r: &RankingExpr) {
    out.push('(');
    out.push_str(r.constructor_name());
    match r {
        RankingExpr::Bin { alpha, params } => {
            out.push(' ');
            out.push_str(&alpha.to_surface());
            out.push(' ');
            write_binders(out, params);
        }
        RankingExpr::Pos {
            terms,
            order,
            params,
        } => {
            out.push_str(" (");
            let ts: Vec<String> = terms.iter().map(Term::to_surface).collect();
            out.push_str(&ts.join(" "));
            out.push_str(") ");
            write_order(out, order);
            out.push(' ');
            write_binders(out, params);
        }
        RankingExpr::Pw(rs) | RankingExpr::Lex(rs) => {
            for c in rs {
                out.push(' ');
                write_expr(out, c);
            }
        }
        RankingExpr::Lin(bs) => {
            for (g, c) in bs {
                out.push_str(" (branch ");
                out.push_str(&g.to_surface());
                out.push(' ');
                write_expr(out, c);
                out.push(')');
            }
        }
        RankingExpr::DomPw { vars, inner } => {
            out.push(' ');
            write_binders(out, vars);
            out.push(' ');
            write_expr(out, inner);
        }
        RankingExpr::DomPerm {
            k,
            strict,
            vars,
            inner,
        } => {
            out.push_str(&format!(" {k} "));
            if *strict {
                out.push_str(":strict ");
            }
            write_binders(out, vars);
            out.push(' ');
            write_expr(out, inner);
        }
        RankingExpr::DomLex { order, vars, inner } => {
            out.push(' ');
            write_order(out, order);
            out.push(' ');
            write_binders(out, vars);
            out.push(' ');
            write_expr(out, inner);
        }
        RankingExpr::DomLin {
            order,
            guard,
            vars,
            inner,
        } => {
            out.push(' ');
            write_order(out, order);
            out.push(' ');
            out.push_str(&guard.to_surface());
            out.push(' ');
            write_binders(out, vars);
            out.push(' ');
            write_expr(out, inner);
        }
    }
    out.push(')');
}

impl RankingExpr {
    /// Problem-file syntax.
    pub fn to_surface(&self) -> String {
        let mut s = String::new();
        write_expr(&mut s, self);
        s
    }
}

impl fmt::Display for RankingExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_surface())
    }
}

impl Hint {
    pub fn to_surface(&self) -> String {
        let path: Vec<String> = self.path.iter().map(usize::to_string).collect();
        let mut s = format!(
            "(hint (path{}{})",
            if path.is_empty() { "" } else { " " },
            path.join(" ")
        );
        if let Some(b) = self.block {
            s.push_str(" :block ");
            s.push_str(b.name());
        }
        s.push_str(" (");
        let tuples: Vec<String> = self
            .tuples
            .iter()
            .map(|t| {
                let ts: Vec<String> = t.iter().map(Term::to_surface).collect();
                format!("({})", ts.join(" "))
            })
            .collect();
        s.push_str(&tuples.join(" "));
        s.push_str("))");
        s
    }
}
