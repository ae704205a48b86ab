// SPDX-License-Identifier: Apache-2.0

//! Formula evaluation over explicit structures.
//!
//! A formula is compiled once against a [`Vocab`] (which symbol copies are
//! read from which structure) and then evaluated against any tuple of
//! structures laid out the same way.

use std::collections::BTreeMap;

use super::structure::{FiniteStructure, Table};
use super::OracleError;
use crate::fol::{free_vars, Formula, Signature, Tag, Term, Var};

/// Variable assignment: element index per variable.
pub type Assignment = BTreeMap<Var, usize>;

/// Symbol copies visible to a compiled formula. Immutable symbols are read
/// plain from the first structure; mutable symbol copies tagged `tags[i]`
/// are read from structure `i`.
#[derive(Clone, Debug)]
pub struct Vocab {
    sizes: BTreeMap<String, usize>,
    keys: BTreeMap<(String, Tag), usize>,
    sources: Vec<(usize, String)>,
}

impl Vocab {
    pub fn new(sig: &Signature, sizes: &BTreeMap<String, usize>, tags: &[Tag]) -> Self {
        let mut keys = BTreeMap::new();
        let mut sources = Vec::new();
        for d in sig.symbols() {
            if d.mutable {
                for (i, t) in tags.iter().enumerate() {
                    keys.insert((d.name.clone(), *t), sources.len());
                    sources.push((i, d.name.clone()));
                }
            } else {
                keys.insert((d.name.clone(), Tag::Plain), sources.len());
                sources.push((0, d.name.clone()));
            }
        }
        Vocab {
            sizes: sizes.clone(),
            keys,
            sources,
        }
    }

    pub fn sizes(&self) -> &BTreeMap<String, usize> {
        &self.sizes
    }

    /// The table list to evaluate against. Panics if a structure lacks a
    /// symbol this vocabulary reads.
    pub fn tables<'a>(&self, states: &[&'a FiniteStructure]) -> Vec<&'a Table> {
        self.sources
            .iter()
            .map(|(i, name)| {
                states[*i]
                    .tables
                    .get(name)
                    .unwrap_or_else(|| panic!("structure has no table for `{name}`"))
            })
            .collect()
    }

    /// Like [`Vocab::tables`], but for structures that may interpret only a
    /// subset of the symbols. Missing entries are never read by formulas
    /// compiled over that subset.
    pub fn partial_tables<'a>(&self, states: &[&'a FiniteStructure]) -> Vec<Option<&'a Table>> {
        self.sources
            .iter()
            .map(|(i, name)| states.get(*i).and_then(|s| s.tables.get(name)))
            .collect()
    }
}

#[derive(Clone, Debug)]
enum CTerm {
    Var(usize),
    App(usize, Vec<CTerm>),
    Ite(Box<CForm>, Box<CTerm>, Box<CTerm>),
}

#[derive(Clone, Debug)]
enum CForm {
    Const(bool),
    Eq(CTerm, CTerm),
    Rel(usize, Vec<CTerm>),
    Not(Box<CForm>),
    And(Vec<CForm>),
    Or(Vec<CForm>),
    Implies(Box<CForm>, Box<CForm>),
    Iff(Box<CForm>, Box<CForm>),
    /// Bound slots with their domain sizes.
    Forall(Vec<(usize, usize)>, Box<CForm>),
    Exists(Vec<(usize, usize)>, Box<CForm>),
}

struct Compiler<'a> {
    vocab: &'a Vocab,
    scope: Vec<(Var, usize)>,
    slots: usize,
}

impl Compiler<'_> {
    fn slot_of(&self, v: &Var) -> Result<usize, OracleError> {
        self.scope
            .iter()
            .rev()
            .find(|(w, _)| w == v)
            .map(|(_, s)| *s)
            .ok_or_else(|| OracleError::MissingAssignment(v.to_string()))
    }

    fn sym(&self, name: &str, tag: Tag) -> Result<usize, OracleError> {
        self.vocab
            .keys
            .get(&(name.to_string(), tag))
            .copied()
            .ok_or_else(|| OracleError::Uninterpreted(format!("{name}{}", tag.marker())))
    }

    fn term(&mut self, t: &Term) -> Result<CTerm, OracleError> {
        Ok(match t {
            Term::Var(v) => CTerm::Var(self.slot_of(v)?),
            Term::App(s, args) => CTerm::App(
                self.sym(&s.name, s.tag)?,
                args.iter()
                    .map(|a| self.term(a))
                    .collect::<Result<_, _>>()?,
            ),
            Term::Ite(c, a, b) => CTerm::Ite(
                Box::new(self.form(c)?),
                Box::new(self.term(a)?),
                Box::new(self.term(b)?),
            ),
        })
    }

    fn bind(&mut self, vs: &[Var]) -> Result<Vec<(usize, usize)>, OracleError> {
        vs.iter()
            .map(|v| {
                let n = *self
                    .vocab
                    .sizes
                    .get(&v.sort)
                    .ok_or_else(|| OracleError::MissingSize(v.sort.clone()))?;
                let s = self.slots;
                self.slots += 1;
                self.scope.push((v.clone(), s));
                Ok((s, n))
            })
            .collect()
    }

    fn form(&mut self, f: &Formula) -> Result<CForm, OracleError> {
        let b = |c: CForm| Box::new(c);
        Ok(match f {
            Formula::True => CForm::Const(true),
            Formula::False => CForm::Const(false),
            Formula::Eq(a, c) => CForm::Eq(self.term(a)?, self.term(c)?),
            Formula::Rel(s, args) => CForm::Rel(
                self.sym(&s.name, s.tag)?,
                args.iter()
                    .map(|a| self.term(a))
                    .collect::<Result<_, _>>()?,
            ),
            Formula::Not(g) => CForm::Not(b(self.form(g)?)),
            Formula::And(gs) => {
                CForm::And(gs.iter().map(|g| self.form(g)).collect::<Result<_, _>>()?)
            }
            Formula::Or(gs) => {
                CForm::Or(gs.iter().map(|g| self.form(g)).collect::<Result<_, _>>()?)
            }
            Formula::Implies(g, h) => CForm::Implies(b(self.form(g)?), b(self.form(h)?)),
            Formula::Iff(g, h) => CForm::Iff(b(self.form(g)?), b(self.form(h)?)),
            Formula::Forall(vs, g) | Formula::Exists(vs, g) => {
                let depth = self.scope.len();
                let slots = self.bind(vs)?;
                let body = self.form(g)?;
                self.scope.truncate(depth);
                if matches!(f, Formula::Forall(..)) {
                    CForm::Forall(slots, b(body))
                } else {
                    CForm::Exists(slots, b(body))
                }
            }
        })
    }
}

struct Run<'a> {
    tables: &'a [Option<&'a Table>],
    env: Vec<usize>,
}

impl Run<'_> {
    fn lookup(&mut self, i: usize, args: &[CTerm]) -> usize {
        let tables = self.tables;
        let t = tables[i].expect("compiled formula reads an uninterpreted symbol");
        let mut idx = 0;
        for (a, d) in args.iter().zip(&t.dims) {
            idx = idx * d + self.term(a);
        }
        t.values[idx]
    }

    fn term(&mut self, t: &CTerm) -> usize {
        match t {
            CTerm::Var(s) => self.env[*s],
            CTerm::App(i, args) => self.lookup(*i, args),
            CTerm::Ite(c, a, b) => {
                if self.form(c) {
                    self.term(a)
                } else {
                    self.term(b)
                }
            }
        }
    }

    fn quant(&mut self, slots: &[(usize, usize)], body: &CForm, want: bool) -> bool {
        // Looks for an assignment making the body equal `want`.
        let Some(&(s, n)) = slots.first() else {
            return self.form(body) == want;
        };
        for e in 0..n {
            self.env[s] = e;
            if self.quant(&slots[1..], body, want) {
                return true;
            }
        }
        false
    }

    fn form(&mut self, f: &CForm) -> bool {
        match f {
            CForm::Const(b) => *b,
            CForm::Eq(a, b) => self.term(a) == self.term(b),
            CForm::Rel(i, args) => self.lookup(*i, args) == 1,
            CForm::Not(g) => !self.form(g),
            CForm::And(gs) => gs.iter().all(|g| self.form(g)),
            CForm::Or(gs) => gs.iter().any(|g| self.form(g)),
            CForm::Implies(g, h) => !self.form(g) || self.form(h),
            CForm::Iff(g, h) => self.form(g) == self.form(h),
            CForm::Forall(slots, body) => !self.quant(slots, body, false),
            CForm::Exists(slots, body) => self.quant(slots, body, true),
        }
    }
}

/// A formula compiled against a vocabulary, with its free variables taking
/// the first slots in the given order.
#[derive(Clone, Debug)]
pub struct Compiled {
    form: CForm,
    slots: usize,
    free: Vec<Var>,
}

impl Compiled {
    pub fn new(f: &Formula, vocab: &Vocab, free: &[Var]) -> Result<Self, OracleError> {
        let mut c = Compiler {
            vocab,
            scope: free.iter().cloned().zip(0..).collect(),
            slots: free.len(),
        };
        let form = c.form(f)?;
        Ok(Compiled {
            form,
            slots: c.slots,
            free: free.to_vec(),
        })
    }

    pub fn free(&self) -> &[Var] {
        &self.free
    }

    /// `args` gives the free variables' values, in compile order.
    pub fn eval(&self, tables: &[&Table], args: &[usize]) -> bool {
        let opt: Vec<Option<&Table>> = tables.iter().map(|t| Some(*t)).collect();
        self.eval_partial(&opt, args)
    }

    pub fn eval_partial(&self, tables: &[Option<&Table>], args: &[usize]) -> bool {
        let mut env = vec![0; self.slots.max(1)];
        env[..args.len()].copy_from_slice(args);
        Run { tables, env }.form(&self.form)
    }
}

/// A term compiled like [`Compiled`].
#[derive(Clone, Debug)]
pub struct CompiledTerm {
    term: CTerm,
    slots: usize,
}

impl CompiledTerm {
    pub fn new(t: &Term, vocab: &Vocab, free: &[Var]) -> Result<Self, OracleError> {
        let mut c = Compiler {
            vocab,
            scope: free.iter().cloned().zip(0..).collect(),
            slots: free.len(),
        };
        let term = c.term(t)?;
        Ok(CompiledTerm {
            term,
            slots: c.slots,
        })
    }

    pub fn eval(&self, tables: &[&Table], args: &[usize]) -> usize {
        let opt: Vec<Option<&Table>> = tables.iter().map(|t| Some(*t)).collect();
        let mut env = vec![0; self.slots.max(1)];
        env[..args.len()].copy_from_slice(args);
        Run { tables: &opt, env }.term(&self.term)
    }
}

fn eval_with(
    f: &Formula,
    sig: &Signature,
    states: &[&FiniteStructure],
    tags: &[Tag],
    v: &Assignment,
) -> Result<bool, OracleError> {
    let free: Vec<Var> = free_vars(f).into_iter().collect();
    let mut args = Vec::with_capacity(free.len());
    for x in &free {
        args.push(
            *v.get(x)
                .ok_or_else(|| OracleError::MissingAssignment(x.to_string()))?,
        );
    }
    let vocab = Vocab::new(sig, &states[0].sizes, tags);
    let c = Compiled::new(f, &vocab, &free)?;
    Ok(c.eval_partial(&vocab.partial_tables(states), &args))
}

/// (s, v) ⊨ f for a one-state formula.
pub fn eval(
    f: &Formula,
    sig: &Signature,
    s: &FiniteStructure,
    v: &Assignment,
) -> Result<bool, OracleError> {
    eval_with(f, sig, &[s], &[Tag::Plain], v)
}

/// Two-state formula over (pre, post); primed symbols read `post`.
pub fn eval_pair(
    f: &Formula,
    sig: &Signature,
    pre: &FiniteStructure,
    post: &FiniteStructure,
    v: &Assignment,
) -> Result<bool, OracleError> {
    eval_with(f, sig, &[pre, post], &[Tag::Plain, Tag::Primed], v)
}

/// Ranking formula over (lower, higher); the `Sub0` copy reads `lower`.
pub fn eval_ranking(
    f: &Formula,
    sig: &Signature,
    lower: &FiniteStructure,
    higher: &FiniteStructure,
    v: &Assignment,
) -> Result<bool, OracleError> {
    eval_with(f, sig, &[lower, higher], &[Tag::Sub0, Tag::Sub1], v)
}
