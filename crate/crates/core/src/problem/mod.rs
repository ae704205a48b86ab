// SPDX-License-Identifier: Apache-2.0

//! Verification problems: transition system, liveness property and proof
//! skeleton, plus the problem-file reader and writer.

mod parse;
mod unparse;
mod validate;

use thiserror::Error;

use crate::fol::{Formula, Signature, SignatureError, SortError, Var};
use crate::ranking::{RankingDecl, RankingError};
use crate::sexp::{Pos, ReadError};

pub use parse::parse_problem;
pub use unparse::unparse_problem;
pub use validate::{validate_problem, Diagnostic, Severity};

/// Name given to the fairness assumption □◇true when none is declared.
pub const DEFAULT_FAIRNESS: &str = "fair";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionSystem {
    pub sig: Signature,
    pub init: Formula,
    /// Over plain and primed symbols.
    pub trans: Formula,
    /// Conjoined to every premise antecedent, on both state copies.
    pub axioms: Vec<Formula>,
}

/// ∀x̄. □◇ r(x̄)
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fairness {
    pub name: String,
    pub params: Vec<Var>,
    pub formula: Formula,
}

/// (⋀ᵢ ∀x̄ □◇ rᵢ(x̄)) → □(p → ◇q)
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LivenessProperty {
    /// Never empty after parsing.
    pub fairness: Vec<Fairness>,
    pub p: Formula,
    pub q: Formula,
}

/// Helpful formula ψᵢ(x̄) for the fairness assumption of the same name.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Helpful {
    pub name: String,
    pub params: Vec<Var>,
    pub formula: Formula,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofSkeleton {
    /// Global inductive invariant ρ.
    pub rho: Formula,
    /// Trigger invariant φ.
    pub trigger: Formula,
    /// One entry per fairness assumption, in the same order.
    pub helpful: Vec<Helpful>,
    pub ranking: Option<RankingDecl>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Meta {
    /// Excluded from the default test tier.
    pub slow: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Problem {
    pub system: TransitionSystem,
    pub property: LivenessProperty,
    pub skeleton: ProofSkeleton,
    pub meta: Meta,
}

impl Problem {
    pub fn sig(&self) -> &Signature {
        &self.system.sig
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum ProblemError {
    #[error("parse error at {0}")]
    Read(#[from] ReadError),
    #[error("parse error at {pos}: {msg}")]
    Parse { pos: Pos, msg: String },
    #[error("sort error at {pos}: {source}")]
    Sort { pos: Pos, source: SortError },
    #[error("declaration error at {pos}: {source}")]
    Signature { pos: Pos, source: SignatureError },
    #[error("unknown constructor `{name}` at {pos}")]
    UnknownConstructor { pos: Pos, name: String },
    #[error("bad hint at {pos}: {msg}")]
    BadHintPath { pos: Pos, msg: String },
    #[error("ranking error at {pos}: {source}")]
    Ranking { pos: Pos, source: RankingError },
}
