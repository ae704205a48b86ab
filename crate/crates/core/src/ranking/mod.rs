// SPDX-License-Identifier: Apache-2.0

//! Implicit rankings and the constructor algebra that builds them.
//!
//! A ranking is a pair of formulas over the double signature Σ₀⊎Σ₁: the
//! conserved formula φ≤ and the reduced formula φ<. The lower copy (tag
//! `Sub0`) is the structure whose rank is at most that of the higher copy
//! (tag `Sub1`). Parameters appear free in both formulas through their
//! `Sub0`/`Sub1` variable copies.

mod build;
mod expr;

use thiserror::Error;

use crate::fol::{FolError, Formula, Var};

pub use build::{apply_hints, elaborate, RankingBuilder};
pub use expr::{Hint, HintBlock, OrderFormula, RankingDecl, RankingExpr};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum RankingError {
    #[error("{constructor}: variable `{var}` is free but not a parameter")]
    FreeVarEscape {
        constructor: &'static str,
        var: String,
    },
    #[error("{constructor}: arity mismatch, expected {expected}, got {found}")]
    ArityMismatch {
        constructor: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("{constructor}: children have different parameters ({left} vs {right})")]
    ParamMismatch {
        constructor: &'static str,
        left: String,
        right: String,
    },
    #[error("{0}: needs at least one child")]
    EmptyList(&'static str),
    #[error("{constructor}: `{var}` is not a parameter of the inner ranking")]
    NotAParam {
        constructor: &'static str,
        var: String,
    },
    #[error("bad permutation bound `{0}`")]
    BadK(String),
    #[error("ranking is not closed; free parameters: {0}")]
    NotClosed(String),
    #[error("bad hint: {0}")]
    BadHintPath(String),
    #[error("unknown ranking constructor `{0}`")]
    UnknownConstructor(String),
    #[error(transparent)]
    Fol(#[from] FolError),
}

/// A constructed implicit ranking.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImplicitRanking {
    /// Parameters x̄ (plain variables; their copies occur in the formulas).
    pub params: Vec<Var>,
    /// φ≤
    pub conserved: Formula,
    /// φ<
    pub reduced: Formula,
    /// Sound only over finite domains.
    pub finite_domain: bool,
    /// The constructor tree that produced the formulas.
    pub node: RankingExpr,
}

impl ImplicitRanking {
    pub fn is_closed(&self) -> bool {
        self.params.is_empty()
    }
}

pub(crate) fn show_vars(vs: &[Var]) -> String {
    let names: Vec<String> = vs
        .iter()
        .map(|v| format!("{}:{}", v.name, v.sort))
        .collect();
    format!("[{}]", names.join(", "))
}
