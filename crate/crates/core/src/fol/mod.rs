// SPDX-License-Identifier: Apache-2.0

//! Many-sorted uninterpreted first-order logic.

mod ops;
mod signature;
pub mod smtlib;
mod sorting;
mod syntax;

use thiserror::Error;

pub use ops::{
    copy_term_to, copy_to, free_vars, map_syms, prime, retag, substitute, substitute_checked,
    substitute_term, symbols, tags, term_free_vars, term_symbols, Subst,
};
pub use signature::{Signature, SignatureError, Sort, SymbolDecl, SymbolKind};
pub use sorting::{check_formula, sort_of, SortError};
pub use syntax::{Formula, Markers, Sym, Tag, Term, Var};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum FolError {
    #[error(transparent)]
    Signature(#[from] SignatureError),
    #[error(transparent)]
    Sort(#[from] SortError),
    #[error("tag mismatch: {0}")]
    TagMismatch(String),
}

/// Well-sortedness entry point for formulas: `Ok(())` when every atom checks.
pub fn well_sorted(f: &Formula, sig: &Signature) -> Result<(), FolError> {
    check_formula(f, sig).map_err(FolError::from)
}
