// SPDX-License-Identifier: Apache-2.0

//! Sorts and signatures.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

/// A declared uninterpreted sort.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Sort {
    pub name: String,
    /// Declared finite (but unbounded). Finite-domain ranking constructors are
    /// only sound when aggregating over such sorts.
    pub finite: bool,
}

/// The three classes of non-logical symbols.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SymbolKind {
    Constant { sort: String },
    Function { args: Vec<String>, result: String },
    Relation { args: Vec<String> },
}

impl SymbolKind {
    pub fn arg_sorts(&self) -> &[String] {
        match self {
            SymbolKind::Constant { .. } => &[],
            SymbolKind::Function { args, .. } | SymbolKind::Relation { args } => args,
        }
    }

    /// Result sort for constants and functions; `None` for relations.
    pub fn result_sort(&self) -> Option<&str> {
        match self {
            SymbolKind::Constant { sort } => Some(sort),
            SymbolKind::Function { result, .. } => Some(result),
            SymbolKind::Relation { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SymbolDecl {
    pub name: String,
    pub kind: SymbolKind,
    /// Mutable symbols get primed / subscripted copies; immutable ones are
    /// shared by every copy of the signature.
    pub mutable: bool,
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum SignatureError {
    #[error("sort `{0}` declared twice")]
    DuplicateSort(String),
    #[error("symbol `{0}` declared twice")]
    DuplicateSymbol(String),
    #[error("sort `{sort}` used by `{symbol}` is not declared")]
    UnknownSort { symbol: String, sort: String },
}

/// A many-sorted signature. Declaration order is preserved so that every
/// printed artifact is deterministic.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    sorts: Vec<Sort>,
    symbols: Vec<SymbolDecl>,
    sort_index: BTreeMap<String, usize>,
    symbol_index: BTreeMap<String, usize>,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_sort(&mut self, name: &str, finite: bool) -> Result<(), SignatureError> {
        if self.sort_index.contains_key(name) {
            return Err(SignatureError::DuplicateSort(name.to_string()));
        }
        self.sort_index.insert(name.to_string(), self.sorts.len());
        self.sorts.push(Sort {
            name: name.to_string(),
            finite,
        });
        Ok(())
    }

    pub fn add_symbol(
        &mut self,
        name: &str,
        kind: SymbolKind,
        mutable: bool,
    ) -> Result<(), SignatureError> {
        if self.symbol_index.contains_key(name) {
            return Err(SignatureError::DuplicateSymbol(name.to_string()));
        }
        let used = kind
            .arg_sorts()
            .iter()
            .map(String::as_str)
            .chain(kind.result_sort());
        for sort in used {
            if !self.sort_index.contains_key(sort) {
                return Err(SignatureError::UnknownSort {
                    symbol: name.to_string(),
                    sort: sort.to_string(),
                });
            }
        }
        self.symbol_index
            .insert(name.to_string(), self.symbols.len());
        self.symbols.push(SymbolDecl {
            name: name.to_string(),
            kind,
            mutable,
        });
        Ok(())
    }

    pub fn constant(mut self, name: &str, sort: &str, mutable: bool) -> Self {
        self.add_symbol(
            name,
            SymbolKind::Constant {
                sort: sort.to_string(),
            },
            mutable,
        )
        .expect("invalid constant declaration");
        self
    }

    pub fn function(mut self, name: &str, args: &[&str], result: &str, mutable: bool) -> Self {
        self.add_symbol(
            name,
            SymbolKind::Function {
                args: args.iter().map(|s| s.to_string()).collect(),
                result: result.to_string(),
            },
            mutable,
        )
        .expect("invalid function declaration");
        self
    }

    pub fn relation(mut self, name: &str, args: &[&str], mutable: bool) -> Self {
        self.add_symbol(
            name,
            SymbolKind::Relation {
                args: args.iter().map(|s| s.to_string()).collect(),
            },
            mutable,
        )
        .expect("invalid relation declaration");
        self
    }

    pub fn sort(mut self, name: &str, finite: bool) -> Self {
        self.add_sort(name, finite)
            .expect("invalid sort declaration");
        self
    }

    pub fn sorts(&self) -> &[Sort] {
        &self.sorts
    }

    pub fn symbols(&self) -> &[SymbolDecl] {
        &self.symbols
    }

    pub fn get_sort(&self, name: &str) -> Option<&Sort> {
        self.sort_index.get(name).map(|&i| &self.sorts[i])
    }

    pub fn has_sort(&self, name: &str) -> bool {
        self.sort_index.contains_key(name)
    }

    pub fn get_symbol(&self, name: &str) -> Option<&SymbolDecl> {
        self.symbol_index.get(name).map(|&i| &self.symbols[i])
    }

    pub fn symbol_id(&self, name: &str) -> Option<usize> {
        self.symbol_index.get(name).copied()
    }

    pub fn sort_id(&self, name: &str) -> Option<usize> {
        self.sort_index.get(name).copied()
    }

    pub fn is_mutable(&self, name: &str) -> bool {
        self.get_symbol(name).is_some_and(|d| d.mutable)
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.sorts {
            writeln!(
                f,
                "sort {}{}",
                s.name,
                if s.finite { " (finite)" } else { "" }
            )?;
        }
        for d in &self.symbols {
            let m = if d.mutable { "mutable" } else { "immutable" };
            match &d.kind {
                SymbolKind::Constant { sort } => writeln!(f, "{m} constant {}: {sort}", d.name)?,
                SymbolKind::Function { args, result } => {
                    writeln!(f, "{m} function {}({}): {result}", d.name, args.join(", "))?
                }
                SymbolKind::Relation { args } => {
                    writeln!(f, "{m} relation {}({})", d.name, args.join(", "))?
                }
            }
        }
        Ok(())
    }
}
