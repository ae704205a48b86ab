// SPDX-License-Identifier: Apache-2.0

//! Brute-force checks over explicit finite structures: evaluation, heights,
//! ranking soundness, bounded premise checks and explicit liveness.

mod check;
mod enumerate;
mod eval;
mod height;
mod liveness;
mod structure;

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::fol::Signature;

pub use check::{
    bounded_premise_check, check_ranking_soundness, Falsifier, PremiseCheck, SoundnessReport,
    SoundnessViolation,
};
pub use enumerate::{enumerate_structures, EnumRequest, Enumeration, Symbols};
pub use eval::{eval, eval_pair, eval_ranking, Assignment, Compiled, CompiledTerm, Vocab};
pub use height::{height, HeightNum, HeightValue};
pub use liveness::{
    model_check_liveness, ExplicitOutcome, ExplicitSystem, Lasso, LassoTrace, LivenessResult,
    LivenessVerdict,
};
pub use structure::{tuples, FiniteStructure, Space, Table};

/// Default exhaustive budget: total case count.
pub const DEFAULT_BUDGET: u128 = 1_000_000;
/// Default number of draws beyond the budget.
pub const DEFAULT_SAMPLES: usize = 10_000;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("no value for free variable `{0}`")]
    MissingAssignment(String),
    #[error("no domain size for sort `{0}`")]
    MissingSize(String),
    #[error("domain size for sort `{0}` must be at least 1")]
    BadSize(String),
    #[error("symbol `{0}` has no interpretation here")]
    Uninterpreted(String),
    #[error("{cases} cases exceed the exhaustive budget of {budget}")]
    BudgetExceeded { cases: u128, budget: u128 },
    #[error("order is not a strict total order on this structure")]
    NonTotalOrder,
    #[error("height arithmetic overflow")]
    Overflow,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum Mode {
    /// Exhaustive within budget, sampling beyond.
    #[default]
    Auto,
    Exhaustive,
    Sample,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleConfig {
    pub mode: Mode,
    pub budget: u128,
    pub samples: usize,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            mode: Mode::Auto,
            budget: DEFAULT_BUDGET,
            samples: DEFAULT_SAMPLES,
            seed: 0,
        }
    }
}

/// Domain size per sort, with an optional default for unlisted sorts.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Sizes {
    pub default: Option<usize>,
    pub per_sort: BTreeMap<String, usize>,
}

impl Sizes {
    pub fn uniform(n: usize) -> Self {
        Sizes {
            default: Some(n),
            per_sort: BTreeMap::new(),
        }
    }

    pub fn with(mut self, sort: &str, n: usize) -> Self {
        self.per_sort.insert(sort.to_string(), n);
        self
    }

    /// Parses `sort=N`.
    pub fn parse_entry(text: &str) -> Option<(String, usize)> {
        let (s, n) = text.split_once('=')?;
        Some((s.trim().to_string(), n.trim().parse().ok()?))
    }

    pub fn resolve(&self, sig: &Signature) -> Result<BTreeMap<String, usize>, OracleError> {
        let mut out = BTreeMap::new();
        for s in sig.sorts() {
            let n = self
                .per_sort
                .get(&s.name)
                .copied()
                .or(self.default)
                .ok_or_else(|| OracleError::MissingSize(s.name.clone()))?;
            if n == 0 {
                return Err(OracleError::BadSize(s.name.clone()));
            }
            out.insert(s.name.clone(), n);
        }
        Ok(out)
    }
}

/// Result record of one oracle check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub kind: String,
    pub sizes: BTreeMap<String, usize>,
    pub seed: u64,
    pub sampled: bool,
    pub cases: u64,
    /// Cases outside the oracle's support (e.g. a non-total order).
    pub skipped: u64,
    pub violations: u64,
    pub witness: Option<String>,
    pub notes: Vec<String>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sizes: Vec<String> = self.sizes.iter().map(|(s, n)| format!("{s}={n}")).collect();
        write!(
            f,
            "{}: {} [{}] seed={} {} cases={} skipped={} violations={}",
            self.kind,
            if self.passed() { "pass" } else { "FAIL" },
            sizes.join(","),
            self.seed,
            if self.sampled {
                "sampled"
            } else {
                "exhaustive"
            },
            self.cases,
            self.skipped,
            self.violations
        )?;
        for n in &self.notes {
            write!(f, "; {n}")?;
        }
        Ok(())
    }
}
