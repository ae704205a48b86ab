// SPDX-License-Identifier: Apache-2.0

//! Solver scripts, solver processes and batch discharge of obligations.

mod emit;
mod process;

use std::path::PathBuf;
use std::time::Duration;

use thiserror::Error;

pub use emit::{emit_formula_query, emit_query, function_cycle};
pub use process::{
    check, check_script, discharge_all, solver_version, DischargeEntry, DischargeReport, Outcome,
    Overall, SolverVerdict, UnknownReason,
};

/// Environment variable overriding the solver executable.
pub const SOLVER_ENV: &str = "LRK_SOLVER";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Profile {
    /// Quantified uninterpreted functions, no restrictions.
    #[default]
    Full,
    /// Refuse signatures whose function symbols form a sort cycle, keeping
    /// queries in the effectively-propositional fragment.
    Epr,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub solver_path: PathBuf,
    /// Arguments that make the solver read a script from standard input.
    pub solver_args: Vec<String>,
    pub timeout: Duration,
    pub logic: String,
    pub profile: Profile,
    /// Extra `(set-option :key value)` lines.
    pub options: Vec<(String, String)>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let solver_path = std::env::var_os(SOLVER_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("z3"));
        SolverConfig {
            solver_path,
            solver_args: vec!["-in".into()],
            timeout: Duration::from_secs(60),
            logic: "UF".into(),
            profile: Profile::Full,
            options: Vec::new(),
        }
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum SmtError {
    #[error("could not run solver `{path}`: {msg}")]
    SolverLaunchFailure { path: String, msg: String },
    #[error("unexpected solver output: {0}")]
    SolverProtocolError(String),
    #[error("function symbols form a sort cycle through `{0}`; not in the EPR profile")]
    NotEpr(String),
    #[error("timeout must be positive")]
    BadTimeout,
}
