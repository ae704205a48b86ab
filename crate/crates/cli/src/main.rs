// SPDX-License-Identifier: Apache-2.0

//! `lrk`: verify, test and model-check liveness proofs written as `.lrk`
//! problem files.

mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Generate the proof obligations and discharge them with the solver.
    Verify,
    /// Check the ranking and the obligations on small finite structures.
    Oracle,
    /// Explicit-state model checking of the liveness property.
    Mc,
    /// Write the solver scripts without running the solver.
    Emit,
}

#[derive(Debug, Parser)]
#[command(
    name = "lrk",
    version,
    about = "Liveness proofs with implicit rankings"
)]
pub struct Args {
    #[arg(value_enum)]
    pub mode: Mode,
    /// Problem file.
    pub file: PathBuf,
    /// Solver executable (default: $LRK_SOLVER or `z3`).
    #[arg(long)]
    pub solver: Option<String>,
    /// Per-obligation solver timeout in seconds.
    #[arg(long, default_value_t = 60.0)]
    pub timeout: f64,
    /// Worker threads for solver calls and oracle checks.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Only this obligation (e.g. `reduced@fair`); repeatable.
    #[arg(long)]
    pub premise: Vec<String>,
    /// Directory receiving one `.smt2` script per obligation.
    #[arg(long, value_name = "DIR")]
    pub emit_smt: Option<PathBuf>,
    /// Domain size `sort=N`; repeatable. Unlisted sorts get size 2.
    #[arg(long, value_name = "SORT=N")]
    pub size: Vec<String>,
    /// Samples drawn when a check exceeds the exhaustive budget.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Seed for sampling.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Treat finite-domain constructors over sorts not declared `:finite`
    /// as errors.
    #[arg(long)]
    pub strict_finite: bool,
    /// Write a JSON report here.
    #[arg(long, value_name = "PATH")]
    pub report: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let code = run::run(&args);
    ExitCode::from(code as u8)
}
