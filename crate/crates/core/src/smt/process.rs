// SPDX-License-Identifier: Apache-2.0

//! One solver process per query.

use std::fmt;
use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::sync::mpsc;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use super::{emit_query, function_cycle, Profile, SmtError, SolverConfig};
use crate::fol::Signature;
use crate::vcgen::ProofObligation;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnknownReason {
    Timeout,
    Incomplete,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// The negation is unsatisfiable.
    Valid,
    /// The negation is satisfiable; the solver's model text, verbatim.
    CounterModel(String),
    Unknown(UnknownReason),
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Valid => f.write_str("valid"),
            Outcome::CounterModel(_) => f.write_str("counter-model"),
            Outcome::Unknown(UnknownReason::Timeout) => f.write_str("unknown (timeout)"),
            Outcome::Unknown(UnknownReason::Incomplete) => f.write_str("unknown (incomplete)"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolverVerdict {
    pub outcome: Outcome,
    pub wall_time: Duration,
}

fn launch_failure(cfg: &SolverConfig, e: impl fmt::Display) -> SmtError {
    SmtError::SolverLaunchFailure {
        path: cfg.solver_path.display().to_string(),
        msg: e.to_string(),
    }
}

/// Runs `script` and classifies the first status line of the output.
pub fn check_script(script: &str, cfg: &SolverConfig) -> Result<SolverVerdict, SmtError> {
    if cfg.timeout.is_zero() {
        return Err(SmtError::BadTimeout);
    }
    let start = Instant::now();
    let mut child = Command::new(&cfg.solver_path)
        .args(&cfg.solver_args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| launch_failure(cfg, e))?;
    let mut stdin = child.stdin.take().expect("piped stdin");
    let mut stdout = child.stdout.take().expect("piped stdout");
    let (tx, rx) = mpsc::channel();
    let script = script.to_string();
    std::thread::spawn(move || {
        // A solver killed on timeout closes the pipe; write errors are moot then.
        let _ = stdin.write_all(script.as_bytes());
        drop(stdin);
    });
    std::thread::spawn(move || {
        let mut out = String::new();
        let r = stdout.read_to_string(&mut out).map(|_| out);
        let _ = tx.send(r);
    });
    let output = match rx.recv_timeout(cfg.timeout) {
        Ok(r) => r,
        Err(_) => {
            let _ = child.kill();
            let _ = child.wait();
            return Ok(SolverVerdict {
                outcome: Outcome::Unknown(UnknownReason::Timeout),
                wall_time: start.elapsed(),
            });
        }
    };
    let _ = child.wait();
    let wall_time = start.elapsed();
    let output = output.map_err(|e| SmtError::SolverProtocolError(e.to_string()))?;
    let mut lines = output.splitn(2, '\n');
    let status = lines.next().unwrap_or("").trim();
    let rest = lines.next().unwrap_or("");
    let outcome = match status {
        "unsat" => Outcome::Valid,
        "sat" => Outcome::CounterModel(rest.to_string()),
        "unknown" => Outcome::Unknown(UnknownReason::Incomplete),
        "timeout" => Outcome::Unknown(UnknownReason::Timeout),
        other => {
            let shown = if other.is_empty() {
                "<no output>"
            } else {
                other
            };
            return Err(SmtError::SolverProtocolError(shown.to_string()));
        }
    };
    Ok(SolverVerdict { outcome, wall_time })
}

/// Discharges one obligation: `Valid` iff its negation is unsatisfiable.
pub fn check(
    ob: &ProofObligation,
    sig: &Signature,
    cfg: &SolverConfig,
) -> Result<SolverVerdict, SmtError> {
    if cfg.profile == Profile::Epr {
        if let Some(f) = function_cycle(sig) {
            return Err(SmtError::NotEpr(f));
        }
    }
    check_script(&emit_query(ob, sig, cfg), cfg)
}

/// First line of `solver --version`.
pub fn solver_version(cfg: &SolverConfig) -> Result<String, SmtError> {
    let out = Command::new(&cfg.solver_path)
        .arg("--version")
        .stdin(Stdio::null())
        .output()
        .map_err(|e| launch_failure(cfg, e))?;
    let text = String::from_utf8_lossy(&out.stdout);
    Ok(text.lines().next().unwrap_or("").trim().to_string())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DischargeEntry {
    pub name: String,
    /// Solver errors are kept as text so the batch carries on.
    pub verdict: Result<SolverVerdict, String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Overall {
    Verified,
    Unknown,
    Failed,
}

impl fmt::Display for Overall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Overall::Verified => "verified",
            Overall::Unknown => "unknown",
            Overall::Failed => "failed",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DischargeReport {
    /// In generation order.
    pub entries: Vec<DischargeEntry>,
}

impl DischargeReport {
    pub fn overall(&self) -> Overall {
        let mut all_valid = true;
        for e in &self.entries {
            match &e.verdict {
                Ok(SolverVerdict {
                    outcome: Outcome::CounterModel(_),
                    ..
                }) => return Overall::Failed,
                Ok(SolverVerdict {
                    outcome: Outcome::Valid,
                    ..
                }) => {}
                _ => all_valid = false,
            }
        }
        if all_valid {
            Overall::Verified
        } else {
            Overall::Unknown
        }
    }
}

/// Checks every obligation on a pool of `jobs` workers (at least one).
pub fn discharge_all(
    obs: &[ProofObligation],
    sig: &Signature,
    cfg: &SolverConfig,
    jobs: usize,
) -> DischargeReport {
    let run = || {
        obs.par_iter()
            .map(|ob| DischargeEntry {
                name: ob.name(),
                verdict: check(ob, sig, cfg).map_err(|e| e.to_string()),
            })
            .collect::<Vec<_>>()
    };
    let entries = match rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
    {
        Ok(pool) => pool.install(run),
        Err(_) => run(),
    };
    DischargeReport { entries }
}
