// SPDX-License-Identifier: Apache-2.0

//! One CLI run: load, check, report, exit code.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Duration;

use lrk_core::oracle::{
    bounded_premise_check, check_ranking_soundness, model_check_liveness, CheckReport,
    LivenessVerdict, OracleConfig, OracleError, Sizes,
};
use lrk_core::problem::{parse_problem, validate_problem, Problem, Severity};
use lrk_core::ranking::{elaborate, ImplicitRanking};
use lrk_core::smt::{discharge_all, emit_query, solver_version, Outcome, Overall, SolverConfig};
use lrk_core::vcgen::{generate_premises, ProofObligation};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::{Args, Mode};

pub const EXIT_OK: i32 = 0;
pub const EXIT_REFUTED: i32 = 1;
pub const EXIT_UNKNOWN: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

/// Size used for sorts without a `--size` entry.
const DEFAULT_SIZE: usize = 2;

/// Everything a run reports. Wall-clock times are left out so that reports
/// of identical runs are byte-identical.
pub struct RunReport {
    pub file: String,
    pub sha256: String,
    pub mode: &'static str,
    pub solver: Option<String>,
    pub seed: u64,
    pub obligations: Vec<(String, String, Option<String>)>,
    pub oracle: Vec<CheckReport>,
    pub status: &'static str,
}

impl RunReport {
    fn text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "problem: {} sha256={}", self.file, self.sha256);
        let _ = writeln!(out, "mode: {}", self.mode);
        if let Some(s) = &self.solver {
            let _ = writeln!(out, "solver: {s}");
        }
        for (name, verdict, _) in &self.obligations {
            let _ = writeln!(out, "{name}: {verdict}");
        }
        for r in &self.oracle {
            let _ = writeln!(out, "{r}");
            if let Some(w) = &r.witness {
                for line in w.lines() {
                    let _ = writeln!(out, "  {line}");
                }
            }
        }
        let _ = writeln!(out, "status: {}", self.status);
        out
    }

    fn json(&self) -> Value {
        let obligations: Vec<Value> = self
            .obligations
            .iter()
            .map(|(name, verdict, model)| json!({"name": name, "verdict": verdict, "model": model}))
            .collect();
        json!({
            "file": self.file,
            "sha256": self.sha256,
            "mode": self.mode,
            "solver": self.solver,
            "seed": self.seed,
            "obligations": obligations,
            "oracle": self.oracle,
            "status": self.status,
        })
    }
}

#[derive(Debug)]
struct Failure(i32, String);

fn input(msg: impl Into<String>) -> Failure {
    Failure(EXIT_INPUT, msg.into())
}

pub fn run(args: &Args) -> i32 {
    match execute(args) {
        Ok((code, report)) => {
            // emit mode keeps stdout for the scripts
            if args.mode == Mode::Emit {
                eprint!("{}", report.text());
            } else {
                print!("{}", report.text());
            }
            if let Some(path) = &args.report {
                let text = serde_json::to_string_pretty(&report.json()).expect("json") + "\n";
                if let Err(e) = std::fs::write(path, text) {
                    eprintln!("error: cannot write report {}: {e}", path.display());
                    return EXIT_INPUT;
                }
            }
            code
        }
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            code
        }
    }
}

fn load(path: &Path, strict: bool) -> Result<(Problem, String), Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| input(format!("cannot read {}: {e}", path.display())))?;
    let digest = hex::encode(Sha256::digest(text.as_bytes()));
    let problem = parse_problem(&text).map_err(|e| input(format!("{}: {e}", path.display())))?;
    let mut fatal = false;
    for d in validate_problem(&problem, strict) {
        eprintln!("{}: {d}", path.display());
        fatal |= d.severity == Severity::Error;
    }
    if fatal {
        return Err(input("problem file has errors"));
    }
    Ok((problem, digest))
}

fn ranking(p: &Problem) -> Result<ImplicitRanking, Failure> {
    let decl = p
        .skeleton
        .ranking
        .as_ref()
        .ok_or_else(|| input("the problem has no (ranking ...)"))?;
    elaborate(decl, p.sig()).map_err(|e| input(e.to_string()))
}

/// Obligations in rule order, with their 1-based index, filtered by
/// `--premise`.
fn obligations(
    p: &Problem,
    r: &ImplicitRanking,
    only: &[String],
) -> Result<Vec<(usize, ProofObligation)>, Failure> {
    let all = generate_premises(p, r).map_err(|e| input(e.to_string()))?;
    for name in only {
        if !all.iter().any(|o| &o.name() == name) {
            let names: Vec<String> = all.iter().map(|o| o.name()).collect();
            return Err(input(format!(
                "no obligation `{name}` (have: {})",
                names.join(", ")
            )));
        }
    }
    Ok(all
        .into_iter()
        .enumerate()
        .map(|(i, o)| (i + 1, o))
        .filter(|(_, o)| only.is_empty() || only.contains(&o.name()))
        .collect())
}

fn solver_config(args: &Args) -> Result<SolverConfig, Failure> {
    let mut cfg = SolverConfig::default();
    if let Some(s) = &args.solver {
        cfg.solver_path = s.into();
    }
    if !(args.timeout.is_finite() && args.timeout > 0.0) {
        return Err(input(format!(
            "timeout must be positive, got {}",
            args.timeout
        )));
    }
    cfg.timeout = Duration::from_secs_f64(args.timeout);
    Ok(cfg)
}

fn oracle_config(args: &Args) -> OracleConfig {
    let mut cfg = OracleConfig {
        seed: args.seed,
        ..OracleConfig::default()
    };
    if let Some(k) = args.samples {
        cfg.samples = k;
    }
    cfg
}

fn sizes(args: &Args, p: &Problem) -> Result<Sizes, Failure> {
    let mut out = Sizes::uniform(DEFAULT_SIZE);
    for entry in &args.size {
        let (sort, n) = Sizes::parse_entry(entry)
            .ok_or_else(|| input(format!("bad --size `{entry}`, expected sort=N")))?;
        if !p.sig().has_sort(&sort) {
            return Err(input(format!("--size names unknown sort `{sort}`")));
        }
        if n == 0 {
            return Err(input(format!("--size for `{sort}` must be at least 1")));
        }
        out = out.with(&sort, n);
    }
    Ok(out)
}

fn jobs(args: &Args) -> usize {
    args.jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .max(1)
}

fn write_scripts(
    dir: &Path,
    obs: &[(usize, ProofObligation)],
    p: &Problem,
    cfg: &SolverConfig,
) -> Result<(), Failure> {
    std::fs::create_dir_all(dir)
        .map_err(|e| input(format!("cannot create {}: {e}", dir.display())))?;
    for (i, ob) in obs {
        let path = dir.join(format!("{i:02}-{}.smt2", ob.name()));
        std::fs::write(&path, emit_query(ob, p.sig(), cfg))
            .map_err(|e| input(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

fn oracle_error(e: OracleError) -> Failure {
    match e {
        OracleError::BudgetExceeded { .. } => Failure(EXIT_UNKNOWN, e.to_string()),
        _ => input(e.to_string()),
    }
}

fn execute(args: &Args) -> Result<(i32, RunReport), Failure> {
    let (problem, sha256) = load(&args.file, args.strict_finite)?;
    let mut report = RunReport {
        file: args.file.display().to_string(),
        sha256,
        mode: match args.mode {
            Mode::Verify => "verify",
            Mode::Oracle => "oracle",
            Mode::Mc => "mc",
            Mode::Emit => "emit",
        },
        solver: None,
        seed: args.seed,
        obligations: Vec::new(),
        oracle: Vec::new(),
        status: "",
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs(args))
        .build()
        .map_err(|e| input(e.to_string()))?;

    let code = match args.mode {
        Mode::Verify | Mode::Emit => {
            let cfg = solver_config(args)?;
            let r = ranking(&problem)?;
            let obs = obligations(&problem, &r, &args.premise)?;
            if let Some(dir) = &args.emit_smt {
                write_scripts(dir, &obs, &problem, &cfg)?;
            }
            if args.mode == Mode::Emit {
                if args.emit_smt.is_none() {
                    for (_, ob) in &obs {
                        print!("{}", emit_query(ob, problem.sig(), &cfg));
                    }
                }
                report.obligations = obs
                    .iter()
                    .map(|(_, o)| (o.name(), "emitted".into(), None))
                    .collect();
                report.status = "emitted";
                EXIT_OK
            } else {
                let version = solver_version(&cfg).map_err(|e| input(e.to_string()))?;
                report.solver = Some(version);
                let list: Vec<ProofObligation> = obs.into_iter().map(|(_, o)| o).collect();
                let d = discharge_all(&list, problem.sig(), &cfg, jobs(args));
                for e in &d.entries {
                    let (verdict, model) = match &e.verdict {
                        Ok(v) => match &v.outcome {
                            Outcome::CounterModel(m) => (v.outcome.to_string(), Some(m.clone())),
                            o => (o.to_string(), None),
                        },
                        Err(msg) => (format!("error: {msg}"), None),
                    };
                    report.obligations.push((e.name.clone(), verdict, model));
                }
                let overall = d.overall();
                report.status = match overall {
                    Overall::Verified => "verified",
                    Overall::Failed => "refuted",
                    Overall::Unknown => "unknown",
                };
                match overall {
                    Overall::Verified => EXIT_OK,
                    Overall::Failed => EXIT_REFUTED,
                    Overall::Unknown => EXIT_UNKNOWN,
                }
            }
        }
        Mode::Oracle => {
            let r = ranking(&problem)?;
            let obs = obligations(&problem, &r, &args.premise)?;
            let sz = sizes(args, &problem)?;
            let cfg = oracle_config(args);
            let checks = pool.install(|| -> Result<Vec<CheckReport>, OracleError> {
                let mut out = Vec::new();
                if args.premise.is_empty() {
                    out.push(
                        check_ranking_soundness(
                            &r,
                            problem.sig(),
                            &problem.system.axioms,
                            &sz,
                            &cfg,
                        )?
                        .report,
                    );
                }
                for (_, ob) in &obs {
                    out.push(bounded_premise_check(ob, &problem, &sz, &cfg)?.report);
                }
                Ok(out)
            });
            report.oracle = checks.map_err(oracle_error)?;
            let refuted = report.oracle.iter().any(|c| !c.passed());
            report.status = if refuted { "refuted" } else { "pass" };
            if refuted {
                EXIT_REFUTED
            } else {
                EXIT_OK
            }
        }
        Mode::Mc => {
            let sz = sizes(args, &problem)?;
            let cfg = oracle_config(args);
            let res = pool
                .install(|| model_check_liveness(&problem, &sz, &cfg))
                .map_err(oracle_error)?;
            report.oracle.push(res.report);
            match res.verdict {
                LivenessVerdict::Holds => {
                    report.status = "holds";
                    EXIT_OK
                }
                LivenessVerdict::Violated(_) => {
                    report.status = "violated";
                    EXIT_REFUTED
                }
            }
        }
    };
    Ok((code, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::Parser;

    const PROBLEM: &str = "(sort a :finite)
(sort b :finite)
(constant c a :mutable)
(init true)
(transition true)
(property :q true)
";

    fn report() -> RunReport {
        RunReport {
            file: "x.lrk".into(),
            sha256: "00".into(),
            mode: "verify",
            solver: Some("Z3 version 4".into()),
            seed: 0,
            obligations: vec![
                ("init".into(), "valid".into(), None),
                ("conserved".into(), "counter-model".into(), Some("(model)".into())),
            ],
            oracle: Vec::new(),
            status: "refuted",
        }
    }

    #[test]
    fn text_lists_obligations_then_status() {
        let text = report().text();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines,
            [
                "problem: x.lrk sha256=00",
                "mode: verify",
                "solver: Z3 version 4",
                "init: valid",
                "conserved: counter-model",
                "status: refuted"
            ]
        );
    }

    #[test]
    fn json_keeps_models() {
        let v = report().json();
        assert_eq!(v["obligations"][1]["model"], "(model)");
        assert!(v["obligations"][0]["model"].is_null());
        assert_eq!(v["status"], "refuted");
    }

    #[test]
    fn unlisted_sorts_get_the_default_size() {
        let p = parse_problem(PROBLEM).unwrap();
        let args = Args::parse_from(["lrk", "oracle", "x.lrk", "--size", "b=3"]);
        let got = sizes(&args, &p).unwrap().resolve(p.sig()).unwrap();
        assert_eq!(got["a"], DEFAULT_SIZE);
        assert_eq!(got["b"], 3);
        let bad = Args::parse_from(["lrk", "oracle", "x.lrk", "--size", "b=0"]);
        assert!(matches!(sizes(&bad, &p), Err(Failure(EXIT_INPUT, _))));
    }
}
