// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::time::Duration;

use lrk_core::problem::{parse_problem, Problem};
use lrk_core::ranking::elaborate;
use lrk_core::smt::{
    check, check_script, discharge_all, emit_query, DischargeReport, Outcome, Overall, SmtError,
    SolverConfig, UnknownReason,
};
use lrk_core::vcgen::{generate_premises, ProofObligation};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn bench(name: &str) -> (Problem, Vec<ProofObligation>) {
    let path = root().join("../../benchmarks").join(name);
    let p = parse_problem(&std::fs::read_to_string(path).unwrap()).unwrap();
    let r = elaborate(p.skeleton.ranking.as_ref().unwrap(), p.sig()).unwrap();
    let obs = generate_premises(&p, &r).unwrap();
    (p, obs)
}

fn outcomes(d: &DischargeReport) -> Vec<(String, Outcome)> {
    d.entries
        .iter()
        .map(|e| (e.name.clone(), e.verdict.as_ref().unwrap().outcome.clone()))
        .collect()
}

#[test]
fn toy_verifies() {
    let (p, obs) = bench("toy_stab.lrk");
    let d = discharge_all(&obs, p.sig(), &SolverConfig::default(), 2);
    let names: Vec<&str> = d.entries.iter().map(|e| e.name.as_str()).collect();
    assert_eq!(
        names,
        [
            "init",
            "consec",
            "trigger",
            "stability",
            "conserved",
            "helpful-exists",
            "psi-stability@fair",
            "reduced@fair"
        ]
    );
    assert_eq!(d.overall(), Overall::Verified, "{:?}", outcomes(&d));
}

#[test]
fn broken_toy_is_refuted() {
    let (p, obs) = bench("broken_toy_stab.lrk");
    let d = discharge_all(&obs, p.sig(), &SolverConfig::default(), 2);
    assert_eq!(d.overall(), Overall::Failed);
    for (name, o) in outcomes(&d) {
        let refuted = matches!(o, Outcome::CounterModel(_));
        assert_eq!(
            refuted,
            name == "conserved" || name == "reduced@fair",
            "{name}: {o}"
        );
    }
}

#[test]
fn toy_conserved_script_matches_golden() {
    let (p, obs) = bench("toy_stab.lrk");
    let golden =
        std::fs::read_to_string(root().join("tests/golden/toy_stab-conserved.smt2")).unwrap();
    let cfg = SolverConfig::default();
    assert_eq!(emit_query(&obs[4], p.sig(), &cfg), golden);
    assert_eq!(check_script(&golden, &cfg).unwrap().outcome, Outcome::Valid);
}

#[test]
fn tiny_timeout_is_unknown() {
    let (p, obs) = bench("dijkstra_3.lrk");
    let reduced = obs
        .iter()
        .find(|o| o.name().starts_with("reduced"))
        .unwrap();
    let cfg = SolverConfig {
        timeout: Duration::from_millis(1),
        ..SolverConfig::default()
    };
    let v = check(reduced, p.sig(), &cfg).unwrap();
    assert_eq!(v.outcome, Outcome::Unknown(UnknownReason::Timeout));
}

#[test]
fn worker_count_does_not_change_reports() {
    let (p, obs) = bench("binary_counter.lrk");
    let cfg = SolverConfig::default();
    let one = discharge_all(&obs, p.sig(), &cfg, 1);
    let four = discharge_all(&obs, p.sig(), &cfg, 4);
    assert_eq!(outcomes(&one), outcomes(&four));
}

#[test]
fn missing_solver_is_a_launch_failure() {
    let (p, obs) = bench("toy_stab.lrk");
    let cfg = SolverConfig {
        solver_path: "/nonexistent/z3".into(),
        ..SolverConfig::default()
    };
    let e = check(&obs[0], p.sig(), &cfg).unwrap_err();
    assert!(matches!(e, SmtError::SolverLaunchFailure { .. }), "{e}");
}
