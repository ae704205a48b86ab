// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

fn bench(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../benchmarks")
        .join(name)
        .display()
        .to_string()
}

fn lrk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lrk"))
        .args(args)
        .output()
        .expect("run lrk")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn verify_toy_succeeds() {
    let o = lrk(&["verify", &bench("toy_stab.lrk")]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(
        out.lines().filter(|l| l.ends_with(": valid")).count(),
        8,
        "{out}"
    );
    assert!(out.contains("status: verified"));
}

#[test]
fn verify_broken_toy_is_refuted() {
    let o = lrk(&["verify", &bench("broken_toy_stab.lrk")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("reduced@fair: counter-model"));
}

#[test]
fn verify_timeout_is_unknown() {
    let o = lrk(&[
        "verify",
        &bench("dijkstra_3.lrk"),
        "--premise",
        "reduced@always",
        "--timeout",
        "0.001",
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
}

#[test]
fn mc_toy_holds_within_bound() {
    let o = lrk(&["mc", &bench("toy_stab.lrk"), "--size", "machine=3"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let steps: usize = out
        .split("max steps to q: ")
        .nth(1)
        .and_then(|s| s.lines().next())
        .and_then(|s| s.trim().parse().ok())
        .expect("max steps line");
    assert!(steps <= 9, "{out}");
    assert!(out.contains("status: holds"));
}

#[test]
fn oracle_finds_broken_toy_falsifier() {
    let o = lrk(&[
        "oracle",
        &bench("broken_toy_stab.lrk"),
        "--size",
        "machine=3",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("premise reduced@fair: FAIL"), "{out}");
    assert!(out.contains("ranking-soundness: pass"), "{out}");
}

#[test]
fn input_errors_exit_three() {
    let toy = bench("toy_stab.lrk");
    let cases: Vec<Vec<&str>> = vec![
        vec!["verify", "/nonexistent.lrk"],
        vec!["verify", &toy, "--premise", "nonsense"],
        vec!["verify", &toy, "--solver", "/nonexistent/z3"],
        vec!["oracle", &toy, "--size", "widget=2"],
        vec!["mc", &toy, "--size", "machine=0"],
    ];
    for args in cases {
        assert_eq!(lrk(&args).status.code(), Some(3), "{args:?}");
    }
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.lrk");
    std::fs::write(&bad, "(sort s)\n(axiom (p x))\n").unwrap();
    assert_eq!(
        lrk(&["verify", bad.to_str().unwrap()]).status.code(),
        Some(3)
    );
}

#[test]
fn emitted_scripts_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let toy = bench("mutex_ring.lrk");
    for d in [&a, &b] {
        let o = lrk(&["emit", &toy, "--emit-smt", d.path().to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
    }
    let mut names: Vec<String> = std::fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names.len(), 8);
    assert_eq!(names[0], "01-init.smt2");
    for n in &names {
        let x = std::fs::read(a.path().join(n)).unwrap();
        let y = std::fs::read(b.path().join(n)).unwrap();
        assert_eq!(x, y, "{n}");
    }
}

#[test]
fn json_report_records_run() {
    let dir = tempfile::tempdir().unwrap();
    let toy = bench("toy_stab.lrk");
    let mut texts = Vec::new();
    for k in 0..2 {
        let path = dir.path().join(format!("r{k}.json"));
        let o = lrk(&["verify", &toy, "--report", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        texts.push(std::fs::read_to_string(path).unwrap());
    }
    assert_eq!(texts[0], texts[1]);
    let v: serde_json::Value = serde_json::from_str(&texts[0]).unwrap();
    assert_eq!(v["status"], "verified");
    assert!(
        v["solver"].as_str().unwrap().contains("Z3") || v["solver"].as_str().unwrap().contains('.')
    );
    let expected = hex::encode(Sha256::digest(std::fs::read(&toy).unwrap()));
    assert_eq!(v["sha256"], expected.as_str());
    assert_eq!(v["obligations"].as_array().unwrap().len(), 8);
}
