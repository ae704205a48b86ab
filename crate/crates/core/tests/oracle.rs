// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::path::PathBuf;

use lrk_core::oracle::{
    bounded_premise_check, check_ranking_soundness, enumerate_structures, eval,
    model_check_liveness, EnumRequest, FiniteStructure, LivenessVerdict, OracleConfig, Sizes,
    Space, Symbols, Table,
};
use lrk_core::problem::{parse_problem, Problem};
use lrk_core::ranking::elaborate;
use lrk_core::vcgen::generate_premises;

fn source(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../benchmarks")
        .join(name);
    std::fs::read_to_string(path).unwrap()
}

fn bench(name: &str) -> Problem {
    parse_problem(&source(name)).unwrap()
}

fn strict_order(n: usize) -> Table {
    let pairs: Vec<Vec<usize>> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| vec![i, j]))
        .collect();
    Table::relation(vec![n, n], &pairs)
}

#[test]
fn toy_structures_with_fixed_order() {
    let p = bench("toy_stab.lrk");
    let n = 2;
    let sizes = Sizes::uniform(n);
    let fixed = FiniteStructure::new(BTreeMap::from([("machine".to_string(), n)]))
        .with("lt", strict_order(n));
    let req = EnumRequest {
        symbols: Symbols::All,
        fixed: fixed.clone(),
        axioms: p.system.axioms.clone(),
    };
    let got: Vec<FiniteStructure> =
        enumerate_structures(p.sig(), &sizes, &req, &OracleConfig::default())
            .unwrap()
            .collect();

    // brute force over every table, filtered by the axioms
    let space = Space::new(p.sig(), &sizes, |d| d.name != "lt").unwrap();
    let brute = space
        .iter()
        .map(|s| s.merged(&fixed))
        .filter(|s| {
            p.system
                .axioms
                .iter()
                .all(|a| eval(a, p.sig(), s, &BTreeMap::new()).unwrap())
        })
        .count();
    assert_eq!(brute, 8);
    assert_eq!(got.len(), brute);
}

#[test]
fn small_benchmarks_rank_soundly() {
    for name in ["toy_stab.lrk", "binary_counter.lrk", "dijkstra_k_a.lrk"] {
        let p = bench(name);
        let r = elaborate(p.skeleton.ranking.as_ref().unwrap(), p.sig()).unwrap();
        for n in 1..=2 {
            let rep = check_ranking_soundness(
                &r,
                p.sig(),
                &p.system.axioms,
                &Sizes::uniform(n),
                &OracleConfig::default(),
            )
            .unwrap();
            assert!(!rep.report.sampled, "{name} n={n}");
            assert!(rep.report.cases > 0, "{name} n={n}");
            assert_eq!(
                rep.report.violations, 0,
                "{name} n={n}: {:?}",
                rep.first_violation
            );
        }
    }
}

#[test]
fn toy_step_counts() {
    let p = bench("toy_stab.lrk");
    let steps: Vec<Option<usize>> = (1..=3)
        .map(|n| {
            let mc =
                model_check_liveness(&p, &Sizes::uniform(n), &OracleConfig::default()).unwrap();
            assert_eq!(mc.verdict, LivenessVerdict::Holds);
            mc.max_steps
        })
        .collect();
    assert_eq!(steps, vec![Some(0), Some(1), Some(3)]);
}

#[test]
fn unreachable_goal_gives_a_lasso() {
    let text = source("toy_stab.lrk").replace("(property :q (= skd bot))", "(property :q false)");
    let p = parse_problem(&text).unwrap();
    let mc = model_check_liveness(&p, &Sizes::uniform(2), &OracleConfig::default()).unwrap();
    let LivenessVerdict::Violated(trace) = mc.verdict else {
        panic!("expected a violation");
    };
    assert!(!trace.cycle.is_empty());
    assert_eq!(mc.max_steps, None);
}

#[test]
fn broken_toy_needs_three_machines() {
    let p = bench("broken_toy_stab.lrk");
    let r = elaborate(p.skeleton.ranking.as_ref().unwrap(), p.sig()).unwrap();
    let obs = generate_premises(&p, &r).unwrap();
    let conserved = obs.iter().find(|o| o.name() == "conserved").unwrap();
    let cfg = OracleConfig::default();
    let two = bounded_premise_check(conserved, &p, &Sizes::uniform(2), &cfg).unwrap();
    assert!(two.report.passed());
    let three = bounded_premise_check(conserved, &p, &Sizes::uniform(3), &cfg).unwrap();
    assert!(!three.report.passed());
    let f = three.falsifier.expect("falsifier");
    assert_eq!(f.pre.sizes["machine"], 3);
}
