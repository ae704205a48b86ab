// SPDX-License-Identifier: Apache-2.0

//! Property tests over random formulas, structures and explicit systems.

use std::collections::BTreeMap;

use lrk_core::fol::{prime, retag, substitute, Formula, Signature, Tag, Term, Var};
use lrk_core::oracle::{
    eval, CompiledTerm, ExplicitSystem, FiniteStructure, Sizes, Space, Table, Vocab,
};
use lrk_core::problem::{parse_problem, unparse_problem};
use lrk_core::smt::{check_script, emit_formula_query, Outcome, SolverConfig};
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DECLS: &str = "(sort s :finite)
(constant c s)
(constant d s :mutable)
(relation r (s) :mutable)
(relation e (s s))
(function f (s) s :mutable)
";

fn sig() -> Signature {
    Signature::new()
        .sort("s", true)
        .constant("c", "s", false)
        .constant("d", "s", true)
        .relation("r", &["s"], true)
        .relation("e", &["s", "s"], false)
        .function("f", &["s"], "s", true)
}

fn var(name: &str) -> Var {
    Var::new(name, "s")
}

fn arb_var() -> impl Strategy<Value = Var> {
    prop_oneof![Just(var("x")), Just(var("y")), Just(var("z"))]
}

fn arb_term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        arb_var().prop_map(|v| Term::var(&v)),
        Just(Term::constant("c")),
        Just(Term::constant("d")),
    ];
    leaf.prop_recursive(2, 6, 1, |inner| inner.prop_map(|t| Term::app("f", vec![t])))
}

fn arb_atom() -> impl Strategy<Value = Formula> {
    prop_oneof![
        (arb_term(), arb_term()).prop_map(|(a, b)| Formula::Eq(a, b)),
        arb_term().prop_map(|t| Formula::rel("r", vec![t])),
        (arb_term(), arb_term()).prop_map(|(a, b)| Formula::rel("e", vec![a, b])),
    ]
}

fn arb_formula() -> impl Strategy<Value = Formula> {
    arb_atom().prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(|f| Formula::Not(Box::new(f))),
            prop::collection::vec(inner.clone(), 2..4).prop_map(Formula::And),
            prop::collection::vec(inner.clone(), 2..4).prop_map(Formula::Or),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Formula::Implies(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Formula::Iff(Box::new(a), Box::new(b))),
            (arb_var(), inner.clone()).prop_map(|(v, f)| Formula::Forall(vec![v], Box::new(f))),
            (arb_var(), inner).prop_map(|(v, f)| Formula::Exists(vec![v], Box::new(f))),
        ]
    })
}

fn close(f: Formula) -> Formula {
    Formula::Forall(vec![var("x"), var("y"), var("z")], Box::new(f))
}

fn structure(n: usize, seed: u64) -> FiniteStructure {
    let sig = sig();
    let space = Space::new(&sig, &Sizes::uniform(n), |_| true).unwrap();
    space.sample(&mut ChaCha8Rng::seed_from_u64(seed))
}

fn assignment(n: usize, seed: u64) -> BTreeMap<Var, usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    ["x", "y", "z"]
        .iter()
        .map(|v| (var(v), rng.gen_range(0..n)))
        .collect()
}

fn term_value(t: &Term, s: &FiniteStructure, a: &BTreeMap<Var, usize>) -> usize {
    let sig = sig();
    let vocab = Vocab::new(&sig, &s.sizes, &[Tag::Plain]);
    let free: Vec<Var> = a.keys().cloned().collect();
    let args: Vec<usize> = a.values().copied().collect();
    CompiledTerm::new(t, &vocab, &free)
        .unwrap()
        .eval(&vocab.tables(&[s]), &args)
}

proptest! {
    #![proptest_config(Config::with_cases(200))]

    #[test]
    fn substitution_lemma(f in arb_formula(), t in arb_term(), n in 1usize..=3, seed in any::<u64>()) {
        let sig = sig();
        let s = structure(n, seed);
        let a = assignment(n, seed);
        let map = BTreeMap::from([(var("x"), t.clone())]);
        let lhs = eval(&substitute(&f, &map), &sig, &s, &a).unwrap();
        let mut b = a.clone();
        b.insert(var("x"), term_value(&t, &s, &a));
        let rhs = eval(&f, &sig, &s, &b).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn retag_round_trips(f in arb_formula()) {
        let sig = sig();
        for tag in [Tag::Primed, Tag::Sub0, Tag::Sub1] {
            let there = retag(&f, &sig, Tag::Plain, tag, false).unwrap();
            let back = retag(&there, &sig, tag, Tag::Plain, false).unwrap();
            prop_assert_eq!(&back, &f);
        }
        let unprimed = retag(&prime(&f, &sig), &sig, Tag::Primed, Tag::Plain, false).unwrap();
        prop_assert_eq!(unprimed, f);
    }

    #[test]
    fn parse_unparse_round_trips(f in arb_formula(), g in arb_formula()) {
        let text = format!("{DECLS}(init true)\n(transition true)\n(property :q true)\n");
        let mut p = parse_problem(&text).unwrap();
        p.system.axioms.push(close(f.clone()));
        p.skeleton.rho = close(g);
        p.skeleton.trigger = close(Formula::not(f));
        let back = parse_problem(&unparse_problem(&p)).unwrap();
        prop_assert_eq!(back, p);
    }
}

/// The structure as a formula over named elements, so that the solver has a
/// single model up to isomorphism.
fn describe(s: &FiniteStructure, n: usize) -> (Signature, Formula) {
    let mut sig = sig();
    let el: Vec<Term> = (0..n).map(|i| Term::constant(&format!("el{i}"))).collect();
    for i in 0..n {
        sig = sig.constant(&format!("el{i}"), "s", false);
    }
    let mut parts = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            parts.push(Formula::neq(el[i].clone(), el[j].clone()));
        }
    }
    let x = var("w");
    parts.push(Formula::forall(
        vec![x.clone()],
        Formula::or(el.iter().map(|e| Formula::eq(Term::var(&x), e.clone()))),
    ));
    let t = |name: &str| -> &Table { &s.tables[name] };
    parts.push(Formula::eq(
        Term::constant("c"),
        el[t("c").values[0]].clone(),
    ));
    parts.push(Formula::eq(
        Term::constant("d"),
        el[t("d").values[0]].clone(),
    ));
    for i in 0..n {
        let ri = Formula::rel("r", vec![el[i].clone()]);
        parts.push(if t("r").get(&[i]) == 1 {
            ri
        } else {
            Formula::not(ri)
        });
        let fi = Term::app("f", vec![el[i].clone()]);
        parts.push(Formula::eq(fi, el[t("f").get(&[i])].clone()));
        for j in 0..n {
            let eij = Formula::rel("e", vec![el[i].clone(), el[j].clone()]);
            parts.push(if t("e").get(&[i, j]) == 1 {
                eij
            } else {
                Formula::not(eij)
            });
        }
    }
    (sig, Formula::and(parts))
}

/// Quantifiers expanded over the named elements.
fn ground(f: &Formula, el: &[Term]) -> Formula {
    let expand = |vs: &[Var], body: &Formula| -> Vec<Formula> {
        let mut out = vec![ground(body, el)];
        for v in vs {
            out = out
                .iter()
                .flat_map(|g| {
                    el.iter()
                        .map(move |e| substitute(g, &BTreeMap::from([(v.clone(), e.clone())])))
                })
                .collect();
        }
        out
    };
    match f {
        Formula::Forall(vs, body) => Formula::and(expand(vs, body)),
        Formula::Exists(vs, body) => Formula::or(expand(vs, body)),
        Formula::Not(g) => Formula::not(ground(g, el)),
        Formula::And(gs) => Formula::And(gs.iter().map(|g| ground(g, el)).collect()),
        Formula::Or(gs) => Formula::Or(gs.iter().map(|g| ground(g, el)).collect()),
        Formula::Implies(a, b) => {
            Formula::Implies(Box::new(ground(a, el)), Box::new(ground(b, el)))
        }
        Formula::Iff(a, b) => Formula::Iff(Box::new(ground(a, el)), Box::new(ground(b, el))),
        atom => atom.clone(),
    }
}

fn satisfiable(title: &str, f: &Formula, sig: &Signature, cfg: &SolverConfig) -> Option<bool> {
    match check_script(&emit_formula_query(title, f, sig, cfg), cfg)
        .unwrap()
        .outcome
    {
        Outcome::CounterModel(_) => Some(true),
        Outcome::Valid => Some(false),
        _ => None,
    }
}

/// The solver decides the quantified formula when it can; z3 gives up on
/// some forall-exists shapes, and those are checked on the grounded copy.
#[test]
fn evaluator_agrees_with_solver() {
    let mut runner = TestRunner::new_with_rng(
        Config::default(),
        TestRng::from_seed(RngAlgorithm::ChaCha, &[7; 32]),
    );
    let strategy = arb_formula();
    let cfg = SolverConfig {
        timeout: std::time::Duration::from_secs(5),
        ..SolverConfig::default()
    };
    let (mut sat, mut quantified) = (0, 0);
    for k in 0..100u64 {
        let f = close(strategy.new_tree(&mut runner).unwrap().current());
        let n = 1 + (k as usize % 3);
        let s = structure(n, k);
        let expected = eval(&f, &sig(), &s, &BTreeMap::new()).unwrap();
        let (sig2, pinned) = describe(&s, n);
        let got = match satisfiable(
            "agreement",
            &Formula::and2(pinned.clone(), f.clone()),
            &sig2,
            &cfg,
        ) {
            Some(b) => {
                quantified += 1;
                b
            }
            None => {
                let el: Vec<Term> = (0..n).map(|i| Term::constant(&format!("el{i}"))).collect();
                let g = Formula::and2(pinned, ground(&f, &el));
                satisfiable("agreement, grounded", &g, &sig2, &cfg)
                    .unwrap_or_else(|| panic!("solver undecided on grounded formula {k}"))
            }
        };
        assert_eq!(got, expected, "formula {k}: {f:?}\nstructure:\n{s}");
        sat += got as usize;
    }
    // both outcomes are exercised
    assert!(sat > 10 && sat < 90, "{sat} of 100 satisfied");
    assert!(
        quantified >= 50,
        "only {quantified} of 100 decided with quantifiers"
    );
}

/// Fair ¬q-lasso existence by transitive closure: some reachable p∧¬q state
/// reaches, through ¬q states, a ¬q state on a cycle whose strongly connected
/// part meets every fairness set.
fn naive_violation(sys: &ExplicitSystem) -> bool {
    let n = sys.init.len();
    let mut reach = vec![vec![false; n]; n];
    for (u, row) in reach.iter_mut().enumerate() {
        row[u] = true;
        for &v in &sys.succ[u] {
            row[v] = true;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if reach[i][k] && reach[k][j] {
                    reach[i][j] = true;
                }
            }
        }
    }
    // ¬q-only paths; plus1 excludes the empty path
    let nq = |u: usize| !sys.q[u];
    let mut inner = vec![vec![false; n]; n];
    for u in (0..n).filter(|&u| nq(u)) {
        for &v in &sys.succ[u] {
            if nq(v) {
                inner[u][v] = true;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if inner[i][k] && inner[k][j] {
                    inner[i][j] = true;
                }
            }
        }
    }
    let starts: Vec<usize> = (0..n)
        .filter(|&s| (0..n).any(|i| sys.init[i] && reach[i][s]) && sys.p[s] && nq(s))
        .collect();
    starts.iter().any(|&s| {
        (0..n).any(|t| {
            (t == s || inner[s][t])
                && inner[t][t]
                && sys
                    .fair
                    .iter()
                    .all(|set| (0..n).any(|u| set[u] && (u == t || (inner[t][u] && inner[u][t]))))
        })
    })
}

fn random_system(rng: &mut ChaCha8Rng) -> ExplicitSystem {
    let n = 3;
    fn flags(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Vec<bool> {
        (0..n).map(|_| rng.gen_bool(p)).collect()
    }
    let init = flags(rng, n, 0.5);
    let p = flags(rng, n, 0.6);
    let q = flags(rng, n, 0.3);
    let fair = (0..rng.gen_range(0..3))
        .map(|_| flags(rng, n, 0.5))
        .collect();
    let succ = (0..n)
        .map(|_| (0..n).filter(|_| rng.gen_bool(0.4)).collect())
        .collect();
    ExplicitSystem {
        init,
        succ,
        p,
        q,
        fair,
    }
}

#[test]
fn lasso_search_matches_closure() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut violated = 0;
    for k in 0..20 {
        let sys = random_system(&mut rng);
        let out = sys.analyze();
        let expected = naive_violation(&sys);
        assert_eq!(out.lasso.is_some(), expected, "system {k}: {sys:?}");
        if let Some(l) = &out.lasso {
            violated += 1;
            // the lasso is a real path through ¬q states back to its start
            let path: Vec<usize> = l.stem.iter().chain(&l.cycle).copied().collect();
            assert!(sys.init[path[0]]);
            for w in path.windows(2) {
                assert!(sys.succ[w[0]].contains(&w[1]));
            }
            let last = *l.cycle.last().unwrap();
            assert!(sys.succ[last].contains(&l.cycle[0]));
            assert!(l.cycle.iter().all(|&u| !sys.q[u]));
        }
    }
    assert!(violated > 0 && violated < 20, "{violated} of 20 violated");
}
