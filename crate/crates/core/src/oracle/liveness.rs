// SPDX-License-Identifier: Apache-2.0

//! Explicit-state liveness checking with fairness.
//!
//! A violation of (⋀ᵢ ∀x̄ □◇rᵢ(x̄)) → □(p → ◇q) is a reachable p∧¬q state
//! from which a ¬q path reaches a strongly connected ¬q component that has
//! at least one edge and meets every rᵢ(ā).

use std::collections::{BTreeSet, VecDeque};

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use rayon::prelude::*;
use serde::Serialize;

use super::check::Universe;
use super::eval::{Compiled, Vocab};
use super::structure::{tuples, FiniteStructure};
use super::{CheckReport, Mode, OracleConfig, OracleError, Sizes};
use crate::fol::{Signature, Tag};
use crate::problem::Problem;

/// A finite transition graph with state labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExplicitSystem {
    pub init: Vec<bool>,
    pub succ: Vec<Vec<usize>>,
    pub p: Vec<bool>,
    pub q: Vec<bool>,
    /// One set per instantiated fairness condition; each must be visited
    /// infinitely often.
    pub fair: Vec<Vec<bool>>,
}

/// State indices: `stem` leads from an initial state to `cycle[0]`, and the
/// cycle returns from its last state to `cycle[0]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lasso {
    pub stem: Vec<usize>,
    pub cycle: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExplicitOutcome {
    pub lasso: Option<Lasso>,
    /// Longest run from a reachable p-state to a q-state; `None` when a ¬q
    /// cycle makes it unbounded.
    pub max_steps: Option<usize>,
    pub reachable: usize,
}

fn bfs(
    sources: &[usize],
    succ: &[Vec<usize>],
    allowed: impl Fn(usize) -> bool,
) -> Vec<Option<Option<usize>>> {
    // parent[v] = Some(None) for sources, Some(Some(u)) otherwise.
    let mut parent = vec![None; succ.len()];
    let mut queue = VecDeque::new();
    for &s in sources {
        if parent[s].is_none() {
            parent[s] = Some(None);
            queue.push_back(s);
        }
    }
    while let Some(u) = queue.pop_front() {
        for &v in &succ[u] {
            if parent[v].is_none() && allowed(v) {
                parent[v] = Some(Some(u));
                queue.push_back(v);
            }
        }
    }
    parent
}

fn path_to(parent: &[Option<Option<usize>>], mut v: usize) -> Vec<usize> {
    let mut out = vec![v];
    while let Some(Some(u)) = parent[v] {
        out.push(u);
        v = u;
    }
    out.reverse();
    out
}

/// Shortest path from `from` to `to` inside `within`, with at least one
/// edge. Excludes `from`, includes `to`.
fn hop(succ: &[Vec<usize>], within: &BTreeSet<usize>, from: usize, to: usize) -> Vec<usize> {
    let starts: Vec<usize> = succ[from]
        .iter()
        .copied()
        .filter(|v| within.contains(v))
        .collect();
    let parent = bfs(&starts, succ, |v| within.contains(&v));
    assert!(parent[to].is_some(), "target inside the component");
    path_to(&parent, to)
}

impl ExplicitSystem {
    pub fn len(&self) -> usize {
        self.succ.len()
    }

    pub fn is_empty(&self) -> bool {
        self.succ.is_empty()
    }

    pub fn analyze(&self) -> ExplicitOutcome {
        let n = self.len();
        let inits: Vec<usize> = (0..n).filter(|&s| self.init[s]).collect();
        let reach = bfs(&inits, &self.succ, |_| true);
        let reachable = reach.iter().filter(|r| r.is_some()).count();
        let starts: Vec<usize> = (0..n)
            .filter(|&s| reach[s].is_some() && self.p[s] && !self.q[s])
            .collect();
        let region = bfs(&starts, &self.succ, |v| !self.q[v]);
        let in_region = |s: usize| region[s].is_some();

        let mut g = DiGraph::<usize, ()>::new();
        let nodes: Vec<_> = (0..n).map(|s| g.add_node(s)).collect();
        for u in (0..n).filter(|&u| in_region(u)) {
            for &v in &self.succ[u] {
                if in_region(v) {
                    g.add_edge(nodes[u], nodes[v], ());
                }
            }
        }
        let mut sccs: Vec<Vec<usize>> = tarjan_scc(&g)
            .into_iter()
            .map(|c| {
                let mut c: Vec<usize> = c
                    .into_iter()
                    .map(|x| g[x])
                    .filter(|&s| in_region(s))
                    .collect();
                c.sort_unstable();
                c
            })
            .filter(|c| !c.is_empty())
            .collect();
        sccs.sort();
        let cyclic = |c: &[usize]| c.len() > 1 || self.succ[c[0]].contains(&c[0]);

        let fair_scc = sccs
            .iter()
            .find(|c| cyclic(c) && self.fair.iter().all(|f| c.iter().any(|&s| f[s])));
        let lasso = fair_scc.map(|c| {
            let within: BTreeSet<usize> = c.iter().copied().collect();
            let entry = c[0];
            let mut stem = path_to(&reach, path_to(&region, entry)[0]);
            stem.pop();
            stem.extend(path_to(&region, entry));
            stem.pop();
            let mut cycle = vec![entry];
            let mut cur = entry;
            for f in &self.fair {
                if cycle.iter().any(|&s| f[s]) {
                    continue;
                }
                let target = *c.iter().find(|&&s| f[s]).expect("fair component");
                let seg = hop(&self.succ, &within, cur, target);
                cycle.extend(&seg);
                cur = target;
            }
            let back = hop(&self.succ, &within, cur, entry);
            cycle.extend(&back[..back.len() - 1]);
            Lasso { stem, cycle }
        });

        let max_steps = if sccs.iter().any(|c| cyclic(c)) {
            None
        } else {
            // Tarjan yields components in reverse topological order.
            let mut steps = vec![0usize; n];
            let order: Vec<usize> = tarjan_scc(&g).into_iter().flatten().map(|x| g[x]).collect();
            for &u in &order {
                if !in_region(u) {
                    continue;
                }
                steps[u] = self.succ[u]
                    .iter()
                    .map(|&v| if self.q[v] { 1 } else { 1 + steps[v] })
                    .max()
                    .unwrap_or(0);
            }
            Some(starts.iter().map(|&s| steps[s]).max().unwrap_or(0))
        };
        ExplicitOutcome {
            lasso,
            max_steps,
            reachable,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LassoTrace {
    pub stem: Vec<FiniteStructure>,
    pub cycle: Vec<FiniteStructure>,
}

impl LassoTrace {
    pub fn render(&self, sig: &Signature) -> String {
        let mut out = Vec::new();
        for (i, s) in self.stem.iter().enumerate() {
            out.push(format!("stem {i}:\n{}", s.render(sig)));
        }
        for (i, s) in self.cycle.iter().enumerate() {
            out.push(format!("cycle {i}:\n{}", s.render(sig)));
        }
        out.join("\n")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum LivenessVerdict {
    Holds,
    Violated(LassoTrace),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LivenessResult {
    pub report: CheckReport,
    pub verdict: LivenessVerdict,
    /// Maximum over scaffolds; `None` when some ¬q cycle is reachable.
    pub max_steps: Option<usize>,
}

/// Builds the explicit system over each axiom-satisfying scaffold and looks
/// for a fair violating lasso.
pub fn model_check_liveness(
    problem: &Problem,
    sizes: &Sizes,
    cfg: &OracleConfig,
) -> Result<LivenessResult, OracleError> {
    let sig = problem.sig();
    let exhaustive = OracleConfig {
        mode: Mode::Exhaustive,
        ..cfg.clone()
    };
    let uni = Universe::new(sig, &problem.system.axioms, sizes, &exhaustive)?;
    let pairs = uni.states.cases().saturating_mul(uni.states.cases());
    if pairs > cfg.budget {
        return Err(OracleError::BudgetExceeded {
            cases: pairs,
            budget: cfg.budget,
        });
    }
    let sz = uni.sizes().clone();
    let one = Vocab::new(sig, &sz, &[Tag::Plain]);
    let two = Vocab::new(sig, &sz, &[Tag::Plain, Tag::Primed]);
    let init = Compiled::new(&problem.system.init, &one, &[])?;
    let p = Compiled::new(&problem.property.p, &one, &[])?;
    let q = Compiled::new(&problem.property.q, &one, &[])?;
    let tau = Compiled::new(&problem.system.trans, &two, &[])?;
    let mut fair = Vec::new();
    for f in &problem.property.fairness {
        let c = Compiled::new(&f.formula, &one, &f.params)?;
        let dims: Vec<usize> = f.params.iter().map(|v| sz[&v.sort]).collect();
        for a in tuples(&dims) {
            fair.push((c.clone(), a));
        }
    }

    let (mut states_seen, mut max_steps) = (0u64, Some(0usize));
    for sc in &uni.scaffolds {
        let states = uni.states_over(sc);
        states_seen += states.len() as u64;
        let label = |c: &Compiled, args: &[usize]| -> Vec<bool> {
            states
                .iter()
                .map(|s| c.eval(&one.tables(&[s]), args))
                .collect()
        };
        let succ: Vec<Vec<usize>> = states
            .par_iter()
            .map(|pre| {
                (0..states.len())
                    .filter(|&j| tau.eval(&two.tables(&[pre, &states[j]]), &[]))
                    .collect()
            })
            .collect();
        let sys = ExplicitSystem {
            init: label(&init, &[]),
            p: label(&p, &[]),
            q: label(&q, &[]),
            fair: fair.iter().map(|(c, a)| label(c, a)).collect(),
            succ,
        };
        let out = sys.analyze();
        max_steps = match (max_steps, out.max_steps) {
            (Some(a), Some(b)) => Some(a.max(b)),
            _ => None,
        };
        if let Some(l) = out.lasso {
            let pick = |ix: &[usize]| ix.iter().map(|&i| states[i].clone()).collect();
            let trace = LassoTrace {
                stem: pick(&l.stem),
                cycle: pick(&l.cycle),
            };
            return Ok(LivenessResult {
                report: CheckReport {
                    kind: "liveness".into(),
                    sizes: sz,
                    seed: cfg.seed,
                    sampled: false,
                    cases: states_seen,
                    skipped: 0,
                    violations: 1,
                    witness: Some(trace.render(sig)),
                    notes: vec![],
                },
                verdict: LivenessVerdict::Violated(trace),
                max_steps,
            });
        }
    }
    let notes = vec![match max_steps {
        Some(m) => format!("max steps to q: {m}"),
        None => "max steps to q: unbounded".into(),
    }];
    Ok(LivenessResult {
        report: CheckReport {
            kind: "liveness".into(),
            sizes: sz,
            seed: cfg.seed,
            sampled: false,
            cases: states_seen,
            skipped: 0,
            violations: 0,
            witness: None,
            notes,
        },
        verdict: LivenessVerdict::Holds,
        max_steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn self_loop_avoiding_q() {
        // 0 -> 1 -> 1, q never holds.
        let sys = ExplicitSystem {
            init: vec![true, false],
            succ: vec![vec![1], vec![1]],
            p: vec![true, true],
            q: vec![false, false],
            fair: vec![vec![true, true]],
        };
        let out = sys.analyze();
        let l = out.lasso.unwrap();
        assert_eq!(l.stem, vec![0]);
        assert_eq!(l.cycle, vec![1]);
        assert_eq!(out.max_steps, None);
    }

    #[test]
    fn unfair_cycle_is_not_a_violation() {
        // 0 <-> 1, 1 -> 2 (q); fairness demands visiting 2.
        let sys = ExplicitSystem {
            init: vec![true, false, false],
            succ: vec![vec![1], vec![0, 2], vec![2]],
            p: vec![true, false, false],
            q: vec![false, false, true],
            fair: vec![vec![false, false, true]],
        };
        let out = sys.analyze();
        assert_eq!(out.lasso, None);
        assert_eq!(out.max_steps, None);
    }

    #[test]
    fn chain_steps() {
        let sys = ExplicitSystem {
            init: vec![true, false, false, false],
            succ: vec![vec![1, 3], vec![2], vec![3], vec![3]],
            p: vec![true, false, false, false],
            q: vec![false, false, false, true],
            fair: vec![],
        };
        let out = sys.analyze();
        assert_eq!(out.lasso, None);
        assert_eq!(out.max_steps, Some(3));
    }
}
