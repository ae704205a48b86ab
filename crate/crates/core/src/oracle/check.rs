// SPDX-License-Identifier: Apache-2.0

//! Empirical ranking soundness and bounded premise checking.

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::enumerate::{enumerate_structures, EnumRequest, Symbols};
use super::eval::{Compiled, Vocab};
use super::height::{height, HeightValue};
use super::structure::{tuples, FiniteStructure, Space};
use super::{CheckReport, Mode, OracleConfig, OracleError, Sizes};
use crate::fol::{Formula, Signature, Tag, Var};
use crate::problem::Problem;
use crate::ranking::ImplicitRanking;
use crate::vcgen::ProofObligation;

/// Immutable scaffolds satisfying the axioms, plus the space of mutable
/// states laid over each of them.
pub(crate) struct Universe {
    pub scaffolds: Vec<FiniteStructure>,
    pub scaffolds_sampled: bool,
    pub states: Space,
    axioms: Vec<Compiled>,
    vocab: Vocab,
}

impl Universe {
    pub fn new(
        sig: &Signature,
        axioms: &[Formula],
        sizes: &Sizes,
        cfg: &OracleConfig,
    ) -> Result<Self, OracleError> {
        let req = EnumRequest {
            symbols: Symbols::Immutable,
            axioms: axioms.to_vec(),
            ..EnumRequest::default()
        };
        let e = enumerate_structures(sig, sizes, &req, cfg)?;
        let scaffolds_sampled = e.sampled;
        let mut scaffolds: Vec<FiniteStructure> = e.collect();
        if scaffolds_sampled {
            scaffolds.sort_by(|a, b| format!("{a}").cmp(&format!("{b}")));
            scaffolds.dedup();
        }
        let states = Space::new(sig, sizes, |d| d.mutable)?;
        let vocab = Vocab::new(sig, states.sizes(), &[Tag::Plain]);
        let axioms = axioms
            .iter()
            .map(|a| Compiled::new(a, &vocab, &[]))
            .collect::<Result<_, _>>()?;
        Ok(Universe {
            scaffolds,
            scaffolds_sampled,
            states,
            axioms,
            vocab,
        })
    }

    pub fn admissible(&self, s: &FiniteStructure) -> bool {
        let t = self.vocab.tables(&[s]);
        self.axioms.iter().all(|a| a.eval(&t, &[]))
    }

    /// All admissible full structures over `scaffold`.
    pub fn states_over(&self, scaffold: &FiniteStructure) -> Vec<FiniteStructure> {
        self.states
            .iter()
            .map(|m| scaffold.merged(&m))
            .filter(|s| self.admissible(s))
            .collect()
    }

    pub fn random_state(&self, scaffold: &FiniteStructure, rng: &mut impl Rng) -> FiniteStructure {
        scaffold.merged(&self.states.sample(rng))
    }

    pub fn sizes(&self) -> &std::collections::BTreeMap<String, usize> {
        self.states.sizes()
    }

    /// Admissible states per scaffold, when listing them all stays within
    /// `budget`.
    pub fn pools(&self, budget: u128) -> Option<Vec<Vec<FiniteStructure>>> {
        if sat_mul(self.states.cases(), self.scaffolds.len() as u128) > budget {
            return None;
        }
        Some(
            self.scaffolds
                .par_iter()
                .map(|sc| self.states_over(sc))
                .collect(),
        )
    }

    /// Number of (pre, post) state pairs, each with `weight` variants.
    pub fn pair_cases(&self, pools: &Option<Vec<Vec<FiniteStructure>>>, weight: u128) -> u128 {
        match pools {
            Some(ps) => ps.iter().fold(0u128, |acc, p| {
                let k = sat_mul(p.len() as u128, weight);
                acc.saturating_add(sat_mul(k, k))
            }),
            None => {
                let k = sat_mul(self.states.cases(), weight);
                sat_mul(self.scaffolds.len() as u128, sat_mul(k, k))
            }
        }
    }

    /// States over the `k`-th scaffold, from `pools` or freshly listed.
    pub fn states_at<'p>(
        &self,
        pools: &'p Option<Vec<Vec<FiniteStructure>>>,
        k: usize,
    ) -> std::borrow::Cow<'p, [FiniteStructure]> {
        match pools {
            Some(ps) => std::borrow::Cow::Borrowed(&ps[k]),
            None => std::borrow::Cow::Owned(self.states_over(&self.scaffolds[k])),
        }
    }

    /// A random pair of admissible states over one scaffold.
    pub fn draw_pair(
        &self,
        pools: &Option<Vec<Vec<FiniteStructure>>>,
        rng: &mut impl Rng,
    ) -> Option<(FiniteStructure, FiniteStructure)> {
        match pools {
            Some(ps) => {
                let live: Vec<&Vec<FiniteStructure>> =
                    ps.iter().filter(|p| !p.is_empty()).collect();
                if live.is_empty() {
                    return None;
                }
                let p = live[rng.gen_range(0..live.len())];
                Some((
                    p[rng.gen_range(0..p.len())].clone(),
                    p[rng.gen_range(0..p.len())].clone(),
                ))
            }
            None => {
                if self.scaffolds.is_empty() {
                    return None;
                }
                let sc = &self.scaffolds[rng.gen_range(0..self.scaffolds.len())];
                let a = draw_admissible(self, sc, rng);
                let b = draw_admissible(self, sc, rng);
                a.zip(b)
            }
        }
    }
}

fn sampled_mode(cases: u128, cfg: &OracleConfig) -> Result<bool, OracleError> {
    match cfg.mode {
        Mode::Exhaustive if cases > cfg.budget => Err(OracleError::BudgetExceeded {
            cases,
            budget: cfg.budget,
        }),
        Mode::Exhaustive => Ok(false),
        Mode::Sample => Ok(true),
        Mode::Auto => Ok(cases > cfg.budget),
    }
}

fn sat_mul(a: u128, b: u128) -> u128 {
    a.saturating_mul(b)
}

/// Rejection sampling of an axiom-satisfying state over `sc`.
fn draw_admissible(
    uni: &Universe,
    sc: &FiniteStructure,
    rng: &mut impl Rng,
) -> Option<FiniteStructure> {
    (0..DRAW_TRIES)
        .map(|_| uni.random_state(sc, rng))
        .find(|s| uni.admissible(s))
}

const DRAW_TRIES: usize = 256;

/// A falsified soundness condition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SoundnessViolation {
    /// `reduced` or `conserved`.
    pub condition: String,
    pub lower: FiniteStructure,
    pub higher: FiniteStructure,
    pub lower_params: Vec<usize>,
    pub higher_params: Vec<usize>,
    pub lower_height: HeightValue<BigUint>,
    pub higher_height: HeightValue<BigUint>,
}

impl SoundnessViolation {
    pub fn render(&self, sig: &Signature) -> String {
        format!(
            "{} fails: height {} -> {} (params {:?} / {:?})\nlower:\n{}\nhigher:\n{}",
            self.condition,
            self.lower_height.value,
            self.higher_height.value,
            self.lower_params,
            self.higher_params,
            self.lower.render(sig),
            self.higher.render(sig)
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SoundnessReport {
    pub report: CheckReport,
    pub first_violation: Option<SoundnessViolation>,
}

#[derive(Default)]
struct Tally {
    cases: u64,
    skipped: u64,
    violations: u64,
    first: Option<SoundnessViolation>,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        self.cases += other.cases;
        self.skipped += other.skipped;
        self.violations += other.violations;
        if self.first.is_none() {
            self.first = other.first;
        }
        self
    }
}

type Heights = Vec<Option<HeightValue<BigUint>>>;

struct Judge<'a> {
    r: &'a ImplicitRanking,
    sig: &'a Signature,
    vocab: Vocab,
    lt: Compiled,
    le: Compiled,
}

impl Judge<'_> {
    /// Height per assignment; `None` where the structure is outside the
    /// oracle's support.
    fn heights(&self, s: &FiniteStructure, assigns: &[Vec<usize>]) -> Result<Heights, OracleError> {
        assigns
            .iter()
            .map(|a| {
                let v = self
                    .r
                    .params
                    .iter()
                    .cloned()
                    .zip(a.iter().copied())
                    .collect();
                match height::<BigUint>(&self.r.node, self.sig, s, &v) {
                    Ok(h) => Ok(Some(h)),
                    Err(OracleError::NonTotalOrder) => Ok(None),
                    Err(e) => Err(e),
                }
            })
            .collect()
    }

    #[allow(clippy::too_many_arguments)]
    fn judge(
        &self,
        t: &mut Tally,
        s0: &FiniteStructure,
        s1: &FiniteStructure,
        a0: &[usize],
        a1: &[usize],
        h0: &Option<HeightValue<BigUint>>,
        h1: &Option<HeightValue<BigUint>>,
    ) {
        t.cases += 1;
        let (Some(h0), Some(h1)) = (h0, h1) else {
            t.skipped += 1;
            return;
        };
        let tables = self.vocab.tables(&[s0, s1]);
        let args: Vec<usize> = a0.iter().chain(a1).copied().collect();
        let bad = if self.lt.eval(&tables, &args) && h0.value >= h1.value {
            Some("reduced")
        } else if self.le.eval(&tables, &args) && h0.value > h1.value {
            Some("conserved")
        } else {
            None
        };
        if let Some(cond) = bad {
            t.violations += 1;
            if t.first.is_none() {
                t.first = Some(SoundnessViolation {
                    condition: cond.into(),
                    lower: s0.clone(),
                    higher: s1.clone(),
                    lower_params: a0.to_vec(),
                    higher_params: a1.to_vec(),
                    lower_height: h0.clone(),
                    higher_height: h1.clone(),
                });
            }
        }
    }
}

/// Checks φ< ⇒ h(lower) < h(higher) and φ≤ ⇒ h(lower) ≤ h(higher) over pairs
/// of admissible structures sharing a scaffold, for all parameter pairs.
pub fn check_ranking_soundness(
    r: &ImplicitRanking,
    sig: &Signature,
    axioms: &[Formula],
    sizes: &Sizes,
    cfg: &OracleConfig,
) -> Result<SoundnessReport, OracleError> {
    let uni = Universe::new(sig, axioms, sizes, cfg)?;
    let sz = uni.sizes().clone();
    let param_sizes: Vec<usize> = r.params.iter().map(|p| sz[&p.sort]).collect();
    let assigns = tuples(&param_sizes);
    let vocab = Vocab::new(sig, &sz, &[Tag::Sub0, Tag::Sub1]);
    let free: Vec<Var> = r
        .params
        .iter()
        .map(|p| p.with_tag(Tag::Sub0))
        .chain(r.params.iter().map(|p| p.with_tag(Tag::Sub1)))
        .collect();
    let judge = Judge {
        r,
        sig,
        lt: Compiled::new(&r.reduced, &vocab, &free)?,
        le: Compiled::new(&r.conserved, &vocab, &free)?,
        vocab,
    };

    let pools = uni.pools(cfg.budget);
    let cases = uni.pair_cases(&pools, assigns.len() as u128);
    let sampled = sampled_mode(cases, cfg)?;

    let tally = if !sampled {
        let parts = (0..uni.scaffolds.len())
            .into_par_iter()
            .map(|k| -> Result<Tally, OracleError> {
                let states = uni.states_at(&pools, k);
                let hs: Vec<Heights> = states
                    .iter()
                    .map(|s| judge.heights(s, &assigns))
                    .collect::<Result<_, _>>()?;
                let mut t = Tally::default();
                for (s0, h0) in states.iter().zip(&hs) {
                    for (s1, h1) in states.iter().zip(&hs) {
                        for (a0, x0) in assigns.iter().zip(h0) {
                            for (a1, x1) in assigns.iter().zip(h1) {
                                judge.judge(&mut t, s0, s1, a0, a1, x0, x1);
                            }
                        }
                    }
                }
                Ok(t)
            })
            .collect::<Result<Vec<_>, _>>()?;
        parts.into_iter().fold(Tally::default(), Tally::merge)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut t = Tally::default();
        if !assigns.is_empty() {
            for _ in 0..cfg.samples {
                let Some((s0, s1)) = uni.draw_pair(&pools, &mut rng) else {
                    continue;
                };
                let a0 = &assigns[rng.gen_range(0..assigns.len())];
                let a1 = &assigns[rng.gen_range(0..assigns.len())];
                let h0 = judge.heights(&s0, std::slice::from_ref(a0))?;
                let h1 = judge.heights(&s1, std::slice::from_ref(a1))?;
                judge.judge(&mut t, &s0, &s1, a0, a1, &h0[0], &h1[0]);
            }
        }
        t
    };

    let mut notes = Vec::new();
    if uni.scaffolds_sampled {
        notes.push("immutable scaffolds sampled".to_string());
    }
    Ok(SoundnessReport {
        report: CheckReport {
            kind: "ranking-soundness".into(),
            sizes: sz,
            seed: cfg.seed,
            sampled,
            cases: tally.cases,
            skipped: tally.skipped,
            violations: tally.violations,
            witness: tally.first.as_ref().map(|w| w.render(sig)),
            notes,
        },
        first_violation: tally.first,
    })
}

/// A pre/post pair falsifying an obligation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Falsifier {
    pub pre: FiniteStructure,
    pub post: FiniteStructure,
}

impl Falsifier {
    pub fn render(&self, sig: &Signature) -> String {
        format!(
            "pre:\n{}\npost:\n{}",
            self.pre.render(sig),
            self.post.render(sig)
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PremiseCheck {
    pub report: CheckReport,
    pub falsifier: Option<Falsifier>,
}

/// Evaluates a two-state obligation on pairs of admissible structures
/// sharing a scaffold.
pub fn bounded_premise_check(
    ob: &ProofObligation,
    problem: &Problem,
    sizes: &Sizes,
    cfg: &OracleConfig,
) -> Result<PremiseCheck, OracleError> {
    let sig = problem.sig();
    let uni = Universe::new(sig, &problem.system.axioms, sizes, cfg)?;
    let sz = uni.sizes().clone();
    let vocab = Vocab::new(sig, &sz, &[Tag::Plain, Tag::Primed]);
    let c = Compiled::new(&ob.formula, &vocab, &[])?;
    let pools = uni.pools(cfg.budget);
    let cases = uni.pair_cases(&pools, 1);
    let sampled = sampled_mode(cases, cfg)?;

    let test =
        |pre: &FiniteStructure, post: &FiniteStructure| c.eval(&vocab.tables(&[pre, post]), &[]);
    let (mut n, mut bad, mut first) = (0u64, 0u64, None);
    if !sampled {
        let parts: Vec<(u64, u64, Option<Falsifier>)> = (0..uni.scaffolds.len())
            .into_par_iter()
            .map(|k| {
                let states = uni.states_at(&pools, k);
                let (mut n, mut bad, mut first) = (0u64, 0u64, None);
                for pre in states.iter() {
                    for post in states.iter() {
                        n += 1;
                        if !test(pre, post) {
                            bad += 1;
                            first.get_or_insert_with(|| Falsifier {
                                pre: pre.clone(),
                                post: post.clone(),
                            });
                        }
                    }
                }
                (n, bad, first)
            })
            .collect();
        for (pn, pb, pf) in parts {
            n += pn;
            bad += pb;
            if first.is_none() {
                first = pf;
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        for _ in 0..cfg.samples {
            let Some((pre, post)) = uni.draw_pair(&pools, &mut rng) else {
                continue;
            };
            n += 1;
            if !test(&pre, &post) {
                bad += 1;
                first.get_or_insert(Falsifier { pre, post });
            }
        }
    }

    let mut notes: Vec<String> = sig
        .sorts()
        .iter()
        .filter(|s| !s.finite)
        .map(|s| {
            format!(
                "sort `{}` is not declared finite; checked at size {}",
                s.name, sz[&s.name]
            )
        })
        .collect();
    if uni.scaffolds_sampled {
        notes.push("immutable scaffolds sampled".to_string());
    }
    Ok(PremiseCheck {
        report: CheckReport {
            kind: format!("premise {}", ob.name()),
            sizes: sz,
            seed: cfg.seed,
            sampled,
            cases: n,
            skipped: 0,
            violations: bad,
            witness: first.as_ref().map(|f: &Falsifier| f.render(sig)),
            notes,
        },
        falsifier: first,
    })
}
