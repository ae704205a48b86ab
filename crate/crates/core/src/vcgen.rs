// SPDX-License-Identifier: Apache-2.0

//! Proof obligations of the ranking-based liveness rule.
//!
//! For a closed ranking (φ≤, φ<), the obligations are
//!
//! | name | formula |
//! |---|---|
//! | `init` | ι → ρ |
//! | `consec` | ρ ∧ τ → ρ′ |
//! | `trigger` | ρ ∧ p ∧ ¬q → φ |
//! | `stability` | φ ∧ τ ∧ ¬q′ → φ′ |
//! | `conserved` | φ ∧ τ ∧ ¬q′ → φ̃≤ |
//! | `helpful-exists` | φ → ⋁ᵢ ∃x̄. ψᵢ(x̄) |
//! | `psi-stability@i` | ∀x̄. φ ∧ τ ∧ ¬q′ ∧ ψᵢ ∧ ¬rᵢ → ψᵢ′ |
//! | `reduced@i` | ∀x̄. φ ∧ τ ∧ ¬q′ ∧ ψᵢ ∧ rᵢ → φ̃< |
//!
//! where φ̃ maps the higher copy to the pre-state and the lower copy to the
//! post-state. Axioms, on both state copies, are conjoined to every
//! antecedent.

use std::fmt;

use thiserror::Error;

use crate::fol::{check_formula, free_vars, prime, retag, FolError, Formula, Signature, Tag};
use crate::problem::Problem;
use crate::ranking::{show_vars, ImplicitRanking};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PremiseKind {
    Init,
    Consec,
    Trigger,
    Stability,
    Conserved,
    HelpfulExists,
    PsiStability(String),
    Reduced(String),
}

impl PremiseKind {
    /// Position in the rule, 1 to 8.
    pub fn number(&self) -> u8 {
        match self {
            PremiseKind::Init => 1,
            PremiseKind::Consec => 2,
            PremiseKind::Trigger => 3,
            PremiseKind::Stability => 4,
            PremiseKind::Conserved => 5,
            PremiseKind::HelpfulExists => 6,
            PremiseKind::PsiStability(_) => 7,
            PremiseKind::Reduced(_) => 8,
        }
    }
}

impl fmt::Display for PremiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PremiseKind::Init => f.write_str("init"),
            PremiseKind::Consec => f.write_str("consec"),
            PremiseKind::Trigger => f.write_str("trigger"),
            PremiseKind::Stability => f.write_str("stability"),
            PremiseKind::Conserved => f.write_str("conserved"),
            PremiseKind::HelpfulExists => f.write_str("helpful-exists"),
            PremiseKind::PsiStability(n) => write!(f, "psi-stability@{n}"),
            PremiseKind::Reduced(n) => write!(f, "reduced@{n}"),
        }
    }
}

/// A closed formula over Σ⊎Σ′ that must be valid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofObligation {
    pub kind: PremiseKind,
    pub formula: Formula,
}

impl ProofObligation {
    /// Stable identifier, e.g. `reduced@fair`.
    pub fn name(&self) -> String {
        self.kind.to_string()
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum VcError {
    #[error("only closed rankings can be used in proofs; free parameters: {0}")]
    NotClosed(String),
    #[error("obligation `{0}` is not closed")]
    OpenObligation(String),
    #[error(transparent)]
    Fol(#[from] FolError),
}

/// φ̃: higher copy → pre-state, lower copy → post-state.
pub fn ranking_to_transition(f: &Formula, sig: &Signature) -> Result<Formula, FolError> {
    let g = retag(f, sig, Tag::Sub1, Tag::Plain, false)?;
    retag(&g, sig, Tag::Sub0, Tag::Primed, false)
}

pub fn generate_premises(
    problem: &Problem,
    ranking: &ImplicitRanking,
) -> Result<Vec<ProofObligation>, VcError> {
    if !ranking.is_closed() {
        return Err(VcError::NotClosed(show_vars(&ranking.params)));
    }
    let sig = problem.sig();
    let sys = &problem.system;
    let prop = &problem.property;
    let sk = &problem.skeleton;

    let axioms = Formula::and(sys.axioms.iter().cloned());
    let axioms = Formula::and2(axioms.clone(), prime(&axioms, sig));
    let ante = |parts: Vec<Formula>| Formula::and(std::iter::once(axioms.clone()).chain(parts));
    let not_q_post = Formula::not(prime(&prop.q, sig));
    let phi = &sk.trigger;
    let step = vec![phi.clone(), sys.trans.clone(), not_q_post];
    let le = ranking_to_transition(&ranking.conserved, sig)?;
    let lt = ranking_to_transition(&ranking.reduced, sig)?;

    let mut obs = vec![
        (
            PremiseKind::Init,
            Formula::implies(ante(vec![sys.init.clone()]), sk.rho.clone()),
        ),
        (
            PremiseKind::Consec,
            Formula::implies(
                ante(vec![sk.rho.clone(), sys.trans.clone()]),
                prime(&sk.rho, sig),
            ),
        ),
        (
            PremiseKind::Trigger,
            Formula::implies(
                ante(vec![
                    sk.rho.clone(),
                    prop.p.clone(),
                    Formula::not(prop.q.clone()),
                ]),
                phi.clone(),
            ),
        ),
        (
            PremiseKind::Stability,
            Formula::implies(ante(step.clone()), prime(phi, sig)),
        ),
        (
            PremiseKind::Conserved,
            Formula::implies(ante(step.clone()), le),
        ),
        (
            PremiseKind::HelpfulExists,
            Formula::implies(
                ante(vec![phi.clone()]),
                Formula::or(
                    sk.helpful
                        .iter()
                        .map(|h| Formula::exists(h.params.clone(), h.formula.clone())),
                ),
            ),
        ),
    ];
    for (fair, h) in prop.fairness.iter().zip(&sk.helpful) {
        let psi = h.formula.clone();
        let r = fair.formula.clone();
        let mut pre = step.clone();
        pre.push(psi.clone());
        let mut stay = pre.clone();
        stay.push(Formula::not(r.clone()));
        obs.push((
            PremiseKind::PsiStability(fair.name.clone()),
            Formula::forall(
                fair.params.clone(),
                Formula::implies(ante(stay), prime(&psi, sig)),
            ),
        ));
        let mut fire = pre;
        fire.push(r);
        obs.push((
            PremiseKind::Reduced(fair.name.clone()),
            Formula::forall(
                fair.params.clone(),
                Formula::implies(ante(fire), lt.clone()),
            ),
        ));
    }
    // Order: premises 1-6, then 7 for every fairness, then 8 for every fairness.
    obs.sort_by_key(|(k, _)| k.number());
    obs.into_iter()
        .map(|(kind, formula)| {
            if !free_vars(&formula).is_empty() {
                return Err(VcError::OpenObligation(kind.to_string()));
            }
            check_formula(&formula, sig).map_err(FolError::from)?;
            Ok(ProofObligation { kind, formula })
        })
        .collect()
}

/// ¬formula, without stacking double negations.
pub fn premise_negation(ob: &ProofObligation) -> Formula {
    match &ob.formula {
        Formula::Not(g) => (**g).clone(),
        f => Formula::not(f.clone()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negation_basics() {
        let ob = ProofObligation {
            kind: PremiseKind::Init,
            formula: Formula::implies(Formula::True, Formula::True),
        };
        assert_eq!(premise_negation(&ob), Formula::False);
        let p = Formula::rel("p", vec![]);
        let ob = ProofObligation {
            kind: PremiseKind::Init,
            formula: Formula::not(p.clone()),
        };
        assert_eq!(premise_negation(&ob), p);
    }
}
