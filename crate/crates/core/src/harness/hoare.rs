//! Standalone Hoare checking on fresh solver sessions.

use serde::{Deserialize, Serialize};

use crate::formula::{Formula, Model};
use crate::frontend::TransitionSystem;
use crate::solver::{check_entailment, Entailment, SolverConfig, SolverError};
use crate::template::{DnfInvariant, PredicateSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HoareCondition {
    /// `S ⇒ I`
    Initiation,
    /// `I ∧ C ∧ T ⇒ I′`
    Consecution,
    /// `I ∧ ¬C ⇒ P`
    Postcondition,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HoareVerdict {
    Verified,
    Failed {
        condition: HoareCondition,
        countermodel: Model,
    },
    Inconclusive(String),
}

impl HoareVerdict {
    pub fn is_verified(&self) -> bool {
        matches!(self, HoareVerdict::Verified)
    }
}

/// The three entailments, each decided on its own session.
pub fn hoare_conditions(ts: &TransitionSystem, inv: &Formula) -> [(HoareCondition, Formula, Formula); 3] {
    [
        (HoareCondition::Initiation, ts.init.clone(), inv.clone()),
        (
            HoareCondition::Consecution,
            Formula::conj([inv.clone(), ts.guard.clone(), ts.trans.clone()]),
            inv.prime(),
        ),
        (
            HoareCondition::Postcondition,
            Formula::conj([inv.clone(), Formula::not(ts.guard.clone())]),
            ts.post.clone(),
        ),
    ]
}

pub fn check_hoare(ts: &TransitionSystem, inv: &Formula, cfg: &SolverConfig) -> Result<HoareVerdict, SolverError> {
    for (condition, hyp, concl) in hoare_conditions(ts, inv) {
        match check_entailment(cfg, &hyp, &concl)? {
            Entailment::Holds => {}
            Entailment::Fails(countermodel) => return Ok(HoareVerdict::Failed { condition, countermodel }),
            Entailment::Unknown(r) => return Ok(HoareVerdict::Inconclusive(r)),
        }
    }
    Ok(HoareVerdict::Verified)
}

pub fn check_invariant(
    ts: &TransitionSystem,
    preds: &PredicateSet,
    inv: &DnfInvariant,
    cfg: &SolverConfig,
) -> Result<HoareVerdict, SolverError> {
    check_hoare(ts, &inv.formula(preds), cfg)
}

/// `a ⊆ b` as sets of states. `None` when the solver gives up.
pub fn includes(cfg: &SolverConfig, a: &Formula, b: &Formula) -> Result<Option<bool>, SolverError> {
    Ok(match check_entailment(cfg, a, b)? {
        Entailment::Holds => Some(true),
        Entailment::Fails(_) => Some(false),
        Entailment::Unknown(_) => None,
    })
}

pub use crate::solver::equivalent;
