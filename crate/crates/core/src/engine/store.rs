//! The Boolean constraint store `H` and its initial contents.

use std::collections::BTreeSet;

use itertools::Itertools;

use super::{EngineError, EngineOptions, Subsumption};
use crate::formula::{Formula, Model, VarKind, Variable};
use crate::solver::{SatResult, Session, SolverConfig};
use crate::template::{lex_order_constraints, symbolic_disjunct, PredicateSet, TemplateAssignment, TemplateShape};

/// `H` as a list of conjuncts plus the auxiliary state copies it mentions.
#[derive(Clone, Debug, Default)]
pub struct ConstraintStore {
    pub constraints: Vec<Formula>,
    pub aux_vars: Vec<Variable>,
    /// Counterexamples `Σ_k`, in order.
    pub history: Vec<Model>,
    /// Minimal unsatisfiable predicate subsets found during precomputation.
    pub blocking_subsets: Vec<BTreeSet<usize>>,
    pub blocking_checks: usize,
    /// Blocking-clause precomputation ran out of budget.
    pub degraded: bool,
}

impl ConstraintStore {
    pub fn formula(&self) -> Formula {
        Formula::conj(self.constraints.iter().cloned())
    }

    pub fn is_propositional(&self) -> bool {
        self.aux_vars.is_empty() && self.constraints.iter().all(Formula::is_propositional)
    }

    /// `H(B)`. `None` when `H` has auxiliary variables (it is then an
    /// existential statement that needs a solver).
    pub fn holds(&self, b: &TemplateAssignment) -> Option<bool> {
        if !self.is_propositional() {
            return None;
        }
        let m = b.to_model();
        Some(self.constraints.iter().all(|c| c.eval(&m).unwrap_or(false)))
    }

    pub(crate) fn push(&mut self, f: Formula) {
        self.constraints.push(f);
    }

    /// Fresh copies of `vars` tagged `tag`; returned as (original, copy).
    pub(crate) fn aux_copy(&mut self, vars: &BTreeSet<Variable>, tag: &str) -> Vec<(Variable, Variable)> {
        let pairs: Vec<(Variable, Variable)> = vars
            .iter()
            .map(|v| (v.clone(), v.renamed(format!("{}@{tag}", v.name()), VarKind::Auxiliary)))
            .collect();
        self.aux_vars.extend(pairs.iter().map(|(_, c)| c.clone()));
        pairs
    }
}

pub(crate) fn rename_to(f: &Formula, pairs: &[(Variable, Variable)]) -> Formula {
    f.rename(&|v| pairs.iter().find(|(o, _)| o == v).map(|(_, c)| c.clone()))
}

/// Result of the blocking-subset search.
#[derive(Clone, Debug, Default)]
pub struct BlockingSearch {
    pub subsets: Vec<BTreeSet<usize>>,
    pub checks: usize,
    pub exhausted: bool,
}

/// Minimal predicate-index subsets of size ≤ `cap` whose conjunction is
/// unsatisfiable. Stops after `budget` solver checks.
pub fn blocking_subsets(
    preds: &PredicateSet,
    cap: usize,
    budget: usize,
    cfg: &SolverConfig,
) -> Result<BlockingSearch, EngineError> {
    let all = Formula::conj(preds.iter().cloned());
    let vars: Vec<Variable> = preds.vars().into_iter().collect();
    let mut s = Session::open(&cfg.suited(&all), &vars)?;
    let mut out = BlockingSearch::default();
    for size in 1..=cap.min(preds.len()) {
        for combo in (0..preds.len()).combinations(size) {
            let set: BTreeSet<usize> = combo.iter().copied().collect();
            if out.subsets.iter().any(|u| u.is_subset(&set)) {
                continue;
            }
            if out.checks >= budget {
                out.exhausted = true;
                return Ok(out);
            }
            out.checks += 1;
            let f = Formula::conj(combo.iter().map(|&j| preds.get(j).clone()));
            match s.check_with(&f)? {
                SatResult::Unsat => out.subsets.push(set),
                SatResult::Sat(_) => {}
                // Unknown: not provably empty, so no clause.
                SatResult::Unknown(_) => {}
            }
        }
    }
    Ok(out)
}

/// `H₁`: symmetry breaking, emptiness/subsumption constraints and
/// disjointness are handled here (disjointness lives in the VC; see
/// [`super::infer`]). Returns the store and any warnings.
pub fn initial_store(
    preds: &PredicateSet,
    shape: TemplateShape,
    opts: &EngineOptions,
    cfg: &SolverConfig,
) -> Result<(ConstraintStore, Vec<String>), EngineError> {
    let mut store = ConstraintStore::default();
    let mut warnings = vec![];
    if opts.symmetry && shape.n > 1 {
        store.push(lex_order_constraints(shape));
    }
    let state: BTreeSet<Variable> = preds.vars();
    match opts.subsumption {
        Subsumption::Off => {}
        Subsumption::BlockingClauses => {
            let search = blocking_subsets(preds, opts.blocking_cap, opts.blocking_budget, cfg)?;
            for i in 0..shape.n {
                for u in &search.subsets {
                    store.push(Formula::disj(
                        u.iter().map(|&j| Formula::not(Formula::var(&shape.var(i, j)))),
                    ));
                }
            }
            store.blocking_subsets = search.subsets;
            store.blocking_checks = search.checks;
            if search.exhausted {
                store.degraded = true;
                warnings.push(format!(
                    "blocking-clause budget of {} checks exhausted; falling back to per-disjunct satisfiability constraints",
                    opts.blocking_budget
                ));
                for i in 0..shape.n {
                    let pairs = store.aux_copy(&state, &format!("s{}", i + 1));
                    store.push(rename_to(&symbolic_disjunct(preds, shape, i), &pairs));
                }
            }
        }
        Subsumption::Full => {
            // One witness per disjunct: a point of C_i0 outside every other
            // disjunct, all evaluated at the same copy σ_i0.
            for i0 in 0..shape.n {
                let pairs = store.aux_copy(&state, &format!("s{}", i0 + 1));
                let mut parts = vec![rename_to(&symbolic_disjunct(preds, shape, i0), &pairs)];
                for i in (0..shape.n).filter(|&i| i != i0) {
                    parts.push(Formula::not(rename_to(&symbolic_disjunct(preds, shape, i), &pairs)));
                }
                store.push(Formula::conj(parts));
            }
        }
    }
    Ok((store, warnings))
}
