//! Independent checks: exhaustive oracle, random simulation, Hoare
//! checking and automaton acceptance of concrete runs.

mod hoare;
mod oracle;
mod simulate;

use std::collections::BTreeSet;

pub use hoare::{check_hoare, check_invariant, equivalent, hoare_conditions, includes, HoareCondition, HoareVerdict};
pub use oracle::{
    brute_force_minimal, OracleEntry, OracleError, OracleOptions, OracleReport, RegionGraph, ORACLE_CAP,
};
pub use simulate::{simulate, simulate_runs, SimError, Trace, INPUT_BOUND};

use crate::automaton::AbstractAutomaton;

/// The sets of automaton states consistent with each prefix of `trace`, or
/// the first index at which the set became empty.
pub fn acceptance_run(aut: &AbstractAutomaton, trace: &Trace) -> Result<Vec<BTreeSet<usize>>, usize> {
    let holds = |q: usize, s: &crate::formula::Model| aut.states[q].formula.eval(s) == Ok(true);
    let mut cur: BTreeSet<usize> = aut.initial.iter().copied().filter(|&q| holds(q, &trace.states[0])).collect();
    if cur.is_empty() {
        return Err(0);
    }
    let mut out = vec![cur.clone()];
    for (t, io) in trace.io.iter().enumerate() {
        let next: BTreeSet<usize> = aut
            .edges
            .iter()
            .filter(|e| cur.contains(&e.from) && e.guard.eval(io) == Ok(true) && holds(e.to, &trace.states[t + 1]))
            .map(|e| e.to)
            .collect();
        if next.is_empty() {
            return Err(t + 1);
        }
        out.push(next.clone());
        cur = next;
    }
    Ok(out)
}

/// Nondeterministic membership of a concrete run in the automaton.
pub fn check_acceptance(aut: &AbstractAutomaton, trace: &Trace) -> bool {
    acceptance_run(aut, trace).is_ok()
}
