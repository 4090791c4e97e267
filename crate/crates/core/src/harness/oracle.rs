//! Exhaustive template enumeration, decided exactly on the predicate
//! abstraction.
//!
//! Every template instance is a union of *regions* — satisfiable truth
//! vectors of the predicates — so its set of states, its initiation, its
//! closure under the transition relation and its postcondition check are all
//! determined by a finite region graph computed once with the solver.

use std::collections::BTreeSet;

use fixedbitset::FixedBitSet;
use itertools::Itertools;
use thiserror::Error;

use super::hoare::{check_invariant, HoareVerdict};
use crate::engine::{EngineOptions, Subsumption};
use crate::formula::{Formula, Variable};
use crate::frontend::TransitionSystem;
use crate::par::{self, Parallelism};
use crate::solver::{SatResult, Session, SolverConfig, SolverError};
use crate::template::{is_lex_increasing, DnfInvariant, PredicateSet, TemplateAssignment, TemplateShape};

/// Largest `n·m` the oracle will enumerate.
pub const ORACLE_CAP: usize = 20;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("n·m = {0} exceeds the oracle cap of {ORACLE_CAP}")]
    CapExceeded(usize),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("solver gave up while building the region graph: {0}")]
    Unknown(String),
    #[error("minimal candidate {0} failed the direct Hoare check")]
    Disagreement(String),
}

/// Structural restrictions mirrored from the engine.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleOptions {
    pub symmetry: bool,
    pub subsumption: Subsumption,
    pub blocking_cap: usize,
    pub disjoint: bool,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions::from(&EngineOptions::default())
    }
}

impl From<&EngineOptions> for OracleOptions {
    fn from(o: &EngineOptions) -> Self {
        OracleOptions {
            symmetry: o.symmetry,
            subsumption: o.subsumption,
            blocking_cap: o.blocking_cap,
            disjoint: o.disjoint,
        }
    }
}

/// The finite abstraction: regions, initial regions, regions violating the
/// postcondition and the region successor relation under `C ∧ T`.
#[derive(Clone, Debug)]
pub struct RegionGraph {
    pub m: usize,
    /// Bit `j` set when `π_j` holds in the region.
    pub regions: Vec<u32>,
    pub init: FixedBitSet,
    pub bad: FixedBitSet,
    pub succ: Vec<FixedBitSet>,
}

fn region_formula(preds: &PredicateSet, bits: u32) -> Formula {
    Formula::and((0..preds.len()).map(|j| {
        let p = preds.get(j).clone();
        if bits >> j & 1 == 1 {
            p
        } else {
            Formula::not(p)
        }
    }))
}

fn decide(r: SatResult) -> Result<bool, OracleError> {
    match r {
        SatResult::Sat(_) => Ok(true),
        SatResult::Unsat => Ok(false),
        SatResult::Unknown(why) => Err(OracleError::Unknown(why)),
    }
}

fn enumerate_regions(
    s: &mut Session,
    preds: &PredicateSet,
    j: usize,
    bits: u32,
    out: &mut Vec<u32>,
) -> Result<(), OracleError> {
    if j == preds.len() {
        out.push(bits);
        return Ok(());
    }
    for value in [true, false] {
        let lit = if value {
            preds.get(j).clone()
        } else {
            Formula::not(preds.get(j).clone())
        };
        s.push()?;
        s.assert_formula(&lit)?;
        let sat = decide(s.check_sat()?);
        let res = match sat {
            Ok(true) => enumerate_regions(s, preds, j + 1, bits | (value as u32) << j, out),
            Ok(false) => Ok(()),
            Err(e) => Err(e),
        };
        s.pop()?;
        res?;
    }
    Ok(())
}

impl RegionGraph {
    pub fn build(
        ts: &TransitionSystem,
        preds: &PredicateSet,
        cfg: &SolverConfig,
        par: Parallelism,
    ) -> Result<RegionGraph, OracleError> {
        assert!(preds.len() <= 32, "region bits are stored in a u32");
        let state_vars: Vec<Variable> = preds.vars().into_iter().chain(ts.state.iter().cloned()).unique().collect();
        let all = Formula::conj(preds.iter().cloned());
        let mut s = Session::open(&cfg.suited(&all), &state_vars)?;
        let mut regions = vec![];
        enumerate_regions(&mut s, preds, 0, 0, &mut regions)?;
        drop(s);
        let k = regions.len();
        let forms: Vec<Formula> = regions.iter().map(|&r| region_formula(preds, r)).collect();

        let quantified = ts.quantified_vars();
        let step = Formula::conj([ts.guard.clone(), ts.trans.clone()]);
        let cfg_q = cfg.suited(&Formula::conj([step.clone(), all.clone(), ts.init.clone()]));
        let idx: Vec<usize> = (0..k).collect();

        let rows = par::map(par, &idx, |&a| -> Result<(bool, bool, FixedBitSet), OracleError> {
            let mut s = Session::open(&cfg_q, &quantified)?;
            let init = decide(s.check_with(&Formula::conj([ts.init.clone(), forms[a].clone()]))?)?;
            let bad = ts.has_postcondition()
                && decide(s.check_with(&Formula::conj([
                    forms[a].clone(),
                    Formula::not(ts.guard.clone()),
                    Formula::not(ts.post.clone()),
                ]))?)?;
            let mut succ = FixedBitSet::with_capacity(k);
            s.push()?;
            s.assert_formula(&Formula::conj([forms[a].clone(), step.clone()]))?;
            if decide(s.check_sat()?)? {
                for (b, fb) in forms.iter().enumerate() {
                    if decide(s.check_with(&fb.prime())?)? {
                        succ.insert(b);
                    }
                }
            }
            s.pop()?;
            Ok((init, bad, succ))
        });
        let mut init = FixedBitSet::with_capacity(k);
        let mut bad = FixedBitSet::with_capacity(k);
        let mut succ = Vec::with_capacity(k);
        for (a, row) in rows.into_iter().enumerate() {
            let (i, b, s) = row?;
            init.set(a, i);
            bad.set(a, b);
            succ.push(s);
        }
        Ok(RegionGraph {
            m: preds.len(),
            regions,
            init,
            bad,
            succ,
        })
    }

    /// The regions a conjunction of predicate indices covers.
    pub fn conjunction_set(&self, mask: u32) -> FixedBitSet {
        let mut out = FixedBitSet::with_capacity(self.regions.len());
        for (k, &r) in self.regions.iter().enumerate() {
            if r & mask == mask {
                out.insert(k);
            }
        }
        out
    }

    pub fn invariant_set(&self, inv: &DnfInvariant) -> FixedBitSet {
        let mut out = FixedBitSet::with_capacity(self.regions.len());
        for d in &inv.disjuncts {
            out.union_with(&self.conjunction_set(mask_of(d)));
        }
        out
    }

    /// Initiation, closure and postcondition, decided on the regions.
    pub fn is_invariant(&self, set: &FixedBitSet) -> bool {
        self.init.is_subset(set)
            && self.bad.is_disjoint(set)
            && set.ones().all(|a| self.succ[a].is_subset(set))
    }

    /// Minimal predicate subsets (size ≤ `cap`) no region satisfies.
    pub fn unsat_subsets(&self, cap: usize) -> Vec<u32> {
        let mut found: Vec<u32> = vec![];
        for size in 1..=cap.min(self.m) {
            for combo in (0..self.m).combinations(size) {
                let mask = combo.iter().fold(0u32, |acc, &j| acc | 1 << j);
                if found.iter().any(|&u| u & mask == u) {
                    continue;
                }
                if !self.regions.iter().any(|&r| r & mask == mask) {
                    found.push(mask);
                }
            }
        }
        found
    }
}

fn mask_of(d: &BTreeSet<usize>) -> u32 {
    d.iter().fold(0u32, |acc, &j| acc | 1 << j)
}

fn row_mask(b: &TemplateAssignment, i: usize) -> u32 {
    b.row(i).iter().enumerate().fold(0u32, |acc, (j, &x)| acc | (x as u32) << j)
}

#[derive(Clone, Debug)]
pub struct OracleEntry {
    /// One representative assignment.
    pub assignment: TemplateAssignment,
    pub invariant: DnfInvariant,
    pub regions: FixedBitSet,
}

#[derive(Clone, Debug)]
pub struct OracleReport {
    pub shape: TemplateShape,
    pub graph: RegionGraph,
    pub examined: u64,
    /// Assignments that passed every check, in enumeration order.
    pub survivors: Vec<TemplateAssignment>,
    /// Inclusion-minimal survivors, one per distinct set of states.
    pub minimal: Vec<OracleEntry>,
}

impl OracleReport {
    /// Whether `set` is one of the minimal sets.
    pub fn is_minimal_set(&self, set: &FixedBitSet) -> bool {
        self.minimal.iter().any(|e| &e.regions == set)
    }

    /// Whether some survivor denotes a set strictly inside `set`.
    pub fn has_strictly_smaller(&self, set: &FixedBitSet) -> bool {
        self.survivors.iter().any(|b| {
            let s = self.graph.invariant_set(&DnfInvariant::from_assignment(b));
            s.is_subset(set) && &s != set
        })
    }
}

/// Enumerate all `2^{n·m}` assignments (rows strictly increasing when
/// symmetry is on), keep those that are invariants and satisfy the
/// structural restrictions, and return the inclusion-minimal ones.
pub fn brute_force_minimal(
    ts: &TransitionSystem,
    preds: &PredicateSet,
    n: usize,
    opts: OracleOptions,
    cfg: &SolverConfig,
    par: Parallelism,
) -> Result<OracleReport, OracleError> {
    let shape = TemplateShape::new(n, preds.len());
    if shape.bools() > ORACLE_CAP {
        return Err(OracleError::CapExceeded(shape.bools()));
    }
    let graph = RegionGraph::build(ts, preds, cfg, par)?;
    let blocked = match opts.subsumption {
        Subsumption::BlockingClauses => graph.unsat_subsets(opts.blocking_cap),
        _ => vec![],
    };
    let total = 1u64 << shape.bools();
    let survivors: Vec<(TemplateAssignment, FixedBitSet)> = par::filter_map_range(par, 0..total, |code| {
        let b = TemplateAssignment::from_code(shape, code);
        if opts.symmetry && !is_lex_increasing(&b) {
            return None;
        }
        let masks: Vec<u32> = (0..n).map(|i| row_mask(&b, i)).collect();
        if masks.iter().any(|&r| blocked.iter().any(|&u| r & u == u)) {
            return None;
        }
        let sets: Vec<FixedBitSet> = masks.iter().map(|&r| graph.conjunction_set(r)).collect();
        if opts.subsumption == Subsumption::Full {
            for i in 0..n {
                let mut others = FixedBitSet::with_capacity(graph.regions.len());
                for (k, s) in sets.iter().enumerate() {
                    if k != i {
                        others.union_with(s);
                    }
                }
                if sets[i].is_subset(&others) {
                    return None;
                }
            }
        }
        if opts.disjoint && (0..n).any(|i| (i + 1..n).any(|k| !sets[i].is_disjoint(&sets[k]))) {
            return None;
        }
        let mut set = FixedBitSet::with_capacity(graph.regions.len());
        for s in &sets {
            set.union_with(s);
        }
        graph.is_invariant(&set).then_some((b, set))
    });

    let mut distinct: Vec<(TemplateAssignment, FixedBitSet)> = vec![];
    for (b, s) in &survivors {
        if !distinct.iter().any(|(_, t)| t == s) {
            distinct.push((b.clone(), s.clone()));
        }
    }
    let minimal_pairs: Vec<&(TemplateAssignment, FixedBitSet)> = distinct
        .iter()
        .filter(|(_, s)| !distinct.iter().any(|(_, t)| t != s && t.is_subset(s)))
        .collect();
    let mut minimal = vec![];
    for (b, s) in minimal_pairs {
        let inv = DnfInvariant::from_assignment(b);
        match check_invariant(ts, preds, &inv, cfg)? {
            HoareVerdict::Verified => {}
            _ => return Err(OracleError::Disagreement(inv.formula(preds).to_string())),
        }
        minimal.push(OracleEntry {
            assignment: b.clone(),
            invariant: inv,
            regions: s.clone(),
        });
    }
    Ok(OracleReport {
        shape,
        graph,
        examined: total,
        survivors: survivors.into_iter().map(|(b, _)| b).collect(),
        minimal,
    })
}
