//! Abstract automata: one state per invariant disjunct, edges labelled by
//! input/output guards that over-approximate `∃σ,σ′ I_i ∧ I_j[σ′/σ] ∧ T`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::engine::{run, EngineError, EngineOptions, InferenceOutcome, Subsumption};
use crate::formula::{Formula, VarKind, Variable};
use crate::frontend::{harvest_io_predicates, HarvestOptions, TransitionSystem};
use crate::par::{self, Parallelism};
use crate::solver::{Backend, SatResult, Session, SolverConfig, SolverError};
use crate::template::{Disjunct, DnfInvariant, PredicateSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeCoverMode {
    /// Strongest conjunction of I/O predicates.
    Conjunction,
    /// Minimal DNF guard with at most this many disjuncts.
    Dnf(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AutomatonState {
    pub disjunct: Disjunct,
    pub formula: Formula,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub guard: Formula,
    /// The solver gave up; the guard was widened to `true`.
    pub inconclusive: bool,
    /// DNF cover failed and the conjunction cover was used instead.
    pub fallback: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbstractAutomaton {
    pub states: Vec<AutomatonState>,
    pub initial: Vec<usize>,
    /// Ordered by `(from, to)`.
    pub edges: Vec<Edge>,
    pub io_preds: Vec<Formula>,
    pub warnings: Vec<String>,
}

impl AbstractAutomaton {
    pub fn edge(&self, from: usize, to: usize) -> Option<&Edge> {
        self.edges.iter().find(|e| e.from == from && e.to == to)
    }

    pub fn successors(&self, from: usize) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.from == from)
    }
}

/// `I_i ∧ I_j[σ′/σ] ∧ T` with σ, σ′ left free.
pub fn edge_body(ts: &TransitionSystem, preds: &PredicateSet, inv: &DnfInvariant, i: usize, j: usize) -> Formula {
    Formula::conj([
        inv.disjunct_formula(preds, i),
        inv.disjunct_formula(preds, j).prime(),
        ts.trans.clone(),
    ])
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Cover {
    NoEdge,
    Guard { guard: Formula, inconclusive: bool },
}

fn session_for(cfg: &SolverConfig, f: &Formula) -> Result<Session, SolverError> {
    let vars: Vec<Variable> = f.vars().into_iter().collect();
    Session::open(&cfg.suited(f), &vars)
}

/// Drop conjuncts entailed by the remaining ones, until none is.
pub fn prune_conjunction(conjuncts: Vec<Formula>, cfg: &SolverConfig) -> Result<Vec<Formula>, SolverError> {
    let mut kept = conjuncts;
    let mut k = 0;
    while k < kept.len() {
        let others: Vec<Formula> = kept.iter().enumerate().filter(|&(x, _)| x != k).map(|(_, g)| g.clone()).collect();
        let q = Formula::conj(others.into_iter().chain([Formula::not(kept[k].clone())]));
        let mut s = session_for(cfg, &q)?;
        s.assert_formula(&q)?;
        if s.check_sat()?.is_unsat() {
            kept.remove(k);
        } else {
            k += 1;
        }
    }
    Ok(kept)
}

/// `⋀ { g ∈ io_preds : body ⊨ g }`, simplified by entailment pruning.
pub fn cover_conjunction(body: &Formula, io_preds: &[Formula], cfg: &SolverConfig) -> Result<Cover, SolverError> {
    let all = Formula::conj(std::iter::once(body.clone()).chain(io_preds.iter().cloned()));
    let vars: Vec<Variable> = all.vars().into_iter().collect();
    let mut s = Session::open(&cfg.suited(&all), &vars)?;
    s.assert_formula(body)?;
    match s.check_sat()? {
        SatResult::Unsat => return Ok(Cover::NoEdge),
        SatResult::Unknown(_) => {
            return Ok(Cover::Guard {
                guard: Formula::True,
                inconclusive: true,
            })
        }
        SatResult::Sat(_) => {}
    }
    let mut implied = vec![];
    let mut inconclusive = false;
    for g in io_preds {
        match s.check_with(&Formula::not(g.clone()))? {
            SatResult::Unsat => implied.push(g.clone()),
            SatResult::Sat(_) => {}
            // Leaving g out keeps the guard sound.
            SatResult::Unknown(_) => inconclusive = true,
        }
    }
    let kept = prune_conjunction(implied, cfg)?;
    Ok(Cover::Guard {
        guard: Formula::conj(kept),
        inconclusive,
    })
}

/// The guard problem as an invariant problem: the I/O variables become the
/// state, the body becomes the initial condition, nothing ever steps. An
/// inclusion-minimal invariant of that system is a minimal DNF cover.
fn cover_system(body: &Formula, io_preds: &[Formula], io_vars: &[Variable]) -> (TransitionSystem, PredicateSet) {
    let as_state = |v: &Variable| {
        io_vars
            .iter()
            .any(|w| w == v)
            .then(|| v.renamed(v.name(), VarKind::State))
    };
    let hidden = |v: &Variable| match v.kind() {
        VarKind::State => Some(v.renamed(format!("{}@pre", v.name()), VarKind::Input)),
        VarKind::PrimedState => Some(v.renamed(format!("{}@post", v.unprimed().name()), VarKind::Input)),
        VarKind::Input | VarKind::Output => {
            as_state(v).or_else(|| Some(v.renamed(v.name(), VarKind::Input)))
        }
        _ => None,
    };
    let init = body.rename(&hidden);
    let mut ts = TransitionSystem::new("cover");
    ts.state = io_vars.iter().map(|v| v.renamed(v.name(), VarKind::State)).collect();
    ts.inputs = init.vars().into_iter().filter(|v| v.kind() == VarKind::Input).collect();
    ts.init = init;
    ts.trans = Formula::False;
    let preds = io_preds.iter().map(|p| p.rename(&as_state)).collect();
    (ts, preds)
}

fn back_to_io(f: &Formula, io_vars: &[Variable]) -> Formula {
    f.rename(&|v: &Variable| io_vars.iter().find(|w| w.name() == v.name() && v.kind() == VarKind::State).cloned())
}

/// Minimal DNF guard with at most `k` disjuncts, found with the inference
/// engine. `None` when the engine does not produce one.
pub fn cover_dnf(
    body: &Formula,
    io_preds: &[Formula],
    k: usize,
    cfg: &SolverConfig,
) -> Result<Option<Cover>, EngineError> {
    let mut s = session_for(cfg, body)?;
    s.assert_formula(body)?;
    match s.check_sat()? {
        SatResult::Unsat => return Ok(Some(Cover::NoEdge)),
        SatResult::Unknown(_) => return Ok(None),
        SatResult::Sat(_) => {}
    }
    drop(s);
    if io_preds.is_empty() || k == 0 {
        return Ok(None);
    }
    let io_vars: Vec<Variable> = io_preds
        .iter()
        .flat_map(|p| p.vars())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let (ts, preds) = cover_system(body, io_preds, &io_vars);
    let opts = EngineOptions {
        n: k,
        minimize: true,
        symmetry: true,
        subsumption: Subsumption::BlockingClauses,
        ..EngineOptions::default()
    };
    let res = run(&ts, &preds, &opts, &cfg.with_backend(Backend::ExternalSmt))?;
    let inv = match res.outcome {
        InferenceOutcome::Invariant(inv) => inv,
        _ => return Ok(None),
    };
    // Disjuncts whose index set contains another's are redundant.
    let ds: Vec<&Disjunct> = inv.disjuncts.iter().collect();
    let mut keep: Vec<Disjunct> = vec![];
    for (a, d) in ds.iter().enumerate() {
        let redundant = ds
            .iter()
            .enumerate()
            .any(|(b, e)| b != a && e.is_subset(d) && (e != d || b < a));
        if !redundant {
            keep.push((*d).clone());
        }
    }
    let mut disjuncts = vec![];
    for d in keep {
        let conj: Vec<Formula> = d.iter().map(|&j| back_to_io(preds.get(j), &io_vars)).collect();
        disjuncts.push(Formula::conj(prune_conjunction(conj, cfg)?));
    }
    Ok(Some(Cover::Guard {
        guard: Formula::disj(disjuncts),
        inconclusive: false,
    }))
}

/// I/O predicates for edge guards: the system's own, else harvested.
pub fn edge_predicates(ts: &TransitionSystem) -> Vec<Formula> {
    if ts.io_preds.is_empty() {
        harvest_io_predicates(ts, HarvestOptions::default()).as_slice().to_vec()
    } else {
        ts.io_preds.clone()
    }
}

pub fn build(
    ts: &TransitionSystem,
    preds: &PredicateSet,
    inv: &DnfInvariant,
    mode: EdgeCoverMode,
    cfg: &SolverConfig,
    par: Parallelism,
) -> Result<AbstractAutomaton, EngineError> {
    let io_preds = edge_predicates(ts);
    let states: Vec<AutomatonState> = (0..inv.len())
        .map(|i| AutomatonState {
            disjunct: inv.disjuncts[i].clone(),
            formula: inv.disjunct_formula(preds, i),
        })
        .collect();
    let mut initial = vec![];
    for (i, q) in states.iter().enumerate() {
        let f = Formula::conj([ts.init.clone(), q.formula.clone()]);
        let mut s = session_for(cfg, &f)?;
        s.assert_formula(&f)?;
        if !s.check_sat()?.is_unsat() {
            initial.push(i);
        }
    }
    let pairs: Vec<(usize, usize)> = (0..states.len())
        .flat_map(|i| (0..states.len()).map(move |j| (i, j)))
        .collect();
    let results = par::map(par, &pairs, |&(i, j)| -> Result<Option<Edge>, EngineError> {
        let body = edge_body(ts, preds, inv, i, j);
        let (cover, fallback) = match mode {
            EdgeCoverMode::Conjunction => (cover_conjunction(&body, &io_preds, cfg)?, false),
            EdgeCoverMode::Dnf(k) => match cover_dnf(&body, &io_preds, k, cfg)? {
                Some(c) => (c, false),
                None => (cover_conjunction(&body, &io_preds, cfg)?, true),
            },
        };
        Ok(match cover {
            Cover::NoEdge => None,
            Cover::Guard { guard, inconclusive } => Some(Edge {
                from: i,
                to: j,
                guard,
                inconclusive,
                fallback,
            }),
        })
    });
    let mut edges = vec![];
    let mut warnings = vec![];
    for r in results {
        if let Some(e) = r? {
            if e.inconclusive {
                warnings.push(format!("edge q{}->q{}: solver inconclusive, guard widened", e.from, e.to));
            }
            if e.fallback {
                warnings.push(format!("edge q{}->q{}: DNF cover failed, conjunction cover used", e.from, e.to));
            }
            edges.push(e);
        }
    }
    Ok(AbstractAutomaton {
        states,
        initial,
        edges,
        io_preds,
        warnings,
    })
}
