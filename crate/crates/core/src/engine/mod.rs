//! Invariant inference by lazy template solving.
//!
//! `H` is a Boolean constraint store over the template matrix `b`. Each round
//! asks `H` for a candidate `B`; if `¬F[B/b]` is unsatisfiable the candidate
//! is an invariant, otherwise the counterexample `Σ` contributes the ground
//! constraint `F[Σ/σ]` to `H`. Minimization repeats the search with an
//! inclusion constraint against the previous invariant.

mod store;
mod vc;

use std::collections::HashSet;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use store::{blocking_subsets, initial_store, BlockingSearch, ConstraintStore};
pub use vc::{build_vc, disjointness_constraints, VcKind, VcPart, VerificationCondition};

use crate::formula::Formula;
use crate::frontend::TransitionSystem;
use crate::harness::{check_invariant, HoareVerdict};
use crate::solver::{Backend, SatResult, Session, SolverConfig, SolverError};
use crate::template::{symbolic_template, DnfInvariant, PredicateSet, TemplateAssignment, TemplateError, TemplateShape};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Subsumption {
    Off,
    BlockingClauses,
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Descent {
    /// At least one matrix entry switches on: `⋁ b[i,j] ∧ ¬B[i,j]`.
    Propositional,
    /// A point of the previous invariant outside the new one.
    SemanticWitness,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrowOptions {
    pub max_n: usize,
    #[serde(with = "secs")]
    pub timeout: Option<Duration>,
}

mod secs {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Option<Duration>, s: S) -> Result<S::Ok, S::Error> {
        d.map(|d| d.as_secs_f64()).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Duration>, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.map(Duration::from_secs_f64))
    }
}

/// Deliberate VC corruption, for testing the final Hoare gate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VcFault {
    Drop(VcKind),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineOptions {
    pub n: usize,
    pub minimize: bool,
    pub grow: Option<GrowOptions>,
    pub symmetry: bool,
    pub subsumption: Subsumption,
    pub disjoint: bool,
    pub descent: Descent,
    pub max_iterations: Option<u64>,
    pub seed: Option<u64>,
    /// Largest predicate subset examined for blocking clauses.
    pub blocking_cap: usize,
    /// Solver checks allowed for the blocking-clause precomputation.
    pub blocking_budget: usize,
    /// Force the backend holding `H`; picked automatically when unset.
    pub store_backend: Option<Backend>,
    #[serde(skip)]
    pub fault: Option<VcFault>,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            n: 1,
            minimize: false,
            grow: None,
            symmetry: true,
            subsumption: Subsumption::BlockingClauses,
            disjoint: false,
            descent: Descent::Propositional,
            max_iterations: None,
            seed: None,
            blocking_cap: 3,
            blocking_budget: 5000,
            store_backend: None,
            fault: None,
        }
    }
}

impl EngineOptions {
    /// Whether a solution may have been excluded by search-space
    /// restrictions rather than by the Hoare conditions.
    pub fn is_restricted(&self) -> bool {
        self.symmetry || self.subsumption != Subsumption::Off || self.disjoint
    }

    fn needs_smt_store(&self) -> bool {
        self.subsumption == Subsumption::Full
            || (self.minimize && self.descent == Descent::SemanticWitness)
            || self.grow.is_some()
    }

    fn validate(&self) -> Result<(), EngineError> {
        if self.n == 0 {
            return Err(EngineError::InvalidOptions("n must be at least 1".into()));
        }
        if self.store_backend == Some(Backend::InternalProp) && self.needs_smt_store() {
            return Err(EngineError::InvalidOptions(
                "full subsumption, semantic descent and growth need the SMT backend for the store".into(),
            ));
        }
        if let Some(g) = self.grow {
            if g.max_n < self.n {
                return Err(EngineError::InvalidOptions(format!(
                    "grow limit {} is below n = {}",
                    g.max_n, self.n
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("no predicates: the template needs at least one")]
    NoPredicates,
    #[error("predicate {index} mentions `{var}`, which is not a state variable")]
    ForeignPredicate { index: usize, var: String },
    #[error("invalid options: {0}")]
    InvalidOptions(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error("counterexample at iteration {iteration} does not refute the candidate")]
    NoProgress { iteration: u64 },
    #[error("descent revisited a template assignment")]
    DescentCycle,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Minimality {
    #[default]
    NotRequested,
    /// No strictly smaller invariant in the restricted template space.
    Minimal,
    /// Descent stopped early; the result is an invariant, maybe not minimal.
    Interrupted,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EngineStats {
    /// Candidates drawn from `H`.
    pub iterations: u64,
    pub counterexamples: u64,
    /// Largest number of candidates drawn by a single search call.
    pub max_run_iterations: u64,
    /// `H_{k+1}(B_k) = false` checks performed (all passed).
    pub progress_checks: u64,
    pub descent_rounds: u64,
    pub blocking_subsets: usize,
    pub blocking_checks: usize,
    pub gate_checks: u64,
    pub final_n: usize,
    pub minimality: Minimality,
    pub solver_queries: u64,
    pub solver_seconds: f64,
    pub wall_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InferenceOutcome {
    Invariant(DnfInvariant),
    NoSolution,
    Inconclusive {
        reason: String,
        best: Option<DnfInvariant>,
    },
}

impl InferenceOutcome {
    pub fn invariant(&self) -> Option<&DnfInvariant> {
        match self {
            InferenceOutcome::Invariant(i) => Some(i),
            InferenceOutcome::Inconclusive { best, .. } => best.as_ref(),
            InferenceOutcome::NoSolution => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Inference {
    pub outcome: InferenceOutcome,
    pub stats: EngineStats,
    pub warnings: Vec<String>,
    /// `H` of the last search.
    pub store: ConstraintStore,
    /// Successive invariants of the descent, first one included.
    pub descent: Vec<TemplateAssignment>,
    pub restricted: bool,
}

enum Step {
    Found(TemplateAssignment),
    NoSolution,
    Inconclusive(String),
}

struct Search<'a> {
    ts: &'a TransitionSystem,
    preds: &'a PredicateSet,
    opts: &'a EngineOptions,
    cfg: SolverConfig,
    shape: TemplateShape,
    vc: VerificationCondition,
    store: ConstraintStore,
    h: Session,
    check: Session,
    stats: EngineStats,
    warnings: Vec<String>,
    witnesses: usize,
    seen: HashSet<TemplateAssignment>,
    descent: Vec<TemplateAssignment>,
}

impl<'a> Search<'a> {
    fn new(
        ts: &'a TransitionSystem,
        preds: &'a PredicateSet,
        n: usize,
        opts: &'a EngineOptions,
        cfg: &SolverConfig,
        smt_store: bool,
    ) -> Result<Self, EngineError> {
        let shape = TemplateShape::new(n, preds.len());
        let mut cfg = cfg.clone();
        if opts.seed.is_some() {
            cfg.seed = opts.seed;
        }
        let mut vc = build_vc(ts, preds, shape)?;
        if opts.disjoint {
            for f in disjointness_constraints(preds, shape) {
                vc.push(VcKind::Disjointness, f);
            }
        }
        if let Some(VcFault::Drop(kind)) = opts.fault {
            vc.parts.retain(|p| p.kind != kind);
        }
        let (store, warnings) = initial_store(preds, shape, opts, &cfg)?;
        let backend = opts.store_backend.unwrap_or(
            if smt_store || opts.needs_smt_store() || !store.is_propositional() {
                Backend::ExternalSmt
            } else {
                Backend::InternalProp
            },
        );
        let mut h_vars = shape.vars();
        h_vars.extend(store.aux_vars.iter().cloned());
        // Witness copies of the state are declared later; fix the logic now.
        let mut h_cfg = cfg.with_backend(backend);
        h_cfg.logic = cfg.logic.pinned(&ts.quantified_vars());
        let mut h = Session::open(&h_cfg, &h_vars)?;
        for c in &store.constraints {
            h.assert_formula(c)?;
        }
        let check_cfg = if vc.quantified.iter().all(|v| v.sort() == crate::formula::Sort::Bool) {
            cfg.with_backend(Backend::InternalProp)
        } else {
            cfg.with_backend(Backend::ExternalSmt)
        };
        let check = Session::open(&check_cfg, &vc.quantified)?;
        let stats = EngineStats {
            blocking_subsets: store.blocking_subsets.len(),
            blocking_checks: store.blocking_checks,
            final_n: n,
            ..EngineStats::default()
        };
        Ok(Search {
            ts,
            preds,
            opts,
            cfg,
            shape,
            vc,
            store,
            h,
            check,
            stats,
            warnings,
            witnesses: 0,
            seen: HashSet::new(),
            descent: vec![],
        })
    }

    fn assert_h(&mut self, f: Formula) -> Result<(), EngineError> {
        for v in f.vars() {
            if v.kind() == crate::formula::VarKind::Auxiliary {
                self.h.declare(&v)?;
            }
        }
        self.h.assert_formula(&f)?;
        self.store.push(f);
        Ok(())
    }

    fn bound(&self) -> u64 {
        let space = 1u64.checked_shl(self.shape.bools() as u32).unwrap_or(u64::MAX);
        let space = space.saturating_add(1);
        self.opts.max_iterations.map_or(space, |k| k.min(space))
    }

    /// The lazy loop.
    fn solve(&mut self) -> Result<Step, EngineError> {
        let bound = self.bound();
        let mut run = 0u64;
        loop {
            if run >= bound {
                return Ok(Step::Inconclusive(format!("iteration limit {bound} reached")));
            }
            let b = match self.h.check_sat()? {
                SatResult::Unsat => return Ok(Step::NoSolution),
                SatResult::Unknown(r) => return Ok(Step::Inconclusive(r)),
                SatResult::Sat(m) => TemplateAssignment::from_model(self.shape, &m),
            };
            run += 1;
            self.stats.iterations += 1;
            self.stats.max_run_iterations = self.stats.max_run_iterations.max(run);
            let refute = Formula::not(self.vc.instantiate(&b));
            let sigma = match self.check.check_with(&refute)? {
                SatResult::Unsat => return Ok(Step::Found(b)),
                SatResult::Unknown(r) => return Ok(Step::Inconclusive(r)),
                SatResult::Sat(sigma) => sigma,
            };
            self.stats.counterexamples += 1;
            let ground = self.vc.ground(&sigma);
            // The new constraint must exclude the refuted candidate.
            self.stats.progress_checks += 1;
            if ground.eval(&b.to_model()) != Ok(false) {
                return Err(EngineError::NoProgress {
                    iteration: self.stats.iterations,
                });
            }
            log::debug!("candidate {b:?} refuted by {sigma}");
            self.store.history.push(sigma);
            self.assert_h(ground)?;
        }
    }

    /// Independent Hoare check of a candidate on fresh sessions.
    fn gate(&mut self, b: &TemplateAssignment) -> Result<Option<String>, EngineError> {
        self.stats.gate_checks += 1;
        let inv = DnfInvariant::from_assignment(b);
        Ok(match check_invariant(self.ts, self.preds, &inv, &self.cfg)? {
            HoareVerdict::Verified => None,
            HoareVerdict::Failed { condition, countermodel } => Some(format!(
                "soundness gate rejected {}: {condition:?} fails at {countermodel}",
                inv.formula(self.preds)
            )),
            HoareVerdict::Inconclusive(r) => Some(format!("soundness gate inconclusive: {r}")),
        })
    }

    fn record(&mut self, b: &TemplateAssignment) -> Result<(), EngineError> {
        if !self.seen.insert(b.clone()) {
            return Err(EngineError::DescentCycle);
        }
        self.descent.push(b.clone());
        Ok(())
    }

    /// `∃σ_w I_prev(σ_w) ∧ ¬𝒯(σ_w)` in `H`.
    fn add_witness(&mut self, prev: &Formula) -> Result<(), EngineError> {
        self.witnesses += 1;
        let vars = self.preds.vars();
        let pairs = self.store.aux_copy(&vars, &format!("w{}", self.witnesses));
        let t = symbolic_template(self.preds, self.shape);
        let f = Formula::and([
            store::rename_to(prev, &pairs),
            Formula::not(store::rename_to(&t, &pairs)),
        ]);
        self.assert_h(f)
    }

    /// Tighten the search to invariants strictly inside `prev`.
    fn exclude_above(&mut self, prev: &TemplateAssignment, descent: Descent) -> Result<(), EngineError> {
        let prev_f = DnfInvariant::from_assignment(prev).formula(self.preds);
        if prev.shape() == self.shape {
            self.stats.descent_rounds += 1;
        }
        let t = symbolic_template(self.preds, self.shape);
        self.vc.push(VcKind::Inclusion, Formula::implies(t, prev_f.clone()));
        match descent {
            Descent::Propositional if prev.shape() == self.shape => {
                let s = self.shape;
                let up = (0..s.n).flat_map(|i| (0..s.m).map(move |j| (i, j))).filter(|&(i, j)| !prev.get(i, j));
                let f = Formula::disj(up.map(|(i, j)| Formula::var(&s.var(i, j))));
                self.assert_h(f)
            }
            _ => self.add_witness(&prev_f),
        }
    }

    /// Downward iteration from a verified invariant. Returns the last
    /// invariant reached and, if the descent was cut short, why.
    fn descend(&mut self, start: TemplateAssignment) -> Result<(TemplateAssignment, Option<String>), EngineError> {
        let mut cur = start;
        loop {
            self.exclude_above(&cur, self.opts.descent)?;
            match self.solve()? {
                Step::NoSolution => return Ok((cur, None)),
                Step::Inconclusive(r) => return Ok((cur, Some(r))),
                Step::Found(b) => {
                    if let Some(r) = self.gate(&b)? {
                        return Ok((cur, Some(r)));
                    }
                    self.record(&b)?;
                    cur = b;
                }
            }
        }
    }

    fn finish(mut self, outcome: InferenceOutcome, started: Instant) -> Inference {
        let s = self.h.stats();
        let c = self.check.stats();
        self.stats.solver_queries += s.queries + c.queries;
        self.stats.solver_seconds += (s.time + c.time).as_secs_f64();
        self.stats.wall_seconds = started.elapsed().as_secs_f64();
        Inference {
            outcome,
            stats: self.stats,
            warnings: self.warnings,
            store: self.store,
            descent: self.descent,
            restricted: self.opts.is_restricted(),
        }
    }
}

fn merge(into: &mut EngineStats, from: &EngineStats) {
    into.iterations += from.iterations;
    into.counterexamples += from.counterexamples;
    into.max_run_iterations = into.max_run_iterations.max(from.max_run_iterations);
    into.progress_checks += from.progress_checks;
    into.descent_rounds += from.descent_rounds;
    into.blocking_subsets = into.blocking_subsets.max(from.blocking_subsets);
    into.blocking_checks += from.blocking_checks;
    into.gate_checks += from.gate_checks;
    into.solver_queries += from.solver_queries;
    into.solver_seconds += from.solver_seconds;
}

/// One search at `opts.n`, then descent when `opts.minimize`.
fn search_at(
    ts: &TransitionSystem,
    preds: &PredicateSet,
    opts: &EngineOptions,
    cfg: &SolverConfig,
    started: Instant,
) -> Result<Inference, EngineError> {
    let mut s = Search::new(ts, preds, opts.n, opts, cfg, false)?;
    let outcome = match s.solve()? {
        Step::NoSolution => InferenceOutcome::NoSolution,
        Step::Inconclusive(reason) => InferenceOutcome::Inconclusive { reason, best: None },
        Step::Found(b) => match s.gate(&b)? {
            Some(reason) => InferenceOutcome::Inconclusive { reason, best: None },
            None => {
                s.record(&b)?;
                if opts.minimize {
                    let (last, cut) = s.descend(b)?;
                    let inv = DnfInvariant::from_assignment(&last);
                    match cut {
                        None => {
                            s.stats.minimality = Minimality::Minimal;
                            InferenceOutcome::Invariant(inv)
                        }
                        Some(reason) => {
                            s.stats.minimality = Minimality::Interrupted;
                            InferenceOutcome::Inconclusive {
                                reason,
                                best: Some(inv),
                            }
                        }
                    }
                } else {
                    InferenceOutcome::Invariant(DnfInvariant::from_assignment(&b))
                }
            }
        },
    };
    Ok(s.finish(outcome, started))
}

/// Any invariant at `opts.n` (no minimization).
pub fn infer(
    ts: &TransitionSystem,
    preds: &PredicateSet,
    opts: &EngineOptions,
    cfg: &SolverConfig,
) -> Result<Inference, EngineError> {
    opts.validate()?;
    let plain = EngineOptions {
        minimize: false,
        grow: None,
        ..opts.clone()
    };
    search_at(ts, preds, &plain, cfg, Instant::now())
}

/// Descend from a verified invariant `start` (whose disjunct count fixes `n`)
/// to an inclusion-minimal one.
pub fn minimize(
    ts: &TransitionSystem,
    preds: &PredicateSet,
    opts: &EngineOptions,
    cfg: &SolverConfig,
    start: &DnfInvariant,
) -> Result<Inference, EngineError> {
    let started = Instant::now();
    let opts = EngineOptions {
        n: start.len(),
        minimize: true,
        grow: None,
        ..opts.clone()
    };
    opts.validate()?;
    let b = start.to_assignment(preds.len())?;
    let mut s = Search::new(ts, preds, opts.n, &opts, cfg, false)?;
    s.record(&b)?;
    let (last, cut) = s.descend(b)?;
    let inv = DnfInvariant::from_assignment(&last);
    let outcome = match cut {
        None => {
            s.stats.minimality = Minimality::Minimal;
            InferenceOutcome::Invariant(inv)
        }
        Some(reason) => {
            s.stats.minimality = Minimality::Interrupted;
            InferenceOutcome::Inconclusive {
                reason,
                best: Some(inv),
            }
        }
    };
    Ok(s.finish(outcome, started))
}

/// Minimal invariant at `opts.n`, then look for strictly smaller ones with
/// one more disjunct at a time.
pub fn grow_n(
    ts: &TransitionSystem,
    preds: &PredicateSet,
    opts: &EngineOptions,
    cfg: &SolverConfig,
) -> Result<Inference, EngineError> {
    let started = Instant::now();
    opts.validate()?;
    let grow = opts.grow.unwrap_or(GrowOptions {
        max_n: opts.n,
        timeout: None,
    });
    let base = EngineOptions {
        minimize: true,
        grow: Some(grow),
        ..opts.clone()
    };
    let first = search_at(ts, preds, &base, cfg, started)?;
    let mut best = match &first.outcome {
        InferenceOutcome::Invariant(inv) => inv.clone(),
        _ => return Ok(first),
    };
    let mut stats = first.stats.clone();
    let mut warnings = first.warnings.clone();
    let mut store = first.store;
    let mut descent = first.descent;
    let mut outcome = InferenceOutcome::Invariant(best.clone());
    for n in opts.n + 1..=grow.max_n {
        if grow.timeout.is_some_and(|t| started.elapsed() >= t) {
            warnings.push(format!("growth stopped by timeout before n = {n}"));
            break;
        }
        let at_n = EngineOptions { n, ..base.clone() };
        let mut s = Search::new(ts, preds, n, &at_n, cfg, true)?;
        let prev = best.to_assignment(preds.len())?;
        s.exclude_above(&prev, Descent::SemanticWitness)?;
        let step = s.solve()?;
        let (found, cut) = match step {
            Step::NoSolution => (None, None),
            Step::Inconclusive(r) => (None, Some(r)),
            Step::Found(b) => match s.gate(&b)? {
                Some(r) => (None, Some(r)),
                None => {
                    s.record(&b)?;
                    let (last, cut) = s.descend(b)?;
                    (Some(last), cut)
                }
            },
        };
        let done = s.finish(InferenceOutcome::NoSolution, started);
        merge(&mut stats, &done.stats);
        warnings.extend(done.warnings);
        store = done.store;
        descent.extend(done.descent);
        if let Some(last) = found {
            best = DnfInvariant::from_assignment(&last);
            stats.final_n = n;
        }
        if let Some(reason) = cut {
            stats.minimality = Minimality::Interrupted;
            outcome = InferenceOutcome::Inconclusive {
                reason,
                best: Some(best.clone()),
            };
            break;
        }
        outcome = InferenceOutcome::Invariant(best.clone());
        if stats.final_n != n {
            break;
        }
    }
    stats.wall_seconds = started.elapsed().as_secs_f64();
    Ok(Inference {
        outcome,
        stats,
        warnings,
        store,
        descent,
        restricted: opts.is_restricted(),
    })
}

/// The full driver: search, optional minimization, optional growth.
pub fn run(
    ts: &TransitionSystem,
    preds: &PredicateSet,
    opts: &EngineOptions,
    cfg: &SolverConfig,
) -> Result<Inference, EngineError> {
    opts.validate()?;
    if opts.grow.is_some() {
        grow_n(ts, preds, opts, cfg)
    } else {
        search_at(ts, preds, opts, cfg, Instant::now())
    }
}
