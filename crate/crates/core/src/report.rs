//! Serialization of results: canonical JSON, Graphviz DOT, and a plain
//! text summary.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::automaton::{AbstractAutomaton, EdgeCoverMode};
use crate::engine::{EngineOptions, EngineStats, Inference, InferenceOutcome};
use crate::frontend::TransitionSystem;
use crate::harness::{HoareCondition, HoareVerdict};
use crate::solver::{Backend, Logic, SolverConfig};
use crate::template::{DnfInvariant, PredicateSet};

pub const SCHEMA: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarDoc {
    pub name: String,
    pub sort: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemDoc {
    pub name: String,
    pub state: Vec<VarDoc>,
    pub inputs: Vec<VarDoc>,
    pub outputs: Vec<VarDoc>,
    pub init: String,
    pub guard: String,
    pub trans: String,
    pub post: String,
}

impl SystemDoc {
    pub fn of(ts: &TransitionSystem) -> Self {
        let vars = |vs: &[crate::formula::Variable]| {
            vs.iter()
                .map(|v| VarDoc {
                    name: v.name().to_string(),
                    sort: v.sort().to_string(),
                })
                .collect()
        };
        SystemDoc {
            name: ts.name.clone(),
            state: vars(&ts.state),
            inputs: vars(&ts.inputs),
            outputs: vars(&ts.outputs),
            init: ts.init.to_string(),
            guard: ts.guard.to_string(),
            trans: ts.trans.to_string(),
            post: ts.post.to_string(),
        }
    }
}

/// Solver settings worth recording; the command line is left out so that
/// reports do not depend on the machine.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverDoc {
    pub backend: Backend,
    pub logic: Logic,
    pub timeout: Option<u64>,
    pub seed: Option<u64>,
}

impl SolverDoc {
    pub fn of(cfg: &SolverConfig) -> Self {
        SolverDoc {
            backend: cfg.backend,
            logic: cfg.logic,
            timeout: cfg.timeout,
            seed: cfg.seed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Invariant,
    NoSolution,
    Inconclusive,
    /// `check` on a supplied invariant: all three conditions hold.
    Verified,
    /// `check` on a supplied invariant: some condition fails.
    Refuted,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisjunctDoc {
    pub predicates: Vec<usize>,
    pub formula: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantDoc {
    pub disjuncts: Vec<DisjunctDoc>,
    pub formula: String,
}

impl InvariantDoc {
    pub fn of(inv: &DnfInvariant, preds: &PredicateSet) -> Self {
        InvariantDoc {
            disjuncts: (0..inv.len())
                .map(|i| DisjunctDoc {
                    predicates: inv.disjuncts[i].iter().copied().collect(),
                    formula: inv.disjunct_formula(preds, i).to_string(),
                })
                .collect(),
            formula: inv.formula(preds).to_string(),
        }
    }

    pub fn to_invariant(&self) -> DnfInvariant {
        DnfInvariant::new(
            self.disjuncts
                .iter()
                .map(|d| d.predicates.iter().copied().collect())
                .collect(),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateDoc {
    pub id: String,
    pub predicates: Vec<usize>,
    pub formula: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeDoc {
    pub from: usize,
    pub to: usize,
    pub guard: String,
    pub inconclusive: bool,
    pub fallback: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AutomatonDoc {
    pub cover: EdgeCoverMode,
    pub io_predicates: Vec<String>,
    pub states: Vec<StateDoc>,
    pub initial: Vec<usize>,
    pub edges: Vec<EdgeDoc>,
}

impl AutomatonDoc {
    pub fn of(aut: &AbstractAutomaton, cover: EdgeCoverMode) -> Self {
        AutomatonDoc {
            cover,
            io_predicates: aut.io_preds.iter().map(|p| p.to_string()).collect(),
            states: aut
                .states
                .iter()
                .enumerate()
                .map(|(i, q)| StateDoc {
                    id: state_id(i),
                    predicates: q.disjunct.iter().copied().collect(),
                    formula: q.formula.to_string(),
                })
                .collect(),
            initial: aut.initial.clone(),
            edges: aut
                .edges
                .iter()
                .map(|e| EdgeDoc {
                    from: e.from,
                    to: e.to,
                    guard: e.guard.to_string(),
                    inconclusive: e.inconclusive,
                    fallback: e.fallback,
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HoareDoc {
    pub verified: bool,
    pub condition: Option<HoareCondition>,
    /// Variable name to rendered value.
    pub countermodel: Option<BTreeMap<String, String>>,
    pub reason: Option<String>,
}

impl HoareDoc {
    pub fn of(v: &HoareVerdict) -> Self {
        match v {
            HoareVerdict::Verified => HoareDoc {
                verified: true,
                condition: None,
                countermodel: None,
                reason: None,
            },
            HoareVerdict::Failed { condition, countermodel } => HoareDoc {
                verified: false,
                condition: Some(*condition),
                countermodel: Some(
                    countermodel
                        .iter()
                        .map(|(v, x)| (v.name().to_string(), x.to_string()))
                        .collect(),
                ),
                reason: None,
            },
            HoareVerdict::Inconclusive(r) => HoareDoc {
                verified: false,
                condition: None,
                countermodel: None,
                reason: Some(r.clone()),
            },
        }
    }
}

/// Everything one run produced. `stats` is the only non-canonical part
/// (timings); [`ReportDocument::canonical`] drops it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema: u32,
    pub mode: String,
    pub system: SystemDoc,
    pub predicates: Vec<String>,
    pub options: EngineOptions,
    pub solver: SolverDoc,
    pub outcome: Outcome,
    /// Set when `no-solution` may be an artifact of search restrictions.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub restricted: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub invariant: Option<InvariantDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hoare: Option<HoareDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub automaton: Option<AutomatonDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stats: Option<EngineStats>,
    pub warnings: Vec<String>,
}

impl ReportDocument {
    pub fn new(
        mode: &str,
        ts: &TransitionSystem,
        preds: &PredicateSet,
        opts: &EngineOptions,
        cfg: &SolverConfig,
    ) -> Self {
        ReportDocument {
            schema: SCHEMA,
            mode: mode.to_string(),
            system: SystemDoc::of(ts),
            predicates: preds.iter().map(|p| p.to_string()).collect(),
            options: opts.clone(),
            solver: SolverDoc::of(cfg),
            outcome: Outcome::Inconclusive,
            restricted: false,
            reason: None,
            invariant: None,
            hoare: None,
            automaton: None,
            stats: None,
            warnings: vec![],
        }
    }

    pub fn with_inference(mut self, inf: &Inference, preds: &PredicateSet) -> Self {
        match &inf.outcome {
            InferenceOutcome::Invariant(inv) => {
                self.outcome = Outcome::Invariant;
                self.invariant = Some(InvariantDoc::of(inv, preds));
            }
            InferenceOutcome::NoSolution => {
                self.outcome = Outcome::NoSolution;
                self.restricted = inf.restricted;
                self.invariant = None;
            }
            InferenceOutcome::Inconclusive { reason, best } => {
                self.outcome = Outcome::Inconclusive;
                self.reason = Some(reason.clone());
                self.invariant = best.as_ref().map(|b| InvariantDoc::of(b, preds));
            }
        }
        self.stats = Some(inf.stats.clone());
        self.warnings.extend(inf.warnings.iter().cloned());
        self
    }

    pub fn with_invariant(mut self, inv: &DnfInvariant, preds: &PredicateSet) -> Self {
        self.invariant = Some(InvariantDoc::of(inv, preds));
        self
    }

    pub fn with_hoare(mut self, v: &HoareVerdict) -> Self {
        self.outcome = match v {
            HoareVerdict::Verified => Outcome::Verified,
            HoareVerdict::Failed { .. } => Outcome::Refuted,
            HoareVerdict::Inconclusive(r) => {
                self.reason = Some(r.clone());
                Outcome::Inconclusive
            }
        };
        self.hoare = Some(HoareDoc::of(v));
        self
    }

    pub fn with_automaton(mut self, aut: &AbstractAutomaton, cover: EdgeCoverMode) -> Self {
        self.automaton = Some(AutomatonDoc::of(aut, cover));
        self.warnings.extend(aut.warnings.iter().cloned());
        self
    }

    /// The invariant by predicate indices, if the report carries one.
    pub fn dnf_invariant(&self) -> Option<DnfInvariant> {
        self.invariant.as_ref().map(InvariantDoc::to_invariant)
    }

    /// Copy without the timing-dependent block.
    pub fn canonical(&self) -> ReportDocument {
        ReportDocument {
            stats: None,
            ..self.clone()
        }
    }
}

/// Pretty JSON with sorted keys, newline-terminated.
pub fn emit_json(report: &ReportDocument) -> String {
    // Going through `Value` sorts object keys (serde_json's map is ordered).
    let v = serde_json::to_value(report).expect("report is serializable");
    let mut s = serde_json::to_string_pretty(&v).expect("value is serializable");
    s.push('\n');
    s
}

pub fn parse_json(text: &str) -> Result<ReportDocument, serde_json::Error> {
    serde_json::from_str(text)
}

pub fn state_id(i: usize) -> String {
    format!("q{i}")
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Graphviz rendering: one node per state labelled with its disjunct, an
/// entry arrow into every initial state, edges labelled with guards.
pub fn emit_dot(aut: &AbstractAutomaton) -> String {
    let mut out = String::new();
    out.push_str("digraph automaton {\n");
    out.push_str("  rankdir=LR;\n");
    out.push_str("  node [shape=circle];\n");
    for (i, q) in aut.states.iter().enumerate() {
        let _ = writeln!(
            out,
            "  {} [label=\"{}\\n{}\"];",
            state_id(i),
            state_id(i),
            dot_escape(&q.formula.to_string())
        );
    }
    for &i in &aut.initial {
        let _ = writeln!(out, "  start{i} [shape=point, label=\"\"];");
        let _ = writeln!(out, "  start{i} -> {};", state_id(i));
    }
    for e in &aut.edges {
        let style = if e.inconclusive { ", style=dashed" } else { "" };
        let _ = writeln!(
            out,
            "  {} -> {} [label=\"{}\"{style}];",
            state_id(e.from),
            state_id(e.to),
            dot_escape(&e.guard.to_string())
        );
    }
    out.push_str("}\n");
    out
}

/// Human-readable summary.
pub fn emit_text(report: &ReportDocument) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "system {} ({})", report.system.name, report.mode);
    let _ = writeln!(out, "predicates:");
    for (j, p) in report.predicates.iter().enumerate() {
        let _ = writeln!(out, "  [{j}] {p}");
    }
    let outcome = match report.outcome {
        Outcome::Invariant => "invariant found",
        Outcome::NoSolution if report.restricted => "no solution in the restricted space",
        Outcome::NoSolution => "no solution",
        Outcome::Inconclusive => "inconclusive",
        Outcome::Verified => "verified",
        Outcome::Refuted => "refuted",
    };
    let _ = writeln!(out, "outcome: {outcome}");
    if let Some(r) = &report.reason {
        let _ = writeln!(out, "  reason: {r}");
    }
    if let Some(inv) = &report.invariant {
        let _ = writeln!(out, "invariant: {}", inv.formula);
        for (i, d) in inv.disjuncts.iter().enumerate() {
            let _ = writeln!(out, "  I{i} = {}    {:?}", d.formula, d.predicates);
        }
    }
    if let Some(h) = &report.hoare {
        if let Some(c) = h.condition {
            let _ = writeln!(out, "failed condition: {c:?}");
        }
        if let Some(m) = &h.countermodel {
            let vals: Vec<String> = m.iter().map(|(k, v)| format!("{k} = {v}")).collect();
            let _ = writeln!(out, "countermodel: {}", vals.join(", "));
        }
    }
    if let Some(a) = &report.automaton {
        let init: Vec<String> = a.initial.iter().map(|&i| state_id(i)).collect();
        let _ = writeln!(out, "automaton: {} states, initial {}", a.states.len(), init.join(", "));
        for q in &a.states {
            let _ = writeln!(out, "  {}: {}", q.id, q.formula);
        }
        for e in &a.edges {
            let flag = if e.inconclusive { "  (inconclusive)" } else { "" };
            let _ = writeln!(out, "  {} -> {} : {}{flag}", state_id(e.from), state_id(e.to), e.guard);
        }
    }
    if let Some(s) = &report.stats {
        let _ = writeln!(
            out,
            "stats: {} iterations, {} counterexamples, {} descent rounds, n = {}, {:?}, {} queries, {:.3}s",
            s.iterations,
            s.counterexamples,
            s.descent_rounds,
            s.final_n,
            s.minimality,
            s.solver_queries,
            s.wall_seconds
        );
    }
    for w in &report.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    out
}
