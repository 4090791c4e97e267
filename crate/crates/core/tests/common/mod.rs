#![allow(dead_code)]

use std::path::PathBuf;

use tpinv::formula::Formula;
use tpinv::frontend::{parse_source, state_predicates, HarvestOptions, Source, SourceKind, TransitionSystem};
use tpinv::solver::SolverConfig;
use tpinv::template::PredicateSet;

pub fn model_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models").join(name)
}

pub fn source(name: &str) -> Source {
    let path = model_path(name);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    parse_source(&text, SourceKind::from_path(&path)).unwrap()
}

pub fn load(name: &str) -> (TransitionSystem, PredicateSet) {
    let ts = source(name).ts;
    let preds = state_predicates(&ts, HarvestOptions::default());
    (ts, preds)
}

pub fn cfg() -> SolverConfig {
    SolverConfig::default()
}

pub fn f(ts: &TransitionSystem, text: &str) -> Formula {
    ts.parse_formula(text, false).unwrap()
}

/// Both-way entailment.
pub fn same(ts: &TransitionSystem, a: &Formula, b: &Formula) -> bool {
    let _ = ts;
    tpinv::solver::equivalent(&cfg(), a, b).unwrap() == Some(true)
}

/// The shipped example systems with the options used to analyse them.
pub fn corpus() -> Vec<(&'static str, tpinv::engine::EngineOptions)> {
    use tpinv::engine::EngineOptions;
    let at = |n: usize| EngineOptions {
        n,
        minimize: true,
        ..EngineOptions::default()
    };
    vec![
        ("coin.ts", at(2)),
        ("counter.ts", at(2)),
        ("bounded.ts", at(1)),
        (
            "clicker.node",
            EngineOptions {
                disjoint: true,
                ..at(3)
            },
        ),
        ("toggle.node", at(2)),
        ("thermostat.node", at(2)),
    ]
}

/// Infer, abstract, simulate `steps` steps (restarting when stuck) and
/// check that every state lies in the invariant and every run is accepted
/// by the automaton. Returns the number of simulated steps.
pub fn soundness(name: &str, opts: &tpinv::engine::EngineOptions, steps: usize, seed: u64) -> Result<usize, String> {
    use tpinv::automaton::{build, EdgeCoverMode};
    use tpinv::engine::{run, InferenceOutcome};
    use tpinv::harness::{acceptance_run, check_invariant, simulate_runs};
    use tpinv::par::Parallelism;

    let (ts, preds) = load(name);
    let res = run(&ts, &preds, opts, &cfg()).map_err(|e| e.to_string())?;
    let inv = match res.outcome {
        InferenceOutcome::Invariant(i) => i,
        o => return Err(format!("{name}: no invariant: {o:?}")),
    };
    if !check_invariant(&ts, &preds, &inv, &cfg()).map_err(|e| e.to_string())?.is_verified() {
        return Err(format!("{name}: invariant fails the Hoare check"));
    }
    let aut = build(&ts, &preds, &inv, EdgeCoverMode::Conjunction, &cfg(), Parallelism::Auto)
        .map_err(|e| e.to_string())?;
    let formula = inv.formula(&preds);
    let runs = simulate_runs(&ts, steps, seed, &cfg()).map_err(|e| e.to_string())?;
    let mut total = 0;
    for (r, trace) in runs.iter().enumerate() {
        if let Some(t) = trace.first_outside(&formula) {
            return Err(format!("{name}: run {r} leaves {formula} at step {t}: {}", trace.states[t]));
        }
        if let Err(t) = acceptance_run(&aut, trace) {
            return Err(format!("{name}: run {r} rejected by the automaton at step {t}"));
        }
        total += trace.steps();
    }
    Ok(total)
}

/// Random 3-CNF stores over at most 12 Boolean variables, each decided by
/// the internal backend, the external solver and a truth table. Returns the
/// descriptions of all disagreements.
pub fn cross_check(stores: usize, seed: u64) -> Vec<String> {
    use rand::{Rng, SeedableRng};
    use tpinv::formula::{Sort, VarKind, Variable};
    use tpinv::solver::{SatResult, Session};

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let vars: Vec<Variable> = (0..12).map(|k| Variable::new(format!("p{k}"), Sort::Bool, VarKind::TemplateBool)).collect();
    let mut internal = Session::open(&SolverConfig::internal(), &vars).unwrap();
    let mut external = Session::open(&cfg(), &vars).unwrap();
    let mut bad = vec![];
    for s in 0..stores {
        let nv = rng.gen_range(1..=12);
        // Around the satisfiability threshold for the larger stores.
        let nc = rng.gen_range(1..=(nv * 5).max(2));
        let clauses: Vec<Vec<(usize, bool)>> = (0..nc)
            .map(|_| (0..3).map(|_| (rng.gen_range(0..nv), rng.gen_bool(0.5))).collect())
            .collect();
        let lit = |&(v, pos): &(usize, bool)| {
            let x = Formula::var(&vars[v]);
            if pos {
                x
            } else {
                Formula::not(x)
            }
        };
        let store = Formula::and(clauses.iter().map(|c| Formula::or(c.iter().map(lit))));
        let truth = (0u32..1 << nv).any(|a| {
            clauses
                .iter()
                .all(|c| c.iter().any(|&(v, pos)| (a >> v & 1 == 1) == pos))
        });
        let decide = |sess: &mut Session| -> Option<bool> {
            sess.push().unwrap();
            sess.assert_formula(&store).unwrap();
            let r = match sess.check_sat().unwrap() {
                SatResult::Sat(m) => (store.eval(&m) == Ok(true)).then_some(true),
                SatResult::Unsat => Some(false),
                SatResult::Unknown(_) => None,
            };
            sess.pop().unwrap();
            r
        };
        let a = decide(&mut internal);
        let b = decide(&mut external);
        if a != Some(truth) || b != Some(truth) {
            bad.push(format!("store {s}: truth {truth}, internal {a:?}, external {b:?}: {store}"));
        }
    }
    bad
}
