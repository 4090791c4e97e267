mod common;

use std::collections::HashSet;

use common::*;
use tpinv::engine::{
    grow_n, infer, minimize, run, Descent, EngineOptions, GrowOptions, InferenceOutcome, Minimality, Subsumption,
    VcFault, VcKind,
};
use tpinv::frontend::parse_transition_system;
use tpinv::harness::{brute_force_minimal, check_invariant, includes, OracleOptions};
use tpinv::par::Parallelism;
use tpinv::solver::is_satisfiable;
use tpinv::template::{DnfInvariant, PredicateSet};

fn coin_opts() -> EngineOptions {
    EngineOptions {
        n: 2,
        minimize: true,
        ..EngineOptions::default()
    }
}

fn invariant_of(res: &tpinv::engine::Inference) -> DnfInvariant {
    match &res.outcome {
        InferenceOutcome::Invariant(i) => i.clone(),
        o => panic!("expected an invariant, got {o:?}"),
    }
}

#[test]
fn coin_result_is_one_of_the_two_minima() {
    let (ts, preds) = load("coin.ts");
    let res = run(&ts, &preds, &coin_opts(), &cfg()).unwrap();
    let inv = invariant_of(&res).formula(&preds);
    assert_eq!(res.stats.minimality, Minimality::Minimal);
    assert!(check_invariant(&ts, &preds, &invariant_of(&res), &cfg()).unwrap().is_verified());
    // The two inclusion-minimal invariants, as enumerated by the oracle.
    let minima = [f(&ts, "i > 0 || (i = 0 && i < a)"), f(&ts, "i < a || (i = a && b)")];
    assert!(minima.iter().any(|m| same(&ts, m, &inv)), "{inv}");
}

#[test]
fn coin_progress_and_bound() {
    let (ts, preds) = load("coin.ts");
    let res = run(&ts, &preds, &coin_opts(), &cfg()).unwrap();
    let s = &res.stats;
    assert_eq!(s.progress_checks, s.counterexamples);
    assert!(s.max_run_iterations <= 1 << 16);
    assert!(s.iterations <= 64, "{s:?}");
}

#[test]
fn descent_is_duplicate_free_and_strictly_decreasing() {
    let (ts, preds) = load("coin.ts");
    for descent in [Descent::Propositional, Descent::SemanticWitness] {
        let opts = EngineOptions {
            descent,
            ..coin_opts()
        };
        let res = run(&ts, &preds, &opts, &cfg()).unwrap();
        let distinct: HashSet<_> = res.descent.iter().collect();
        assert_eq!(distinct.len(), res.descent.len());
        for w in res.descent.windows(2) {
            let a = DnfInvariant::from_assignment(&w[0]).formula(&preds);
            let b = DnfInvariant::from_assignment(&w[1]).formula(&preds);
            assert_eq!(includes(&cfg(), &b, &a).unwrap(), Some(true));
            if descent == Descent::SemanticWitness {
                assert_eq!(includes(&cfg(), &a, &b).unwrap(), Some(false));
            }
        }
    }
}

#[test]
fn store_admits_every_surviving_invariant() {
    // Before any descent, H only ever excludes assignments that fail a
    // Hoare condition or a structural restriction.
    let (ts, preds) = load("counter.ts");
    let opts = EngineOptions {
        n: 2,
        ..EngineOptions::default()
    };
    let res = infer(&ts, &preds, &opts, &cfg()).unwrap();
    let rep = brute_force_minimal(&ts, &preds, 2, OracleOptions::from(&opts), &cfg(), Parallelism::Auto).unwrap();
    assert!(!rep.survivors.is_empty());
    for b in &rep.survivors {
        assert_eq!(res.store.holds(b), Some(true), "{b:?}");
    }
}

#[test]
fn gate_catches_a_dropped_consecution_conjunct() {
    let (ts, preds) = load("coin.ts");
    let opts = EngineOptions {
        fault: Some(VcFault::Drop(VcKind::Consecution)),
        ..coin_opts()
    };
    let res = run(&ts, &preds, &opts, &cfg()).unwrap();
    match &res.outcome {
        InferenceOutcome::Inconclusive { reason, .. } => assert!(reason.contains("soundness gate"), "{reason}"),
        o => panic!("corrupted VC slipped through: {o:?}"),
    }
    assert!(res.stats.gate_checks >= 1);
}

#[test]
fn empty_precondition_gives_an_empty_invariant() {
    let ts = parse_transition_system(
        "system never\nstate i, a : int;\ninit: false;\nguard: i < a;\ntrans: i' = i + 1 && a' = a;\n\
         predicate: i = 0; predicate: i < 0; predicate: i > 0;",
    )
    .unwrap();
    let preds = PredicateSet::new(ts.state_preds.clone());
    let opts = EngineOptions {
        n: 1,
        minimize: true,
        subsumption: Subsumption::Off,
        ..EngineOptions::default()
    };
    let res = run(&ts, &preds, &opts, &cfg()).unwrap();
    let inv = invariant_of(&res).formula(&preds);
    assert!(is_satisfiable(&cfg(), &inv).unwrap().is_unsat(), "{inv}");
    // Blocking clauses forbid empty conjunctions, so the best is one region.
    let opts = EngineOptions {
        subsumption: Subsumption::BlockingClauses,
        ..opts
    };
    let res = run(&ts, &preds, &opts, &cfg()).unwrap();
    let inv = invariant_of(&res).formula(&preds);
    let regions = [f(&ts, "i = 0"), f(&ts, "i < 0"), f(&ts, "i > 0")];
    assert!(regions.iter().any(|r| same(&ts, r, &inv)), "{inv}");
}

#[test]
fn false_postcondition_has_no_solution() {
    let ts = parse_transition_system(
        "system hopeless\nstate i : int;\ninit: true;\nguard: false;\ntrans: i' = i;\npost: false;\npredicate: i = 0;",
    )
    .unwrap();
    let preds = PredicateSet::new(ts.state_preds.clone());
    for n in 1..=2 {
        let opts = EngineOptions {
            n,
            ..EngineOptions::default()
        };
        let res = run(&ts, &preds, &opts, &cfg()).unwrap();
        assert_eq!(res.outcome, InferenceOutcome::NoSolution);
        let rep = brute_force_minimal(&ts, &preds, n, OracleOptions::from(&opts), &cfg(), Parallelism::Auto).unwrap();
        assert!(rep.minimal.is_empty());
    }
}

#[test]
fn minimize_from_true_on_counter() {
    let (ts, preds) = load("counter.ts");
    let top = DnfInvariant::new(vec![Default::default()]);
    let res = minimize(&ts, &preds, &EngineOptions::default(), &cfg(), &top).unwrap();
    let inv = invariant_of(&res).formula(&preds);
    assert!(same(&ts, &inv, &f(&ts, "i >= 0 && i <= 2")), "{inv}");
    assert_eq!(res.descent.len() as u64, res.stats.descent_rounds);
}

#[test]
fn counter_grows_to_three_points() {
    // Over the reals the minimal invariants are [0,2] at n=1, {0}∪[1,2]
    // at n=2 and {0}∪{1}∪{2} at n=3 (see the oracle tests).
    let (ts, preds) = load("counter.ts");
    let opts = EngineOptions {
        n: 1,
        grow: Some(GrowOptions {
            max_n: 3,
            timeout: None,
        }),
        ..EngineOptions::default()
    };
    let res = grow_n(&ts, &preds, &opts, &cfg()).unwrap();
    let inv = invariant_of(&res).formula(&preds);
    assert_eq!(res.stats.final_n, 3);
    assert!(same(&ts, &inv, &f(&ts, "i = 0 || i = 1 || i = 2")), "{inv}");
}

#[test]
fn counter_grow_stops_when_nothing_smaller_exists() {
    let (ts, preds) = load("counter.ts");
    let opts = EngineOptions {
        n: 3,
        grow: Some(GrowOptions {
            max_n: 4,
            timeout: None,
        }),
        ..EngineOptions::default()
    };
    let res = grow_n(&ts, &preds, &opts, &cfg()).unwrap();
    assert_eq!(res.stats.final_n, 3);
}

#[test]
fn identity_system_keeps_the_initial_point() {
    let ts = parse_transition_system(
        "system still\nstate x : int;\ninit: x = 0;\ntrans: x' = x;\n\
         predicate: x <= 0; predicate: x >= 0; predicate: x < 0;",
    )
    .unwrap();
    let preds = PredicateSet::new(ts.state_preds.clone());
    let opts = EngineOptions {
        minimize: true,
        ..EngineOptions::default()
    };
    let res = run(&ts, &preds, &opts, &cfg()).unwrap();
    assert!(same(&ts, &invariant_of(&res).formula(&preds), &f(&ts, "x = 0")));
}

#[test]
fn disjoint_clicker_partition() {
    let (ts, preds) = load("clicker.node");
    let opts = EngineOptions {
        n: 3,
        disjoint: true,
        minimize: true,
        ..EngineOptions::default()
    };
    let res = run(&ts, &preds, &opts, &cfg()).unwrap();
    let inv = invariant_of(&res);
    for i in 0..3 {
        for j in i + 1..3 {
            let both = tpinv::formula::Formula::and([inv.disjunct_formula(&preds, i), inv.disjunct_formula(&preds, j)]);
            assert!(is_satisfiable(&cfg(), &both).unwrap().is_unsat());
        }
    }
    let partition = [f(&ts, "pre_out <= -1"), f(&ts, "pre_out = 0"), f(&ts, "pre_out >= 1")];
    for p in &partition {
        assert!((0..3).any(|i| same(&ts, p, &inv.disjunct_formula(&preds, i))), "{p}");
    }
}

#[test]
fn subsumption_modes_agree_on_coin_minima() {
    let (ts, preds) = load("coin.ts");
    let minima = [f(&ts, "i > 0 || (i = 0 && i < a)"), f(&ts, "i < a || (i = a && b)")];
    for subsumption in [Subsumption::Off, Subsumption::Full] {
        let opts = EngineOptions {
            subsumption,
            ..coin_opts()
        };
        let res = run(&ts, &preds, &opts, &cfg()).unwrap();
        let inv = invariant_of(&res).formula(&preds);
        assert!(minima.iter().any(|m| same(&ts, m, &inv)), "{subsumption:?}: {inv}");
    }
}

#[test]
fn iteration_cap_is_reported_as_inconclusive() {
    let (ts, preds) = load("coin.ts");
    let opts = EngineOptions {
        max_iterations: Some(1),
        ..coin_opts()
    };
    let res = run(&ts, &preds, &opts, &cfg()).unwrap();
    assert!(matches!(res.outcome, InferenceOutcome::Inconclusive { .. }), "{:?}", res.outcome);
}
