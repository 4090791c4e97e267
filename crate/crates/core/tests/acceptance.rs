//! One line per acceptance criterion. Exits non-zero if any fails.

mod common;

use std::time::Instant;

use common::*;
use tpinv::automaton::{build, EdgeCoverMode};
use tpinv::engine::{run, Descent, EngineOptions, InferenceOutcome, Subsumption, VcFault, VcKind};
use tpinv::formula::{Formula, Model, Value};
use tpinv::harness::{brute_force_minimal, check_hoare, OracleOptions};
use tpinv::par::Parallelism;
use tpinv::template::DnfInvariant;

type Verdict = Result<String, String>;

fn coin_opts() -> EngineOptions {
    EngineOptions {
        n: 2,
        minimize: true,
        symmetry: true,
        subsumption: Subsumption::BlockingClauses,
        descent: Descent::Propositional,
        ..EngineOptions::default()
    }
}

fn invariant(name: &str, opts: &EngineOptions) -> Result<(tpinv::engine::Inference, DnfInvariant), String> {
    let (ts, preds) = load(name);
    let res = run(&ts, &preds, opts, &cfg()).map_err(|e| format!("{name}: {e}"))?;
    match res.outcome.clone() {
        InferenceOutcome::Invariant(i) => Ok((res, i)),
        o => Err(format!("{name}: {o:?}")),
    }
}

fn coin_end_to_end() -> Verdict {
    let (ts, preds) = load("coin.ts");
    let started = Instant::now();
    let (_, inv) = invariant("coin.ts", &coin_opts())?;
    let secs = started.elapsed().as_secs_f64();
    let got = inv.formula(&preds);
    let post = Formula::and([got.clone(), Formula::not(ts.guard.clone())]);
    let inv_ok = same(&ts, &got, &f(&ts, "(i = 0 && i < a) || i > 0"));
    let post_ok = same(&ts, &post, &f(&ts, "i > 0 && i = a"));
    let msg = format!("I = {got} ({secs:.1}s); I && !C equivalent to i > 0 && i = a: {post_ok}");
    if inv_ok && post_ok && secs < 10.0 {
        Ok(msg)
    } else {
        Err(format!("expected I equivalent to (i = 0 && i < a) || i > 0: {inv_ok}; {msg}"))
    }
}

fn coin_oracle() -> Verdict {
    let (ts, preds) = load("coin.ts");
    let opts = coin_opts();
    let (_, inv) = invariant("coin.ts", &opts)?;
    let rep = brute_force_minimal(&ts, &preds, 2, OracleOptions::from(&opts), &cfg(), Parallelism::Auto)
        .map_err(|e| e.to_string())?;
    let set = rep.graph.invariant_set(&inv);
    let msg = format!(
        "{} assignments, {} survivors, {} minimal; engine gave {}",
        rep.examined,
        rep.survivors.len(),
        rep.minimal.len(),
        inv.formula(&preds)
    );
    if rep.is_minimal_set(&set) && !rep.has_strictly_smaller(&set) {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn counter_incomparable_minima() -> Verdict {
    let (ts, preds) = load("counter.ts");
    let opts = EngineOptions {
        n: 2,
        minimize: true,
        ..EngineOptions::default()
    };
    let rep = brute_force_minimal(&ts, &preds, 2, OracleOptions::from(&opts), &cfg(), Parallelism::Auto)
        .map_err(|e| e.to_string())?;
    let found: Vec<Formula> = rep.minimal.iter().map(|e| e.invariant.formula(&preds)).collect();
    let expected = [f(&ts, "(i >= 0 && i <= 1) || i = 2"), f(&ts, "i = 0 || (i >= 1 && i <= 2)")];
    let covered = expected.iter().all(|x| found.iter().any(|g| same(&ts, g, x)));
    let exact = covered && found.iter().all(|g| expected.iter().any(|x| same(&ts, g, x)));
    let (_, inv) = invariant("counter.ts", &opts)?;
    let got = inv.formula(&preds);
    let engine_ok = expected.iter().any(|x| same(&ts, &got, x));
    let listed: Vec<String> = found.iter().map(|g| g.to_string()).collect();
    let msg = format!("oracle minima [{}]; engine gave {got}", listed.join("; "));
    if exact && engine_ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn clicker() -> Result<
    (
        tpinv::frontend::TransitionSystem,
        tpinv::automaton::AbstractAutomaton,
        impl Fn(&str) -> Option<usize>,
    ),
    String,
> {
    let (ts, preds) = load("clicker.node");
    let opts = EngineOptions {
        n: 3,
        disjoint: true,
        minimize: true,
        ..EngineOptions::default()
    };
    let (_, inv) = invariant("clicker.node", &opts)?;
    let aut = build(&ts, &preds, &inv, EdgeCoverMode::Conjunction, &cfg(), Parallelism::Auto)
        .map_err(|e| e.to_string())?;
    let forms: Vec<Formula> = aut.states.iter().map(|q| q.formula.clone()).collect();
    let ts2 = ts.clone();
    let find = move |text: &str| {
        let want = f(&ts2, text);
        forms.iter().position(|q| same(&ts2, q, &want))
    };
    Ok((ts, aut, find))
}

fn clicker_automaton() -> Verdict {
    let (ts, aut, find) = clicker()?;
    let q = |t: &str| find(t).ok_or_else(|| format!("no state equivalent to {t}"));
    let (neg, zero, pos) = (q("pre_out <= -1")?, q("pre_out = 0")?, q("pre_out >= 1")?);
    let expected = [
        (zero, pos, "dir > 0"),
        (zero, neg, "dir < 0"),
        (pos, pos, "dir >= 0"),
        (neg, neg, "dir <= 0"),
        (pos, zero, "dir = 0"),
        (neg, zero, "dir = 0"),
        (pos, neg, "dir < 0"),
        (neg, pos, "dir > 0"),
    ];
    let mut wrong = vec![];
    for (a, b, g) in expected {
        match aut.edge(a, b) {
            Some(e) if same(&ts, &e.guard, &f(&ts, g)) => {}
            Some(e) => wrong.push(format!("q{a}->q{b}: {} instead of {g}", e.guard)),
            None => wrong.push(format!("q{a}->q{b} missing")),
        }
    }
    let self_loop = aut.edge(zero, zero).map(|e| e.guard.to_string());
    if aut.initial != vec![zero] {
        wrong.push(format!("initial states {:?}", aut.initial));
    }
    if self_loop.as_deref() != Some("dir = 0") {
        wrong.push(format!("self-loop on the zero state: {self_loop:?}"));
    }
    if aut.edges.len() != 9 {
        wrong.push(format!("{} edges", aut.edges.len()));
    }
    if wrong.is_empty() {
        Ok("8 expected edges present; extra zero->zero self-loop `dir = 0` flagged".into())
    } else {
        Err(wrong.join("; "))
    }
}

fn clicker_nondeterminism() -> Verdict {
    let (ts, aut, find) = clicker()?;
    let (zero, pos) = (find("pre_out = 0").ok_or("no zero state")?, find("pre_out >= 1").ok_or("no positive state")?);
    let io: Model = [
        (ts.inputs[0].clone(), Value::int(0)),
        (ts.outputs[0].clone(), Value::int(0)),
    ]
    .into_iter()
    .collect();
    let enabled: Vec<usize> = aut.successors(pos).filter(|e| e.guard.eval(&io) == Ok(true)).map(|e| e.to).collect();
    let msg = format!("from q{pos} under dir = 0: successors {enabled:?}");
    if enabled.len() >= 2 && enabled.contains(&pos) && enabled.contains(&zero) {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn soundness_suite() -> Verdict {
    let corpus = corpus();
    let results: Vec<(String, Result<usize, String>)> = std::thread::scope(|s| {
        let handles: Vec<_> = corpus
            .iter()
            .map(|(name, opts)| s.spawn(move || (name.to_string(), soundness(name, opts, 10_000, 42))))
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let failures: Vec<String> = results
        .iter()
        .filter_map(|(n, r)| match r {
            Ok(10_000) => None,
            Ok(k) => Some(format!("{n}: only {k} steps")),
            Err(e) => Some(e.clone()),
        })
        .collect();
    if failures.is_empty() && results.len() >= 5 {
        Ok(format!("{} systems x 10^4 steps, zero violations", results.len()))
    } else {
        Err(failures.join("; "))
    }
}

fn termination_and_progress() -> Verdict {
    let mut worst = vec![];
    let mut bad = vec![];
    for (name, opts) in corpus() {
        let (res, _) = invariant(name, &opts)?;
        let (_, preds) = load(name);
        let s = &res.stats;
        let bound = 1u128 << (s.final_n * preds.len()).min(127);
        if s.progress_checks != s.counterexamples {
            bad.push(format!("{name}: {} progress checks for {} counterexamples", s.progress_checks, s.counterexamples));
        }
        if u128::from(s.max_run_iterations) > bound {
            bad.push(format!("{name}: {} iterations in one search", s.max_run_iterations));
        }
        if name == "coin.ts" && s.iterations > 64 {
            bad.push(format!("coin: {} iterations", s.iterations));
        }
        worst.push(format!("{name} {}", s.iterations));
    }
    if bad.is_empty() {
        Ok(format!("iterations: {}", worst.join(", ")))
    } else {
        Err(bad.join("; "))
    }
}

fn hoare_gate() -> Verdict {
    let mut checked = 0;
    for (name, opts) in corpus() {
        let (ts, preds) = load(name);
        let (_, inv) = invariant(name, &opts)?;
        if !check_hoare(&ts, &inv.formula(&preds), &cfg()).map_err(|e| e.to_string())?.is_verified() {
            return Err(format!("{name}: invariant fails the independent check"));
        }
        checked += 1;
    }
    let (ts, preds) = load("coin.ts");
    let faulty = EngineOptions {
        fault: Some(VcFault::Drop(VcKind::Consecution)),
        ..coin_opts()
    };
    let res = run(&ts, &preds, &faulty, &cfg()).map_err(|e| e.to_string())?;
    match res.outcome {
        InferenceOutcome::Inconclusive { reason, .. } if reason.contains("soundness gate") => {
            Ok(format!("{checked} invariants verified; dropped consecution caught by the gate"))
        }
        o => Err(format!("mutant not caught: {o:?}")),
    }
}

fn solver_cross_check() -> Verdict {
    let bad = cross_check(1000, 2024);
    if bad.is_empty() {
        Ok("1000 random stores, zero disagreements".into())
    } else {
        Err(format!("{} disagreements, first: {}", bad.len(), bad[0]))
    }
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 9] = [
        ("loop example end to end", coin_end_to_end),
        ("minimality oracle agreement", coin_oracle),
        ("incomparable minima of the counter", counter_incomparable_minima),
        ("clicker automaton", clicker_automaton),
        ("nondeterminism witness", clicker_nondeterminism),
        ("soundness under simulation", soundness_suite),
        ("termination and progress", termination_and_progress),
        ("independent Hoare gate", hoare_gate),
        ("solver cross-check", solver_cross_check),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let verdict = check();
        let secs = started.elapsed().as_secs_f64();
        match verdict {
            Ok(detail) => println!("PASS {} {name} [{secs:.1}s]: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name} [{secs:.1}s]: {detail}", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
