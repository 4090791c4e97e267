//! Thread pool against the sequential fallback on the two data-parallel hot
//! spots: oracle enumeration and automaton edge construction.

#[path = "../tests/common/mod.rs"]
mod common;

use common::*;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use tpinv::automaton::{build, EdgeCoverMode};
use tpinv::engine::{run, EngineOptions, InferenceOutcome};
use tpinv::harness::{brute_force_minimal, OracleOptions};
use tpinv::par::Parallelism;

const MODES: [(&str, Parallelism); 2] = [("pool", Parallelism::Auto), ("sequential", Parallelism::Sequential)];

fn oracle(c: &mut Criterion) {
    let mut g = c.benchmark_group("oracle");
    g.sample_size(10);
    for name in ["counter.ts", "coin.ts"] {
        let (ts, preds) = load(name);
        for (label, par) in MODES {
            g.bench_with_input(BenchmarkId::new(label, name), &par, |b, &par| {
                b.iter(|| brute_force_minimal(&ts, &preds, 2, OracleOptions::default(), &cfg(), par).unwrap())
            });
        }
    }
    g.finish();
}

fn automaton(c: &mut Criterion) {
    let (ts, preds) = load("clicker.node");
    let opts = EngineOptions {
        n: 3,
        disjoint: true,
        minimize: true,
        ..EngineOptions::default()
    };
    let inv = match run(&ts, &preds, &opts, &cfg()).unwrap().outcome {
        InferenceOutcome::Invariant(i) => i,
        o => panic!("{o:?}"),
    };
    let mut g = c.benchmark_group("automaton");
    g.sample_size(10);
    for (label, par) in MODES {
        g.bench_function(BenchmarkId::new(label, "clicker"), |b| {
            b.iter(|| build(&ts, &preds, &inv, EdgeCoverMode::Conjunction, &cfg(), par).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, oracle, automaton);
criterion_main!(benches);
