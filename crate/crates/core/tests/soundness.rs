mod common;

use common::*;

const STEPS: usize = 10_000;

fn check(name: &str) {
    let (_, opts) = corpus().into_iter().find(|(n, _)| *n == name).unwrap();
    let steps = soundness(name, &opts, STEPS, 42).unwrap();
    assert_eq!(steps, STEPS, "{name}");
}

#[test]
fn coin() {
    check("coin.ts");
}

#[test]
fn counter() {
    check("counter.ts");
}

#[test]
fn bounded() {
    check("bounded.ts");
}

#[test]
fn clicker() {
    check("clicker.node");
}

#[test]
fn toggle() {
    check("toggle.node");
}

#[test]
fn thermostat() {
    check("thermostat.node");
}
