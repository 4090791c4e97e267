//! Syntactic predicate detection.

use std::collections::BTreeSet;

use super::TransitionSystem;
use crate::formula::{Atom, Formula, LinExpr, Rat, Rel, Sort, VarKind, Variable};
use crate::template::PredicateSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HarvestOptions {
    /// Close each atom under its comparison family `< <= = >= >`.
    pub family_closure: bool,
}

impl Default for HarvestOptions {
    fn default() -> Self {
        HarvestOptions {
            family_closure: true,
        }
    }
}

enum Found {
    Atom(LinExpr, Rel, Rat),
    Bool(Variable),
}

fn scan(f: &Formula, keep: &dyn Fn(&Variable) -> bool, out: &mut Vec<Found>) {
    match f {
        Formula::Atom(a) => {
            let a = Atom::new(a.lhs.unprime(), a.rel, a.rhs.unprime());
            if a.vars().all(keep) {
                if let Some((e, rel, c)) = a.normalized() {
                    out.push(Found::Atom(e, rel, c));
                }
            }
        }
        Formula::Var(v) => {
            let v = v.unprimed();
            if v.sort() == Sort::Bool && keep(&v) {
                out.push(Found::Bool(v));
            }
        }
        _ => {
            for c in f.children() {
                scan(c, keep, out);
            }
        }
    }
}

fn collect(sources: &[&Formula], keep: &dyn Fn(&Variable) -> bool, opts: HarvestOptions) -> PredicateSet {
    let mut found = Vec::new();
    for f in sources {
        scan(f, keep, &mut found);
    }
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let mut push = |p: Formula, out: &mut Vec<Formula>| {
        if seen.insert(p.clone()) {
            out.push(p);
        }
    };
    for item in found {
        match item {
            Found::Atom(e, rel, c) => {
                if opts.family_closure {
                    for r in Rel::FAMILY {
                        push(Formula::Atom(Atom::from_normal(&e, r, &c)), &mut out);
                    }
                } else {
                    push(Formula::Atom(Atom::from_normal(&e, rel, &c)), &mut out);
                }
            }
            Found::Bool(v) => {
                push(Formula::var(&v), &mut out);
                push(Formula::not(Formula::var(&v)), &mut out);
            }
        }
    }
    PredicateSet::new(out)
}

/// State predicates: every atom of `S`, `C`, `T` (primes stripped) and `P`
/// whose variables are all state variables, plus `b`/`!b` for Boolean state
/// variables. Source order, then family order; duplicates removed.
pub fn harvest_predicates(ts: &TransitionSystem, opts: HarvestOptions) -> PredicateSet {
    collect(
        &[&ts.init, &ts.guard, &ts.trans, &ts.post],
        &|v| v.kind() == VarKind::State,
        opts,
    )
}

/// Input/output predicates harvested from atoms of `T` (and `C`) that
/// mention only inputs and outputs.
pub fn harvest_io_predicates(ts: &TransitionSystem, opts: HarvestOptions) -> PredicateSet {
    collect(
        &[&ts.guard, &ts.trans],
        &|v| matches!(v.kind(), VarKind::Input | VarKind::Output),
        opts,
    )
}
