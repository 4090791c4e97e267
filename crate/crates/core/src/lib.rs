//! Minimal disjunctive inductive invariants by lazy Boolean-template
//! constraint solving, and finite abstract automata for reactive nodes.
//!
//! The pipeline: [`frontend`] parses a transition system (or a dataflow
//! node), [`engine`] searches the DNF template space for an inductive
//! invariant and descends to a minimal one, and [`automaton`] turns the
//! invariant's disjuncts into the states of an abstract automaton. All
//! theory reasoning goes through [`solver`]. [`harness`] holds independent
//! oracles used by the test suites and the `check` command.

pub mod automaton;
pub mod engine;
pub mod formula;
pub mod frontend;
pub mod harness;
pub mod par;
pub mod report;
pub mod solver;
pub mod template;
