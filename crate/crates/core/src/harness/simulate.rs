//! Concrete random executions, one solver query per step.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::formula::{Formula, LinExpr, Model, Rat, Rel, Sort, Value, VarKind, Variable};
use crate::frontend::TransitionSystem;
use crate::solver::{SatResult, Session, SolverConfig, SolverError};

/// Free numeric inputs are kept within `±INPUT_BOUND`.
pub const INPUT_BOUND: i64 = 1_000_000;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("the initial condition is unsatisfiable")]
    NoInitialState,
    #[error("solver gave up during simulation: {0}")]
    Unknown(String),
}

/// `states[t]` is `σ_t`; `io[t]` holds the inputs and outputs of the step
/// from `σ_t` to `σ_{t+1}`. So `states.len() == io.len() + 1`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Trace {
    pub states: Vec<Model>,
    pub io: Vec<Model>,
    /// Set when the run ended early because no step was possible.
    pub stuck: Option<String>,
}

impl Trace {
    pub fn steps(&self) -> usize {
        self.io.len()
    }

    /// The full valuation `(σ_t, io_t, σ′_{t+1})` of step `t`.
    pub fn step_model(&self, t: usize) -> Model {
        let mut m = self.states[t].clone();
        m.extend(&self.io[t]);
        m.extend(&self.states[t + 1].rename(|v| Some(v.primed())));
        m
    }

    /// First index whose state falsifies `inv`.
    pub fn first_outside(&self, inv: &Formula) -> Option<usize> {
        self.states.iter().position(|s| inv.eval(s) != Ok(true))
    }
}

fn equals(v: &Variable, x: &Value) -> Formula {
    match x {
        Value::Bool(true) => Formula::var(v),
        Value::Bool(false) => Formula::not(Formula::var(v)),
        Value::Num(r) => Formula::atom(LinExpr::var(v), Rel::Eq, LinExpr::constant(r.clone())),
    }
}

fn fix(m: &Model) -> Formula {
    Formula::conj(m.iter().map(|(v, x)| equals(v, x)))
}

fn random_value(rng: &mut ChaCha8Rng, sort: Sort) -> Value {
    match sort {
        Sort::Bool => Value::Bool(rng.gen()),
        Sort::Int | Sort::Real => {
            let k: i64 = match rng.gen_range(0..8) {
                0 => 0,
                1..=4 => rng.gen_range(-3..=3),
                5 | 6 => rng.gen_range(-100..=100),
                _ => rng.gen_range(-INPUT_BOUND..=INPUT_BOUND),
            };
            let mut r = Rat::from_integer(k.into());
            if sort == Sort::Real && rng.gen_bool(0.25) {
                r += Rat::new(1.into(), 2.into());
            }
            Value::Num(r)
        }
    }
}

fn preferences(rng: &mut ChaCha8Rng, vars: &[Variable]) -> Formula {
    Formula::conj(vars.iter().map(|v| equals(v, &random_value(rng, v.sort()))))
}

/// Try progressively weaker sets of random preferences on top of the
/// current store.
fn solve_with(s: &mut Session, tiers: &[Formula]) -> Result<Option<Model>, SimError> {
    for f in tiers {
        match s.check_with(f)? {
            SatResult::Sat(m) => return Ok(Some(m)),
            SatResult::Unsat => {}
            SatResult::Unknown(r) => return Err(SimError::Unknown(r)),
        }
    }
    Ok(None)
}

struct Simulator<'a> {
    ts: &'a TransitionSystem,
    session: Session,
    rng: ChaCha8Rng,
}

impl<'a> Simulator<'a> {
    fn new(ts: &'a TransitionSystem, seed: u64, cfg: &SolverConfig) -> Result<Self, SimError> {
        let vars = ts.quantified_vars();
        let base = Formula::conj([ts.guard.clone(), ts.trans.clone(), ts.init.clone()]);
        let mut session = Session::open(&cfg.suited(&base), &vars)?;
        for v in ts.inputs.iter().filter(|v| v.sort().is_numeric()) {
            let x = LinExpr::var(v);
            session.assert_formula(&Formula::and([
                Formula::atom(x.clone(), Rel::Ge, LinExpr::int(-INPUT_BOUND)),
                Formula::atom(x, Rel::Le, LinExpr::int(INPUT_BOUND)),
            ]))?;
        }
        Ok(Simulator {
            ts,
            session,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    fn initial(&mut self) -> Result<Option<Model>, SimError> {
        let state = self.ts.state.clone();
        let tiers = [
            Formula::conj([self.ts.init.clone(), preferences(&mut self.rng, &state)]),
            Formula::conj([self.ts.init.clone(), preferences(
                &mut self.rng,
                &state.iter().filter(|v| v.sort() == Sort::Bool).cloned().collect::<Vec<_>>(),
            )]),
            self.ts.init.clone(),
        ];
        Ok(solve_with(&mut self.session, &tiers)?.map(|m| m.restrict(&self.ts.state)))
    }

    fn step(&mut self, sigma: &Model) -> Result<Option<(Model, Model)>, SimError> {
        let ts = self.ts;
        let primed = ts.primed_state();
        let bools: Vec<Variable> = primed
            .iter()
            .chain(&ts.outputs)
            .filter(|v| v.sort() == Sort::Bool)
            .cloned()
            .collect();
        let nums: Vec<Variable> = primed
            .iter()
            .chain(&ts.outputs)
            .filter(|v| v.sort() != Sort::Bool)
            .cloned()
            .collect();
        let inputs = preferences(&mut self.rng, &ts.inputs);
        let bool_prefs = preferences(&mut self.rng, &bools);
        let num_prefs = preferences(&mut self.rng, &nums);
        let here = Formula::conj([fix(sigma), ts.guard.clone(), ts.trans.clone()]);
        let tiers = [
            Formula::conj([here.clone(), inputs.clone(), bool_prefs.clone(), num_prefs]),
            Formula::conj([here.clone(), inputs.clone(), bool_prefs]),
            Formula::conj([here.clone(), inputs]),
            here,
        ];
        Ok(solve_with(&mut self.session, &tiers)?.map(|m| {
            let io = m.restrict(&ts.io_vars());
            let next = m
                .restrict(&primed)
                .rename(|v| (v.kind() == VarKind::PrimedState).then(|| v.unprimed()));
            (io, next)
        }))
    }
}

/// A random run of at most `steps` steps from a random initial state.
pub fn simulate(ts: &TransitionSystem, steps: usize, seed: u64, cfg: &SolverConfig) -> Result<Trace, SimError> {
    let mut sim = Simulator::new(ts, seed, cfg)?;
    run_once(&mut sim, steps)
}

fn run_once(sim: &mut Simulator, steps: usize) -> Result<Trace, SimError> {
    let s0 = sim.initial()?.ok_or(SimError::NoInitialState)?;
    let mut trace = Trace {
        states: vec![s0],
        ..Trace::default()
    };
    for _ in 0..steps {
        let sigma = trace.states.last().unwrap().clone();
        match sim.step(&sigma)? {
            Some((io, next)) => {
                trace.io.push(io);
                trace.states.push(next);
            }
            None => {
                trace.stuck = Some(format!("no transition from {sigma}"));
                break;
            }
        }
    }
    Ok(trace)
}

/// Runs totalling `steps` steps, restarting from a fresh initial state
/// whenever a run gets stuck (for loops: when the guard fails). Gives up
/// after 100 consecutive runs that could not make a single step.
pub fn simulate_runs(
    ts: &TransitionSystem,
    steps: usize,
    seed: u64,
    cfg: &SolverConfig,
) -> Result<Vec<Trace>, SimError> {
    let mut sim = Simulator::new(ts, seed, cfg)?;
    let mut out = vec![];
    let mut done = 0;
    let mut idle = 0;
    while done < steps && idle < 100 {
        let t = run_once(&mut sim, steps - done)?;
        if t.steps() == 0 {
            idle += 1;
        } else {
            idle = 0;
        }
        done += t.steps();
        out.push(t);
    }
    Ok(out)
}
