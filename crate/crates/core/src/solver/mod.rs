//! Incremental satisfiability with two backends: an external SMT-LIB2
//! process (linear arithmetic) and an internal CDCL solver for purely
//! propositional stores.

mod prop;
pub mod sat;
mod smtlib;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{Formula, Model, Sort, Variable};

/// Environment variable overriding the external solver command line.
pub const SOLVER_ENV: &str = "TPINV_SOLVER";
/// Environment variable overriding the per-query timeout (seconds).
pub const TIMEOUT_ENV: &str = "TPINV_TIMEOUT";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    ExternalSmt,
    InternalProp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Logic {
    Lia,
    Lra,
    Lira,
    Auto,
}

impl Logic {
    /// `Auto` made concrete for a session that will mention `vars`.
    pub fn pinned(self, vars: &[Variable]) -> Logic {
        match self.resolve(vars) {
            "QF_LRA" => Logic::Lra,
            "QF_LIRA" => Logic::Lira,
            _ if self == Logic::Auto => Logic::Lia,
            _ => self,
        }
    }

    fn resolve(self, vars: &[Variable]) -> &'static str {
        let ints = vars.iter().any(|v| v.sort() == Sort::Int);
        let reals = vars.iter().any(|v| v.sort() == Sort::Real);
        match self {
            Logic::Lia => "QF_LIA",
            Logic::Lra => "QF_LRA",
            Logic::Lira => "QF_LIRA",
            Logic::Auto => match (ints, reals) {
                (true, true) => "QF_LIRA",
                (false, true) => "QF_LRA",
                _ => "QF_LIA",
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub backend: Backend,
    /// Program and arguments of the external solver.
    pub command: Vec<String>,
    pub logic: Logic,
    /// Per-query timeout in seconds.
    pub timeout: Option<u64>,
    pub seed: Option<u64>,
    /// Evaluate every satisfying model against the asserted store.
    #[serde(skip)]
    pub check_models: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            backend: Backend::ExternalSmt,
            command: default_command(),
            logic: Logic::Auto,
            timeout: std::env::var(TIMEOUT_ENV).ok().and_then(|s| s.trim().parse().ok()),
            seed: None,
            check_models: cfg!(debug_assertions),
        }
    }
}

fn default_command() -> Vec<String> {
    match std::env::var(SOLVER_ENV) {
        Ok(s) if !s.trim().is_empty() => s.split_whitespace().map(String::from).collect(),
        _ => ["z3", "-in", "-smt2"].map(String::from).to_vec(),
    }
}

impl SolverConfig {
    pub fn internal() -> Self {
        SolverConfig {
            backend: Backend::InternalProp,
            ..SolverConfig::default()
        }
    }

    /// This configuration, switched to the external solver when `f` is not
    /// propositional and the internal backend was asked for.
    pub fn suited(&self, f: &Formula) -> Self {
        if self.backend == Backend::InternalProp && !f.is_propositional() {
            self.with_backend(Backend::ExternalSmt)
        } else {
            self.clone()
        }
    }

    pub fn with_backend(&self, backend: Backend) -> Self {
        SolverConfig {
            backend,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SolverError {
    #[error("cannot start solver: {0}")]
    Spawn(String),
    #[error("variable {0:?} cannot be handled by the propositional backend")]
    UnsupportedSort(Variable),
    #[error("{0}")]
    NotPropositional(String),
    #[error("variable {0:?} was not declared in this session")]
    UndeclaredVariable(Variable),
    #[error("variable name `{0}` declared twice with different sorts or roles")]
    Redeclared(String),
    #[error("solver crashed: {0}")]
    Crashed(String),
    #[error("solver protocol error: {0}")]
    Protocol(String),
    #[error("pop without matching push")]
    UnbalancedPop,
    #[error("solver model does not satisfy the asserted formulas: {0}")]
    BadModel(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SatResult {
    Sat(Model),
    Unsat,
    Unknown(String),
}

impl SatResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatResult::Sat(_))
    }

    pub fn is_unsat(&self) -> bool {
        matches!(self, SatResult::Unsat)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SessionStats {
    pub queries: u64,
    pub time: Duration,
}

enum Inner {
    Smt(smtlib::SmtProcess),
    Prop(prop::PropSolver),
}

/// An open solver context. One logical thread at a time.
pub struct Session {
    inner: Inner,
    declared: BTreeMap<String, Variable>,
    order: Vec<Variable>,
    frames: Vec<Vec<Formula>>,
    check_models: bool,
    stats: SessionStats,
}

impl Session {
    pub fn open(cfg: &SolverConfig, vars: &[Variable]) -> Result<Session, SolverError> {
        let inner = match cfg.backend {
            Backend::ExternalSmt => {
                let mut p = smtlib::SmtProcess::spawn(&cfg.command)?;
                if let Some(t) = cfg.timeout {
                    p.command(&format!("(set-option :timeout {})", t.saturating_mul(1000)))?;
                }
                if let Some(seed) = cfg.seed {
                    p.command(&format!("(set-option :random-seed {seed})"))?;
                }
                p.command(&format!("(set-logic {})", cfg.logic.resolve(vars)))?;
                Inner::Smt(p)
            }
            Backend::InternalProp => {
                if let Some(v) = vars.iter().find(|v| v.sort() != Sort::Bool) {
                    return Err(SolverError::UnsupportedSort(v.clone()));
                }
                Inner::Prop(prop::PropSolver::new())
            }
        };
        let mut s = Session {
            inner,
            declared: BTreeMap::new(),
            order: vec![],
            frames: vec![vec![]],
            check_models: cfg.check_models,
            stats: SessionStats::default(),
        };
        for v in vars {
            s.declare(v)?;
        }
        Ok(s)
    }

    pub fn declare(&mut self, v: &Variable) -> Result<(), SolverError> {
        if let Some(old) = self.declared.get(v.name()) {
            return if old == v {
                Ok(())
            } else {
                Err(SolverError::Redeclared(v.name().to_string()))
            };
        }
        match &mut self.inner {
            Inner::Smt(p) => p.declare(v)?,
            Inner::Prop(p) => {
                if v.sort() != Sort::Bool {
                    return Err(SolverError::UnsupportedSort(v.clone()));
                }
                p.declare(v)
            }
        }
        self.declared.insert(v.name().to_string(), v.clone());
        self.order.push(v.clone());
        Ok(())
    }

    pub fn declared(&self) -> &[Variable] {
        &self.order
    }

    pub fn depth(&self) -> usize {
        self.frames.len() - 1
    }

    pub fn stats(&self) -> SessionStats {
        self.stats
    }

    pub fn assert_formula(&mut self, f: &Formula) -> Result<(), SolverError> {
        for v in f.vars() {
            if self.declared.get(v.name()) != Some(&v) {
                return Err(SolverError::UndeclaredVariable(v));
            }
        }
        match &mut self.inner {
            Inner::Smt(p) => p.command(&format!("(assert {})", smtlib::term(f)))?,
            Inner::Prop(p) => p.assert_formula(f)?,
        }
        self.frames.last_mut().unwrap().push(f.clone());
        Ok(())
    }

    pub fn push(&mut self) -> Result<(), SolverError> {
        match &mut self.inner {
            Inner::Smt(p) => p.command("(push 1)")?,
            Inner::Prop(p) => p.push(),
        }
        self.frames.push(vec![]);
        Ok(())
    }

    pub fn pop(&mut self) -> Result<(), SolverError> {
        if self.frames.len() <= 1 {
            return Err(SolverError::UnbalancedPop);
        }
        match &mut self.inner {
            Inner::Smt(p) => p.command("(pop 1)")?,
            Inner::Prop(p) => p.pop(),
        }
        self.frames.pop();
        Ok(())
    }

    pub fn check_sat(&mut self) -> Result<SatResult, SolverError> {
        let start = Instant::now();
        let res = self.check_inner();
        self.stats.queries += 1;
        self.stats.time += start.elapsed();
        let res = res?;
        if let (SatResult::Sat(m), true) = (&res, self.check_models) {
            for f in self.frames.iter().flatten() {
                match f.eval(m) {
                    Ok(true) => {}
                    Ok(false) => return Err(SolverError::BadModel(format!("{f} is false under {m}"))),
                    Err(e) => return Err(SolverError::BadModel(e.to_string())),
                }
            }
        }
        Ok(res)
    }

    fn check_inner(&mut self) -> Result<SatResult, SolverError> {
        match &mut self.inner {
            Inner::Smt(p) => {
                let reply = p.request("(check-sat)")?;
                match reply.as_str() {
                    "sat" => {
                        let values = p.get_values(&self.order)?;
                        Ok(SatResult::Sat(self.order.iter().cloned().zip(values).collect()))
                    }
                    "unsat" => Ok(SatResult::Unsat),
                    "unknown" => Ok(SatResult::Unknown("solver answered unknown (timeout or incompleteness)".into())),
                    other => Err(SolverError::Protocol(format!("unexpected check-sat reply {other:?}"))),
                }
            }
            Inner::Prop(p) => {
                if p.check() {
                    Ok(SatResult::Sat(
                        self.order
                            .iter()
                            .map(|v| (v.clone(), crate::formula::Value::Bool(p.value(v))))
                            .collect(),
                    ))
                } else {
                    Ok(SatResult::Unsat)
                }
            }
        }
    }

    /// Convenience: `push; assert f; check; pop`.
    pub fn check_with(&mut self, f: &Formula) -> Result<SatResult, SolverError> {
        self.push()?;
        let res = self.assert_formula(f).and_then(|_| self.check_sat());
        self.pop()?;
        res
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Entailment {
    Holds,
    Fails(Model),
    Unknown(String),
}

impl Entailment {
    pub fn holds(&self) -> bool {
        matches!(self, Entailment::Holds)
    }
}

/// `hyp ⊨ concl`, decided as unsatisfiability of `hyp ∧ ¬concl` on a fresh
/// session.
pub fn check_entailment(
    cfg: &SolverConfig,
    hyp: &Formula,
    concl: &Formula,
) -> Result<Entailment, SolverError> {
    let query = Formula::and([hyp.clone(), Formula::not(concl.clone())]);
    let vars: Vec<Variable> = query.vars().into_iter().collect();
    let mut s = Session::open(&cfg.suited(&query), &vars)?;
    s.assert_formula(&query)?;
    Ok(match s.check_sat()? {
        SatResult::Unsat => Entailment::Holds,
        SatResult::Sat(m) => Entailment::Fails(m),
        SatResult::Unknown(r) => Entailment::Unknown(r),
    })
}

/// Both-way entailment. `None` if either direction is inconclusive.
pub fn equivalent(cfg: &SolverConfig, a: &Formula, b: &Formula) -> Result<Option<bool>, SolverError> {
    let ab = check_entailment(cfg, a, b)?;
    let ba = check_entailment(cfg, b, a)?;
    Ok(match (ab, ba) {
        (Entailment::Holds, Entailment::Holds) => Some(true),
        (Entailment::Fails(_), _) | (_, Entailment::Fails(_)) => Some(false),
        _ => None,
    })
}

/// Satisfiability of a single formula on a fresh session.
pub fn is_satisfiable(cfg: &SolverConfig, f: &Formula) -> Result<SatResult, SolverError> {
    let vars: Vec<Variable> = f.vars().into_iter().collect();
    let mut s = Session::open(&cfg.suited(f), &vars)?;
    s.assert_formula(f)?;
    s.check_sat()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{LinExpr, Rel, Value, VarKind};

    fn int(n: &str) -> Variable {
        Variable::new(n, Sort::Int, VarKind::State)
    }

    fn boolv(n: &str) -> Variable {
        Variable::new(n, Sort::Bool, VarKind::TemplateBool)
    }

    #[test]
    fn internal_rejects_arithmetic() {
        let cfg = SolverConfig::internal();
        assert!(matches!(
            Session::open(&cfg, &[int("x")]),
            Err(SolverError::UnsupportedSort(_))
        ));
        let vars: Vec<Variable> = (0..6).map(|k| boolv(&format!("b{k}"))).collect();
        let s = Session::open(&cfg, &vars).unwrap();
        assert_eq!(s.declared().len(), 6);
    }

    #[test]
    fn internal_push_pop() {
        let cfg = SolverConfig::internal();
        let a = boolv("a");
        let mut s = Session::open(&cfg, std::slice::from_ref(&a)).unwrap();
        assert!(s.check_sat().unwrap().is_sat());
        s.push().unwrap();
        s.assert_formula(&Formula::False).unwrap();
        assert!(s.check_sat().unwrap().is_unsat());
        s.pop().unwrap();
        assert!(s.check_sat().unwrap().is_sat());
        for _ in 0..3 {
            s.push().unwrap();
            s.assert_formula(&Formula::var(&a)).unwrap();
        }
        match s.check_sat().unwrap() {
            SatResult::Sat(m) => assert_eq!(m.get(&a), Some(&Value::Bool(true))),
            r => panic!("{r:?}"),
        }
        s.assert_formula(&Formula::not(Formula::var(&a))).unwrap();
        assert!(s.check_sat().unwrap().is_unsat());
        for _ in 0..3 {
            s.pop().unwrap();
        }
        assert!(s.check_sat().unwrap().is_sat());
        assert_eq!(s.pop(), Err(SolverError::UnbalancedPop));
    }

    #[test]
    fn undeclared_variable_is_rejected() {
        let cfg = SolverConfig::internal();
        let mut s = Session::open(&cfg, &[]).unwrap();
        assert!(matches!(
            s.assert_formula(&Formula::var(&boolv("q"))),
            Err(SolverError::UndeclaredVariable(_))
        ));
    }

    #[test]
    fn bogus_command_fails_to_spawn() {
        let cfg = SolverConfig {
            command: vec!["/nonexistent/solver-binary".into()],
            ..SolverConfig::default()
        };
        assert!(matches!(Session::open(&cfg, &[]), Err(SolverError::Spawn(_))));
    }

    #[test]
    fn logic_selection() {
        let r = Variable::new("r", Sort::Real, VarKind::State);
        assert_eq!(Logic::Auto.resolve(&[int("x")]), "QF_LIA");
        assert_eq!(Logic::Auto.resolve(&[r.clone()]), "QF_LRA");
        assert_eq!(Logic::Auto.resolve(&[int("x"), r]), "QF_LIRA");
        assert_eq!(Logic::Auto.resolve(&[boolv("b")]), "QF_LIA");
    }

    #[test]
    fn internal_entailment() {
        let cfg = SolverConfig::internal();
        let (a, b) = (boolv("a"), boolv("b"));
        let fa = Formula::var(&a);
        let fb = Formula::var(&b);
        let hyp = Formula::and([fa.clone(), Formula::implies(fa.clone(), fb.clone())]);
        assert_eq!(check_entailment(&cfg, &hyp, &fb).unwrap(), Entailment::Holds);
        assert!(matches!(check_entailment(&cfg, &fa, &fb).unwrap(), Entailment::Fails(_)));
        let _ = Rel::Lt;
        let _ = LinExpr::zero();
    }
}
