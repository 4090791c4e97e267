//! A small synchronous-dataflow node language:
//!
//! ```text
//! node NAME ( decls ) returns ( decls ) [ var decls ] let eq* tel
//! eq: ID = EXPR ;
//! ```
//!
//! Expressions are linear arithmetic, comparisons, `&& || !`,
//! `if E then E else E`, `pre ID` and `CONST -> EXPR`. After `tel`, optional
//! `predicate: E;` and `iopredicate: E;` lines supply predicates; inside
//! them `pre x` denotes the memory of `x`.
//!
//! Translation: each flow `x` under `pre` gets one state variable `pre_x`
//! (`x'` of it is the current value of `x`); `c -> pre x` initializes that
//! memory to `c`; any other `c -> e` uses a Boolean first-instant flag.
//! Locals are inlined; outputs become output variables.

use std::collections::{BTreeMap, BTreeSet};

use super::compile::{bool_of, compile, define, Scope, Val};
use super::lexer::{tokenize, CommentStyle};
use super::parser::{BinOp, Expr, ExprKind, Parser};
use super::ts::parse_sort;
use super::{FrontendError, Pos, TransitionSystem};
use crate::formula::{Formula, LinExpr, Rat, Rel, Sort, Value, VarKind, Variable};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowDecl {
    pub name: String,
    pub sort: Sort,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Equation {
    pub lhs: String,
    pub pos: Pos,
    pub(crate) rhs: Expr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeProgram {
    pub name: String,
    pub inputs: Vec<FlowDecl>,
    pub outputs: Vec<FlowDecl>,
    pub locals: Vec<FlowDecl>,
    pub equations: Vec<Equation>,
    pub(crate) predicates: Vec<Expr>,
    pub(crate) io_predicates: Vec<Expr>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Role {
    Input,
    Output,
    Local,
}

impl NodeProgram {
    fn decl<'a>(&'a self, name: &str) -> Option<(&'a FlowDecl, Role)> {
        let find = |ds: &'a [FlowDecl], r| ds.iter().find(|d| d.name == name).map(|d| (d, r));
        find(&self.inputs, Role::Input)
            .or_else(|| find(&self.outputs, Role::Output))
            .or_else(|| find(&self.locals, Role::Local))
    }

    fn equation(&self, name: &str) -> Option<&Equation> {
        self.equations.iter().find(|e| e.lhs == name)
    }

    /// Distinct flows appearing under `pre`, in order of first occurrence.
    pub fn pre_flows(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for eq in &self.equations {
            eq.rhs.walk(&mut |e| {
                if let ExprKind::Pre(x) = &e.kind {
                    if !out.contains(x) {
                        out.push(x.clone());
                    }
                }
            });
        }
        out
    }

    pub fn to_transition_system(&self) -> Result<TransitionSystem, FrontendError> {
        Ok(self.translate()?.ts)
    }

    /// Translation plus the mapping from memories to state variables.
    pub fn translate(&self) -> Result<NodeTranslation, FrontendError> {
        translate(self)
    }
}

fn parse_decls(p: &mut Parser, out: &mut Vec<FlowDecl>, close: &str) -> Result<(), FrontendError> {
    while !p.is_sym(close) && !p.is_kw(close) {
        let mut names = vec![p.expect_ident()?];
        while p.eat_sym(",") {
            names.push(p.expect_ident()?);
        }
        p.expect_sym(":")?;
        let sort = parse_sort(p)?;
        out.extend(names.into_iter().map(|(name, pos)| FlowDecl { name, sort, pos }));
        if !p.eat_sym(";") {
            break;
        }
    }
    Ok(())
}

/// Parse and check a node: flows declared once, each output/local defined
/// by exactly one equation, `pre` only on declared flows, no instantaneous
/// dependency cycle.
pub fn parse_node(text: &str) -> Result<NodeProgram, FrontendError> {
    let mut p = Parser::new(tokenize(text, CommentStyle::Dataflow)?, true);
    p.expect_kw("node")?;
    let (name, _) = p.expect_ident()?;
    let mut np = NodeProgram {
        name,
        inputs: vec![],
        outputs: vec![],
        locals: vec![],
        equations: vec![],
        predicates: vec![],
        io_predicates: vec![],
    };
    p.expect_sym("(")?;
    parse_decls(&mut p, &mut np.inputs, ")")?;
    p.expect_sym(")")?;
    p.expect_kw("returns")?;
    p.expect_sym("(")?;
    parse_decls(&mut p, &mut np.outputs, ")")?;
    p.expect_sym(")")?;
    p.eat_sym(";");
    if p.eat_kw("var") {
        while !p.is_kw("let") {
            let before = np.locals.len();
            parse_decls(&mut p, &mut np.locals, "let")?;
            if np.locals.len() == before {
                return p.error("expected local declarations or `let`");
            }
        }
    }
    p.expect_kw("let")?;
    while !p.is_kw("tel") {
        let (lhs, pos) = p.expect_ident()?;
        p.expect_sym("=")?;
        let rhs = p.expr()?;
        p.expect_sym(";")?;
        np.equations.push(Equation { lhs, pos, rhs });
    }
    p.expect_kw("tel")?;
    p.eat_sym(";");
    while !p.at_eof() {
        let io = if p.eat_kw("iopredicate") {
            true
        } else if p.eat_kw("predicate") {
            false
        } else {
            return p.error("expected `predicate:` or `iopredicate:` after `tel`");
        };
        p.expect_sym(":")?;
        let e = p.expr()?;
        p.expect_sym(";")?;
        if io {
            np.io_predicates.push(e);
        } else {
            np.predicates.push(e);
        }
    }
    check(&np)?;
    Ok(np)
}

fn check(np: &NodeProgram) -> Result<(), FrontendError> {
    let mut names = BTreeSet::new();
    for d in np.inputs.iter().chain(&np.outputs).chain(&np.locals) {
        if !names.insert(d.name.as_str()) {
            return Err(FrontendError::DuplicateDeclaration {
                pos: d.pos,
                name: d.name.clone(),
            });
        }
    }
    let mut defined = BTreeSet::new();
    for eq in &np.equations {
        match np.decl(&eq.lhs) {
            None => {
                return Err(FrontendError::UndeclaredVariable {
                    pos: eq.pos,
                    name: eq.lhs.clone(),
                })
            }
            Some((_, Role::Input)) => {
                return Err(FrontendError::InputDefined {
                    pos: eq.pos,
                    name: eq.lhs.clone(),
                })
            }
            Some(_) => {}
        }
        if !defined.insert(eq.lhs.as_str()) {
            return Err(FrontendError::DoublyDefined {
                pos: eq.pos,
                name: eq.lhs.clone(),
            });
        }
    }
    for d in np.outputs.iter().chain(&np.locals) {
        if !defined.contains(d.name.as_str()) {
            return Err(FrontendError::Undefined {
                name: d.name.clone(),
            });
        }
    }
    let exprs = np
        .equations
        .iter()
        .map(|e| &e.rhs)
        .chain(&np.predicates)
        .chain(&np.io_predicates);
    for e in exprs {
        let mut bad = None;
        e.walk(&mut |x| {
            if let ExprKind::Ident(n) | ExprKind::Pre(n) = &x.kind {
                if bad.is_none() && np.decl(n).is_none() {
                    bad = Some(FrontendError::UndeclaredVariable {
                        pos: x.pos,
                        name: n.clone(),
                    });
                }
            }
            if let ExprKind::Primed(n) = &x.kind {
                if bad.is_none() {
                    bad = Some(FrontendError::PrimeNotAllowed {
                        pos: x.pos,
                        name: n.clone(),
                    });
                }
            }
        });
        if let Some(err) = bad {
            return Err(err);
        }
    }
    if let Some(cycle) = find_cycle(np) {
        return Err(FrontendError::InstantaneousCycle { cycle });
    }
    Ok(())
}

/// Flows read instantaneously (not under `pre`) by the equation of `name`.
fn instant_deps(np: &NodeProgram, name: &str) -> Vec<String> {
    let mut out = Vec::new();
    if let Some(eq) = np.equation(name) {
        eq.rhs.walk(&mut |e| {
            if let ExprKind::Ident(x) = &e.kind {
                if np.equation(x).is_some() && !out.contains(x) {
                    out.push(x.clone());
                }
            }
        });
    }
    out
}

fn find_cycle(np: &NodeProgram) -> Option<Vec<String>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Fresh,
        Active,
        Done,
    }
    fn dfs(
        np: &NodeProgram,
        x: &str,
        marks: &mut BTreeMap<String, Mark>,
        stack: &mut Vec<String>,
    ) -> Option<Vec<String>> {
        marks.insert(x.to_string(), Mark::Active);
        stack.push(x.to_string());
        for y in instant_deps(np, x) {
            match marks.get(&y).copied().unwrap_or(Mark::Fresh) {
                Mark::Active => {
                    let start = stack.iter().position(|s| *s == y).unwrap();
                    let mut cycle = stack[start..].to_vec();
                    cycle.push(y);
                    return Some(cycle);
                }
                Mark::Fresh => {
                    if let Some(c) = dfs(np, &y, marks, stack) {
                        return Some(c);
                    }
                }
                Mark::Done => {}
            }
        }
        stack.pop();
        marks.insert(x.to_string(), Mark::Done);
        None
    }
    let mut marks = BTreeMap::new();
    for eq in &np.equations {
        if !marks.contains_key(&eq.lhs) {
            if let Some(c) = dfs(np, &eq.lhs, &mut marks, &mut Vec::new()) {
                return Some(c);
            }
        }
    }
    None
}

/// Result of translating a node.
#[derive(Clone, Debug)]
pub struct NodeTranslation {
    pub ts: TransitionSystem,
    /// `(flow, state variable holding its previous value, initial value)`.
    pub memories: Vec<(String, Variable, Option<Value>)>,
    /// Set at the first instant only; present when a general `->` occurs.
    pub first_flag: Option<Variable>,
}

struct Memory {
    flow: String,
    var: Variable,
    init: Option<Value>,
}

struct NodeScope<'a> {
    np: &'a NodeProgram,
    taken: BTreeSet<String>,
    mems: Vec<Memory>,
    first: Option<Variable>,
    locals: BTreeMap<String, Val>,
}

impl NodeScope<'_> {
    fn fresh_name(&mut self, base: &str) -> String {
        let mut name = base.to_string();
        let mut k = 1;
        while self.taken.contains(&name) {
            name = format!("{base}_{k}");
            k += 1;
        }
        self.taken.insert(name.clone());
        name
    }

    fn memory(&mut self, flow: &str, pos: Pos) -> Result<usize, FrontendError> {
        if let Some(k) = self.mems.iter().position(|m| m.flow == flow) {
            return Ok(k);
        }
        let (decl, _) = self.np.decl(flow).ok_or_else(|| FrontendError::UndeclaredVariable {
            pos,
            name: flow.into(),
        })?;
        let sort = decl.sort;
        let name = self.fresh_name(&format!("pre_{flow}"));
        self.mems.push(Memory {
            flow: flow.into(),
            var: Variable::new(name, sort, VarKind::State),
            init: None,
        });
        Ok(self.mems.len() - 1)
    }

    fn value_of(&mut self, flow: &str, pos: Pos) -> Result<Val, FrontendError> {
        let np = self.np;
        match np.decl(flow) {
            Some((d, Role::Input)) => Ok(Val::var(&Variable::new(&d.name, d.sort, VarKind::Input))),
            Some((d, Role::Output)) => Ok(Val::var(&Variable::new(&d.name, d.sort, VarKind::Output))),
            Some((d, Role::Local)) => {
                if let Some(v) = self.locals.get(flow) {
                    return Ok(v.clone());
                }
                let eq = np.equation(&d.name).expect("checked: every local is defined");
                let v = compile(&eq.rhs, self)?;
                let v = coerce(v, d.sort, eq.pos, &d.name)?;
                self.locals.insert(flow.to_string(), v.clone());
                Ok(v)
            }
            None => Err(FrontendError::UndeclaredVariable {
                pos,
                name: flow.into(),
            }),
        }
    }
}

fn coerce(v: Val, sort: Sort, pos: Pos, name: &str) -> Result<Val, FrontendError> {
    match (&v, sort) {
        (Val::Bool(_), Sort::Bool) | (Val::Num(_), Sort::Int | Sort::Real) => Ok(v),
        _ => Err(FrontendError::SortMismatch {
            pos,
            msg: format!("`{name}` is {sort} but its definition is not"),
        }),
    }
}

fn constant_value(v: &Val) -> Option<Value> {
    match v {
        Val::Bool(Formula::True) => Some(Value::Bool(true)),
        Val::Bool(Formula::False) => Some(Value::Bool(false)),
        Val::Num(cs) if cs.len() == 1 && cs[0].1.is_constant() => {
            Some(Value::Num(cs[0].1.constant_term().clone()))
        }
        _ => None,
    }
}

impl Scope for NodeScope<'_> {
    fn ident(&mut self, name: &str, pos: Pos) -> Result<Val, FrontendError> {
        self.value_of(name, pos)
    }

    fn pre(&mut self, name: &str, pos: Pos) -> Result<Val, FrontendError> {
        let k = self.memory(name, pos)?;
        Ok(Val::var(&self.mems[k].var))
    }

    fn pre_with_init(&mut self, name: &str, init: &Val, pos: Pos) -> Result<Option<Val>, FrontendError> {
        let k = self.memory(name, pos)?;
        let c = constant_value(init).expect("caller checks constness");
        if !c.fits(self.mems[k].var.sort()) {
            return Err(FrontendError::UnsupportedInit {
                pos,
                msg: format!("initial value {c} does not fit `{name}`"),
            });
        }
        match &self.mems[k].init {
            None => self.mems[k].init = Some(c),
            Some(old) if *old == c => {}
            // A second, different initializer: fall back to the first-instant flag.
            Some(_) => return Ok(None),
        }
        Ok(Some(Val::var(&self.mems[k].var)))
    }

    fn first_instant(&mut self, _pos: Pos) -> Result<Formula, FrontendError> {
        if self.first.is_none() {
            let name = self.fresh_name("first");
            self.first = Some(Variable::new(name, Sort::Bool, VarKind::State));
        }
        Ok(Formula::var(self.first.as_ref().unwrap()))
    }
}

fn translate(np: &NodeProgram) -> Result<NodeTranslation, FrontendError> {
    let taken = np
        .inputs
        .iter()
        .chain(&np.outputs)
        .chain(&np.locals)
        .map(|d| d.name.clone())
        .collect();
    let mut scope = NodeScope {
        np,
        taken,
        mems: vec![],
        first: None,
        locals: BTreeMap::new(),
    };
    let mut ts = TransitionSystem::new(&np.name);
    ts.inputs = np
        .inputs
        .iter()
        .map(|d| Variable::new(&d.name, d.sort, VarKind::Input))
        .collect();
    ts.outputs = np
        .outputs
        .iter()
        .map(|d| Variable::new(&d.name, d.sort, VarKind::Output))
        .collect();

    let mut parts = Vec::new();
    for (out, d) in ts.outputs.clone().iter().zip(&np.outputs) {
        let eq = np.equation(&d.name).expect("checked");
        let v = compile(&eq.rhs, &mut scope)?;
        parts.push(define(out, &v, eq.pos)?);
    }
    for e in &np.predicates {
        let f = bool_of(e, &mut scope)?;
        if let Some(v) = f.vars().into_iter().find(|v| v.kind() != VarKind::State) {
            return Err(FrontendError::NotAllowed {
                pos: e.pos,
                msg: format!("state predicate mentions `{v}`; use `pre {v}` for its memory"),
            });
        }
        ts.state_preds.push(f);
    }
    for e in &np.io_predicates {
        let f = bool_of(e, &mut scope)?;
        if let Some(v) = f.vars().into_iter().find(|v| v.kind() == VarKind::State) {
            return Err(FrontendError::NotAllowed {
                pos: e.pos,
                msg: format!("I/O predicate mentions memory `{v}`"),
            });
        }
        ts.io_preds.push(f);
    }
    // Next-state equations; compiling a local may discover new memories.
    let mut k = 0;
    while k < scope.mems.len() {
        let flow = scope.mems[k].flow.clone();
        let next = scope.mems[k].var.primed();
        let pos = np.equation(&flow).map(|e| e.pos).unwrap_or_default();
        let v = scope.value_of(&flow, pos)?;
        parts.push(define(&next, &v, pos)?);
        k += 1;
    }
    let mut init = Vec::new();
    for m in &scope.mems {
        if let Some(c) = &m.init {
            init.push(match c {
                Value::Bool(true) => Formula::var(&m.var),
                Value::Bool(false) => Formula::not(Formula::var(&m.var)),
                Value::Num(r) => Formula::atom(LinExpr::var(&m.var), Rel::Eq, LinExpr::constant(r.clone())),
            });
        }
    }
    if let Some(f) = &scope.first {
        init.push(Formula::var(f));
        parts.push(Formula::not(Formula::var(&f.primed())));
    }
    ts.state = scope.mems.iter().map(|m| m.var.clone()).collect();
    ts.state.extend(scope.first.clone());
    ts.init = Formula::conj(init);
    ts.trans = Formula::conj(parts);
    Ok(NodeTranslation {
        ts,
        memories: scope
            .mems
            .into_iter()
            .map(|m| (m.flow, m.var, m.init))
            .collect(),
        first_flag: scope.first,
    })
}

/// Reference interpreter for [`NodeProgram`]s, independent of the
/// translation. `pre x` at the first instant is an error (nil).
pub struct NodeInterpreter<'a> {
    np: &'a NodeProgram,
    prev: Option<BTreeMap<String, Value>>,
}

impl<'a> NodeInterpreter<'a> {
    pub fn new(np: &'a NodeProgram) -> Self {
        NodeInterpreter { np, prev: None }
    }

    /// Values of all flows at the previous instant (`None` before the first).
    pub fn previous(&self) -> Option<&BTreeMap<String, Value>> {
        self.prev.as_ref()
    }

    /// Run one instant; returns the value of every flow.
    pub fn step(&mut self, inputs: &BTreeMap<String, Value>) -> Result<BTreeMap<String, Value>, String> {
        let mut env: BTreeMap<String, Value> = BTreeMap::new();
        for d in &self.np.inputs {
            let v = inputs.get(&d.name).ok_or_else(|| format!("missing input `{}`", d.name))?;
            if !v.fits(d.sort) {
                return Err(format!("input `{}` has the wrong sort", d.name));
            }
            env.insert(d.name.clone(), v.clone());
        }
        for eq in &self.np.equations {
            self.flow(&eq.lhs, &mut env)?;
        }
        self.prev = Some(env.clone());
        Ok(env)
    }

    fn flow(&self, name: &str, env: &mut BTreeMap<String, Value>) -> Result<Value, String> {
        if let Some(v) = env.get(name) {
            return Ok(v.clone());
        }
        let eq = self.np.equation(name).ok_or_else(|| format!("no value for `{name}`"))?;
        let v = self.eval(&eq.rhs, env)?;
        env.insert(name.to_string(), v.clone());
        Ok(v)
    }

    fn eval(&self, e: &Expr, env: &mut BTreeMap<String, Value>) -> Result<Value, String> {
        let num = |v: Value| v.as_num().cloned().ok_or_else(|| "expected a number".to_string());
        let boolean = |v: Value| v.as_bool().ok_or_else(|| "expected a Boolean".to_string());
        Ok(match &e.kind {
            ExprKind::Num(r) => Value::Num(r.clone()),
            ExprKind::Bool(b) => Value::Bool(*b),
            ExprKind::Ident(x) => self.flow(x, env)?,
            ExprKind::Primed(_) => return Err("primes are not part of the node language".into()),
            ExprKind::Pre(x) => match &self.prev {
                Some(prev) => prev.get(x).cloned().ok_or_else(|| format!("no memory for `{x}`"))?,
                None => return Err(format!("`pre {x}` is nil at the first instant")),
            },
            ExprKind::Arrow(a, b) => {
                if self.prev.is_none() {
                    self.eval(a, env)?
                } else {
                    self.eval(b, env)?
                }
            }
            ExprKind::Ite(c, a, b) => {
                if boolean(self.eval(c, env)?)? {
                    self.eval(a, env)?
                } else {
                    self.eval(b, env)?
                }
            }
            ExprKind::Neg(a) => Value::Num(-num(self.eval(a, env)?)?),
            ExprKind::Not(a) => Value::Bool(!boolean(self.eval(a, env)?)?),
            ExprKind::Nary(op, es) => {
                let mut acc = *op == BinOp::And;
                for x in es {
                    let b = boolean(self.eval(x, env)?)?;
                    acc = if *op == BinOp::And { acc && b } else { acc || b };
                }
                Value::Bool(acc)
            }
            ExprKind::Bin(op, a, b) => {
                let va = self.eval(a, env)?;
                let vb = self.eval(b, env)?;
                match op {
                    BinOp::Add => Value::Num(num(va)? + num(vb)?),
                    BinOp::Sub => Value::Num(num(va)? - num(vb)?),
                    BinOp::Mul => Value::Num(num(va)? * num(vb)?),
                    BinOp::Div => {
                        let d = num(vb)?;
                        if d == Rat::from_integer(0.into()) {
                            return Err("division by zero".into());
                        }
                        Value::Num(num(va)? / d)
                    }
                    BinOp::Cmp(rel) => match (va, vb) {
                        (Value::Num(x), Value::Num(y)) => Value::Bool(rel.holds(x.cmp(&y))),
                        (Value::Bool(x), Value::Bool(y)) => Value::Bool(match rel {
                            Rel::Eq => x == y,
                            Rel::Ne => x != y,
                            _ => return Err("ordering on Booleans".into()),
                        }),
                        _ => return Err("comparison of mixed sorts".into()),
                    },
                    BinOp::Implies => Value::Bool(!boolean(va)? || boolean(vb)?),
                    BinOp::Iff => Value::Bool(boolean(va)? == boolean(vb)?),
                    BinOp::And | BinOp::Or => unreachable!("parsed as n-ary"),
                }
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CLICKER: &str = "
        node clicker (dir : int) returns (out : int)
        var last : int;
        let
          last = 0 -> pre out;
          out = if dir <> 0 then dir
                else if last >= 1 then last - 1
                else if last <= -1 then last + 1
                else if last = 0 then 0
                else last;
        tel
    ";

    #[test]
    fn clicker_shape() {
        let np = parse_node(CLICKER).unwrap();
        assert_eq!(np.inputs.len(), 1);
        assert_eq!(np.outputs.len(), 1);
        assert_eq!(np.pre_flows(), ["out"]);
        let ts = np.to_transition_system().unwrap();
        assert_eq!(ts.state.len(), 1);
        assert_eq!(ts.state[0].name(), "pre_out");
        assert_eq!(ts.init.to_string(), "pre_out = 0");
        assert_eq!(ts.guard, Formula::True);
        ts.validate().unwrap();
    }

    #[test]
    fn stateless_node() {
        let np = parse_node("node inc (x : int) returns (y : int) let y = x + 1; tel").unwrap();
        let ts = np.to_transition_system().unwrap();
        assert!(ts.state.is_empty());
        assert_eq!(ts.init, Formula::True);
        assert_eq!(ts.trans.to_string(), "y = x + 1");
    }

    #[test]
    fn two_pre_occurrences_share_state() {
        // Hand translation: one memory for `x`, none for `y`.
        let np = parse_node(
            "node d (u : int) returns (x, y : int)
             let x = (0 -> pre x) + u; y = pre x - (0 -> pre x); tel",
        )
        .unwrap();
        let tr = np.translate().unwrap();
        assert_eq!(tr.ts.state.len(), 1);
        assert_eq!(tr.memories.len(), 1);
    }

    #[test]
    fn causality_errors() {
        let err = parse_node("node c (u : int) returns (x : int) let x = x + 1; tel").unwrap_err();
        assert_eq!(
            err,
            FrontendError::InstantaneousCycle {
                cycle: vec!["x".into(), "x".into()]
            }
        );
        let err = parse_node(
            "node c (u : int) returns (x : int) var y : int; let x = y; y = x + u; tel",
        )
        .unwrap_err();
        assert!(matches!(err, FrontendError::InstantaneousCycle { .. }));
        // A delayed self-reference is fine.
        parse_node("node c (u : int) returns (x : int) let x = 0 -> pre x + 1; tel").unwrap();
    }

    #[test]
    fn definition_errors() {
        let err = parse_node("node c (u : int) returns (x : int) let x = u; x = 1; tel").unwrap_err();
        assert!(matches!(err, FrontendError::DoublyDefined { .. }));
        let err = parse_node("node c (u : int) returns (x : int) let tel").unwrap_err();
        assert!(matches!(err, FrontendError::Undefined { .. }));
        let err = parse_node("node c (u : int) returns (x : int) let u = 1; x = 1; tel").unwrap_err();
        assert!(matches!(err, FrontendError::InputDefined { .. }));
        let err = parse_node("node c (u : int) returns (x : int) let x = pre z; tel").unwrap_err();
        assert!(matches!(err, FrontendError::UndeclaredVariable { .. }));
    }

    #[test]
    fn non_constant_initializer() {
        let np = parse_node("node c (u : int) returns (x : int) let x = u -> pre x; tel").unwrap();
        assert!(matches!(
            np.to_transition_system(),
            Err(FrontendError::UnsupportedInit { .. })
        ));
    }

    #[test]
    fn general_arrow_uses_a_first_flag() {
        let np = parse_node("node c (u : int) returns (x : int) let x = 1 -> u + 2; tel").unwrap();
        let tr = np.translate().unwrap();
        let flag = tr.first_flag.clone().unwrap();
        assert_eq!(flag.name(), "first");
        assert_eq!(tr.ts.init, Formula::var(&flag));
        tr.ts.validate().unwrap();
    }

    #[test]
    fn interpreter_runs_clicker() {
        let np = parse_node(CLICKER).unwrap();
        let mut it = NodeInterpreter::new(&np);
        let mut outs = vec![];
        for d in [0, 3, 0, 0, -2, 0, 0, 0] {
            let env = it.step(&[("dir".to_string(), Value::int(d))].into()).unwrap();
            outs.push(env["out"].clone());
        }
        let expect: Vec<Value> = [0, 3, 2, 1, -2, -1, 0, 0].into_iter().map(Value::int).collect();
        assert_eq!(outs, expect);
    }
}
