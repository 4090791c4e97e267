//! Input formats: a guarded transition-system description and a small
//! synchronous-dataflow node language. Both produce a [`TransitionSystem`].

mod compile;
mod harvest;
mod lexer;
mod node;
mod parser;
mod ts;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::formula::{Formula, Sort, VarKind, Variable};

pub use harvest::{harvest_io_predicates, harvest_predicates, HarvestOptions};
pub use node::{parse_node, Equation, FlowDecl, NodeInterpreter, NodeProgram, NodeTranslation};
pub use ts::parse_transition_system;

/// Which grammar a source text is in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SourceKind {
    TransitionSystem,
    Node,
}

impl SourceKind {
    /// `.node` and `.lus` files are nodes; anything else is a transition system.
    pub fn from_path(path: &std::path::Path) -> SourceKind {
        match path.extension().and_then(|e| e.to_str()) {
            Some("node") | Some("lus") => SourceKind::Node,
            _ => SourceKind::TransitionSystem,
        }
    }
}

/// A parsed input, with the node program kept when there was one.
#[derive(Clone, Debug)]
pub struct Source {
    pub ts: TransitionSystem,
    pub node: Option<NodeProgram>,
}

pub fn parse_source(text: &str, kind: SourceKind) -> Result<Source, FrontendError> {
    Ok(match kind {
        SourceKind::TransitionSystem => Source {
            ts: parse_transition_system(text)?,
            node: None,
        },
        SourceKind::Node => {
            let np = parse_node(text)?;
            Source {
                ts: np.to_transition_system()?,
                node: Some(np),
            }
        }
    })
}

/// The state predicates to use: the declared ones, or harvested ones when
/// none were declared.
pub fn state_predicates(ts: &TransitionSystem, opts: HarvestOptions) -> crate::template::PredicateSet {
    if ts.state_preds.is_empty() {
        harvest_predicates(ts, opts)
    } else {
        ts.state_preds.iter().cloned().collect()
    }
}

/// 1-based source position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum FrontendError {
    #[error("{pos}: syntax error: {msg}")]
    Syntax { pos: Pos, msg: String },
    #[error("{pos}: undeclared variable `{name}`")]
    UndeclaredVariable { pos: Pos, name: String },
    #[error("{pos}: `{name}` declared twice")]
    DuplicateDeclaration { pos: Pos, name: String },
    #[error("{pos}: sort mismatch: {msg}")]
    SortMismatch { pos: Pos, msg: String },
    #[error("{pos}: nonlinear term")]
    NonlinearAtom { pos: Pos },
    #[error("{pos}: primed variable `{name}'` not allowed here")]
    PrimeNotAllowed { pos: Pos, name: String },
    #[error("{pos}: {msg}")]
    NotAllowed { pos: Pos, msg: String },
    #[error("{pos}: flow `{name}` defined more than once")]
    DoublyDefined { pos: Pos, name: String },
    #[error("flow `{name}` has no defining equation")]
    Undefined { name: String },
    #[error("{pos}: input `{name}` cannot be defined by an equation")]
    InputDefined { pos: Pos, name: String },
    #[error("instantaneous dependency cycle: {}", .cycle.join(" -> "))]
    InstantaneousCycle { cycle: Vec<String> },
    #[error("{pos}: unsupported initializer: {msg}")]
    UnsupportedInit { pos: Pos, msg: String },
}

/// The analyzed object: state `σ`, inputs, outputs, init `S`, guard `C`,
/// transition `T` over `σ, σ', inputs, outputs`, and postcondition `P`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionSystem {
    pub name: String,
    pub state: Vec<Variable>,
    pub inputs: Vec<Variable>,
    pub outputs: Vec<Variable>,
    pub init: Formula,
    pub guard: Formula,
    pub trans: Formula,
    pub post: Formula,
    /// User-supplied state predicates (may be empty; see [`harvest_predicates`]).
    pub state_preds: Vec<Formula>,
    /// User-supplied input/output predicates for edge guards.
    pub io_preds: Vec<Formula>,
}

impl TransitionSystem {
    pub fn new(name: impl Into<String>) -> Self {
        TransitionSystem {
            name: name.into(),
            state: vec![],
            inputs: vec![],
            outputs: vec![],
            init: Formula::True,
            guard: Formula::True,
            trans: Formula::True,
            post: Formula::True,
            state_preds: vec![],
            io_preds: vec![],
        }
    }

    pub fn primed_state(&self) -> Vec<Variable> {
        self.state.iter().map(Variable::primed).collect()
    }

    pub fn io_vars(&self) -> Vec<Variable> {
        self.inputs.iter().chain(&self.outputs).cloned().collect()
    }

    /// Every variable a verification condition quantifies over:
    /// `σ, σ', inputs, outputs`.
    pub fn quantified_vars(&self) -> Vec<Variable> {
        self.state
            .iter()
            .cloned()
            .chain(self.primed_state())
            .chain(self.io_vars())
            .collect()
    }

    pub fn lookup(&self, name: &str) -> Option<&Variable> {
        self.state
            .iter()
            .chain(&self.inputs)
            .chain(&self.outputs)
            .find(|v| v.name() == name)
    }

    pub fn has_postcondition(&self) -> bool {
        self.post != Formula::True
    }

    pub fn has_reals(&self) -> bool {
        self.state
            .iter()
            .chain(&self.inputs)
            .chain(&self.outputs)
            .any(|v| v.sort() == Sort::Real)
    }

    /// Parse a formula against this system's declarations. Primes are
    /// accepted only with `allow_primes`.
    pub fn parse_formula(&self, text: &str, allow_primes: bool) -> Result<Formula, FrontendError> {
        ts::parse_formula_in(self, text, allow_primes)
    }

    /// Checks the scoping rules: `S`, `P` and state predicates over `σ`,
    /// `C` over `σ` and inputs, I/O predicates over inputs/outputs.
    pub fn validate(&self) -> Result<(), String> {
        let sigma: BTreeSet<&Variable> = self.state.iter().collect();
        let inputs: BTreeSet<&Variable> = self.inputs.iter().collect();
        let io: BTreeSet<&Variable> = self.inputs.iter().chain(&self.outputs).collect();
        let primed = self.primed_state();
        let within = |f: &Formula, allowed: &dyn Fn(&Variable) -> bool, what: &str| {
            match f.vars().into_iter().find(|v| !allowed(v)) {
                Some(v) => Err(format!("{what} mentions `{v}`")),
                None => Ok(()),
            }
        };
        within(&self.init, &|v| sigma.contains(v), "init")?;
        within(&self.post, &|v| sigma.contains(v), "post")?;
        within(&self.guard, &|v| sigma.contains(v) || inputs.contains(v), "guard")?;
        within(
            &self.trans,
            &|v| sigma.contains(v) || io.contains(v) || primed.contains(v),
            "trans",
        )?;
        for p in &self.state_preds {
            within(p, &|v| sigma.contains(v), "state predicate")?;
        }
        for p in &self.io_preds {
            within(p, &|v| io.contains(v), "I/O predicate")?;
        }
        Ok(())
    }
}

impl fmt::Display for TransitionSystem {
    /// Renders in the transition-system input format; parsing the output
    /// yields an identical system.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "system {}", self.name)?;
        let decl = |f: &mut fmt::Formatter<'_>, kw: &str, vs: &[Variable]| -> fmt::Result {
            for v in vs {
                writeln!(f, "{kw} {} : {};", v.name(), v.sort())?;
            }
            Ok(())
        };
        decl(f, "state", &self.state)?;
        decl(f, "input", &self.inputs)?;
        decl(f, "output", &self.outputs)?;
        writeln!(f, "init: {};", self.init)?;
        writeln!(f, "guard: {};", self.guard)?;
        writeln!(f, "trans: {};", self.trans)?;
        writeln!(f, "post: {};", self.post)?;
        for p in &self.state_preds {
            writeln!(f, "predicate: {p};")?;
        }
        for p in &self.io_preds {
            writeln!(f, "iopredicate: {p};")?;
        }
        Ok(())
    }
}

pub(crate) fn var_kind_label(k: VarKind) -> &'static str {
    match k {
        VarKind::State => "state",
        VarKind::PrimedState => "primed state",
        VarKind::Input => "input",
        VarKind::Output => "output",
        VarKind::TemplateBool => "template",
        VarKind::Auxiliary => "auxiliary",
    }
}
