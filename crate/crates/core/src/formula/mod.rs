//! Quantifier-free formulas over linear integer/rational arithmetic and Booleans.
//!
//! Formulas are immutable values. Atoms are linear comparisons between two
//! [`LinExpr`] sides; coefficients are exact rationals. Simplification
//! ([`Formula::simplify`]) is a separate pass and never required for
//! correctness.

mod display;
mod eval;
mod linear;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use eval::{EvalError, Model, Value};
pub use linear::{LinExpr, Rat};

/// Value domain of a variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sort {
    /// Mathematical (unbounded) integers.
    Int,
    /// Exact rationals.
    Real,
    Bool,
}

impl Sort {
    pub fn is_numeric(self) -> bool {
        !matches!(self, Sort::Bool)
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sort::Int => "int",
            Sort::Real => "real",
            Sort::Bool => "bool",
        })
    }
}

/// Role of a variable inside a system or an engine query.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VarKind {
    State,
    PrimedState,
    Input,
    Output,
    TemplateBool,
    Auxiliary,
}

/// A typed variable. Cheap to clone.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Variable {
    name: Arc<str>,
    sort: Sort,
    kind: VarKind,
}

impl Variable {
    pub fn new(name: impl AsRef<str>, sort: Sort, kind: VarKind) -> Self {
        Variable {
            name: Arc::from(name.as_ref()),
            sort,
            kind,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn sort(&self) -> Sort {
        self.sort
    }

    pub fn kind(&self) -> VarKind {
        self.kind
    }

    /// The primed counterpart of a state variable. Other kinds are returned
    /// unchanged.
    pub fn primed(&self) -> Variable {
        match self.kind {
            VarKind::State => Variable::new(format!("{}'", self.name), self.sort, VarKind::PrimedState),
            _ => self.clone(),
        }
    }

    /// Inverse of [`Variable::primed`].
    pub fn unprimed(&self) -> Variable {
        match self.kind {
            VarKind::PrimedState => Variable::new(
                self.name.strip_suffix('\'').unwrap_or(&self.name),
                self.sort,
                VarKind::State,
            ),
            _ => self.clone(),
        }
    }

    /// A copy of this variable under another name and kind, same sort.
    pub fn renamed(&self, name: impl AsRef<str>, kind: VarKind) -> Variable {
        Variable::new(name, self.sort, kind)
    }
}

impl fmt::Debug for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.name, self.sort)
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Comparison operator of a linear atom.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rel {
    Lt,
    Le,
    Eq,
    Ne,
    Ge,
    Gt,
}

impl Rel {
    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Lt => "<",
            Rel::Le => "<=",
            Rel::Eq => "=",
            Rel::Ne => "!=",
            Rel::Ge => ">=",
            Rel::Gt => ">",
        }
    }

    /// Relation obtained by swapping the two sides.
    pub fn flip(self) -> Rel {
        match self {
            Rel::Lt => Rel::Gt,
            Rel::Le => Rel::Ge,
            Rel::Ge => Rel::Le,
            Rel::Gt => Rel::Lt,
            r => r,
        }
    }

    pub fn negate(self) -> Rel {
        match self {
            Rel::Lt => Rel::Ge,
            Rel::Le => Rel::Gt,
            Rel::Eq => Rel::Ne,
            Rel::Ne => Rel::Eq,
            Rel::Ge => Rel::Lt,
            Rel::Gt => Rel::Le,
        }
    }

    pub fn holds(self, ord: std::cmp::Ordering) -> bool {
        use std::cmp::Ordering::*;
        match self {
            Rel::Lt => ord == Less,
            Rel::Le => ord != Greater,
            Rel::Eq => ord == Equal,
            Rel::Ne => ord != Equal,
            Rel::Ge => ord != Less,
            Rel::Gt => ord == Greater,
        }
    }

    /// The canonical comparison family, in rendering order.
    pub const FAMILY: [Rel; 5] = [Rel::Lt, Rel::Le, Rel::Eq, Rel::Ge, Rel::Gt];
}

/// A linear comparison `lhs rel rhs`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub lhs: LinExpr,
    pub rel: Rel,
    pub rhs: LinExpr,
}

impl Atom {
    pub fn new(lhs: LinExpr, rel: Rel, rhs: LinExpr) -> Self {
        Atom { lhs, rel, rhs }
    }

    /// Normal form `e rel c` where `e` has no constant term and its first
    /// coefficient (in variable order) is 1. Returns `None` when `e` is empty,
    /// i.e. the atom is variable-free.
    pub fn normalized(&self) -> Option<(LinExpr, Rel, Rat)> {
        let diff = self.lhs.sub(&self.rhs);
        let lead = diff.leading_coeff()?.clone();
        let k = -diff.constant_term().clone();
        let mut e = diff.without_constant();
        let mut rel = self.rel;
        let scale = num_traits::Signed::abs(&lead);
        e = e.scale(&(Rat::from_integer(1.into()) / &scale));
        let mut c = k / &scale;
        if num_traits::Signed::is_negative(&lead) {
            e = e.neg();
            c = -c;
            rel = rel.flip();
        }
        Some((e, rel, c))
    }

    /// Build a readable atom from a normal form: positive terms left,
    /// negative terms and the constant right.
    pub fn from_normal(e: &LinExpr, rel: Rel, c: &Rat) -> Atom {
        let (pos, neg) = e.split_by_sign();
        Atom::new(pos, rel, neg.neg().add(&LinExpr::constant(c.clone())))
    }

    pub fn vars(&self) -> impl Iterator<Item = &Variable> {
        self.lhs.vars().chain(self.rhs.vars())
    }

    /// Truth value when the atom is variable-free.
    pub fn constant_value(&self) -> Option<bool> {
        let diff = self.lhs.sub(&self.rhs);
        if diff.is_constant() {
            Some(self.rel.holds(diff.constant_term().cmp(&Rat::from_integer(0.into()))))
        } else {
            None
        }
    }
}

/// Formula tree.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Var(Variable),
    Atom(Atom),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
}

/// Replacement for a variable in [`Formula::substitute`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Term {
    Num(LinExpr),
    Bool(Formula),
}

impl From<&Value> for Term {
    fn from(v: &Value) -> Self {
        match v {
            Value::Bool(b) => Term::Bool(Formula::constant(*b)),
            Value::Num(r) => Term::Num(LinExpr::constant(r.clone())),
        }
    }
}

pub type Binding = BTreeMap<Variable, Term>;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SubstitutionError {
    #[error("cannot bind {var:?} to a {found} term")]
    SortMismatch { var: Variable, found: &'static str },
    #[error("cannot bind integer variable {var:?} to a non-integer value")]
    NonIntegral { var: Variable },
}

impl Formula {
    pub fn constant(b: bool) -> Formula {
        if b {
            Formula::True
        } else {
            Formula::False
        }
    }

    pub fn var(v: &Variable) -> Formula {
        Formula::Var(v.clone())
    }

    pub fn atom(lhs: LinExpr, rel: Rel, rhs: LinExpr) -> Formula {
        Formula::Atom(Atom::new(lhs, rel, rhs))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(fs: impl IntoIterator<Item = Formula>) -> Formula {
        Formula::And(fs.into_iter().collect())
    }

    pub fn or(fs: impl IntoIterator<Item = Formula>) -> Formula {
        Formula::Or(fs.into_iter().collect())
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    /// Conjunction that skips `true` operands and collapses trivial cases.
    /// Used by builders that assemble many parts; not a full simplifier.
    pub fn conj(fs: impl IntoIterator<Item = Formula>) -> Formula {
        let parts: Vec<Formula> = fs.into_iter().filter(|f| *f != Formula::True).collect();
        match parts.len() {
            0 => Formula::True,
            1 => parts.into_iter().next().unwrap(),
            _ => Formula::And(parts),
        }
    }

    /// Disjunction counterpart of [`Formula::conj`].
    pub fn disj(fs: impl IntoIterator<Item = Formula>) -> Formula {
        let parts: Vec<Formula> = fs.into_iter().filter(|f| *f != Formula::False).collect();
        match parts.len() {
            0 => Formula::False,
            1 => parts.into_iter().next().unwrap(),
            _ => Formula::Or(parts),
        }
    }

    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::True | Formula::False | Formula::Var(_) | Formula::Atom(_) => vec![],
            Formula::Not(a) => vec![a],
            Formula::And(fs) | Formula::Or(fs) => fs.iter().collect(),
            Formula::Implies(a, b) | Formula::Iff(a, b) => vec![a, b],
        }
    }

    /// Free variables.
    pub fn vars(&self) -> BTreeSet<Variable> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Variable>) {
        match self {
            Formula::Var(v) => {
                out.insert(v.clone());
            }
            Formula::Atom(a) => out.extend(a.vars().cloned()),
            _ => {
                for c in self.children() {
                    c.collect_vars(out);
                }
            }
        }
    }

    /// All atoms, in left-to-right order, with repetitions.
    pub fn atoms(&self) -> Vec<&Atom> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a Atom>) {
        match self {
            Formula::Atom(a) => out.push(a),
            _ => {
                for c in self.children() {
                    c.collect_atoms(out);
                }
            }
        }
    }

    /// Structural map over the leaves; connectives are rebuilt unchanged.
    fn map_leaves<E>(
        &self,
        leaf: &mut impl FnMut(&Formula) -> Result<Formula, E>,
    ) -> Result<Formula, E> {
        Ok(match self {
            Formula::True | Formula::False | Formula::Var(_) | Formula::Atom(_) => leaf(self)?,
            Formula::Not(a) => Formula::not(a.map_leaves(leaf)?),
            Formula::And(fs) => {
                Formula::And(fs.iter().map(|f| f.map_leaves(leaf)).collect::<Result<_, _>>()?)
            }
            Formula::Or(fs) => {
                Formula::Or(fs.iter().map(|f| f.map_leaves(leaf)).collect::<Result<_, _>>()?)
            }
            Formula::Implies(a, b) => Formula::implies(a.map_leaves(leaf)?, b.map_leaves(leaf)?),
            Formula::Iff(a, b) => Formula::iff(a.map_leaves(leaf)?, b.map_leaves(leaf)?),
        })
    }

    /// Simultaneous substitution. Unbound variables are left untouched.
    pub fn substitute(&self, binding: &Binding) -> Result<Formula, SubstitutionError> {
        for (v, t) in binding {
            check_binding(v, t)?;
        }
        self.map_leaves(&mut |leaf| {
            Ok(match leaf {
                Formula::Var(v) => match binding.get(v) {
                    Some(Term::Bool(f)) => f.clone(),
                    Some(Term::Num(_)) => unreachable!("checked above"),
                    None => leaf.clone(),
                },
                Formula::Atom(a) => Formula::Atom(Atom::new(
                    a.lhs.substitute(binding),
                    a.rel,
                    a.rhs.substitute(binding),
                )),
                other => other.clone(),
            })
        })
    }

    /// Substitute concrete values.
    pub fn substitute_values(&self, model: &Model) -> Result<Formula, SubstitutionError> {
        let binding: Binding = model.iter().map(|(v, x)| (v.clone(), Term::from(x))).collect();
        self.substitute(&binding)
    }

    /// Rename variables; `f` returns the replacement or `None` to keep.
    pub fn rename(&self, f: &impl Fn(&Variable) -> Option<Variable>) -> Formula {
        let res: Result<Formula, std::convert::Infallible> = self.map_leaves(&mut |leaf| {
            Ok(match leaf {
                Formula::Var(v) => Formula::Var(f(v).unwrap_or_else(|| v.clone())),
                Formula::Atom(a) => Formula::Atom(Atom::new(a.lhs.rename(f), a.rel, a.rhs.rename(f))),
                other => other.clone(),
            })
        });
        match res {
            Ok(x) => x,
            Err(e) => match e {},
        }
    }

    /// Replace every state variable by its primed counterpart.
    pub fn prime(&self) -> Formula {
        self.rename(&|v| (v.kind() == VarKind::State).then(|| v.primed()))
    }

    /// Replace every primed state variable by its unprimed counterpart.
    pub fn unprime(&self) -> Formula {
        self.rename(&|v| (v.kind() == VarKind::PrimedState).then(|| v.unprimed()))
    }

    /// Constant folding and flattening. Semantics-preserving.
    pub fn simplify(&self) -> Formula {
        match self {
            Formula::True | Formula::False | Formula::Var(_) => self.clone(),
            Formula::Atom(a) => match a.constant_value() {
                Some(b) => Formula::constant(b),
                None => self.clone(),
            },
            Formula::Not(a) => match a.simplify() {
                Formula::True => Formula::False,
                Formula::False => Formula::True,
                Formula::Not(inner) => *inner,
                other => Formula::not(other),
            },
            Formula::And(fs) => {
                let mut out = Vec::new();
                for f in fs {
                    match f.simplify() {
                        Formula::True => {}
                        Formula::False => return Formula::False,
                        Formula::And(inner) => out.extend(inner),
                        g => out.push(g),
                    }
                }
                match out.len() {
                    0 => Formula::True,
                    1 => out.pop().unwrap(),
                    _ => Formula::And(out),
                }
            }
            Formula::Or(fs) => {
                let mut out = Vec::new();
                for f in fs {
                    match f.simplify() {
                        Formula::False => {}
                        Formula::True => return Formula::True,
                        Formula::Or(inner) => out.extend(inner),
                        g => out.push(g),
                    }
                }
                match out.len() {
                    0 => Formula::False,
                    1 => out.pop().unwrap(),
                    _ => Formula::Or(out),
                }
            }
            Formula::Implies(a, b) => match (a.simplify(), b.simplify()) {
                (Formula::False, _) | (_, Formula::True) => Formula::True,
                (Formula::True, g) => g,
                (f, Formula::False) => Formula::not(f).simplify(),
                (f, g) => Formula::implies(f, g),
            },
            Formula::Iff(a, b) => match (a.simplify(), b.simplify()) {
                (Formula::True, g) | (g, Formula::True) => g,
                (Formula::False, g) | (g, Formula::False) => Formula::not(g).simplify(),
                (f, g) => Formula::iff(f, g),
            },
        }
    }

    /// True when the formula has no arithmetic atoms and only Boolean
    /// variables.
    pub fn is_propositional(&self) -> bool {
        self.atoms().is_empty() && self.vars().iter().all(|v| v.sort() == Sort::Bool)
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }
}

fn check_binding(v: &Variable, t: &Term) -> Result<(), SubstitutionError> {
    match (v.sort(), t) {
        (Sort::Bool, Term::Bool(_)) => Ok(()),
        (Sort::Bool, Term::Num(_)) => Err(SubstitutionError::SortMismatch {
            var: v.clone(),
            found: "numeric",
        }),
        (_, Term::Bool(_)) => Err(SubstitutionError::SortMismatch {
            var: v.clone(),
            found: "Boolean",
        }),
        (Sort::Int, Term::Num(e)) => {
            let integral = e.constant_term().is_integer()
                && e.terms().all(|(x, c)| x.sort() == Sort::Int && c.is_integer());
            if integral {
                Ok(())
            } else {
                Err(SubstitutionError::NonIntegral { var: v.clone() })
            }
        }
        (Sort::Real, Term::Num(_)) => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int(name: &str) -> Variable {
        Variable::new(name, Sort::Int, VarKind::State)
    }

    fn gt0(v: &Variable) -> Formula {
        Formula::atom(LinExpr::var(v), Rel::Gt, LinExpr::int(0))
    }

    #[test]
    fn substitute_constant_folds_to_false() {
        let x = int("x");
        let f = gt0(&x);
        let mut b = Binding::new();
        b.insert(x.clone(), Term::Num(LinExpr::int(0)));
        let g = f.substitute(&b).unwrap();
        assert_eq!(g.to_string(), "0 > 0");
        assert_eq!(g.simplify(), Formula::False);
    }

    #[test]
    fn substitute_boolean_into_implication() {
        let b = Variable::new("b", Sort::Bool, VarKind::TemplateBool);
        let x = int("x");
        let f = Formula::implies(Formula::var(&b), gt0(&x));
        let mut bind = Binding::new();
        bind.insert(b, Term::Bool(Formula::True));
        let g = f.substitute(&bind).unwrap();
        assert_eq!(g, Formula::implies(Formula::True, gt0(&x)));
        assert_eq!(g.simplify(), gt0(&x));
    }

    #[test]
    fn substitute_rejects_sort_mismatch() {
        let x = int("x");
        let mut bind = Binding::new();
        bind.insert(x.clone(), Term::Bool(Formula::True));
        assert!(matches!(
            gt0(&x).substitute(&bind),
            Err(SubstitutionError::SortMismatch { .. })
        ));
        let mut bind = Binding::new();
        bind.insert(x.clone(), Term::Num(LinExpr::constant(Rat::new(1.into(), 2.into()))));
        assert!(matches!(
            gt0(&x).substitute(&bind),
            Err(SubstitutionError::NonIntegral { .. })
        ));
    }

    #[test]
    fn prime_touches_only_state() {
        let i = int("i");
        let a = int("a");
        let d = Variable::new("d", Sort::Int, VarKind::Input);
        let f = Formula::and([
            Formula::atom(LinExpr::var(&i), Rel::Lt, LinExpr::var(&a)),
            gt0(&d),
        ]);
        assert_eq!(f.prime().to_string(), "i' < a' && d > 0");
        assert_eq!(Formula::True.prime(), Formula::True);
        assert_eq!(f.prime().unprime(), f);
    }

    #[test]
    fn normalized_atoms_share_a_family() {
        let i = int("i");
        let a = int("a");
        let f1 = Atom::new(LinExpr::var(&i), Rel::Lt, LinExpr::var(&a));
        let f2 = Atom::new(LinExpr::var(&a), Rel::Gt, LinExpr::var(&i));
        assert_eq!(f1.normalized(), f2.normalized());
        let (e, rel, c) = f1.normalized().unwrap();
        // a sorts before i, so the normal form is a - i > 0.
        assert_eq!(rel, Rel::Gt);
        assert_eq!(Atom::from_normal(&e, rel, &c).to_string(), "a > i");
        let o = int("o");
        let neg = Atom::new(LinExpr::var(&o).neg(), Rel::Ge, LinExpr::int(1));
        let (e, rel, c) = neg.normalized().unwrap();
        assert_eq!(Atom::from_normal(&e, rel, &c).to_string(), "o <= -1");
    }

    #[test]
    fn simplify_flattens() {
        let x = int("x");
        let f = Formula::and([
            Formula::True,
            Formula::and([gt0(&x), Formula::or([Formula::False, gt0(&x)])]),
        ]);
        assert_eq!(f.simplify(), Formula::And(vec![gt0(&x), gt0(&x)]));
        assert_eq!(Formula::or(Vec::new()).simplify(), Formula::False);
        assert_eq!(Formula::and(Vec::new()).simplify(), Formula::True);
    }
}
