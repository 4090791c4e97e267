use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Formula, LinExpr, Rat, Sort, Variable};

/// A concrete value. Integers are rationals with denominator 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Bool(bool),
    Num(Rat),
}

impl Value {
    pub fn int(k: i64) -> Value {
        Value::Num(Rat::from_integer(k.into()))
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            Value::Num(_) => None,
        }
    }

    pub fn as_num(&self) -> Option<&Rat> {
        match self {
            Value::Num(r) => Some(r),
            Value::Bool(_) => None,
        }
    }

    pub fn fits(&self, sort: Sort) -> bool {
        match (self, sort) {
            (Value::Bool(_), Sort::Bool) => true,
            (Value::Num(r), Sort::Int) => r.is_integer(),
            (Value::Num(_), Sort::Real) => true,
            _ => false,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Num(r) => super::display::fmt_rat(r, f),
        }
    }
}

// Values serialize as JSON booleans or as exact strings ("3", "-1/2").
impl Serialize for Value {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Value::Bool(b) => s.serialize_bool(*b),
            Value::Num(_) => s.serialize_str(&self.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            B(bool),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::B(b) => Ok(Value::Bool(b)),
            Raw::S(s) => s
                .parse::<Rat>()
                .map(Value::Num)
                .map_err(|e| serde::de::Error::custom(format!("bad rational {s:?}: {e}"))),
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("variable {0:?} has no value")]
    Unbound(Variable),
    #[error("variable {0:?} bound to a value of the wrong sort")]
    SortMismatch(Variable),
}

/// A (partial or total) assignment of values to variables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Model(BTreeMap<Variable, Value>);

impl Model {
    pub fn new() -> Self {
        Model::default()
    }

    pub fn insert(&mut self, v: Variable, x: Value) {
        self.0.insert(v, x);
    }

    pub fn get(&self, v: &Variable) -> Option<&Value> {
        self.0.get(v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Variable, &Value)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Look up by name regardless of kind.
    pub fn get_by_name(&self, name: &str) -> Option<&Value> {
        self.0.iter().find(|(v, _)| v.name() == name).map(|(_, x)| x)
    }

    /// Restriction to the given variables.
    pub fn restrict<'a>(&self, vars: impl IntoIterator<Item = &'a Variable>) -> Model {
        Model(
            vars.into_iter()
                .filter_map(|v| self.0.get(v).map(|x| (v.clone(), x.clone())))
                .collect(),
        )
    }

    pub fn extend(&mut self, other: &Model) {
        for (v, x) in other.iter() {
            self.0.insert(v.clone(), x.clone());
        }
    }

    /// Rename keys; entries whose key maps to `None` are kept.
    pub fn rename(&self, f: impl Fn(&Variable) -> Option<Variable>) -> Model {
        Model(
            self.0
                .iter()
                .map(|(v, x)| (f(v).unwrap_or_else(|| v.clone()), x.clone()))
                .collect(),
        )
    }
}

impl FromIterator<(Variable, Value)> for Model {
    fn from_iter<T: IntoIterator<Item = (Variable, Value)>>(iter: T) -> Self {
        Model(iter.into_iter().collect())
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (k, (v, x)) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v} = {x}")?;
        }
        f.write_str(")")
    }
}

impl LinExpr {
    pub fn eval(&self, m: &Model) -> Result<Rat, EvalError> {
        let mut acc = self.constant_term().clone();
        for (v, c) in self.terms() {
            let x = m.get(v).ok_or_else(|| EvalError::Unbound(v.clone()))?;
            let r = x.as_num().ok_or_else(|| EvalError::SortMismatch(v.clone()))?;
            acc += c * r;
        }
        Ok(acc)
    }
}

impl Formula {
    /// Exact evaluation under `m`. Every free variable must be bound.
    pub fn eval(&self, m: &Model) -> Result<bool, EvalError> {
        Ok(match self {
            Formula::True => true,
            Formula::False => false,
            Formula::Var(v) => {
                let x = m.get(v).ok_or_else(|| EvalError::Unbound(v.clone()))?;
                x.as_bool().ok_or_else(|| EvalError::SortMismatch(v.clone()))?
            }
            Formula::Atom(a) => {
                let l = a.lhs.eval(m)?;
                let r = a.rhs.eval(m)?;
                a.rel.holds(l.cmp(&r))
            }
            Formula::Not(a) => !a.eval(m)?,
            Formula::And(fs) => {
                for f in fs {
                    if !f.eval(m)? {
                        return Ok(false);
                    }
                }
                true
            }
            Formula::Or(fs) => {
                for f in fs {
                    if f.eval(m)? {
                        return Ok(true);
                    }
                }
                false
            }
            Formula::Implies(a, b) => !a.eval(m)? || b.eval(m)?,
            Formula::Iff(a, b) => a.eval(m)? == b.eval(m)?,
        })
    }
}
