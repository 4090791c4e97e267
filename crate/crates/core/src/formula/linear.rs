use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::{Binding, Term, VarKind, Variable};

/// Exact rational number.
pub type Rat = BigRational;

/// Linear expression `Σ c_k·x_k + c`. Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinExpr {
    terms: BTreeMap<Variable, Rat>,
    constant: Rat,
}

impl Default for LinExpr {
    fn default() -> Self {
        LinExpr::zero()
    }
}

impl LinExpr {
    pub fn zero() -> Self {
        LinExpr {
            terms: BTreeMap::new(),
            constant: Rat::zero(),
        }
    }

    pub fn constant(c: Rat) -> Self {
        LinExpr {
            terms: BTreeMap::new(),
            constant: c,
        }
    }

    pub fn int(c: i64) -> Self {
        LinExpr::constant(Rat::from_integer(BigInt::from(c)))
    }

    pub fn var(v: &Variable) -> Self {
        Self::term(v, Rat::from_integer(1.into()))
    }

    pub fn term(v: &Variable, c: Rat) -> Self {
        let mut e = LinExpr::zero();
        if !c.is_zero() {
            e.terms.insert(v.clone(), c);
        }
        e
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Variable, &Rat)> {
        self.terms.iter()
    }

    pub fn vars(&self) -> impl Iterator<Item = &Variable> {
        self.terms.keys()
    }

    pub fn constant_term(&self) -> &Rat {
        &self.constant
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, v: &Variable) -> Option<&Rat> {
        self.terms.get(v)
    }

    pub(crate) fn leading_coeff(&self) -> Option<&Rat> {
        self.terms.values().next()
    }

    pub(crate) fn without_constant(&self) -> LinExpr {
        LinExpr {
            terms: self.terms.clone(),
            constant: Rat::zero(),
        }
    }

    fn add_term(&mut self, v: &Variable, c: &Rat) {
        let entry = self.terms.entry(v.clone()).or_insert_with(Rat::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(v);
        }
    }

    pub fn add(&self, other: &LinExpr) -> LinExpr {
        let mut out = self.clone();
        for (v, c) in &other.terms {
            out.add_term(v, c);
        }
        out.constant += &other.constant;
        out
    }

    pub fn sub(&self, other: &LinExpr) -> LinExpr {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> LinExpr {
        self.scale(&-Rat::from_integer(1.into()))
    }

    pub fn scale(&self, k: &Rat) -> LinExpr {
        if k.is_zero() {
            return LinExpr::zero();
        }
        LinExpr {
            terms: self.terms.iter().map(|(v, c)| (v.clone(), c * k)).collect(),
            constant: &self.constant * k,
        }
    }

    /// Split into (positive-coefficient terms, negative-coefficient terms);
    /// the constant is dropped.
    pub(crate) fn split_by_sign(&self) -> (LinExpr, LinExpr) {
        let mut pos = LinExpr::zero();
        let mut neg = LinExpr::zero();
        for (v, c) in &self.terms {
            if c.is_positive() {
                pos.terms.insert(v.clone(), c.clone());
            } else {
                neg.terms.insert(v.clone(), c.clone());
            }
        }
        (pos, neg)
    }

    pub fn substitute(&self, binding: &Binding) -> LinExpr {
        let mut out = LinExpr::constant(self.constant.clone());
        for (v, c) in &self.terms {
            match binding.get(v) {
                Some(Term::Num(e)) => out = out.add(&e.scale(c)),
                _ => out.add_term(v, c),
            }
        }
        out
    }

    pub fn rename(&self, f: &impl Fn(&Variable) -> Option<Variable>) -> LinExpr {
        let mut out = LinExpr::constant(self.constant.clone());
        for (v, c) in &self.terms {
            let w = f(v).unwrap_or_else(|| v.clone());
            out.add_term(&w, c);
        }
        out
    }

    /// Replace primed state variables by their unprimed counterparts.
    pub fn unprime(&self) -> LinExpr {
        self.rename(&|v| (v.kind() == VarKind::PrimedState).then(|| v.unprimed()))
    }

    /// Least common multiple of all coefficient and constant denominators.
    pub fn denominator_lcm(&self) -> BigInt {
        use num_integer::Integer;
        self.terms
            .values()
            .chain(std::iter::once(&self.constant))
            .fold(BigInt::from(1), |acc, c| acc.lcm(c.denom()))
    }
}
