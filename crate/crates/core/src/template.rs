//! Disjunctive-normal-form templates over a fixed predicate list.
//!
//! A template with `n` disjuncts over `m` predicates is
//! `⋁_i ⋀_j (b[i,j] ⇒ π_j)`; fixing the Booleans `b` selects, for each
//! disjunct, the subset of predicates it conjoins.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{Binding, Formula, Sort, Term, VarKind, Variable};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum TemplateError {
    #[error("assignment is {got_n}x{got_m} but the template is {n}x{m}")]
    DimensionMismatch {
        n: usize,
        m: usize,
        got_n: usize,
        got_m: usize,
    },
    #[error("predicate index {index} out of range for {m} predicates")]
    IndexOutOfRange { index: usize, m: usize },
}

/// Ordered predicates `π_1..π_m`. Indices are stable for a run.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct PredicateSet {
    preds: Vec<Formula>,
}

impl PredicateSet {
    pub fn new(preds: Vec<Formula>) -> Self {
        PredicateSet { preds }
    }

    pub fn len(&self) -> usize {
        self.preds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.preds.is_empty()
    }

    pub fn get(&self, j: usize) -> &Formula {
        &self.preds[j]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Formula> {
        self.preds.iter()
    }

    pub fn as_slice(&self) -> &[Formula] {
        &self.preds
    }

    pub fn vars(&self) -> BTreeSet<Variable> {
        self.preds.iter().flat_map(|p| p.vars()).collect()
    }
}

impl FromIterator<Formula> for PredicateSet {
    fn from_iter<T: IntoIterator<Item = Formula>>(iter: T) -> Self {
        PredicateSet::new(iter.into_iter().collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TemplateShape {
    /// Number of disjuncts.
    pub n: usize,
    /// Number of predicates.
    pub m: usize,
}

impl TemplateShape {
    pub fn new(n: usize, m: usize) -> Self {
        TemplateShape { n, m }
    }

    pub fn bools(&self) -> usize {
        self.n * self.m
    }

    /// The template Boolean `b[i,j]`, 0-based indices.
    pub fn var(&self, i: usize, j: usize) -> Variable {
        template_var(i, j)
    }

    /// All template Booleans, row-major.
    pub fn vars(&self) -> Vec<Variable> {
        (0..self.n)
            .flat_map(|i| (0..self.m).map(move |j| template_var(i, j)))
            .collect()
    }
}

/// Name of the template Boolean for row `i`, column `j` (0-based). Rendered
/// 1-based; the `$` prefix keeps it out of the user identifier space.
pub fn template_var(i: usize, j: usize) -> Variable {
    Variable::new(format!("$b_{}_{}", i + 1, j + 1), Sort::Bool, VarKind::TemplateBool)
}

/// An `n×m` Boolean matrix instantiating a template. Row-major.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TemplateAssignment {
    n: usize,
    m: usize,
    bits: Vec<bool>,
}

impl TemplateAssignment {
    pub fn new(shape: TemplateShape) -> Self {
        TemplateAssignment {
            n: shape.n,
            m: shape.m,
            bits: vec![false; shape.bools()],
        }
    }

    pub fn from_rows(rows: &[Vec<bool>]) -> Self {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == m), "ragged template rows");
        TemplateAssignment {
            n,
            m,
            bits: rows.concat(),
        }
    }

    /// Decode bit `k` of `code` as entry `k` in row-major order.
    pub fn from_code(shape: TemplateShape, code: u64) -> Self {
        let bits = (0..shape.bools()).map(|k| code >> k & 1 == 1).collect();
        TemplateAssignment {
            n: shape.n,
            m: shape.m,
            bits,
        }
    }

    pub fn shape(&self) -> TemplateShape {
        TemplateShape::new(self.n, self.m)
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.m + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        self.bits[i * self.m + j] = v;
    }

    pub fn row(&self, i: usize) -> &[bool] {
        &self.bits[i * self.m..(i + 1) * self.m]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[bool]> {
        self.bits.chunks(self.m.max(1)).take(self.n)
    }

    /// Binding `b[i,j] ↦ B[i,j]`.
    pub fn binding(&self) -> Binding {
        let shape = self.shape();
        let mut b = Binding::new();
        for i in 0..self.n {
            for j in 0..self.m {
                b.insert(shape.var(i, j), Term::Bool(Formula::constant(self.get(i, j))));
            }
        }
        b
    }

    /// Read an assignment off a model over the template Booleans. Missing
    /// entries read as false.
    pub fn from_model(shape: TemplateShape, model: &crate::formula::Model) -> Self {
        let mut out = TemplateAssignment::new(shape);
        for i in 0..shape.n {
            for j in 0..shape.m {
                let v = model.get(&shape.var(i, j)).and_then(|x| x.as_bool()).unwrap_or(false);
                out.set(i, j, v);
            }
        }
        out
    }

    /// The assignment as a model over the template Booleans.
    pub fn to_model(&self) -> crate::formula::Model {
        let shape = self.shape();
        let mut m = crate::formula::Model::new();
        for i in 0..self.n {
            for j in 0..self.m {
                m.insert(shape.var(i, j), crate::formula::Value::Bool(self.get(i, j)));
            }
        }
        m
    }

    /// Propositional formula that holds exactly at this assignment.
    pub fn as_cube(&self) -> Formula {
        let shape = self.shape();
        Formula::and((0..self.n).flat_map(|i| {
            (0..self.m).map(move |j| {
                let b = Formula::var(&shape.var(i, j));
                if self.get(i, j) {
                    b
                } else {
                    Formula::not(b)
                }
            })
        }))
    }
}

impl fmt::Debug for TemplateAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, row) in self.rows().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            for &b in row {
                f.write_str(if b { "1" } else { "0" })?;
            }
        }
        f.write_str("]")
    }
}

/// One disjunct: the indices of the predicates it conjoins. Empty means `true`.
pub type Disjunct = BTreeSet<usize>;

/// A DNF invariant `⋁_i ⋀_{j ∈ disjunct_i} π_j`, by predicate index.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DnfInvariant {
    pub disjuncts: Vec<Disjunct>,
}

impl DnfInvariant {
    pub fn new(disjuncts: Vec<Disjunct>) -> Self {
        DnfInvariant { disjuncts }
    }

    pub fn from_assignment(b: &TemplateAssignment) -> Self {
        DnfInvariant {
            disjuncts: b
                .rows()
                .map(|row| row.iter().enumerate().filter(|(_, &x)| x).map(|(j, _)| j).collect())
                .collect(),
        }
    }

    /// The matrix for this invariant with `m` predicate columns.
    pub fn to_assignment(&self, m: usize) -> Result<TemplateAssignment, TemplateError> {
        let mut b = TemplateAssignment::new(TemplateShape::new(self.disjuncts.len(), m));
        for (i, d) in self.disjuncts.iter().enumerate() {
            for &j in d {
                if j >= m {
                    return Err(TemplateError::IndexOutOfRange { index: j, m });
                }
                b.set(i, j, true);
            }
        }
        Ok(b)
    }

    pub fn len(&self) -> usize {
        self.disjuncts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.disjuncts.is_empty()
    }

    /// The formula of disjunct `i`.
    pub fn disjunct_formula(&self, preds: &PredicateSet, i: usize) -> Formula {
        conjunction_of(preds, &self.disjuncts[i])
    }

    /// The concretization as a formula. No disjuncts gives `false`.
    pub fn formula(&self, preds: &PredicateSet) -> Formula {
        Formula::disj((0..self.disjuncts.len()).map(|i| self.disjunct_formula(preds, i)))
    }
}

fn conjunction_of(preds: &PredicateSet, d: &Disjunct) -> Formula {
    match d.len() {
        0 => Formula::True,
        1 => preds.get(*d.iter().next().unwrap()).clone(),
        _ => Formula::and(d.iter().map(|&j| preds.get(j).clone())),
    }
}

/// `⋁_i ⋀_{j : B[i,j]} π_j`; a row without true entries contributes `true`.
pub fn instantiate_template(
    preds: &PredicateSet,
    b: &TemplateAssignment,
) -> Result<Formula, TemplateError> {
    if b.m != preds.len() {
        return Err(TemplateError::DimensionMismatch {
            n: b.n,
            m: preds.len(),
            got_n: b.n,
            got_m: b.m,
        });
    }
    Ok(DnfInvariant::from_assignment(b).formula(preds))
}

/// Disjunct `i` of the symbolic template: `⋀_j (b[i,j] ⇒ π_j)`.
pub fn symbolic_disjunct(preds: &PredicateSet, shape: TemplateShape, i: usize) -> Formula {
    Formula::conj(
        (0..shape.m).map(|j| Formula::implies(Formula::var(&shape.var(i, j)), preds.get(j).clone())),
    )
}

/// The symbolic template `⋁_i ⋀_j (b[i,j] ⇒ π_j)` with free template Booleans.
pub fn symbolic_template(preds: &PredicateSet, shape: TemplateShape) -> Formula {
    Formula::disj((0..shape.n).map(|i| symbolic_disjunct(preds, shape, i)))
}

/// Strict lexicographic increase of consecutive rows, `false < true`, built by
/// the recurrence `L[i,j] = (¬b[i,j] ∧ b[i+1,j]) ∨ ((b[i,j] ⇒ b[i+1,j]) ∧ L[i,j+1])`
/// with `L[i,m+1] = false`. Returns `true` for a single row.
pub fn lex_order_constraints(shape: TemplateShape) -> Formula {
    if shape.n <= 1 {
        return Formula::True;
    }
    let rows = (0..shape.n - 1).map(|i| {
        let mut l = Formula::False;
        for j in (0..shape.m).rev() {
            let lo = Formula::var(&shape.var(i, j));
            let hi = Formula::var(&shape.var(i + 1, j));
            l = Formula::or([
                Formula::and([Formula::not(lo.clone()), hi.clone()]),
                Formula::and([Formula::implies(lo, hi), l]),
            ]);
        }
        l
    });
    Formula::and(rows)
}

/// True when consecutive rows of `b` strictly increase lexicographically.
pub fn is_lex_increasing(b: &TemplateAssignment) -> bool {
    (1..b.shape().n).all(|i| b.row(i - 1) < b.row(i))
}
