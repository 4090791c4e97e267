//! Verification conditions with a symbolic template.

use serde::Serialize;

use super::EngineError;
use crate::formula::{Formula, Model, VarKind, Variable};
use crate::frontend::TransitionSystem;
use crate::template::{symbolic_disjunct, symbolic_template, PredicateSet, TemplateAssignment, TemplateShape};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VcKind {
    /// `S ⇒ 𝒯`
    Initiation,
    /// `𝒯 ∧ C ∧ T ⇒ 𝒯′`
    Consecution,
    /// `𝒯 ∧ ¬C ⇒ P`
    Postcondition,
    /// `𝒯 ⇒ I_prev` during descent.
    Inclusion,
    /// `¬C_i ∨ ¬C_j`
    Disjointness,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VcPart {
    pub kind: VcKind,
    pub formula: Formula,
}

/// `F`, a conjunction of universally quantified parts whose only other free
/// variables are the template Booleans.
#[derive(Clone, Debug)]
pub struct VerificationCondition {
    pub shape: TemplateShape,
    pub parts: Vec<VcPart>,
    /// σ, σ′, inputs, outputs.
    pub quantified: Vec<Variable>,
}

impl VerificationCondition {
    pub fn formula(&self) -> Formula {
        Formula::conj(self.parts.iter().map(|p| p.formula.clone()))
    }

    pub fn kinds(&self) -> Vec<VcKind> {
        self.parts.iter().map(|p| p.kind).collect()
    }

    pub fn push(&mut self, kind: VcKind, formula: Formula) {
        self.parts.push(VcPart { kind, formula });
    }

    /// `F[B/b]`, simplified. Mentions only quantified variables.
    pub fn instantiate(&self, b: &TemplateAssignment) -> Formula {
        self.formula()
            .substitute(&b.binding())
            .expect("template Booleans are bound to Booleans")
            .simplify()
    }

    /// `F[Σ/σ]`, simplified. Propositional over the template Booleans.
    pub fn ground(&self, sigma: &Model) -> Formula {
        let restricted = sigma.restrict(&self.quantified);
        self.formula()
            .substitute_values(&restricted)
            .expect("model values fit their sorts")
            .simplify()
    }
}

/// `F = (S ⇒ 𝒯) ∧ (𝒯 ∧ C ∧ T ⇒ 𝒯′) ∧ (𝒯 ∧ ¬C ⇒ P)`; the last part is left
/// out when `P` is `true`.
pub fn build_vc(
    ts: &TransitionSystem,
    preds: &PredicateSet,
    shape: TemplateShape,
) -> Result<VerificationCondition, EngineError> {
    check_predicates(preds)?;
    if shape.m != preds.len() || shape.n == 0 {
        return Err(EngineError::InvalidOptions(format!(
            "template shape {}x{} does not fit {} predicates",
            shape.n,
            shape.m,
            preds.len()
        )));
    }
    let t = symbolic_template(preds, shape);
    let mut vc = VerificationCondition {
        shape,
        parts: vec![],
        quantified: ts.quantified_vars(),
    };
    vc.push(VcKind::Initiation, Formula::implies(ts.init.clone(), t.clone()));
    vc.push(
        VcKind::Consecution,
        Formula::implies(
            Formula::conj([t.clone(), ts.guard.clone(), ts.trans.clone()]),
            t.prime(),
        ),
    );
    if ts.has_postcondition() {
        vc.push(
            VcKind::Postcondition,
            Formula::implies(Formula::conj([t, Formula::not(ts.guard.clone())]), ts.post.clone()),
        );
    }
    Ok(vc)
}

/// `∀σ ¬C_i ∨ ¬C_j` for every pair of rows.
pub fn disjointness_constraints(preds: &PredicateSet, shape: TemplateShape) -> Vec<Formula> {
    let mut out = vec![];
    for i in 0..shape.n {
        for j in i + 1..shape.n {
            out.push(Formula::or([
                Formula::not(symbolic_disjunct(preds, shape, i)),
                Formula::not(symbolic_disjunct(preds, shape, j)),
            ]));
        }
    }
    out
}

pub(crate) fn check_predicates(preds: &PredicateSet) -> Result<(), EngineError> {
    if preds.is_empty() {
        return Err(EngineError::NoPredicates);
    }
    for (index, p) in preds.iter().enumerate() {
        if let Some(v) = p.vars().into_iter().find(|v| v.kind() != VarKind::State) {
            return Err(EngineError::ForeignPredicate {
                index,
                var: v.name().to_string(),
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_transition_system;

    const COIN: &str = "system coin
        state i, a : int; state b : bool;
        init: i = 0 && a >= 1;
        guard: i < a;
        trans: ((b' && i' = i + 1) || (!b' && i' = i)) && a' = a;
        predicate: i = 0; predicate: i < 0; predicate: i > 0; predicate: i = a;
        predicate: i < a; predicate: i > a; predicate: b; predicate: !b;";

    #[test]
    fn shape_of_the_loop_vc() {
        let ts = parse_transition_system(COIN).unwrap();
        let preds = PredicateSet::new(ts.state_preds.clone());
        let vc = build_vc(&ts, &preds, TemplateShape::new(2, 8)).unwrap();
        assert_eq!(vc.kinds(), [VcKind::Initiation, VcKind::Consecution]);
        let f = vc.formula();
        let bools = f.vars().iter().filter(|v| v.kind() == VarKind::TemplateBool).count();
        assert_eq!(bools, 16);
        let mut others: Vec<String> = f
            .vars()
            .iter()
            .filter(|v| v.kind() != VarKind::TemplateBool)
            .map(|v| v.to_string())
            .collect();
        others.sort();
        assert_eq!(others, ["a", "a'", "b", "b'", "i", "i'"]);
    }

    #[test]
    fn postcondition_part_is_added() {
        let ts = parse_transition_system(
            "system s state x : int; init: x = 0; guard: x < 3; trans: x' = x + 1; post: x = 3;
             predicate: x >= 0; predicate: x <= 3;",
        )
        .unwrap();
        let preds = PredicateSet::new(ts.state_preds.clone());
        let vc = build_vc(&ts, &preds, TemplateShape::new(1, 2)).unwrap();
        assert_eq!(
            vc.kinds(),
            [VcKind::Initiation, VcKind::Consecution, VcKind::Postcondition]
        );
    }

    #[test]
    fn ground_constraint_is_propositional() {
        let ts = parse_transition_system(COIN).unwrap();
        let preds = PredicateSet::new(ts.state_preds.clone());
        let vc = build_vc(&ts, &preds, TemplateShape::new(2, 8)).unwrap();
        let sigma: Model = ts
            .quantified_vars()
            .into_iter()
            .map(|v| {
                let x = if v.sort() == crate::formula::Sort::Bool {
                    crate::formula::Value::Bool(false)
                } else {
                    crate::formula::Value::int(if v.name() == "a" { 1 } else { 0 })
                };
                (v, x)
            })
            .collect();
        let g = vc.ground(&sigma);
        assert!(g.is_propositional());
    }

    #[test]
    fn predicates_must_be_over_state() {
        let ts = parse_transition_system("system s state x : int; input d : int; trans: x' = d;").unwrap();
        let bad = PredicateSet::new(vec![ts.parse_formula("d > 0", false).unwrap()]);
        assert!(matches!(
            build_vc(&ts, &bad, TemplateShape::new(1, 1)),
            Err(EngineError::ForeignPredicate { index: 0, .. })
        ));
        assert!(matches!(
            build_vc(&ts, &PredicateSet::new(vec![]), TemplateShape::new(1, 0)),
            Err(EngineError::NoPredicates)
        ));
    }
}
