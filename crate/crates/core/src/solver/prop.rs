//! Propositional backend: Tseitin encoding onto [`SatSolver`], with
//! push/pop implemented by selector literals (clauses asserted inside a
//! scope carry `¬s`; the scope's selector is assumed while it is open and
//! permanently disabled on pop).

use std::collections::HashMap;

use super::sat::{Lit, SatSolver};
use super::SolverError;
use crate::formula::{Formula, Variable};

pub(crate) struct PropSolver {
    sat: SatSolver,
    vars: HashMap<Variable, usize>,
    cache: HashMap<Formula, Lit>,
    selectors: Vec<Lit>,
    true_lit: Lit,
}

impl PropSolver {
    pub fn new() -> Self {
        let mut sat = SatSolver::new();
        let t = sat.new_var();
        let true_lit = Lit::new(t, false);
        sat.add_clause(&[true_lit]);
        PropSolver {
            sat,
            vars: HashMap::new(),
            cache: HashMap::new(),
            selectors: vec![],
            true_lit,
        }
    }

    pub fn declare(&mut self, v: &Variable) {
        if !self.vars.contains_key(v) {
            let k = self.sat.new_var();
            self.vars.insert(v.clone(), k);
        }
    }

    fn encode(&mut self, f: &Formula) -> Result<Lit, SolverError> {
        if let Some(&l) = self.cache.get(f) {
            return Ok(l);
        }
        let lit = match f {
            Formula::True => self.true_lit,
            Formula::False => !self.true_lit,
            Formula::Var(v) => {
                let k = *self
                    .vars
                    .get(v)
                    .ok_or_else(|| SolverError::UndeclaredVariable(v.clone()))?;
                Lit::new(k, false)
            }
            Formula::Atom(a) => {
                return Err(SolverError::NotPropositional(format!(
                    "arithmetic atom `{a}` given to the propositional backend"
                )))
            }
            Formula::Not(g) => !self.encode(g)?,
            Formula::And(fs) => {
                let ls = fs.iter().map(|g| self.encode(g)).collect::<Result<Vec<_>, _>>()?;
                self.define_and(&ls)
            }
            Formula::Or(fs) => {
                let ls = fs
                    .iter()
                    .map(|g| self.encode(g).map(|l| !l))
                    .collect::<Result<Vec<_>, _>>()?;
                !self.define_and(&ls)
            }
            Formula::Implies(a, b) => {
                let la = self.encode(a)?;
                let lb = self.encode(b)?;
                !self.define_and(&[la, !lb])
            }
            Formula::Iff(a, b) => {
                let la = self.encode(a)?;
                let lb = self.encode(b)?;
                let x = Lit::new(self.sat.new_var(), false);
                self.sat.add_clause(&[!x, !la, lb]);
                self.sat.add_clause(&[!x, la, !lb]);
                self.sat.add_clause(&[x, la, lb]);
                self.sat.add_clause(&[x, !la, !lb]);
                x
            }
        };
        self.cache.insert(f.clone(), lit);
        Ok(lit)
    }

    /// Fresh `x ⇔ ⋀ ls`.
    fn define_and(&mut self, ls: &[Lit]) -> Lit {
        match ls {
            [] => return self.true_lit,
            [l] => return *l,
            _ => {}
        }
        let x = Lit::new(self.sat.new_var(), false);
        let mut big = vec![x];
        for &l in ls {
            self.sat.add_clause(&[!x, l]);
            big.push(!l);
        }
        self.sat.add_clause(&big);
        x
    }

    fn add_guarded(&mut self, mut clause: Vec<Lit>) {
        if let Some(&s) = self.selectors.last() {
            clause.push(!s);
        }
        self.sat.add_clause(&clause);
    }

    pub fn assert_formula(&mut self, f: &Formula) -> Result<(), SolverError> {
        match f {
            Formula::True => Ok(()),
            Formula::And(fs) => fs.iter().try_for_each(|g| self.assert_formula(g)),
            Formula::Or(fs) => {
                let ls = fs.iter().map(|g| self.encode(g)).collect::<Result<Vec<_>, _>>()?;
                self.add_guarded(ls);
                Ok(())
            }
            _ => {
                let l = self.encode(f)?;
                self.add_guarded(vec![l]);
                Ok(())
            }
        }
    }

    pub fn push(&mut self) {
        let s = Lit::new(self.sat.new_var(), false);
        self.selectors.push(s);
    }

    pub fn pop(&mut self) {
        if let Some(s) = self.selectors.pop() {
            self.sat.add_clause(&[!s]);
        }
    }

    pub fn check(&mut self) -> bool {
        let assumptions = self.selectors.clone();
        self.sat.solve(&assumptions)
    }

    pub fn value(&self, v: &Variable) -> bool {
        self.vars.get(v).is_some_and(|&k| self.sat.model_value(k))
    }
}
