//! Expression → formula translation. Numeric conditionals are compiled by
//! case splitting: a numeric expression becomes a list of `(guard, linear
//! term)` pairs whose guards partition the valuation space.

use super::parser::{BinOp, Expr, ExprKind};
use super::{FrontendError, Pos};
use crate::formula::{Formula, LinExpr, Rat, Rel, Sort, Variable};

#[derive(Clone, Debug)]
pub(crate) enum Val {
    Bool(Formula),
    Num(Vec<(Formula, LinExpr)>),
}

impl Val {
    pub fn var(v: &Variable) -> Val {
        match v.sort() {
            Sort::Bool => Val::Bool(Formula::var(v)),
            _ => Val::Num(vec![(Formula::True, LinExpr::var(v))]),
        }
    }

    fn sort_name(&self) -> &'static str {
        match self {
            Val::Bool(_) => "Boolean",
            Val::Num(_) => "numeric",
        }
    }
}

/// Name resolution, supplied by each front end.
pub(crate) trait Scope {
    fn ident(&mut self, name: &str, pos: Pos) -> Result<Val, FrontendError>;

    fn primed(&mut self, name: &str, pos: Pos) -> Result<Val, FrontendError> {
        Err(FrontendError::PrimeNotAllowed {
            pos,
            name: name.into(),
        })
    }

    fn pre(&mut self, _name: &str, pos: Pos) -> Result<Val, FrontendError> {
        Err(FrontendError::NotAllowed {
            pos,
            msg: "`pre` is not allowed here".into(),
        })
    }

    /// `c -> pre x` with a constant `c`: the memory of `x` starts at `c`.
    /// Returns `None` when the scope prefers the general encoding.
    fn pre_with_init(
        &mut self,
        _name: &str,
        _init: &Val,
        pos: Pos,
    ) -> Result<Option<Val>, FrontendError> {
        Err(FrontendError::NotAllowed {
            pos,
            msg: "`->` is not allowed here".into(),
        })
    }

    /// Formula true exactly at the first instant.
    fn first_instant(&mut self, pos: Pos) -> Result<Formula, FrontendError> {
        Err(FrontendError::NotAllowed {
            pos,
            msg: "`->` is not allowed here".into(),
        })
    }
}

fn sort_err<T>(pos: Pos, msg: String) -> Result<T, FrontendError> {
    Err(FrontendError::SortMismatch { pos, msg })
}

pub(crate) fn compile(e: &Expr, scope: &mut dyn Scope) -> Result<Val, FrontendError> {
    Ok(match &e.kind {
        ExprKind::Num(r) => Val::Num(vec![(Formula::True, LinExpr::constant(r.clone()))]),
        ExprKind::Bool(b) => Val::Bool(Formula::constant(*b)),
        ExprKind::Ident(x) => scope.ident(x, e.pos)?,
        ExprKind::Primed(x) => scope.primed(x, e.pos)?,
        ExprKind::Pre(x) => scope.pre(x, e.pos)?,
        ExprKind::Arrow(init, rest) => {
            let init_v = compile(init, scope)?;
            let constant = match &init_v {
                Val::Bool(Formula::True | Formula::False) => true,
                Val::Num(cs) => cs.len() == 1 && cs[0].1.is_constant(),
                _ => false,
            };
            if !constant {
                return Err(FrontendError::UnsupportedInit {
                    pos: init.pos,
                    msg: "the left side of `->` must be a constant".into(),
                });
            }
            if let ExprKind::Pre(x) = &rest.kind {
                if let Some(v) = scope.pre_with_init(x, &init_v, e.pos)? {
                    return Ok(v);
                }
            }
            let rest_v = compile(rest, scope)?;
            let first = scope.first_instant(e.pos)?;
            ite(first, init_v, rest_v, e.pos)?
        }
        ExprKind::Ite(c, a, b) => {
            let c = bool_of(c, scope)?;
            let a = compile(a, scope)?;
            let b = compile(b, scope)?;
            ite(c, a, b, e.pos)?
        }
        ExprKind::Neg(a) => {
            let cs = num_of(a, scope)?;
            Val::Num(cs.into_iter().map(|(g, t)| (g, t.neg())).collect())
        }
        ExprKind::Not(a) => Val::Bool(Formula::not(bool_of(a, scope)?)),
        ExprKind::Nary(op, parts) => {
            let fs = parts
                .iter()
                .map(|p| bool_of(p, scope))
                .collect::<Result<Vec<_>, _>>()?;
            Val::Bool(match op {
                BinOp::And => Formula::And(fs),
                _ => Formula::Or(fs),
            })
        }
        ExprKind::Bin(op, a, b) => match op {
            BinOp::Implies | BinOp::Iff => {
                let fa = bool_of(a, scope)?;
                let fb = bool_of(b, scope)?;
                Val::Bool(if *op == BinOp::Implies {
                    Formula::implies(fa, fb)
                } else {
                    Formula::iff(fa, fb)
                })
            }
            BinOp::And | BinOp::Or => unreachable!("parsed as n-ary"),
            BinOp::Cmp(rel) => {
                let va = compile(a, scope)?;
                let vb = compile(b, scope)?;
                match (va, vb) {
                    (Val::Num(xs), Val::Num(ys)) => Val::Bool(compare(&xs, *rel, &ys)),
                    (Val::Bool(x), Val::Bool(y)) => match rel {
                        Rel::Eq => Val::Bool(Formula::iff(x, y)),
                        Rel::Ne => Val::Bool(Formula::not(Formula::iff(x, y))),
                        _ => {
                            return sort_err(
                                e.pos,
                                format!("`{}` needs numeric operands", rel.symbol()),
                            )
                        }
                    },
                    (x, y) => {
                        return sort_err(
                            e.pos,
                            format!("cannot compare {} with {}", x.sort_name(), y.sort_name()),
                        )
                    }
                }
            }
            BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div => {
                let xs = num_of(a, scope)?;
                let ys = num_of(b, scope)?;
                let mut out = Vec::new();
                for (g, x) in &xs {
                    for (h, y) in &ys {
                        let t = arith(*op, x, y, e.pos)?;
                        out.push((and2(g, h), t));
                    }
                }
                Val::Num(out)
            }
        },
    })
}

fn arith(op: BinOp, x: &LinExpr, y: &LinExpr, pos: Pos) -> Result<LinExpr, FrontendError> {
    Ok(match op {
        BinOp::Add => x.add(y),
        BinOp::Sub => x.sub(y),
        BinOp::Mul => {
            if x.is_constant() {
                y.scale(x.constant_term())
            } else if y.is_constant() {
                x.scale(y.constant_term())
            } else {
                return Err(FrontendError::NonlinearAtom { pos });
            }
        }
        BinOp::Div => {
            if !y.is_constant() {
                return Err(FrontendError::NonlinearAtom { pos });
            }
            let k = y.constant_term();
            if num_traits::Zero::is_zero(k) {
                return Err(FrontendError::NotAllowed {
                    pos,
                    msg: "division by zero".into(),
                });
            }
            x.scale(&(Rat::from_integer(1.into()) / k))
        }
        _ => unreachable!(),
    })
}

fn and2(g: &Formula, h: &Formula) -> Formula {
    Formula::conj([g.clone(), h.clone()])
}

fn compare(xs: &[(Formula, LinExpr)], rel: Rel, ys: &[(Formula, LinExpr)]) -> Formula {
    Formula::disj(xs.iter().flat_map(|(g, x)| {
        ys.iter().map(move |(h, y)| {
            Formula::conj([g.clone(), h.clone(), Formula::atom(x.clone(), rel, y.clone())])
        })
    }))
}

fn ite(c: Formula, a: Val, b: Val, pos: Pos) -> Result<Val, FrontendError> {
    Ok(match (a, b) {
        (Val::Bool(x), Val::Bool(y)) => Val::Bool(Formula::or([
            Formula::conj([c.clone(), x]),
            Formula::conj([Formula::not(c), y]),
        ])),
        (Val::Num(xs), Val::Num(ys)) => {
            let nc = Formula::not(c.clone());
            let mut out: Vec<(Formula, LinExpr)> =
                xs.into_iter().map(|(g, t)| (and2(&c, &g), t)).collect();
            out.extend(ys.into_iter().map(|(g, t)| (and2(&nc, &g), t)));
            Val::Num(out)
        }
        (x, y) => {
            return sort_err(
                pos,
                format!("branches have different sorts ({} and {})", x.sort_name(), y.sort_name()),
            )
        }
    })
}

pub(crate) fn bool_of(e: &Expr, scope: &mut dyn Scope) -> Result<Formula, FrontendError> {
    match compile(e, scope)? {
        Val::Bool(f) => Ok(f),
        Val::Num(_) => sort_err(e.pos, "expected a Boolean, found a numeric expression".into()),
    }
}

pub(crate) fn num_of(
    e: &Expr,
    scope: &mut dyn Scope,
) -> Result<Vec<(Formula, LinExpr)>, FrontendError> {
    match compile(e, scope)? {
        Val::Num(cs) => Ok(cs),
        Val::Bool(_) => sort_err(e.pos, "expected a number, found a Boolean expression".into()),
    }
}

/// `target = value` as a formula, with case splits expanded.
pub(crate) fn define(target: &Variable, value: &Val, pos: Pos) -> Result<Formula, FrontendError> {
    match (target.sort(), value) {
        (Sort::Bool, Val::Bool(f)) => Ok(Formula::iff(Formula::var(target), f.clone())),
        (Sort::Int | Sort::Real, Val::Num(cs)) => Ok(compare(
            &[(Formula::True, LinExpr::var(target))],
            Rel::Eq,
            cs,
        )),
        _ => sort_err(
            pos,
            format!("`{target}` is {} but its definition is {}", target.sort(), value.sort_name()),
        ),
    }
}
