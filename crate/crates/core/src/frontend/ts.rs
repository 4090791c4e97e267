//! The line-oriented transition-system format:
//!
//! ```text
//! system NAME
//! state  x : int|real|bool ;   input x : … ;   output x : … ;
//! init: F ;  guard: F ;  trans: F ;  post: F ;
//! predicate: F ;  iopredicate: F ;
//! ```
//!
//! Declarations may list several names (`state i, a : int;`). Repeated
//! `init`/`guard`/`trans`/`post` sections are conjoined. Primes are only
//! accepted in `trans`.

use std::collections::BTreeMap;

use super::compile::{bool_of, Scope, Val};
use super::lexer::{tokenize, CommentStyle};
use super::parser::{Expr, Parser};
use super::{FrontendError, Pos, TransitionSystem};
use crate::formula::{Formula, Sort, VarKind, Variable};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    Init,
    Guard,
    Trans,
    Post,
    Predicate,
    IoPredicate,
}

pub(super) fn parse_sort(p: &mut Parser) -> Result<Sort, FrontendError> {
    let (s, pos) = p.expect_ident()?;
    match s.as_str() {
        "int" => Ok(Sort::Int),
        "real" => Ok(Sort::Real),
        "bool" => Ok(Sort::Bool),
        _ => Err(FrontendError::Syntax {
            pos,
            msg: format!("unknown sort `{s}` (expected int, real or bool)"),
        }),
    }
}

/// Resolves names against declared state/input/output variables.
struct TsScope<'a> {
    vars: &'a BTreeMap<String, Variable>,
    allow_primes: bool,
}

impl Scope for TsScope<'_> {
    fn ident(&mut self, name: &str, pos: Pos) -> Result<Val, FrontendError> {
        self.vars
            .get(name)
            .map(Val::var)
            .ok_or_else(|| FrontendError::UndeclaredVariable {
                pos,
                name: name.into(),
            })
    }

    fn primed(&mut self, name: &str, pos: Pos) -> Result<Val, FrontendError> {
        let v = self.vars.get(name).ok_or_else(|| FrontendError::UndeclaredVariable {
            pos,
            name: name.into(),
        })?;
        if !self.allow_primes || v.kind() != VarKind::State {
            return Err(FrontendError::PrimeNotAllowed {
                pos,
                name: name.into(),
            });
        }
        Ok(Val::var(&v.primed()))
    }
}

fn resolve(
    e: &Expr,
    vars: &BTreeMap<String, Variable>,
    allow_primes: bool,
) -> Result<Formula, FrontendError> {
    bool_of(e, &mut TsScope { vars, allow_primes })
}

/// Parse a transition-system description.
pub fn parse_transition_system(text: &str) -> Result<TransitionSystem, FrontendError> {
    let mut p = Parser::new(tokenize(text, CommentStyle::Hash)?, false);
    p.expect_kw("system")?;
    let (name, _) = p.expect_ident()?;
    let mut ts = TransitionSystem::new(name);
    let mut vars: BTreeMap<String, Variable> = BTreeMap::new();
    let mut sections: Vec<(Section, Expr)> = Vec::new();

    while !p.at_eof() {
        let kind = if p.eat_kw("state") {
            Some(VarKind::State)
        } else if p.eat_kw("input") {
            Some(VarKind::Input)
        } else if p.eat_kw("output") {
            Some(VarKind::Output)
        } else {
            None
        };
        if let Some(kind) = kind {
            let mut names = vec![p.expect_ident()?];
            while p.eat_sym(",") {
                names.push(p.expect_ident()?);
            }
            p.expect_sym(":")?;
            let sort = parse_sort(&mut p)?;
            p.expect_sym(";")?;
            for (n, pos) in names {
                if vars.contains_key(&n) {
                    return Err(FrontendError::DuplicateDeclaration { pos, name: n });
                }
                let v = Variable::new(&n, sort, kind);
                match kind {
                    VarKind::State => ts.state.push(v.clone()),
                    VarKind::Input => ts.inputs.push(v.clone()),
                    _ => ts.outputs.push(v.clone()),
                }
                vars.insert(n, v);
            }
            continue;
        }
        let section = [
            ("init", Section::Init),
            ("guard", Section::Guard),
            ("trans", Section::Trans),
            ("post", Section::Post),
            ("predicate", Section::Predicate),
            ("iopredicate", Section::IoPredicate),
        ]
        .into_iter()
        .find(|(kw, _)| p.is_kw(kw))
        .map(|(_, s)| s);
        let Some(section) = section else {
            return p.error("expected a declaration or a section (init, guard, trans, post, predicate, iopredicate)");
        };
        p.bump();
        p.expect_sym(":")?;
        let e = p.expr()?;
        p.expect_sym(";")?;
        sections.push((section, e));
    }

    let mut parts: BTreeMap<u8, Vec<Formula>> = BTreeMap::new();
    for (section, e) in &sections {
        let f = resolve(e, &vars, *section == Section::Trans)?;
        let scope_check = |allowed: &dyn Fn(VarKind) -> bool, what: &str| {
            for v in f.vars() {
                if !allowed(v.kind()) {
                    return Err(FrontendError::NotAllowed {
                        pos: e.pos,
                        msg: format!(
                            "{what} may not mention {} variable `{v}`",
                            super::var_kind_label(v.kind())
                        ),
                    });
                }
            }
            Ok(())
        };
        match section {
            Section::Init | Section::Post | Section::Predicate => {
                let what = match section {
                    Section::Init => "init",
                    Section::Post => "post",
                    _ => "a state predicate",
                };
                scope_check(&|k| k == VarKind::State, what)?
            }
            Section::Guard => scope_check(&|k| matches!(k, VarKind::State | VarKind::Input), "guard")?,
            Section::IoPredicate => scope_check(
                &|k| matches!(k, VarKind::Input | VarKind::Output),
                "an I/O predicate",
            )?,
            Section::Trans => {}
        }
        match section {
            Section::Predicate => ts.state_preds.push(f),
            Section::IoPredicate => ts.io_preds.push(f),
            s => parts.entry(*s as u8).or_default().push(f),
        }
    }
    let join = |fs: Option<Vec<Formula>>| match fs {
        None => Formula::True,
        Some(mut fs) if fs.len() == 1 => fs.pop().unwrap(),
        Some(fs) => Formula::conj(fs),
    };
    ts.init = join(parts.remove(&(Section::Init as u8)));
    ts.guard = join(parts.remove(&(Section::Guard as u8)));
    ts.trans = join(parts.remove(&(Section::Trans as u8)));
    ts.post = join(parts.remove(&(Section::Post as u8)));
    Ok(ts)
}

pub(super) fn parse_formula_in(
    ts: &TransitionSystem,
    text: &str,
    allow_primes: bool,
) -> Result<Formula, FrontendError> {
    let vars: BTreeMap<String, Variable> = ts
        .state
        .iter()
        .chain(&ts.inputs)
        .chain(&ts.outputs)
        .map(|v| (v.name().to_string(), v.clone()))
        .collect();
    let mut p = Parser::new(tokenize(text, CommentStyle::Hash)?, false);
    let e = p.expr()?;
    if !p.at_eof() {
        return p.error("trailing input after formula");
    }
    resolve(&e, &vars, allow_primes)
}

#[cfg(test)]
mod tests {
    use super::*;

    const COIN: &str = "
        system loop
        state i, a : int;
        state b : bool;
        init: i = 0 && a >= 1;
        guard: i < a;
        trans: ((b' && i' = i + 1) || (!b' && i' = i)) && a' = a;
    ";

    #[test]
    fn parses_loop_system() {
        let ts = parse_transition_system(COIN).unwrap();
        assert_eq!(ts.state.len(), 3);
        assert_eq!(ts.init.to_string(), "i = 0 && a >= 1");
        assert_eq!(ts.guard.to_string(), "i < a");
        assert_eq!(ts.post, Formula::True);
        assert!(ts.state_preds.is_empty());
        ts.validate().unwrap();
    }

    #[test]
    fn nonlinear_is_rejected() {
        let err = parse_transition_system("system s state i : int; trans: i' = i*i;").unwrap_err();
        assert!(matches!(err, FrontendError::NonlinearAtom { .. }), "{err}");
    }

    #[test]
    fn undeclared_and_misplaced_primes() {
        let err = parse_transition_system("system s\nstate i : int;\ninit: j = 0;").unwrap_err();
        assert_eq!(
            err,
            FrontendError::UndeclaredVariable {
                pos: Pos { line: 3, col: 7 },
                name: "j".into()
            }
        );
        let err = parse_transition_system("system s state i : int; init: i' = 0;").unwrap_err();
        assert!(matches!(err, FrontendError::PrimeNotAllowed { .. }));
        let err = parse_transition_system("system s input d : int; trans: d' = 0;").unwrap_err();
        assert!(matches!(err, FrontendError::PrimeNotAllowed { .. }));
    }

    #[test]
    fn sort_errors() {
        let err = parse_transition_system("system s state b : bool; init: b > 0;").unwrap_err();
        assert!(matches!(err, FrontendError::SortMismatch { .. }));
        let err = parse_transition_system("system s state i : int; init: i;").unwrap_err();
        assert!(matches!(err, FrontendError::SortMismatch { .. }));
    }

    #[test]
    fn init_cannot_mention_inputs() {
        let err =
            parse_transition_system("system s state i : int; input d : int; init: i = d;").unwrap_err();
        assert!(matches!(err, FrontendError::NotAllowed { .. }));
    }

    #[test]
    fn printing_round_trips() {
        let src = "
            system r
            state x : real; state b : bool;
            input d : int; output o : int;
            init: x = 1/2 && !b;
            guard: d > -3;
            trans: (x' = 2*x - 3/4 || x' = x) && (b' <=> d = 0) && o = d + 1;
            post: x >= 0 => b;
            predicate: x >= 0;
            iopredicate: d != 0;
        ";
        let ts = parse_transition_system(src).unwrap();
        let printed = ts.to_string();
        let again = parse_transition_system(&printed).unwrap();
        assert_eq!(ts, again, "{printed}");
        assert_eq!(again.to_string(), printed);
    }

    #[test]
    fn conditional_terms_are_case_split() {
        let ts = parse_transition_system(
            "system s state x : int; trans: x' = if x > 0 then x - 1 else 0;",
        )
        .unwrap();
        assert_eq!(ts.trans.to_string(), "(x > 0 && x' = x - 1) || (!(x > 0) && x' = 0)");
    }
}
