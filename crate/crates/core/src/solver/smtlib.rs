//! SMT-LIB2 over pipes. Commands used: `set-option`, `set-logic`,
//! `declare-const`, `assert`, `push`, `pop`, `check-sat`, `get-value`,
//! `exit`. `:print-success` keeps requests and responses in lock step.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::SolverError;
use crate::formula::{Atom, Formula, Rat, Rel, Sort, Value, Variable};

pub(crate) fn symbol(name: &str) -> String {
    format!("|{name}|")
}

pub(crate) fn sort_name(s: Sort) -> &'static str {
    match s {
        Sort::Int => "Int",
        Sort::Real => "Real",
        Sort::Bool => "Bool",
    }
}

fn int_lit(k: &BigInt) -> String {
    if k.is_negative() {
        format!("(- {})", -k)
    } else {
        k.to_string()
    }
}

fn real_lit(r: &Rat) -> String {
    let mag = r.abs();
    let body = if mag.is_integer() {
        format!("{}.0", mag.numer())
    } else {
        format!("(/ {}.0 {}.0)", mag.numer(), mag.denom())
    };
    if r.is_negative() {
        format!("(- {body})")
    } else {
        body
    }
}

fn sum(terms: Vec<String>, zero: &str) -> String {
    match terms.len() {
        0 => zero.to_string(),
        1 => terms.into_iter().next().unwrap(),
        _ => format!("(+ {})", terms.join(" ")),
    }
}

fn rel_op(rel: Rel) -> &'static str {
    match rel {
        Rel::Lt => "<",
        Rel::Le => "<=",
        Rel::Eq | Rel::Ne => "=",
        Rel::Ge => ">=",
        Rel::Gt => ">",
    }
}

/// `lhs - rhs ⋈ 0` rendered either over the integers (all variables `Int`;
/// coefficients cleared of denominators) or over the reals.
fn atom_term(a: &Atom) -> String {
    let diff = a.lhs.sub(&a.rhs);
    let all_int = diff.vars().all(|v| v.sort() == Sort::Int);
    let (lhs, rhs) = if all_int {
        let scale = Rat::from_integer(diff.denominator_lcm());
        let d = diff.scale(&scale);
        let terms = d
            .terms()
            .map(|(v, c)| {
                if c.is_one() {
                    symbol(v.name())
                } else {
                    format!("(* {} {})", int_lit(c.numer()), symbol(v.name()))
                }
            })
            .collect();
        (sum(terms, "0"), int_lit((-d.constant_term().clone()).numer()))
    } else {
        let terms = diff
            .terms()
            .map(|(v, c)| {
                let x = match v.sort() {
                    Sort::Int => format!("(to_real {})", symbol(v.name())),
                    _ => symbol(v.name()),
                };
                if c.is_one() {
                    x
                } else {
                    format!("(* {} {x})", real_lit(c))
                }
            })
            .collect();
        (sum(terms, "0.0"), real_lit(&-diff.constant_term().clone()))
    };
    let t = format!("({} {lhs} {rhs})", rel_op(a.rel));
    if a.rel == Rel::Ne {
        format!("(not {t})")
    } else {
        t
    }
}

pub(crate) fn term(f: &Formula) -> String {
    match f {
        Formula::True => "true".into(),
        Formula::False => "false".into(),
        Formula::Var(v) => symbol(v.name()),
        Formula::Atom(a) => match a.constant_value() {
            Some(b) => b.to_string(),
            None => atom_term(a),
        },
        Formula::Not(g) => format!("(not {})", term(g)),
        Formula::And(fs) if fs.is_empty() => "true".into(),
        Formula::Or(fs) if fs.is_empty() => "false".into(),
        Formula::And(fs) => format!("(and {})", fs.iter().map(term).collect::<Vec<_>>().join(" ")),
        Formula::Or(fs) => format!("(or {})", fs.iter().map(term).collect::<Vec<_>>().join(" ")),
        Formula::Implies(a, b) => format!("(=> {} {})", term(a), term(b)),
        Formula::Iff(a, b) => format!("(= {} {})", term(a), term(b)),
    }
}

/// S-expression as returned by the solver.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

pub(crate) fn parse_sexp(text: &str) -> Result<Sexp, String> {
    let chars: Vec<char> = text.chars().collect();
    let mut k = 0;
    let e = sexp_at(&chars, &mut k)?;
    skip_ws(&chars, &mut k);
    if k != chars.len() {
        return Err(format!("trailing text in solver response: {text:?}"));
    }
    Ok(e)
}

fn skip_ws(cs: &[char], k: &mut usize) {
    while *k < cs.len() && cs[*k].is_whitespace() {
        *k += 1;
    }
}

fn sexp_at(cs: &[char], k: &mut usize) -> Result<Sexp, String> {
    skip_ws(cs, k);
    match cs.get(*k) {
        None => Err("unexpected end of solver response".into()),
        Some('(') => {
            *k += 1;
            let mut items = Vec::new();
            loop {
                skip_ws(cs, k);
                match cs.get(*k) {
                    Some(')') => {
                        *k += 1;
                        return Ok(Sexp::List(items));
                    }
                    None => return Err("unbalanced solver response".into()),
                    _ => items.push(sexp_at(cs, k)?),
                }
            }
        }
        Some(')') => Err("unexpected `)` in solver response".into()),
        Some(&q @ ('|' | '"')) => {
            *k += 1;
            let start = *k;
            while *k < cs.len() && cs[*k] != q {
                *k += 1;
            }
            if *k == cs.len() {
                return Err("unterminated quoted token".into());
            }
            let s: String = cs[start..*k].iter().collect();
            *k += 1;
            Ok(Sexp::Atom(s))
        }
        Some(_) => {
            let start = *k;
            while *k < cs.len() && !cs[*k].is_whitespace() && cs[*k] != '(' && cs[*k] != ')' {
                *k += 1;
            }
            Ok(Sexp::Atom(cs[start..*k].iter().collect()))
        }
    }
}

fn parse_decimal(s: &str) -> Option<Rat> {
    let (int, frac) = match s.split_once('.') {
        Some((a, b)) => (a, b),
        None => (s, ""),
    };
    if int.is_empty() || !int.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let mut denom = BigInt::one();
    for _ in 0..frac.len() {
        denom *= 10;
    }
    let digits: BigInt = format!("{int}{frac}").parse().ok()?;
    Some(Rat::new(digits, denom))
}

fn numeric_value(e: &Sexp) -> Result<Rat, String> {
    match e {
        Sexp::Atom(s) => parse_decimal(s).ok_or_else(|| format!("not a number: {s}")),
        Sexp::List(xs) => match xs.as_slice() {
            [Sexp::Atom(op), x] if op == "-" => Ok(-numeric_value(x)?),
            [Sexp::Atom(op), a, b] if op == "/" => {
                let d = numeric_value(b)?;
                if d.is_zero() {
                    return Err("division by zero in model".into());
                }
                Ok(numeric_value(a)? / d)
            }
            [Sexp::Atom(op), x] if op == "to_real" => numeric_value(x),
            _ => Err(format!("unsupported model value {e:?}")),
        },
    }
}

pub(crate) fn value_of(e: &Sexp, sort: Sort) -> Result<Value, String> {
    match sort {
        Sort::Bool => match e {
            Sexp::Atom(s) if s == "true" => Ok(Value::Bool(true)),
            Sexp::Atom(s) if s == "false" => Ok(Value::Bool(false)),
            _ => Err(format!("expected a Boolean, got {e:?}")),
        },
        Sort::Int | Sort::Real => {
            let r = numeric_value(e)?;
            if sort == Sort::Int && !r.is_integer() {
                return Err(format!("non-integral value {r} for an Int"));
            }
            Ok(Value::Num(r))
        }
    }
}

/// A live solver process.
pub(crate) struct SmtProcess {
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
    dead: bool,
}

impl SmtProcess {
    pub fn spawn(command: &[String]) -> Result<SmtProcess, SolverError> {
        let (prog, args) = command
            .split_first()
            .ok_or_else(|| SolverError::Spawn("empty solver command".into()))?;
        let mut child = Command::new(prog)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| SolverError::Spawn(format!("{prog}: {e}")))?;
        let stdin = child.stdin.take().expect("piped");
        let stdout = BufReader::new(child.stdout.take().expect("piped"));
        let mut p = SmtProcess {
            child,
            stdin,
            stdout,
            dead: false,
        };
        // The first reply distinguishes a solver from an arbitrary program.
        p.command("(set-option :print-success true)").map_err(|e| match e {
            SolverError::Crashed(m) | SolverError::Protocol(m) => {
                SolverError::Spawn(format!("{prog} does not speak SMT-LIB: {m}"))
            }
            other => other,
        })?;
        Ok(p)
    }

    fn read_response(&mut self) -> Result<String, SolverError> {
        let mut buf = String::new();
        let mut depth = 0i64;
        let mut quote: Option<char> = None;
        loop {
            let mut line = String::new();
            let n = self
                .stdout
                .read_line(&mut line)
                .map_err(|e| self.crash(format!("read failed: {e}")))?;
            if n == 0 {
                return Err(self.crash("solver process exited".into()));
            }
            for c in line.chars() {
                match quote {
                    Some(q) if c == q => quote = None,
                    Some(_) => {}
                    None => match c {
                        '|' | '"' => quote = Some(c),
                        '(' => depth += 1,
                        ')' => depth -= 1,
                        _ => {}
                    },
                }
            }
            buf.push_str(&line);
            if depth <= 0 && quote.is_none() && !buf.trim().is_empty() {
                return Ok(buf.trim().to_string());
            }
        }
    }

    fn crash(&mut self, msg: String) -> SolverError {
        self.dead = true;
        SolverError::Crashed(msg)
    }

    /// Send one command and return the solver's reply.
    pub fn request(&mut self, cmd: &str) -> Result<String, SolverError> {
        if self.dead {
            return Err(SolverError::Crashed("session is no longer usable".into()));
        }
        log::trace!("smt> {cmd}");
        if let Err(e) = writeln!(self.stdin, "{cmd}").and_then(|_| self.stdin.flush()) {
            return Err(self.crash(format!("write failed: {e}")));
        }
        let reply = self.read_response()?;
        log::trace!("smt< {reply}");
        if reply.starts_with("(error") {
            return Err(SolverError::Protocol(reply));
        }
        Ok(reply)
    }

    /// A command whose only acceptable reply is `success`.
    pub fn command(&mut self, cmd: &str) -> Result<(), SolverError> {
        let reply = self.request(cmd)?;
        if reply == "success" {
            Ok(())
        } else {
            Err(SolverError::Protocol(format!("`{cmd}` answered {reply:?}")))
        }
    }

    pub fn declare(&mut self, v: &Variable) -> Result<(), SolverError> {
        self.command(&format!("(declare-const {} {})", symbol(v.name()), sort_name(v.sort())))
    }

    pub fn get_values(&mut self, vars: &[Variable]) -> Result<Vec<Value>, SolverError> {
        if vars.is_empty() {
            return Ok(vec![]);
        }
        let names: Vec<String> = vars.iter().map(|v| symbol(v.name())).collect();
        let reply = self.request(&format!("(get-value ({}))", names.join(" ")))?;
        let e = parse_sexp(&reply).map_err(SolverError::Protocol)?;
        let Sexp::List(pairs) = e else {
            return Err(SolverError::Protocol(format!("bad get-value reply {reply:?}")));
        };
        if pairs.len() != vars.len() {
            return Err(SolverError::Protocol(format!("get-value returned {} pairs", pairs.len())));
        }
        vars.iter()
            .zip(pairs)
            .map(|(v, pair)| match pair {
                Sexp::List(kv) if kv.len() == 2 => {
                    value_of(&kv[1], v.sort()).map_err(SolverError::Protocol)
                }
                other => Err(SolverError::Protocol(format!("bad get-value pair {other:?}"))),
            })
            .collect()
    }
}

impl Drop for SmtProcess {
    fn drop(&mut self) {
        if !self.dead {
            let _ = writeln!(self.stdin, "(exit)");
            let _ = self.stdin.flush();
        }
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{LinExpr, VarKind};

    #[test]
    fn renders_integer_and_real_atoms() {
        let i = Variable::new("i", Sort::Int, VarKind::State);
        let x = Variable::new("x", Sort::Real, VarKind::State);
        let half = Rat::new(1.into(), 2.into());
        let a = Formula::atom(LinExpr::term(&i, half.clone()), Rel::Le, LinExpr::int(-1));
        assert_eq!(term(&a), "(<= |i| (- 2))");
        let b = Formula::atom(LinExpr::var(&x).add(&LinExpr::var(&i)), Rel::Ne, LinExpr::constant(half));
        assert_eq!(term(&b), "(not (= (+ (to_real |i|) |x|) (/ 1.0 2.0)))");
        let c = Formula::atom(LinExpr::var(&i).neg(), Rel::Gt, LinExpr::zero());
        assert_eq!(term(&c), "(> (* (- 1) |i|) 0)");
    }

    #[test]
    fn parses_model_values() {
        let e = parse_sexp("((|x| (- (/ 1.0 4.0))) (|i| (- 3)) (|b| true) (|y| 2.5))").unwrap();
        let Sexp::List(pairs) = e else { panic!() };
        let get = |k: usize| match &pairs[k] {
            Sexp::List(kv) => kv[1].clone(),
            _ => panic!(),
        };
        assert_eq!(value_of(&get(0), Sort::Real).unwrap(), Value::Num(Rat::new((-1).into(), 4.into())));
        assert_eq!(value_of(&get(1), Sort::Int).unwrap(), Value::int(-3));
        assert_eq!(value_of(&get(2), Sort::Bool).unwrap(), Value::Bool(true));
        assert_eq!(value_of(&get(3), Sort::Real).unwrap(), Value::Num(Rat::new(5.into(), 2.into())));
        assert!(value_of(&get(3), Sort::Int).is_err());
    }
}
