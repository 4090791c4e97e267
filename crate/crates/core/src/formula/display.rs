//! Canonical infix rendering: `&& || ! => <=>`, comparisons
//! `< <= = != >= >`, primed variables as `x'`.

use std::fmt;

use num_traits::{One, Signed, Zero};

use super::{Atom, Formula, LinExpr, Rat};

pub(crate) fn fmt_rat(r: &Rat, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if r.is_integer() {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

struct R<'a>(&'a Rat);

impl fmt::Display for R<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_rat(self.0, f)
    }
}

impl fmt::Display for LinExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (v, c) in self.terms() {
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else if c.is_negative() {
                f.write_str(" - ")?;
            } else {
                f.write_str(" + ")?;
            }
            if mag.is_one() {
                write!(f, "{v}")?;
            } else {
                write!(f, "{}*{v}", R(&mag))?;
            }
            first = false;
        }
        let k = self.constant_term();
        if first {
            fmt_rat(k, f)
        } else if k.is_zero() {
            Ok(())
        } else if k.is_negative() {
            write!(f, " - {}", R(&k.abs()))
        } else {
            write!(f, " + {}", R(k))
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.rel.symbol(), self.rhs)
    }
}

fn is_leaf(f: &Formula) -> bool {
    matches!(
        f,
        Formula::True | Formula::False | Formula::Var(_) | Formula::Atom(_) | Formula::Not(_)
    )
}

fn operand(g: &Formula, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if is_leaf(g) {
        write!(f, "{g}")
    } else {
        write!(f, "({g})")
    }
}

fn nary(fs: &[Formula], op: &str, unit: &str, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match fs {
        [] => f.write_str(unit),
        // Single operand: rendered against the unit, which is equivalent.
        [g] => {
            write!(f, "{unit} {op} ")?;
            operand(g, f)
        }
        _ => {
            for (k, g) in fs.iter().enumerate() {
                if k > 0 {
                    write!(f, " {op} ")?;
                }
                operand(g, f)?;
            }
            Ok(())
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => f.write_str("true"),
            Formula::False => f.write_str("false"),
            Formula::Var(v) => write!(f, "{v}"),
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Not(g) => match **g {
                Formula::True | Formula::False | Formula::Var(_) => write!(f, "!{g}"),
                _ => write!(f, "!({g})"),
            },
            Formula::And(fs) => nary(fs, "&&", "true", f),
            Formula::Or(fs) => nary(fs, "||", "false", f),
            Formula::Implies(a, b) => {
                operand(a, f)?;
                f.write_str(" => ")?;
                operand(b, f)
            }
            Formula::Iff(a, b) => {
                operand(a, f)?;
                f.write_str(" <=> ")?;
                operand(b, f)
            }
        }
    }
}
