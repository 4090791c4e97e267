//! Expression syntax shared by both input formats.
//!
//! Precedence, loosest first: `->`, `<=>`, `=>` (right), `||`, `&&`, `!`,
//! comparisons (non-associative), `+ -`, `* /`, unary `-`, primaries
//! (`pre x`, `if .. then .. else ..`, literals, identifiers, parentheses).

use super::lexer::{Tok, Token};
use super::{FrontendError, Pos};
use crate::formula::{Rat, Rel};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Cmp(Rel),
    And,
    Or,
    Implies,
    Iff,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum ExprKind {
    Num(Rat),
    Bool(bool),
    Ident(String),
    Primed(String),
    Pre(String),
    Arrow(Box<Expr>, Box<Expr>),
    Ite(Box<Expr>, Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Not(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    /// Flattened `&&` / `||` chains.
    Nary(BinOp, Vec<Expr>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Expr {
    pub kind: ExprKind,
    pub pos: Pos,
}

impl Expr {
    fn new(kind: ExprKind, pos: Pos) -> Self {
        Expr { kind, pos }
    }

    /// Visit every sub-expression, outermost first.
    pub fn walk(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match &self.kind {
            ExprKind::Num(_)
            | ExprKind::Bool(_)
            | ExprKind::Ident(_)
            | ExprKind::Primed(_)
            | ExprKind::Pre(_) => {}
            ExprKind::Neg(a) | ExprKind::Not(a) => a.walk(f),
            ExprKind::Arrow(a, b) | ExprKind::Bin(_, a, b) => {
                a.walk(f);
                b.walk(f);
            }
            ExprKind::Ite(c, a, b) => {
                c.walk(f);
                a.walk(f);
                b.walk(f);
            }
            ExprKind::Nary(_, es) => es.iter().for_each(|e| e.walk(f)),
        }
    }
}

pub(crate) struct Parser {
    toks: Vec<Token>,
    at: usize,
    /// Whether `pre` and `->` are part of the language.
    pub dataflow: bool,
}

impl Parser {
    pub fn new(toks: Vec<Token>, dataflow: bool) -> Self {
        Parser {
            toks,
            at: 0,
            dataflow,
        }
    }

    pub fn peek(&self) -> &Token {
        &self.toks[self.at]
    }

    pub fn pos(&self) -> Pos {
        self.peek().pos
    }

    pub fn bump(&mut self) -> Token {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    pub fn at_eof(&self) -> bool {
        self.peek().tok == Tok::Eof
    }

    pub fn is_sym(&self, s: &str) -> bool {
        matches!(&self.peek().tok, Tok::Sym(t) if *t == s)
    }

    pub fn is_kw(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(t) if t == kw)
    }

    pub fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn error<T>(&self, msg: impl Into<String>) -> Result<T, FrontendError> {
        Err(FrontendError::Syntax {
            pos: self.pos(),
            msg: msg.into(),
        })
    }

    fn describe(&self) -> String {
        match &self.peek().tok {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Primed(s) => format!("`{s}'`"),
            Tok::Num(r) => format!("number {r}"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".into(),
        }
    }

    pub fn expect_sym(&mut self, s: &str) -> Result<(), FrontendError> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.error(format!("expected `{s}`, found {}", self.describe()))
        }
    }

    pub fn expect_kw(&mut self, kw: &str) -> Result<(), FrontendError> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            self.error(format!("expected `{kw}`, found {}", self.describe()))
        }
    }

    pub fn expect_ident(&mut self) -> Result<(String, Pos), FrontendError> {
        let pos = self.pos();
        match &self.peek().tok {
            Tok::Ident(s) if !is_reserved(s) => {
                let s = s.clone();
                self.bump();
                Ok((s, pos))
            }
            _ => self.error(format!("expected identifier, found {}", self.describe())),
        }
    }

    pub fn expr(&mut self) -> Result<Expr, FrontendError> {
        self.arrow()
    }

    fn arrow(&mut self) -> Result<Expr, FrontendError> {
        let lhs = self.iff()?;
        if self.dataflow && self.is_sym("->") {
            let pos = self.pos();
            self.bump();
            let rhs = self.arrow()?;
            return Ok(Expr::new(ExprKind::Arrow(Box::new(lhs), Box::new(rhs)), pos));
        }
        Ok(lhs)
    }

    fn iff(&mut self) -> Result<Expr, FrontendError> {
        let mut lhs = self.implies()?;
        while self.is_sym("<=>") {
            let pos = self.pos();
            self.bump();
            let rhs = self.implies()?;
            lhs = Expr::new(ExprKind::Bin(BinOp::Iff, Box::new(lhs), Box::new(rhs)), pos);
        }
        Ok(lhs)
    }

    fn implies(&mut self) -> Result<Expr, FrontendError> {
        let lhs = self.or()?;
        if self.is_sym("=>") {
            let pos = self.pos();
            self.bump();
            let rhs = self.implies()?;
            return Ok(Expr::new(
                ExprKind::Bin(BinOp::Implies, Box::new(lhs), Box::new(rhs)),
                pos,
            ));
        }
        Ok(lhs)
    }

    fn nary(
        &mut self,
        sym: &str,
        op: BinOp,
        next: fn(&mut Self) -> Result<Expr, FrontendError>,
    ) -> Result<Expr, FrontendError> {
        let first = next(self)?;
        if !self.is_sym(sym) {
            return Ok(first);
        }
        let pos = first.pos;
        let mut parts = vec![first];
        while self.eat_sym(sym) {
            parts.push(next(self)?);
        }
        Ok(Expr::new(ExprKind::Nary(op, parts), pos))
    }

    fn or(&mut self) -> Result<Expr, FrontendError> {
        self.nary("||", BinOp::Or, Self::and)
    }

    fn and(&mut self) -> Result<Expr, FrontendError> {
        self.nary("&&", BinOp::And, Self::not)
    }

    fn not(&mut self) -> Result<Expr, FrontendError> {
        if self.is_sym("!") || self.is_kw("not") {
            let pos = self.pos();
            self.bump();
            let e = self.not()?;
            return Ok(Expr::new(ExprKind::Not(Box::new(e)), pos));
        }
        self.cmp()
    }

    fn cmp(&mut self) -> Result<Expr, FrontendError> {
        let lhs = self.sum()?;
        let rel = match &self.peek().tok {
            Tok::Sym("<") => Rel::Lt,
            Tok::Sym("<=") => Rel::Le,
            Tok::Sym("=") => Rel::Eq,
            Tok::Sym("!=") | Tok::Sym("<>") => Rel::Ne,
            Tok::Sym(">=") => Rel::Ge,
            Tok::Sym(">") => Rel::Gt,
            _ => return Ok(lhs),
        };
        let pos = self.pos();
        self.bump();
        let rhs = self.sum()?;
        if matches!(&self.peek().tok, Tok::Sym("<" | "<=" | "=" | "!=" | "<>" | ">=" | ">")) {
            return self.error("comparison operators do not chain");
        }
        Ok(Expr::new(ExprKind::Bin(BinOp::Cmp(rel), Box::new(lhs), Box::new(rhs)), pos))
    }

    fn sum(&mut self) -> Result<Expr, FrontendError> {
        let mut lhs = self.product()?;
        loop {
            let op = if self.is_sym("+") {
                BinOp::Add
            } else if self.is_sym("-") {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            let pos = self.pos();
            self.bump();
            let rhs = self.product()?;
            lhs = Expr::new(ExprKind::Bin(op, Box::new(lhs), Box::new(rhs)), pos);
        }
    }

    fn product(&mut self) -> Result<Expr, FrontendError> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.is_sym("*") {
                BinOp::Mul
            } else if self.is_sym("/") {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            let pos = self.pos();
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::new(ExprKind::Bin(op, Box::new(lhs), Box::new(rhs)), pos);
        }
    }

    fn unary(&mut self) -> Result<Expr, FrontendError> {
        if self.is_sym("-") {
            let pos = self.pos();
            self.bump();
            let e = self.unary()?;
            return Ok(Expr::new(ExprKind::Neg(Box::new(e)), pos));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, FrontendError> {
        let pos = self.pos();
        match self.peek().tok.clone() {
            Tok::Num(r) => {
                self.bump();
                Ok(Expr::new(ExprKind::Num(r), pos))
            }
            Tok::Sym("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Primed(name) => {
                self.bump();
                Ok(Expr::new(ExprKind::Primed(name), pos))
            }
            Tok::Ident(name) => match name.as_str() {
                "true" | "false" => {
                    self.bump();
                    Ok(Expr::new(ExprKind::Bool(name == "true"), pos))
                }
                "if" => {
                    self.bump();
                    let c = self.expr()?;
                    self.expect_kw("then")?;
                    let a = self.expr()?;
                    self.expect_kw("else")?;
                    let b = self.expr()?;
                    Ok(Expr::new(ExprKind::Ite(Box::new(c), Box::new(a), Box::new(b)), pos))
                }
                "pre" if self.dataflow => {
                    self.bump();
                    let inner = self.primary()?;
                    match inner.kind {
                        ExprKind::Ident(x) => Ok(Expr::new(ExprKind::Pre(x), pos)),
                        _ => Err(FrontendError::NotAllowed {
                            pos: inner.pos,
                            msg: "`pre` applies only to a flow name".into(),
                        }),
                    }
                }
                _ if is_reserved(&name) => self.error(format!("unexpected keyword `{name}`")),
                _ => {
                    self.bump();
                    Ok(Expr::new(ExprKind::Ident(name), pos))
                }
            },
            _ => self.error(format!("expected expression, found {}", self.describe())),
        }
    }
}

const RESERVED: &[&str] = &[
    "true", "false", "if", "then", "else", "pre", "not", "node", "returns", "var", "let", "tel",
];

fn is_reserved(s: &str) -> bool {
    RESERVED.contains(&s)
}

#[cfg(test)]
mod tests {
    use super::super::lexer::{tokenize, CommentStyle};
    use super::*;

    fn parse(src: &str, dataflow: bool) -> Expr {
        let mut p = Parser::new(tokenize(src, CommentStyle::Dataflow).unwrap(), dataflow);
        let e = p.expr().unwrap();
        assert!(p.at_eof(), "trailing input in {src:?}");
        e
    }

    fn shape(e: &Expr) -> String {
        match &e.kind {
            ExprKind::Num(r) => r.to_string(),
            ExprKind::Bool(b) => b.to_string(),
            ExprKind::Ident(s) => s.clone(),
            ExprKind::Primed(s) => format!("{s}'"),
            ExprKind::Pre(s) => format!("(pre {s})"),
            ExprKind::Arrow(a, b) => format!("({} -> {})", shape(a), shape(b)),
            ExprKind::Ite(c, a, b) => format!("(ite {} {} {})", shape(c), shape(a), shape(b)),
            ExprKind::Neg(a) => format!("(- {})", shape(a)),
            ExprKind::Not(a) => format!("(! {})", shape(a)),
            ExprKind::Bin(op, a, b) => format!("({op:?} {} {})", shape(a), shape(b)),
            ExprKind::Nary(op, es) => {
                format!("({op:?} {})", es.iter().map(shape).collect::<Vec<_>>().join(" "))
            }
        }
    }

    #[test]
    fn precedence() {
        assert_eq!(
            shape(&parse("!x + 1 > 2 * y && b || c", false)),
            "(Or (And (! (Cmp(Gt) (Add x 1) (Mul 2 y))) b) c)"
        );
        assert_eq!(shape(&parse("a => b => c", false)), "(Implies a (Implies b c))");
        assert_eq!(shape(&parse("0 -> pre o - 1", true)), "(0 -> (Sub (pre o) 1))");
        assert_eq!(
            shape(&parse("if d != 0 then d else 0", true)),
            "(ite (Cmp(Ne) d 0) d 0)"
        );
    }

    #[test]
    fn pre_is_an_identifier_outside_dataflow() {
        let mut p = Parser::new(tokenize("pre x", CommentStyle::Hash).unwrap(), false);
        assert!(p.expr().is_err());
    }

    #[test]
    fn chained_comparison_is_rejected() {
        let mut p = Parser::new(tokenize("0 < x < 1", CommentStyle::Hash).unwrap(), false);
        assert!(matches!(p.expr(), Err(FrontendError::Syntax { .. })));
    }
}
