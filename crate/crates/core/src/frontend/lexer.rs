use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{FrontendError, Pos};
use crate::formula::Rat;

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    /// Identifier immediately followed by `'`.
    Primed(String),
    Num(Rat),
    Sym(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum CommentStyle {
    /// `#` to end of line.
    Hash,
    /// `--` or `#` to end of line.
    Dataflow,
}

// Longest first.
const SYMBOLS: &[&str] = &[
    "<=>", "=>", "->", "<=", ">=", "!=", "<>", "&&", "||", "(", ")", ",", ";", ":", "+", "-",
    "*", "/", "<", ">", "=", "!",
];

pub(crate) fn tokenize(src: &str, comments: CommentStyle) -> Result<Vec<Token>, FrontendError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut k, mut line, mut col) = (0usize, 1usize, 1usize);
    let advance = |k: &mut usize, line: &mut usize, col: &mut usize, c: char| {
        *k += 1;
        if c == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
    };
    while k < chars.len() {
        let c = chars[k];
        let pos = Pos { line, col };
        if c.is_whitespace() {
            advance(&mut k, &mut line, &mut col, c);
            continue;
        }
        let dash_comment =
            comments == CommentStyle::Dataflow && c == '-' && chars.get(k + 1) == Some(&'-');
        if c == '#' || dash_comment {
            while k < chars.len() && chars[k] != '\n' {
                { let c = chars[k]; advance(&mut k, &mut line, &mut col, c); }
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = k;
            while k < chars.len() && (chars[k].is_ascii_alphanumeric() || chars[k] == '_') {
                { let c = chars[k]; advance(&mut k, &mut line, &mut col, c); }
            }
            let name: String = chars[start..k].iter().collect();
            if chars.get(k) == Some(&'\'') {
                advance(&mut k, &mut line, &mut col, '\'');
                out.push(Token {
                    tok: Tok::Primed(name),
                    pos,
                });
            } else {
                out.push(Token {
                    tok: Tok::Ident(name),
                    pos,
                });
            }
            continue;
        }
        if c.is_ascii_digit() {
            let start = k;
            while k < chars.len() && chars[k].is_ascii_digit() {
                { let c = chars[k]; advance(&mut k, &mut line, &mut col, c); }
            }
            let int_part: String = chars[start..k].iter().collect();
            let mut value = Rat::from_integer(int_part.parse::<BigInt>().expect("digits"));
            if chars.get(k) == Some(&'.') && chars.get(k + 1).is_some_and(|d| d.is_ascii_digit()) {
                advance(&mut k, &mut line, &mut col, '.');
                let fs = k;
                while k < chars.len() && chars[k].is_ascii_digit() {
                    { let c = chars[k]; advance(&mut k, &mut line, &mut col, c); }
                }
                let frac: String = chars[fs..k].iter().collect();
                let mut denom = BigInt::one();
                for _ in 0..frac.len() {
                    denom *= 10;
                }
                let numer = frac.parse::<BigInt>().unwrap_or_else(|_| BigInt::zero());
                value += Rat::new(numer, denom);
            }
            out.push(Token {
                tok: Tok::Num(value),
                pos,
            });
            continue;
        }
        let rest: String = chars[k..(k + 3).min(chars.len())].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(s) => {
                for ch in s.chars() {
                    advance(&mut k, &mut line, &mut col, ch);
                }
                out.push(Token { tok: Tok::Sym(s), pos });
            }
            None => {
                return Err(FrontendError::Syntax {
                    pos,
                    msg: format!("unexpected character {c:?}"),
                })
            }
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        pos: Pos { line, col },
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexes_primes_decimals_and_symbols() {
        let toks = tokenize("i' = i + 1.25; # c\n a <=> !b", CommentStyle::Hash).unwrap();
        let kinds: Vec<Tok> = toks.into_iter().map(|t| t.tok).collect();
        assert_eq!(
            kinds,
            vec![
                Tok::Primed("i".into()),
                Tok::Sym("="),
                Tok::Ident("i".into()),
                Tok::Sym("+"),
                Tok::Num(Rat::new(5.into(), 4.into())),
                Tok::Sym(";"),
                Tok::Ident("a".into()),
                Tok::Sym("<=>"),
                Tok::Sym("!"),
                Tok::Ident("b".into()),
                Tok::Eof,
            ]
        );
    }

    #[test]
    fn reports_position_of_bad_character() {
        let err = tokenize("x = 1;\n  y @ 2", CommentStyle::Hash).unwrap_err();
        assert!(matches!(err, FrontendError::Syntax { pos: Pos { line: 2, col: 5 }, .. }));
    }

    #[test]
    fn dataflow_comments() {
        let toks = tokenize("x -- trailing\n- -1", CommentStyle::Dataflow).unwrap();
        assert_eq!(toks.len(), 5);
    }
}
