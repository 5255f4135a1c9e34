//! Recursive-descent parser for the expression grammar:
//!
//! ```text
//! expr   := "let" ident "=" expr "in" expr | sum
//! sum    := prod (("+"|"-") prod)*
//! prod   := unary ("*" unary)*
//! unary  := "-" unary | "sin" "(" expr ")" | "cos" "(" expr ")" | atom
//! atom   := integer | ident | "(" expr ")"
//! ```
//!
//! `a - b` desugars to `Plus(a, Neg(b))` and integer literals desugar through
//! [`const_lit`], so the AST stays a free semiring with extensions. The body
//! of a `let` extends as far right as possible.

use std::fmt;
use std::sync::Arc;

use super::{const_lit, Expr, VarRegistry};

/// Whether the parser may register new variable names or must reject them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegistryMode {
    Fixed,
    Grow,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at {}:{}: {}", self.line, self.col, self.msg)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(u64),
    Plus,
    Minus,
    Star,
    LParen,
    RParen,
    Equals,
    Let,
    In,
    Sin,
    Cos,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Int(n) => write!(f, "integer `{n}`"),
            Tok::Plus => write!(f, "`+`"),
            Tok::Minus => write!(f, "`-`"),
            Tok::Star => write!(f, "`*`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::Equals => write!(f, "`=`"),
            Tok::Let => write!(f, "`let`"),
            Tok::In => write!(f, "`in`"),
            Tok::Sin => write!(f, "`sin`"),
            Tok::Cos => write!(f, "`cos`"),
        }
    }
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

type Spanned = (Tok, usize, usize);

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn error(&self, msg: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line,
            col: self.col,
            msg: msg.into(),
        }
    }

    fn bump(&mut self) -> u8 {
        let c = self.src[self.pos];
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        c
    }

    fn tokenize(mut self) -> Result<Vec<Spanned>, ParseError> {
        let mut out = Vec::new();
        while self.pos < self.src.len() {
            let c = self.src[self.pos];
            if c.is_ascii_whitespace() {
                self.bump();
                continue;
            }
            let (line, col) = (self.line, self.col);
            let tok = match c {
                b'+' => {
                    self.bump();
                    Tok::Plus
                }
                b'-' => {
                    self.bump();
                    Tok::Minus
                }
                b'*' => {
                    self.bump();
                    Tok::Star
                }
                b'(' => {
                    self.bump();
                    Tok::LParen
                }
                b')' => {
                    self.bump();
                    Tok::RParen
                }
                b'=' => {
                    self.bump();
                    Tok::Equals
                }
                b'0'..=b'9' => {
                    let mut n: u64 = 0;
                    while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                        let d = (self.bump() - b'0') as u64;
                        n = n
                            .checked_mul(10)
                            .and_then(|n| n.checked_add(d))
                            .ok_or_else(|| self.error("integer literal too large"))?;
                    }
                    Tok::Int(n)
                }
                b'a'..=b'z' | b'A'..=b'Z' => {
                    let start = self.pos;
                    while self.pos < self.src.len()
                        && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                    {
                        self.bump();
                    }
                    let word = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                    match word {
                        "let" => Tok::Let,
                        "in" => Tok::In,
                        "sin" => Tok::Sin,
                        "cos" => Tok::Cos,
                        _ => Tok::Ident(word.to_string()),
                    }
                }
                _ => {
                    return Err(self.error(format!("unexpected character `{}`", c as char)));
                }
            };
            out.push((tok, line, col));
        }
        Ok(out)
    }
}

struct Parser<'r> {
    toks: Vec<Spanned>,
    pos: usize,
    end: (usize, usize),
    registry: &'r mut VarRegistry,
    mode: RegistryMode,
}

impl<'r> Parser<'r> {
    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map(|(_, l, c)| (*l, *c))
            .unwrap_or(self.end)
    }

    fn error(&self, msg: impl Into<String>) -> ParseError {
        let (line, col) = self.here();
        ParseError {
            line,
            col,
            msg: msg.into(),
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _, _)| t)
    }

    fn next(&mut self) -> Result<Tok, ParseError> {
        let t = self
            .toks
            .get(self.pos)
            .map(|(t, _, _)| t.clone())
            .ok_or_else(|| self.error("unexpected end of input"))?;
        self.pos += 1;
        Ok(t)
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        let got = self.next()?;
        if got == want {
            Ok(())
        } else {
            self.pos -= 1;
            Err(self.error(format!("expected {want}, found {got}")))
        }
    }

    fn variable(&mut self, name: &str) -> Result<super::VarId, ParseError> {
        match self.mode {
            RegistryMode::Grow => Ok(self.registry.register(name)),
            RegistryMode::Fixed => self
                .registry
                .lookup(name)
                .ok_or_else(|| self.error(format!("unknown variable `{name}`"))),
        }
    }

    fn expr(&mut self) -> Result<Arc<Expr>, ParseError> {
        if self.peek() == Some(&Tok::Let) {
            self.next()?;
            let name = match self.next()? {
                Tok::Ident(s) => s,
                got => {
                    self.pos -= 1;
                    return Err(self.error(format!("expected identifier after `let`, found {got}")));
                }
            };
            let v = self.variable(&name)?;
            self.expect(Tok::Equals)?;
            let bound = self.expr()?;
            self.expect(Tok::In)?;
            let body = self.expr()?;
            Ok(Arc::new(Expr::Let(v, bound, body)))
        } else {
            self.sum()
        }
    }

    fn sum(&mut self) -> Result<Arc<Expr>, ParseError> {
        let mut acc = self.prod()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.next()?;
                    let rhs = self.prod()?;
                    acc = Expr::plus(acc, rhs);
                }
                Some(Tok::Minus) => {
                    self.next()?;
                    let rhs = self.prod()?;
                    acc = Expr::plus(acc, Arc::new(Expr::Neg(rhs)));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn prod(&mut self) -> Result<Arc<Expr>, ParseError> {
        let mut acc = self.unary()?;
        while self.peek() == Some(&Tok::Star) {
            self.next()?;
            let rhs = self.unary()?;
            acc = Expr::times(acc, rhs);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Arc<Expr>, ParseError> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.next()?;
                Ok(Arc::new(Expr::Neg(self.unary()?)))
            }
            Some(Tok::Sin) => {
                self.next()?;
                self.expect(Tok::LParen)?;
                let inner = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(Arc::new(Expr::Sin(inner)))
            }
            Some(Tok::Cos) => {
                self.next()?;
                self.expect(Tok::LParen)?;
                let inner = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(Arc::new(Expr::Cos(inner)))
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Arc<Expr>, ParseError> {
        match self.next()? {
            Tok::Int(n) => Ok(const_lit(n)),
            Tok::Ident(name) => {
                self.pos -= 1;
                let v = self.variable(&name)?;
                self.pos += 1;
                Ok(Expr::var(v))
            }
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            got => {
                self.pos -= 1;
                Err(self.error(format!("expected expression, found {got}")))
            }
        }
    }
}

/// Parses `text` against an existing registry.
pub fn parse_with_registry(
    text: &str,
    registry: &mut VarRegistry,
    mode: RegistryMode,
) -> Result<Arc<Expr>, ParseError> {
    let toks = Lexer::new(text).tokenize()?;
    let end = toks
        .last()
        .map(|(_, l, c)| (*l, *c + 1))
        .unwrap_or((1, 1));
    let mut parser = Parser {
        toks,
        pos: 0,
        end,
        registry,
        mode,
    };
    let e = parser.expr()?;
    if parser.pos < parser.toks.len() {
        let (tok, _, _) = &parser.toks[parser.pos];
        return Err(parser.error(format!("unexpected trailing {tok}")));
    }
    Ok(e)
}

/// Parses `text` into an expression and a fresh registry of its variables.
pub fn parse(text: &str, mode: RegistryMode) -> Result<(Arc<Expr>, VarRegistry), ParseError> {
    let mut registry = VarRegistry::new();
    let e = parse_with_registry(text, &mut registry, mode)?;
    Ok((e, registry))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::VarId;

    #[test]
    fn parses_example1() {
        let (e, reg) = parse("x*(x+1)", RegistryMode::Grow).unwrap();
        let x = reg.lookup("x").unwrap();
        assert_eq!(
            *e,
            Expr::Times(Expr::var(x), Expr::plus(Expr::var(x), Arc::new(Expr::One)))
        );
    }

    #[test]
    fn parses_let_binding() {
        let (e, reg) = parse("let y = x+x in y*y", RegistryMode::Grow).unwrap();
        let x = reg.lookup("x").unwrap();
        let y = reg.lookup("y").unwrap();
        assert_eq!(
            *e,
            Expr::Let(
                y,
                Expr::plus(Expr::var(x), Expr::var(x)),
                Expr::times(Expr::var(y), Expr::var(y)),
            )
        );
    }

    #[test]
    fn literal_two_is_one_plus_one() {
        let (e, _) = parse("2", RegistryMode::Grow).unwrap();
        assert_eq!(*e, Expr::Plus(Arc::new(Expr::One), Arc::new(Expr::One)));
    }

    #[test]
    fn subtraction_desugars_to_neg() {
        let (e, reg) = parse("x - y", RegistryMode::Grow).unwrap();
        let x = reg.lookup("x").unwrap();
        let y = reg.lookup("y").unwrap();
        assert_eq!(
            *e,
            Expr::Plus(Expr::var(x), Arc::new(Expr::Neg(Expr::var(y))))
        );
    }

    #[test]
    fn precedence_mul_over_add() {
        let (e, reg) = parse("x + y*x", RegistryMode::Grow).unwrap();
        let x = reg.lookup("x").unwrap();
        let y = reg.lookup("y").unwrap();
        assert_eq!(
            *e,
            Expr::Plus(Expr::var(x), Expr::times(Expr::var(y), Expr::var(x)))
        );
    }

    #[test]
    fn fixed_mode_rejects_unknown() {
        let mut reg = VarRegistry::from_names(["x"]);
        let err = parse_with_registry("x + q", &mut reg, RegistryMode::Fixed).unwrap_err();
        assert!(err.msg.contains("unknown variable `q`"));
        assert_eq!((err.line, err.col), (1, 5));
    }

    #[test]
    fn syntax_error_has_position() {
        let err = parse("x +\n* y", RegistryMode::Grow).unwrap_err();
        assert_eq!((err.line, err.col), (2, 1));

        let err = parse("x + ", RegistryMode::Grow).unwrap_err();
        assert!(err.msg.contains("unexpected end of input"));

        let err = parse("x ) y", RegistryMode::Grow).unwrap_err();
        assert!(err.msg.contains("trailing"));
    }

    #[test]
    fn trig_and_unary_minus() {
        let (e, reg) = parse("-sin(x) * cos(x+1)", RegistryMode::Grow).unwrap();
        let x = reg.lookup("x").unwrap();
        assert_eq!(x, VarId(0));
        match &*e {
            Expr::Times(a, b) => {
                assert!(matches!(&**a, Expr::Neg(inner) if matches!(&**inner, Expr::Sin(_))));
                assert!(matches!(&**b, Expr::Cos(_)));
            }
            other => panic!("unexpected parse: {other:?}"),
        }
    }
}
