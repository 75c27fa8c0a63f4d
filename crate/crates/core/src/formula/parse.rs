//! Recursive-descent parser for the formula input language.
//!
//! Expressions: integers, rationals (via `/`), variables, `+ - * / ^`,
//! parentheses, `sqrt(...)`. Atoms: `expr REL expr` with `== != < <= > >=`
//! (`=` accepted for `==`). Connectives: `!`, `&&`, `||`, `=>` ; constants
//! `true` / `false`; quantifiers `forall x y. phi`, `exists x. phi`.
//! Sets: `set(x, y; phi)`.

use super::radicals::{clear_radicals_ext, ExtExpr};
use super::{Formula, QuantKind, Rel, SemialgebraicSet};
use crate::poly::Var;
use num_bigint::BigInt;

#[derive(Debug, thiserror::Error, PartialEq)]
#[error("parse error at line {line}, column {col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    Semi,
    Dot,
    Bang,
    AndAnd,
    OrOr,
    Implies,
    Rel(Rel),
    Eof,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src: src.as_bytes(), pos: 0, line: 1, col: 1 }
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError { line: self.line, col: self.col, msg: msg.into() }
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

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn tokenize(mut self) -> Result<Vec<Spanned>, ParseError> {
        let mut out = Vec::new();
        loop {
            while matches!(self.peek(), Some(c) if c.is_ascii_whitespace()) {
                self.bump();
            }
            let (line, col) = (self.line, self.col);
            let Some(c) = self.peek() else {
                out.push(Spanned { tok: Tok::Eof, line, col });
                return Ok(out);
            };
            let tok = match c {
                b'0'..=b'9' => {
                    let mut s = String::new();
                    while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                        s.push(self.bump() as char);
                    }
                    Tok::Int(s.parse().unwrap())
                }
                b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                    let mut s = String::new();
                    while matches!(self.peek(), Some(c)
                        if c.is_ascii_alphanumeric() || c == b'_')
                    {
                        s.push(self.bump() as char);
                    }
                    Tok::Ident(s)
                }
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
                b'/' => {
                    self.bump();
                    Tok::Slash
                }
                b'^' => {
                    self.bump();
                    Tok::Caret
                }
                b'(' => {
                    self.bump();
                    Tok::LParen
                }
                b')' => {
                    self.bump();
                    Tok::RParen
                }
                b',' => {
                    self.bump();
                    Tok::Comma
                }
                b';' => {
                    self.bump();
                    Tok::Semi
                }
                b'.' => {
                    self.bump();
                    Tok::Dot
                }
                b'=' => {
                    self.bump();
                    match self.peek() {
                        Some(b'=') => {
                            self.bump();
                            Tok::Rel(Rel::Eq)
                        }
                        Some(b'>') => {
                            self.bump();
                            Tok::Implies
                        }
                        _ => Tok::Rel(Rel::Eq),
                    }
                }
                b'!' => {
                    self.bump();
                    if self.peek() == Some(b'=') {
                        self.bump();
                        Tok::Rel(Rel::Ne)
                    } else {
                        Tok::Bang
                    }
                }
                b'<' => {
                    self.bump();
                    if self.peek() == Some(b'=') {
                        self.bump();
                        Tok::Rel(Rel::Le)
                    } else {
                        Tok::Rel(Rel::Lt)
                    }
                }
                b'>' => {
                    self.bump();
                    if self.peek() == Some(b'=') {
                        self.bump();
                        Tok::Rel(Rel::Ge)
                    } else {
                        Tok::Rel(Rel::Gt)
                    }
                }
                b'&' => {
                    self.bump();
                    if self.peek() == Some(b'&') {
                        self.bump();
                        Tok::AndAnd
                    } else {
                        return Err(self.err("expected '&&'"));
                    }
                }
                b'|' => {
                    self.bump();
                    if self.peek() == Some(b'|') {
                        self.bump();
                        Tok::OrOr
                    } else {
                        return Err(self.err("expected '||'"));
                    }
                }
                other => {
                    return Err(self.err(format!("unexpected character '{}'", other as char)))
                }
            };
            out.push(Spanned { tok, line, col });
        }
    }
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        let s = &self.toks[self.pos];
        ParseError { line: s.line, col: s.col, msg: msg.into() }
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            Err(self.err(format!("expected {what}")))
        }
    }

    // formula := or_f ("=>" formula)?   (right associative)
    fn formula(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.or_formula()?;
        if *self.peek() == Tok::Implies {
            self.bump();
            let rhs = self.formula()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or_formula(&mut self) -> Result<Formula, ParseError> {
        let mut parts = vec![self.and_formula()?];
        while *self.peek() == Tok::OrOr {
            self.bump();
            parts.push(self.and_formula()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Formula::or(parts) })
    }

    fn and_formula(&mut self) -> Result<Formula, ParseError> {
        let mut parts = vec![self.unary_formula()?];
        while *self.peek() == Tok::AndAnd {
            self.bump();
            parts.push(self.unary_formula()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Formula::and(parts) })
    }

    fn unary_formula(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::Bang => {
                self.bump();
                Ok(Formula::not(self.unary_formula()?))
            }
            Tok::Ident(kw) if kw == "forall" || kw == "exists" => {
                self.bump();
                let kind = if kw == "forall" { QuantKind::Forall } else { QuantKind::Exists };
                let mut vars = Vec::new();
                loop {
                    match self.peek().clone() {
                        Tok::Ident(name)
                            if name != "forall"
                                && name != "exists"
                                && name != "true"
                                && name != "false"
                                && name != "sqrt" =>
                        {
                            self.bump();
                            vars.push(Var::new(&name));
                        }
                        _ => break,
                    }
                }
                if vars.is_empty() {
                    return Err(self.err("expected variable after quantifier"));
                }
                self.expect(Tok::Dot, "'.' after quantified variables")?;
                let body = self.formula()?;
                Ok(Formula::quant(kind, vars, body))
            }
            _ => self.atom_or_paren(),
        }
    }

    /// A '(' here is ambiguous between a parenthesized formula and a
    /// parenthesized arithmetic expression starting an atom; resolved by
    /// trying the formula reading first and backtracking.
    fn atom_or_paren(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::Ident(kw) if kw == "true" => {
                self.bump();
                Ok(Formula::True)
            }
            Tok::Ident(kw) if kw == "false" => {
                self.bump();
                Ok(Formula::False)
            }
            Tok::LParen => {
                let save = self.pos;
                self.bump();
                if let Ok(inner) = self.formula() {
                    if *self.peek() == Tok::RParen {
                        self.bump();
                        // "(x) > 0": rejects the formula reading if a
                        // relation follows the closing paren.
                        if !matches!(
                            self.peek(),
                            Tok::Rel(_)
                                | Tok::Plus
                                | Tok::Minus
                                | Tok::Star
                                | Tok::Slash
                                | Tok::Caret
                        ) {
                            return Ok(inner);
                        }
                    }
                }
                self.pos = save;
                self.atom()
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.expr()?;
        let rel = match self.bump() {
            Tok::Rel(r) => r,
            _ => {
                self.pos -= 1;
                return Err(self.err("expected relation"));
            }
        };
        let rhs = self.expr()?;
        let diff = lhs.sub(&rhs).map_err(|e| self.err(e.to_string()))?;
        clear_radicals_ext(&diff, rel).map_err(|e| self.err(e.to_string()))
    }

    fn expr(&mut self) -> Result<ExtExpr, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    acc = acc.add(&self.term()?).map_err(|e| self.err(e.to_string()))?;
                }
                Tok::Minus => {
                    self.bump();
                    acc = acc.sub(&self.term()?).map_err(|e| self.err(e.to_string()))?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<ExtExpr, ParseError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    acc = acc.mul(&self.factor()?).map_err(|e| self.err(e.to_string()))?;
                }
                Tok::Slash => {
                    self.bump();
                    let d = self.factor()?;
                    acc = acc.div(&d).map_err(|e| self.err(e.to_string()))?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<ExtExpr, ParseError> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                Ok(self.factor()?.neg())
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<ExtExpr, ParseError> {
        let base = self.primary()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            match self.bump() {
                Tok::Int(n) => {
                    let e: u32 = n
                        .try_into()
                        .map_err(|_| self.err("exponent out of range"))?;
                    base.pow(e).map_err(|e| self.err(e.to_string()))
                }
                _ => {
                    self.pos -= 1;
                    Err(self.err("expected integer exponent"))
                }
            }
        } else {
            Ok(base)
        }
    }

    fn primary(&mut self) -> Result<ExtExpr, ParseError> {
        match self.bump() {
            Tok::Int(n) => Ok(ExtExpr::int(n)),
            Tok::Ident(name) if name == "sqrt" => {
                self.expect(Tok::LParen, "'(' after sqrt")?;
                let inner = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                inner.sqrt().map_err(|e| self.err(e.to_string()))
            }
            Tok::Ident(name)
                if name != "forall" && name != "exists" && name != "true" && name != "false" =>
            {
                Ok(ExtExpr::var(Var::new(&name)))
            }
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            _ => {
                self.pos -= 1;
                Err(self.err("expected expression"))
            }
        }
    }
}

/// Parses a formula from text.
pub fn parse(src: &str) -> Result<Formula, ParseError> {
    let toks = Lexer::new(src).tokenize()?;
    let mut p = Parser { toks, pos: 0 };
    let f = p.formula()?;
    if *p.peek() != Tok::Eof {
        return Err(p.err("trailing input"));
    }
    Ok(f)
}

/// Parses `set(x, y, ...; formula)` into a semialgebraic set.
pub fn parse_set(src: &str) -> Result<SemialgebraicSet, ParseError> {
    let toks = Lexer::new(src).tokenize()?;
    let mut p = Parser { toks, pos: 0 };
    match p.bump() {
        Tok::Ident(kw) if kw == "set" => {}
        _ => {
            p.pos -= 1;
            return Err(p.err("expected 'set'"));
        }
    }
    p.expect(Tok::LParen, "'('")?;
    let mut vars = Vec::new();
    loop {
        match p.bump() {
            Tok::Ident(name) => vars.push(Var::new(&name)),
            _ => {
                p.pos -= 1;
                return Err(p.err("expected variable name"));
            }
        }
        match p.bump() {
            Tok::Comma => continue,
            Tok::Semi => break,
            _ => {
                p.pos -= 1;
                return Err(p.err("expected ',' or ';'"));
            }
        }
    }
    let body = p.formula()?;
    p.expect(Tok::RParen, "')'")?;
    if *p.peek() != Tok::Eof {
        return Err(p.err("trailing input"));
    }
    if !body.is_quantifier_free() {
        return Err(ParseError {
            line: 1,
            col: 1,
            msg: "set body must be quantifier-free".into(),
        });
    }
    for v in body.free_vars() {
        if !vars.contains(&v) {
            return Err(ParseError {
                line: 1,
                col: 1,
                msg: format!("free variable {v} not among set variables"),
            });
        }
    }
    Ok(SemialgebraicSet::new(vars, body))
}
