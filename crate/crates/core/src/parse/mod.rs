//! Text formats: constant expressions, polynomial expressions and system files.

mod constant;
mod polynomial;
mod system_file;

pub use constant::{parse_constant, parse_exact, Constant};
pub use polynomial::{parse_polynomial, parse_univariate};
pub use system_file::{
    load_system, parse_point, parse_system, FunctionSpec, IngredientSpec, OdeCoefficient, OdeSpec, SystemFile, SCHEMA,
};

use rug::{Integer, Rational};

use crate::error::{Error, Result};

/// Nesting limit for parenthesised expressions and unary chains.
const MAX_DEPTH: usize = 200;
/// Largest exponent accepted after `^` or in a decimal literal.
const MAX_EXPONENT: u32 = 4096;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Rational),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    PlusMinus,
}

fn err(pos: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line: 1, col: pos + 1, msg: msg.into() }
}

/// Decimal literal with optional fraction and exponent, read exactly.
fn lex_number(s: &[u8], start: usize) -> Result<(Rational, usize)> {
    let mut i = start;
    let mut digits = String::new();
    let mut frac = 0u32;
    while i < s.len() && s[i].is_ascii_digit() {
        digits.push(s[i] as char);
        i += 1;
    }
    if i < s.len() && s[i] == b'.' {
        i += 1;
        while i < s.len() && s[i].is_ascii_digit() {
            digits.push(s[i] as char);
            frac += 1;
            i += 1;
        }
    }
    if digits.is_empty() {
        return Err(err(start, "expected digits"));
    }
    if frac > MAX_EXPONENT {
        return Err(err(start, "literal has too many digits"));
    }
    let mut exp: i64 = 0;
    if i < s.len() && (s[i] == b'e' || s[i] == b'E') {
        let mut j = i + 1;
        let mut neg = false;
        if j < s.len() && (s[j] == b'+' || s[j] == b'-') {
            neg = s[j] == b'-';
            j += 1;
        }
        let estart = j;
        while j < s.len() && s[j].is_ascii_digit() {
            j += 1;
        }
        if j > estart {
            let text = std::str::from_utf8(&s[estart..j]).expect("ascii");
            let v: i64 = text.parse().map_err(|_| err(estart, "exponent out of range"))?;
            if v > MAX_EXPONENT as i64 {
                return Err(err(estart, "exponent out of range"));
            }
            exp = if neg { -v } else { v };
            i = j;
        }
    }
    let mantissa: Integer = digits.parse().map_err(|_| err(start, "bad number"))?;
    let total = exp - frac as i64;
    let ten = Integer::from(Integer::u_pow_u(10, total.unsigned_abs() as u32));
    let value = if total >= 0 {
        Rational::from(mantissa * ten)
    } else {
        Rational::from((mantissa, ten))
    };
    Ok((value, i))
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>> {
    let s = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < s.len() {
        let c = s[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || (c == b'.' && i + 1 < s.len() && s[i + 1].is_ascii_digit()) {
            let (v, next) = lex_number(s, i)?;
            out.push((Tok::Num(v), i));
            i = next;
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < s.len() && (s[i].is_ascii_alphanumeric() || s[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), start));
            continue;
        }
        let tok = match c {
            b'+' if s[i..].starts_with(b"+/-") => {
                out.push((Tok::PlusMinus, i));
                i += 3;
                continue;
            }
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            _ => {
                if src[i..].starts_with('±') {
                    out.push((Tok::PlusMinus, i));
                    i += '±'.len_utf8();
                    continue;
                }
                let ch = src[i..].chars().next().expect("in bounds");
                return Err(err(i, format!("unexpected character {ch:?}")));
            }
        };
        out.push((tok, i));
        i += 1;
    }
    Ok(out)
}

/// Expression tree shared by the constant and polynomial grammars.
#[derive(Clone, Debug, PartialEq)]
enum Expr {
    Num(Rational),
    Name(String, usize),
    Neg(Box<Expr>),
    /// Terms with a flag set when subtracted.
    Sum(Vec<(bool, Expr)>),
    /// Factors with the offset of a preceding `/`, if any.
    Product(Vec<(Option<usize>, Expr)>),
    Pow(Box<Expr>, i64, usize),
    Call(String, Box<Expr>, usize),
    PlusMinus(Box<Expr>, Box<Expr>),
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
    depth: usize,
}

impl Parser {
    fn new(src: &str) -> Result<Self> {
        Ok(Self { toks: lex(src)?, pos: 0, end: src.len(), depth: 0 })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(_, p)| *p)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn enter(&mut self) -> Result<()> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(err(self.offset(), "expression nested too deeply"));
        }
        Ok(())
    }

    fn top(&mut self, allow_pm: bool) -> Result<Expr> {
        let e = self.expr()?;
        let e = if allow_pm && self.eat(&Tok::PlusMinus) {
            Expr::PlusMinus(Box::new(e), Box::new(self.expr()?))
        } else {
            e
        };
        if self.pos != self.toks.len() {
            return Err(err(self.offset(), "unexpected trailing input"));
        }
        Ok(e)
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut terms = vec![(false, self.term()?)];
        loop {
            if self.eat(&Tok::Plus) {
                terms.push((false, self.term()?));
            } else if self.eat(&Tok::Minus) {
                terms.push((true, self.term()?));
            } else if terms.len() == 1 {
                return Ok(terms.pop().expect("one term").1);
            } else {
                return Ok(Expr::Sum(terms));
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut factors = vec![(None, self.unary()?)];
        loop {
            if self.eat(&Tok::Star) {
                factors.push((None, self.unary()?));
            } else if self.peek() == Some(&Tok::Slash) {
                let at = self.offset();
                self.pos += 1;
                factors.push((Some(at), self.unary()?));
            } else if factors.len() == 1 {
                return Ok(factors.pop().expect("one factor").1);
            } else {
                return Ok(Expr::Product(factors));
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        self.enter()?;
        let e = if self.eat(&Tok::Minus) {
            Expr::Neg(Box::new(self.unary()?))
        } else if self.eat(&Tok::Plus) {
            self.unary()?
        } else {
            self.power()?
        };
        self.depth -= 1;
        Ok(e)
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek() != Some(&Tok::Caret) {
            return Ok(base);
        }
        let at = self.offset();
        self.pos += 1;
        let neg = self.eat(&Tok::Minus);
        let n = match self.toks.get(self.pos) {
            Some((Tok::Num(v), _)) if v.denom() == &1 && *v.numer() <= MAX_EXPONENT => v.numer().to_i64().expect("small"),
            _ => return Err(err(self.offset(), "exponent must be a small nonnegative integer literal")),
        };
        self.pos += 1;
        Ok(Expr::Pow(Box::new(base), if neg { -n } else { n }, at))
    }

    fn atom(&mut self) -> Result<Expr> {
        let at = self.offset();
        match self.toks.get(self.pos).cloned() {
            Some((Tok::Num(v), _)) => {
                self.pos += 1;
                Ok(Expr::Num(v))
            }
            Some((Tok::Ident(name), _)) => {
                self.pos += 1;
                if self.eat(&Tok::LParen) {
                    self.enter()?;
                    let arg = self.expr()?;
                    self.depth -= 1;
                    if !self.eat(&Tok::RParen) {
                        return Err(err(self.offset(), "expected ')'"));
                    }
                    Ok(Expr::Call(name, Box::new(arg), at))
                } else {
                    Ok(Expr::Name(name, at))
                }
            }
            Some((Tok::LParen, _)) => {
                self.pos += 1;
                self.enter()?;
                let e = self.expr()?;
                self.depth -= 1;
                if !self.eat(&Tok::RParen) {
                    return Err(err(self.offset(), "expected ')'"));
                }
                Ok(e)
            }
            Some(_) => Err(err(at, "expected a number, name or '('")),
            None => Err(err(at, "unexpected end of input")),
        }
    }
}

fn parse_expr(src: &str, allow_pm: bool) -> Result<Expr> {
    Parser::new(src)?.top(allow_pm)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimals_are_exact() {
        let (v, _) = lex_number(b"0.480322", 0).unwrap();
        assert_eq!(v, Rational::from((480322, 1000000)));
        let (v, _) = lex_number(b"1e-40", 0).unwrap();
        assert_eq!(v, Rational::from((1, Integer::from(Integer::u_pow_u(10, 40)))));
        let (v, n) = lex_number(b"2.5E3x", 0).unwrap();
        assert_eq!((v, n), (Rational::from(2500), 5));
    }

    #[test]
    fn errors_carry_columns() {
        match parse_expr("1 + $", false) {
            Err(Error::Parse { line: 1, col: 5, .. }) => {}
            other => panic!("{other:?}"),
        }
        match parse_expr("(1 + 2", false) {
            Err(Error::Parse { col: 7, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn deep_nesting_is_rejected() {
        let s = "(".repeat(5000) + "1" + &")".repeat(5000);
        assert!(parse_expr(&s, false).is_err());
        let s = "-".repeat(5000) + "1";
        assert!(parse_expr(&s, false).is_err());
    }
}
