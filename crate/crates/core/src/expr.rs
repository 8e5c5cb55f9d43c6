//! Recursive-descent parser for polynomial and series expressions.
//!
//! Precedence from tightest: `^`, unary `-`, `*`, then binary `+` and `-`.
//! The symbol `t` is the uniformizer and may carry rational exponents such as `t^(3/2)`.

use num::{BigInt, BigRational, One, Signed, Zero};

use crate::error::{Result, RisoError};
use crate::field::fmt_rat;
use crate::gamma::{fmt_exp, Exp};
use crate::point::Point;
use crate::series::PuiseuxSeries;
use crate::spoly::SPoly;
use crate::coeff::Coeff;

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(BigRational),
    Var(String),
    T,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Exp),
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Int(n) => format!("number `{n}`"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Caret => "`^`".into(),
            Tok::Slash => "`/`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

struct Lexed {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<Lexed>> {
    let mut out = vec![];
    let chars: Vec<char> = src.chars().collect();
    let (mut line, mut col) = (1usize, 1usize);
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        let (l0, c0) = (line, col);
        if ch == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if ch.is_whitespace() {
            col += 1;
            i += 1;
            continue;
        }
        let tok = if ch.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(Lexed { tok: Tok::Int(s.parse().unwrap()), line: l0, col: c0 });
            continue;
        } else if ch.is_alphabetic() || ch == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(Lexed { tok: Tok::Ident(s), line: l0, col: c0 });
            continue;
        } else {
            match ch {
                '+' => Tok::Plus,
                '-' | '−' => Tok::Minus,
                '*' => Tok::Star,
                '^' => Tok::Caret,
                '/' => Tok::Slash,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                _ => {
                    return Err(RisoError::SyntaxError {
                        line: l0,
                        col: c0,
                        msg: format!("unexpected character `{ch}`"),
                        expected: "number, variable, operator or parenthesis".into(),
                    })
                }
            }
        };
        out.push(Lexed { tok, line: l0, col: c0 });
        i += 1;
        col += 1;
    }
    out.push(Lexed { tok: Tok::End, line, col });
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Lexed>,
    pos: usize,
    vars: &'a [&'a str],
}

impl<'a> Parser<'a> {
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

    fn fail<T>(&self, msg: &str, expected: &[&str]) -> Result<T> {
        let l = &self.toks[self.pos];
        Err(RisoError::SyntaxError {
            line: l.line,
            col: l.col,
            msg: format!("{msg}, found {}", l.tok.describe()),
            expected: expected.join(", "),
        })
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::Star {
            self.bump();
            lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let (e, at) = self.exponent()?;
        if base != Expr::T && !(e.is_integer() && !e.is_negative()) {
            let l = &self.toks[at];
            return Err(RisoError::SyntaxError {
                line: l.line,
                col: l.col,
                msg: "exponents of variables and subexpressions must be nonnegative integers".into(),
                expected: "nonnegative integer".into(),
            });
        }
        Ok(Expr::Pow(Box::new(base), e))
    }

    fn int(&mut self) -> Result<BigInt> {
        match self.bump() {
            Tok::Int(n) => Ok(n),
            _ => {
                self.pos -= 1;
                self.fail("expected an integer", &["integer"])
            }
        }
    }

    fn small(&self, n: &BigInt) -> Result<i64> {
        use num::ToPrimitive;
        n.to_i64().ok_or_else(|| RisoError::InvalidInput(format!("exponent {n} out of range")))
    }

    fn exponent(&mut self) -> Result<(Exp, usize)> {
        let at = self.pos;
        match self.peek().clone() {
            Tok::Int(_) => {
                let n = self.int()?;
                Ok((Exp::from_integer(self.small(&n)?), at))
            }
            Tok::LParen => {
                self.bump();
                let neg = if *self.peek() == Tok::Minus {
                    self.bump();
                    true
                } else {
                    false
                };
                let n = self.int()?;
                let mut e = Exp::from_integer(self.small(&n)?);
                if *self.peek() == Tok::Slash {
                    self.bump();
                    let d = self.int()?;
                    let d = self.small(&d)?;
                    if d == 0 {
                        return self.fail("zero denominator in exponent", &["positive integer"]);
                    }
                    e /= Exp::from_integer(d);
                }
                if neg {
                    e = -e;
                }
                if *self.peek() != Tok::RParen {
                    return self.fail("unclosed exponent", &["`)`", "`/`"]);
                }
                self.bump();
                Ok((e, at))
            }
            _ => self.fail("malformed exponent", &["integer", "`(p/q)`"]),
        }
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.peek().clone() {
            Tok::Int(_) => {
                let n = self.int()?;
                if *self.peek() == Tok::Slash {
                    self.bump();
                    let d = self.int()?;
                    if d.is_zero() {
                        return self.fail("zero denominator", &["nonzero integer"]);
                    }
                    return Ok(Expr::Num(BigRational::new(n, d)));
                }
                Ok(Expr::Num(BigRational::from_integer(n)))
            }
            Tok::Ident(name) => {
                self.bump();
                if name == "t" {
                    return Ok(Expr::T);
                }
                if !self.vars.contains(&name.as_str()) {
                    return Err(RisoError::UnknownVariable(name));
                }
                Ok(Expr::Var(name))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                if *self.peek() != Tok::RParen {
                    return self.fail("unbalanced parenthesis", &["`)`", "`+`", "`-`", "`*`", "`^`"]);
                }
                self.bump();
                Ok(e)
            }
            _ => self.fail("expected an operand", &["number", "variable", "`t`", "`(`", "`-`"]),
        }
    }
}

/// Parses `src` over the declared variables; `t` is always available and may not be declared.
pub fn parse(src: &str, vars: &[&str]) -> Result<Expr> {
    if vars.contains(&"t") {
        return Err(RisoError::InvalidInput("`t` is reserved for the uniformizer".into()));
    }
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0, vars };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.fail("unexpected trailing input", &["`+`", "`-`", "`*`", "end of input"]);
    }
    Ok(e)
}

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) => 2,
        Expr::Neg(..) => 3,
        Expr::Pow(..) => 4,
        Expr::Num(r) if r.is_negative() => 0,
        Expr::Num(r) if !r.is_integer() => 4,
        _ => 5,
    }
}

fn wrap(e: &Expr, min: u8) -> String {
    let s = render(e);
    if prec(e) < min {
        format!("({s})")
    } else {
        s
    }
}

/// Canonical text; reparses to the same tree.
pub fn render(e: &Expr) -> String {
    match e {
        Expr::Num(r) => fmt_rat(r),
        Expr::Var(v) => v.clone(),
        Expr::T => "t".into(),
        Expr::Neg(a) => format!("-{}", wrap(a, 3)),
        Expr::Add(a, b) => format!("{} + {}", wrap(a, 1), wrap(b, 2)),
        Expr::Sub(a, b) => format!("{} - {}", wrap(a, 1), wrap(b, 2)),
        Expr::Mul(a, b) => format!("{}*{}", wrap(a, 2), wrap(b, 3)),
        Expr::Pow(a, k) => {
            let ks = if k.is_integer() && !k.is_negative() { fmt_exp(k) } else { format!("({})", fmt_exp(k)) };
            format!("{}^{}", wrap(a, 5), ks)
        }
    }
}

/// Evaluates to a polynomial in `vars` with series coefficients.
pub fn to_spoly(e: &Expr, vars: &[&str]) -> Result<SPoly> {
    let n = vars.len();
    Ok(match e {
        Expr::Num(r) => SPoly::constant(n, PuiseuxSeries::constant(Coeff::q(r.clone()))),
        Expr::Var(v) => {
            let i = vars.iter().position(|x| x == v).ok_or_else(|| RisoError::UnknownVariable(v.clone()))?;
            SPoly::var(n, i)
        }
        Expr::T => SPoly::constant(n, PuiseuxSeries::t_pow(Exp::one())),
        Expr::Neg(a) => to_spoly(a, vars)?.neg(),
        Expr::Add(a, b) => to_spoly(a, vars)?.add(&to_spoly(b, vars)?),
        Expr::Sub(a, b) => to_spoly(a, vars)?.sub(&to_spoly(b, vars)?),
        Expr::Mul(a, b) => to_spoly(a, vars)?.mul(&to_spoly(b, vars)?),
        Expr::Pow(a, k) => {
            if **a == Expr::T {
                SPoly::constant(n, PuiseuxSeries::t_pow(*k))
            } else {
                let base = to_spoly(a, vars)?;
                if *k.numer() > 4096 {
                    return Err(RisoError::InvalidInput(format!("exponent {k} too large")));
                }
                base.pow(k.to_integer() as u32)
            }
        }
    })
}

pub fn parse_poly(src: &str, vars: &[&str]) -> Result<SPoly> {
    to_spoly(&parse(src, vars)?, vars)
}

/// A series literal such as `1 + 2*t^(3/2)`.
pub fn parse_series(src: &str) -> Result<PuiseuxSeries> {
    let p = parse_poly(src, &[])?;
    Ok(p.coeff(&vec![]))
}

/// Splits on commas that are not nested in parentheses.
pub fn split_top(s: &str) -> Vec<String> {
    let mut out = vec![];
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        if ch == ',' && depth == 0 {
            out.push(cur.trim().to_string());
            cur.clear();
        } else {
            cur.push(ch);
        }
    }
    out.push(cur.trim().to_string());
    out
}

/// A point `(a1, ..., an)`, or a bare series for n = 1.
pub fn parse_point(src: &str) -> Result<Point> {
    let s = src.trim();
    let inner = if s.starts_with('(') && s.ends_with(')') && balanced_outer(s) { &s[1..s.len() - 1] } else { s };
    let parts = split_top(inner);
    let coords = parts.iter().map(|p| parse_series(p)).collect::<Result<Vec<_>>>()?;
    Ok(Point::new(coords))
}

fn balanced_outer(s: &str) -> bool {
    let mut depth = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 && i != s.len() - 1 {
                    return false;
                }
            }
            _ => {}
        }
    }
    true
}

impl Expr {
    pub fn one() -> Expr {
        Expr::Num(BigRational::one())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        let e = parse("-x^2*y + 3", &["x", "y"]).unwrap();
        assert_eq!(render(&e), "-x^2*y + 3");
        let p = parse_poly("-x^2", &["x"]).unwrap();
        assert_eq!(p.fmt_with(&["x"]), "-x^2");
        let q = parse_poly("(x - 1)^2", &["x"]).unwrap();
        assert_eq!(q.fmt_with(&["x"]), "x^2 - 2*x + 1");
    }

    #[test]
    fn series_literals() {
        let s = parse_series("1 + 2*t^(3/2)").unwrap();
        assert_eq!(s.to_string(), "1 + 2*t^(3/2)");
        assert_eq!(parse_series("t^(-2)*3").unwrap().to_string(), "3*t^(-2)");
        let pt = parse_point("(t^4, 0)").unwrap();
        assert_eq!(pt.to_string(), "(t^4,0)");
    }

    #[test]
    fn diagnostics() {
        match parse("x^(1/2)", &["x"]) {
            Err(RisoError::SyntaxError { col, .. }) => assert_eq!(col, 3),
            other => panic!("{other:?}"),
        }
        assert_eq!(parse("w", &["x"]), Err(RisoError::UnknownVariable("w".into())));
        assert!(matches!(parse("x +", &["x"]), Err(RisoError::SyntaxError { .. })));
        assert!(matches!(parse("(x", &["x"]), Err(RisoError::SyntaxError { .. })));
        assert!(parse("t", &["t"]).is_err());
    }
}
