//! Parser for the plain-text expression grammar.
//!
//! Grammar (infix, `^` right-associative and binding tighter than unary
//! minus, `*` and `/` over `+` and `-`):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' unary)?
//! atom    := number | ident | ident '(' expr ')' | '(' expr ')'
//! number  := digits ('.' digits)? | digits '/' ... (via the '/' operator)
//! ```
//!
//! Identifiers resolve to jet variables (`t`, `s`, `phi`, `phi_t`, ...,
//! `x`, `rho`, `u`), function heads when applied (`sin`, `cos`, `sinh`,
//! `cosh`, `exp`, `ln`, `sqrt`, `abs`, `g`, `gp`, `G`, `Gp`, ..., `h`,
//! `H`, `Hp`, ...), and otherwise to named parameters looked up in a
//! [`SymbolTable`]; unknown names become sign-free parameters.

use super::{Expr, ExprError, Func, Param, Rat, Sign, Var};
use num_bigint::BigInt;
use num_traits::Zero;
use std::collections::BTreeMap;

/// Declares the parameters (and their sign tags) visible to the parser.
#[derive(Debug, Clone, Default)]
pub struct SymbolTable {
    params: BTreeMap<String, Param>,
}

impl SymbolTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_params<'a>(names: impl IntoIterator<Item = (&'a str, Sign)>) -> Self {
        let mut t = Self::new();
        for (n, s) in names {
            t.declare(n, s);
        }
        t
    }

    pub fn declare(&mut self, name: &str, sign: Sign) -> Param {
        let p = Param::new(name, sign);
        self.params.insert(name.to_string(), p.clone());
        p
    }

    pub fn get(&self, name: &str) -> Option<&Param> {
        self.params.get(name)
    }

    fn resolve(&self, name: &str) -> Param {
        self.params
            .get(name)
            .cloned()
            .unwrap_or_else(|| Param::new(name, Sign::Any))
    }
}

/// Parses `input` against `table`, returning the normalized expression.
pub fn parse_expr(input: &str, table: &SymbolTable) -> Result<Expr, ExprError> {
    let tokens = lex(input)?;
    let mut p = Parser { tokens, pos: 0, table };
    let e = p.expr()?;
    if p.pos != p.tokens.len() {
        return Err(ExprError::Parse(format!(
            "unexpected trailing input at `{}`",
            p.describe_current()
        )));
    }
    Ok(e.normalize())
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Rat),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn lex(input: &str) -> Result<Vec<Tok>, ExprError> {
    let mut out = Vec::new();
    let bytes: Vec<char> = input.chars().collect();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                out.push(Tok::Plus);
                i += 1;
            }
            '-' => {
                out.push(Tok::Minus);
                i += 1;
            }
            '*' => {
                out.push(Tok::Star);
                i += 1;
            }
            '/' => {
                out.push(Tok::Slash);
                i += 1;
            }
            '^' => {
                out.push(Tok::Caret);
                i += 1;
            }
            '(' => {
                out.push(Tok::LParen);
                i += 1;
            }
            ')' => {
                out.push(Tok::RParen);
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let int_part: String = bytes[start..i].iter().collect();
                if i < bytes.len() && bytes[i] == '.' {
                    i += 1;
                    let fs = i;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    let frac: String = bytes[fs..i].iter().collect();
                    if frac.is_empty() {
                        return Err(ExprError::Parse(format!(
                            "malformed number near `{int_part}.`"
                        )));
                    }
                    let denom = BigInt::from(10u32).pow(frac.len() as u32);
                    let numer: BigInt = format!("{int_part}{frac}").parse().unwrap();
                    out.push(Tok::Num(Rat::new(numer, denom)));
                } else {
                    out.push(Tok::Num(Rat::from(int_part.parse::<BigInt>().unwrap())));
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == '_') {
                    i += 1;
                }
                out.push(Tok::Ident(bytes[start..i].iter().collect()));
            }
            other => {
                return Err(ExprError::Parse(format!("unexpected character `{other}`")));
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Tok>,
    pos: usize,
    table: &'a SymbolTable,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn describe_current(&self) -> String {
        match self.peek() {
            Some(t) => format!("{t:?}"),
            None => "end of input".into(),
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ExprError> {
        match self.next() {
            Some(t) if t == tok => Ok(()),
            other => Err(ExprError::Parse(format!("expected {tok:?}, found {other:?}"))),
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.next();
                    let rhs = self.term()?;
                    acc = Expr::add(vec![acc, rhs]);
                }
                Some(Tok::Minus) => {
                    self.next();
                    let rhs = self.term()?;
                    acc = Expr::sub(acc, rhs);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.next();
                    let rhs = self.unary()?;
                    acc = Expr::mul(vec![acc, rhs]);
                }
                Some(Tok::Slash) => {
                    self.next();
                    let rhs = self.unary()?;
                    if let Some(q) = rhs.is_num() {
                        if q.is_zero() {
                            return Err(ExprError::Parse("division by zero".into()));
                        }
                    }
                    acc = Expr::div(acc, rhs);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if matches!(self.peek(), Some(Tok::Minus)) {
            self.next();
            let inner = self.unary()?;
            return Ok(Expr::neg(inner));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if matches!(self.peek(), Some(Tok::Caret)) {
            self.next();
            // right-associative; allow `x^-2`
            let expo = self.unary_power()?;
            return Ok(Expr::pow(base, expo));
        }
        Ok(base)
    }

    /// Exponent position: unary minus allowed, then another power.
    fn unary_power(&mut self) -> Result<Expr, ExprError> {
        if matches!(self.peek(), Some(Tok::Minus)) {
            self.next();
            let inner = self.unary_power()?;
            return Ok(Expr::neg(inner));
        }
        self.power()
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        match self.next() {
            Some(Tok::Num(q)) => Ok(Expr::num(q)),
            Some(Tok::LParen) => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                if matches!(self.peek(), Some(Tok::LParen)) {
                    self.next();
                    let arg = self.expr()?;
                    self.expect(Tok::RParen)?;
                    if name == "sqrt" {
                        return Ok(Expr::sqrt(arg));
                    }
                    match Func::from_name(&name) {
                        Some(f) => Ok(Expr::app(f, arg)),
                        None => Err(ExprError::Parse(format!("unknown function `{name}`"))),
                    }
                } else if let Some(v) = Var::from_name(&name) {
                    Ok(Expr::var(v))
                } else {
                    Ok(Expr::param(&self.table.resolve(&name)))
                }
            }
            other => Err(ExprError::Parse(format!("unexpected token {other:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_jet_grammar() {
        let t = SymbolTable::with_params([("lambda", Sign::Any), ("alpha", Sign::Negative)]);
        let e = parse_expr("phi_t^2/2 + g(phi_s) + h(phi)", &t).unwrap();
        assert!(e.contains_var(Var::PhiT));
        assert!(e.contains_chain());

        let e = parse_expr("-(phi_s + 1)^lambda", &t).unwrap();
        assert!(e.to_string().contains("lambda"));

        let e = parse_expr("sqrt(abs(alpha))*t", &t).unwrap();
        // alpha < 0 so abs folds to -alpha
        assert!(e.to_string().contains("alpha"), "{e}");

        assert!(parse_expr("2 +", &t).is_err());
        assert!(parse_expr("bogus(3)", &t).is_err());
    }

    #[test]
    fn decimal_literals_are_exact() {
        let t = SymbolTable::new();
        let e = parse_expr("0.5", &t).unwrap();
        assert_eq!(e, Expr::rational(1, 2));
        let e = parse_expr("2.25", &t).unwrap();
        assert_eq!(e, Expr::rational(9, 4));
    }

    #[test]
    fn negative_exponents() {
        let t = SymbolTable::new();
        let e = parse_expr("phi_s^-3", &t).unwrap();
        assert_eq!(e, Expr::powi(Expr::var(Var::PhiS), -3).normalize());
        let e2 = parse_expr("phi_s^(-3)", &t).unwrap();
        assert_eq!(e, e2);
    }

    #[test]
    fn display_roundtrip() {
        let table = SymbolTable::with_params([("lambda", Sign::Any), ("mu", Sign::Any)]);
        let cases = [
            "phi_t^2/2 + g(phi_s)",
            "t*phi_t - phi",
            "lambda*t - 2*phi*lambda^-1",
            "sin(2*t)*cos(t)",
            "exp(mu*phi_s)",
            "(phi_s + 1)^(lambda - 1)",
            "1/2 - phi^2",
        ];
        for c in cases {
            let e = parse_expr(c, &table).unwrap();
            let back = parse_expr(&e.to_string(), &table).unwrap();
            assert_eq!(e, back, "roundtrip failed for `{c}` -> `{e}`");
        }
    }
}
