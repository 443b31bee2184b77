//! Tiny operator-expression language for config files.
//!
//! Grammar (whitespace-insensitive):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary ('*' unary)*
//! unary   := '-' unary | primary
//! primary := '(' expr ')' | NUMBER ['i'] | ATOM
//! ATOM    := 'i' | 'id' | a<j> | adag<j> | n<j> | x<j> | p<j>
//! ```
//!
//! `a<j>`/`adag<j>`/`n<j>` are the mode-`j` ladder and number operators
//! (modes are 1-based), `x<j> = (a + a†)/√2` and `p<j> = i(a† − a)/√2` the
//! Hermitian quadratures, `id` the identity, `i` the imaginary unit, and
//! numbers may carry a trailing `i` (`0.5i`). Scalars are promoted to
//! multiples of the identity when added to operators. There is no implicit
//! multiplication: `0.5*n1 + (0.3+0.1i)*a2` is valid, `0.5 n1` is not.

use nonrecip::fock::{identity, mode_annihilation, mode_creation, mode_number, FockOperator, FockSpace};
use nonrecip::C64;

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Plus,
    Minus,
    Star,
    LParen,
    RParen,
    Num { value: f64, imaginary: bool },
    Atom(String),
}

fn lex(expr: &str) -> Result<Vec<Token>, CliError> {
    let bad = |msg: String| CliError::config(format!("operator expression {expr:?}: {msg}"));
    let chars: Vec<char> = expr.chars().collect();
    let mut out = Vec::new();
    let mut k = 0;
    while k < chars.len() {
        let c = chars[k];
        match c {
            ' ' | '\t' | '\n' | '\r' => k += 1,
            '+' => {
                out.push(Token::Plus);
                k += 1;
            }
            '-' => {
                out.push(Token::Minus);
                k += 1;
            }
            '*' => {
                out.push(Token::Star);
                k += 1;
            }
            '(' => {
                out.push(Token::LParen);
                k += 1;
            }
            ')' => {
                out.push(Token::RParen);
                k += 1;
            }
            '0'..='9' | '.' => {
                let start = k;
                while k < chars.len() && chars[k].is_ascii_digit() {
                    k += 1;
                }
                if k < chars.len() && chars[k] == '.' {
                    k += 1;
                    while k < chars.len() && chars[k].is_ascii_digit() {
                        k += 1;
                    }
                }
                if k < chars.len() && (chars[k] == 'e' || chars[k] == 'E') {
                    let mut j = k + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        k = j;
                        while k < chars.len() && chars[k].is_ascii_digit() {
                            k += 1;
                        }
                    }
                }
                let text: String = chars[start..k].iter().collect();
                let value: f64 = text
                    .parse()
                    .map_err(|_| bad(format!("malformed number {text:?}")))?;
                // A trailing `i` marks an imaginary literal, unless it
                // starts a longer identifier (which is an error anyway —
                // there is no implicit multiplication).
                let imaginary = k < chars.len()
                    && chars[k] == 'i'
                    && !(k + 1 < chars.len() && chars[k + 1].is_ascii_alphanumeric());
                if imaginary {
                    k += 1;
                }
                out.push(Token::Num { value, imaginary });
            }
            _ if c.is_ascii_alphabetic() => {
                let start = k;
                while k < chars.len() && chars[k].is_ascii_alphanumeric() {
                    k += 1;
                }
                out.push(Token::Atom(chars[start..k].iter().collect()));
            }
            _ => return Err(bad(format!("unexpected character {c:?}"))),
        }
    }
    Ok(out)
}

/// A partially evaluated expression: scalars stay symbolic until they meet
/// an operator, so `2*3*a1` costs one scaling.
#[derive(Clone)]
enum Val {
    Scalar(C64),
    Op(FockOperator),
}

struct Parser<'s> {
    tokens: Vec<Token>,
    pos: usize,
    space: &'s FockSpace,
    expr: &'s str,
}

impl<'s> Parser<'s> {
    fn bad(&self, msg: String) -> CliError {
        CliError::config(format!("operator expression {:?}: {msg}", self.expr))
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<Val, CliError> {
        let mut acc = self.term()?;
        while let Some(op) = self.peek().cloned() {
            match op {
                Token::Plus | Token::Minus => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    let rhs = if op == Token::Minus {
                        negate(rhs)
                    } else {
                        rhs
                    };
                    acc = self.add(acc, rhs)?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Val, CliError> {
        let mut acc = self.unary()?;
        while self.peek() == Some(&Token::Star) {
            self.pos += 1;
            let rhs = self.unary()?;
            acc = self.mul(acc, rhs)?;
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Val, CliError> {
        if self.peek() == Some(&Token::Minus) {
            self.pos += 1;
            return Ok(negate(self.unary()?));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Val, CliError> {
        match self.next() {
            Some(Token::LParen) => {
                let inner = self.expr()?;
                match self.next() {
                    Some(Token::RParen) => Ok(inner),
                    _ => Err(self.bad("missing closing parenthesis".into())),
                }
            }
            Some(Token::Num { value, imaginary }) => Ok(Val::Scalar(if imaginary {
                C64::new(0.0, value)
            } else {
                C64::new(value, 0.0)
            })),
            Some(Token::Atom(name)) => self.atom(&name),
            Some(tok) => Err(self.bad(format!("unexpected token {tok:?}"))),
            None => Err(self.bad("expression ended unexpectedly".into())),
        }
    }

    fn atom(&mut self, name: &str) -> Result<Val, CliError> {
        if name == "i" {
            return Ok(Val::Scalar(C64::new(0.0, 1.0)));
        }
        if name == "id" {
            return Ok(Val::Op(identity(self.space)));
        }
        let split = name.find(|c: char| c.is_ascii_digit());
        let (prefix, digits) = match split {
            Some(k) => name.split_at(k),
            None => (name, ""),
        };
        let mode: usize = digits
            .parse()
            .map_err(|_| self.bad(format!("operator {name:?} is missing its mode index")))?;
        let half = std::f64::consts::FRAC_1_SQRT_2;
        let op = match prefix {
            "a" => mode_annihilation(self.space, mode)?,
            "adag" => mode_creation(self.space, mode)?,
            "n" => mode_number(self.space, mode)?,
            "x" => {
                let a = mode_annihilation(self.space, mode)?;
                a.add(&a.adjoint())?.scale(C64::new(half, 0.0))
            }
            "p" => {
                let a = mode_annihilation(self.space, mode)?;
                a.adjoint().sub(&a)?.scale(C64::new(0.0, half))
            }
            _ => return Err(self.bad(format!("unknown operator {name:?}"))),
        };
        Ok(Val::Op(op))
    }

    fn add(&self, lhs: Val, rhs: Val) -> Result<Val, CliError> {
        Ok(match (lhs, rhs) {
            (Val::Scalar(a), Val::Scalar(b)) => Val::Scalar(a + b),
            (Val::Op(a), Val::Op(b)) => Val::Op(a.add(&b)?),
            (Val::Scalar(s), Val::Op(b)) => Val::Op(identity(self.space).scale(s).add(&b)?),
            (Val::Op(a), Val::Scalar(s)) => Val::Op(a.add(&identity(self.space).scale(s))?),
        })
    }

    fn mul(&self, lhs: Val, rhs: Val) -> Result<Val, CliError> {
        Ok(match (lhs, rhs) {
            (Val::Scalar(a), Val::Scalar(b)) => Val::Scalar(a * b),
            (Val::Scalar(s), Val::Op(b)) => Val::Op(b.scale(s)),
            (Val::Op(a), Val::Scalar(s)) => Val::Op(a.scale(s)),
            (Val::Op(a), Val::Op(b)) => Val::Op(a.mul(&b)?),
        })
    }
}

fn negate(v: Val) -> Val {
    match v {
        Val::Scalar(s) => Val::Scalar(-s),
        Val::Op(op) => Val::Op(op.scale(C64::new(-1.0, 0.0))),
    }
}

/// Parse and evaluate an operator expression on `space`. A purely scalar
/// result `s` is returned as `s·𝟙`.
pub fn parse_operator(expr: &str, space: &FockSpace) -> Result<FockOperator, CliError> {
    let tokens = lex(expr)?;
    if tokens.is_empty() {
        return Err(CliError::config(format!(
            "operator expression {expr:?}: empty expression"
        )));
    }
    let mut parser = Parser {
        tokens,
        pos: 0,
        space,
        expr,
    };
    let val = parser.expr()?;
    if parser.pos != parser.tokens.len() {
        return Err(parser.bad(format!(
            "trailing input from token {:?}",
            parser.tokens[parser.pos]
        )));
    }
    Ok(match val {
        Val::Scalar(s) => identity(space).scale(s),
        Val::Op(op) => op,
    })
}
