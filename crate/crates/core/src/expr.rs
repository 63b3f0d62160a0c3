//! A minimal calculator grammar for user-supplied fields.
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' unary)?
//! atom  := number | 'pi' | var | func '(' expr ')' | '(' expr ')'
//! var   := 'x' digits | 'y' digits          (1-based)
//! func  := sqrt | sin | cos | exp | ln
//! ```
//!
//! Parsed trees evaluate over any [`Real`], so the AD engine differentiates
//! them exactly like native fields.

use std::fmt;

use thiserror::Error;

use crate::jets::{Field, Real};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("expression error at column {column}: {message}")]
pub struct ExprError {
    pub column: usize,
    pub message: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sqrt,
    Sin,
    Cos,
    Exp,
    Ln,
}

impl Func {
    fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "sqrt" => Func::Sqrt,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Ln => "ln",
        }
    }

    fn apply<T: Real>(self, v: T) -> T {
        match self {
            Func::Sqrt => v.sqrt(),
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Exp => v.exp(),
            Func::Ln => v.ln(),
        }
    }
}

/// Expression tree. Variable indices are 0-based.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    X(usize),
    Y(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr, ExprError> {
        let tokens = lex(src)?;
        let mut p = Parser { tokens, pos: 0 };
        let e = p.expr()?;
        match p.peek() {
            None => Ok(e),
            Some(t) => Err(ExprError {
                column: t.column,
                message: format!("unexpected `{}`", t.kind),
            }),
        }
    }

    pub fn eval<T: Real>(&self, x: &[T], y: &[T]) -> T {
        match self {
            Expr::Num(v) => T::cst(*v),
            Expr::X(i) => x.get(*i).copied().unwrap_or_else(|| T::cst(f64::NAN)),
            Expr::Y(i) => y.get(*i).copied().unwrap_or_else(|| T::cst(f64::NAN)),
            Expr::Neg(a) => -a.eval(x, y),
            Expr::Add(a, b) => a.eval(x, y) + b.eval(x, y),
            Expr::Sub(a, b) => a.eval(x, y) - b.eval(x, y),
            Expr::Mul(a, b) => a.eval(x, y) * b.eval(x, y),
            Expr::Div(a, b) => a.eval(x, y) / b.eval(x, y),
            Expr::Pow(a, b) => {
                let base = a.eval(x, y);
                match **b {
                    Expr::Num(p) if p.fract() == 0.0 && p.abs() <= i32::MAX as f64 => {
                        base.powi(p as i32)
                    }
                    Expr::Num(p) => base.powf(p),
                    _ => (b.eval(x, y) * base.ln()).exp(),
                }
            }
            Expr::Call(f, a) => f.apply(a.eval(x, y)),
        }
    }

    /// `(highest x index + 1, highest y index + 1)` referenced by the tree.
    pub fn arity(&self) -> (usize, usize) {
        match self {
            Expr::Num(_) => (0, 0),
            Expr::X(i) => (i + 1, 0),
            Expr::Y(i) => (0, i + 1),
            Expr::Neg(a) | Expr::Call(_, a) => a.arity(),
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Pow(a, b) => {
                let (p, q) = a.arity();
                let (r, s) = b.arity();
                (p.max(r), q.max(s))
            }
        }
    }

    pub fn uses_fiber(&self) -> bool {
        self.arity().1 > 0
    }
}

impl Field for Expr {
    fn eval<T: Real>(&self, x: &[T], y: &[T]) -> T {
        Expr::eval(self, x, y)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::X(i) => write!(f, "x{}", i + 1),
            Expr::Y(i) => write!(f, "y{}", i + 1),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, b) => write!(f, "({a} ^ {b})"),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(v) => write!(f, "{v}"),
            Tok::Ident(s) => write!(f, "{s}"),
            Tok::Op(c) => write!(f, "{c}"),
            Tok::LParen => write!(f, "("),
            Tok::RParen => write!(f, ")"),
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    kind: Tok,
    column: usize,
}

fn lex(src: &str) -> Result<Vec<Token>, ExprError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let column = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            // exponent part
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v = text.parse::<f64>().map_err(|_| ExprError {
                column,
                message: format!("malformed number `{text}`"),
            })?;
            out.push(Token {
                kind: Tok::Num(v),
                column,
            });
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token {
                kind: Tok::Ident(chars[start..i].iter().collect()),
                column,
            });
        } else {
            let kind = match c {
                '+' | '-' | '*' | '/' | '^' => Tok::Op(c),
                // U+2212 minus sign
                '\u{2212}' => Tok::Op('-'),
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                _ => {
                    return Err(ExprError {
                        column,
                        message: format!("unexpected character `{c}`"),
                    })
                }
            };
            out.push(Token { kind, column });
            i += 1;
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn end_column(&self) -> usize {
        self.tokens.last().map_or(1, |t| t.column + 1)
    }

    fn eat_op(&mut self, ops: &[char]) -> Option<char> {
        match self.peek() {
            Some(Token {
                kind: Tok::Op(c), ..
            }) if ops.contains(c) => {
                let c = *c;
                self.pos += 1;
                Some(c)
            }
            _ => None,
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        while let Some(op) = self.eat_op(&['+', '-']) {
            let rhs = self.term()?;
            lhs = if op == '+' {
                Expr::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.eat_op(&['*', '/']) {
            let rhs = self.unary()?;
            lhs = if op == '*' {
                Expr::Mul(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Div(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.eat_op(&['-']).is_some() {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat_op(&['+']).is_some() {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if self.eat_op(&['^']).is_some() {
            let exp = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        let Some(tok) = self.tokens.get(self.pos).cloned() else {
            return Err(ExprError {
                column: self.end_column(),
                message: "unexpected end of expression".into(),
            });
        };
        self.pos += 1;
        match tok.kind {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect_rparen(tok.column)?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if name == "pi" {
                    return Ok(Expr::Num(std::f64::consts::PI));
                }
                if let Some(f) = Func::from_name(&name) {
                    match self.peek() {
                        Some(Token {
                            kind: Tok::LParen, ..
                        }) => {
                            self.pos += 1;
                            let arg = self.expr()?;
                            self.expect_rparen(tok.column)?;
                            return Ok(Expr::Call(f, Box::new(arg)));
                        }
                        _ => {
                            return Err(ExprError {
                                column: tok.column,
                                message: format!("`{name}` must be followed by `(`"),
                            })
                        }
                    }
                }
                variable(&name).ok_or(ExprError {
                    column: tok.column,
                    message: format!("unknown identifier `{name}`"),
                })
            }
            other => Err(ExprError {
                column: tok.column,
                message: format!("unexpected `{other}`"),
            }),
        }
    }

    fn expect_rparen(&mut self, open_column: usize) -> Result<(), ExprError> {
        match self.peek() {
            Some(Token {
                kind: Tok::RParen, ..
            }) => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => Err(ExprError {
                column: t.column,
                message: format!(
                    "expected `)` closing column {open_column}, found `{}`",
                    t.kind
                ),
            }),
            None => Err(ExprError {
                column: self.end_column(),
                message: format!("unclosed `(` from column {open_column}"),
            }),
        }
    }
}

fn variable(name: &str) -> Option<Expr> {
    let (head, digits) = name.split_at(1);
    let k: usize = digits.parse().ok()?;
    if k == 0 {
        return None;
    }
    match head {
        "x" => Some(Expr::X(k - 1)),
        "y" => Some(Expr::Y(k - 1)),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(s: &str, x: &[f64], y: &[f64]) -> f64 {
        Expr::parse(s).unwrap().eval(x, y)
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(ev("1 + 2 * 3", &[], &[]), 7.0);
        assert!((ev("2 ^ 3 ^ 2", &[], &[]) - 512.0).abs() < 1e-12);
        assert_eq!(ev("-2 ^ 2", &[], &[]), -4.0);
        assert_eq!(ev("8 / 2 / 2", &[], &[]), 2.0);
        assert_eq!(ev("(1 - 3) * x1", &[2.0], &[]), -4.0);
        assert_eq!(ev("2.5e-1 * 4", &[], &[]), 1.0);
    }

    #[test]
    fn functions_and_variables() {
        let v = ev(
            "sqrt(y1^2 + y2^2) + sin(x1) - ln(exp(x2))",
            &[0.3, 0.7],
            &[3.0, 4.0],
        );
        assert!((v - (5.0 + 0.3f64.sin() - 0.7)).abs() < 1e-14);
        assert!((ev("x1^0.5", &[4.0], &[]) - 2.0).abs() < 1e-15);
        assert!((ev("x1^x2", &[2.0, 3.0], &[]) - 8.0).abs() < 1e-13);
        assert!((ev("cos(pi)", &[], &[]) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn arity_tracks_highest_index() {
        let e = Expr::parse("x3 * y2 + x1").unwrap();
        assert_eq!(e.arity(), (3, 2));
        assert!(e.uses_fiber());
        assert!(!Expr::parse("x1 + 1").unwrap().uses_fiber());
    }

    #[test]
    fn errors_carry_columns() {
        let e = Expr::parse("1 + * 2").unwrap_err();
        assert_eq!(e.column, 5);
        assert!(Expr::parse("z1").is_err());
        assert!(Expr::parse("x0").is_err());
        assert!(Expr::parse("sin x1").is_err());
        assert!(Expr::parse("(x1 + 2").is_err());
        assert!(Expr::parse("x1 2").is_err());
        assert!(Expr::parse("").is_err());
        assert!(Expr::parse("3 $ 4").is_err());
    }

    #[test]
    fn display_round_trips() {
        let e = Expr::parse("-x1^2 / (y1 + 3) * sqrt(x2)").unwrap();
        let again = Expr::parse(&e.to_string()).unwrap();
        let (x, y) = ([0.4, 2.0], [1.5]);
        assert_eq!(e.eval(&x, &y), again.eval(&x, &y));
    }
}
