//! Arithmetic expressions in `x`, `y` and `t`.
//!
//! The grammar is small and fixed:
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := primary ('^' unary)?        exponent must be constant
//! primary := number | 'x' | 'y' | 't' | 'pi' | func '(' args ')' | '(' sum ')'
//! func    := sin | cos | tan | exp | log | sqrt | abs | atan2
//! ```
//!
//! Numeric parameters are substituted as literals by the caller before parsing;
//! there are no user-defined symbols. Evaluation reports a domain error instead
//! of returning a non-finite value.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at position {position}: expected {expected}, found {found}")]
    Syntax {
        position: usize,
        expected: String,
        found: String,
    },
    #[error("unknown identifier `{name}` at position {position}")]
    UnknownIdentifier { name: String, position: usize },
}

impl ParseError {
    pub fn position(&self) -> usize {
        match self {
            ParseError::Syntax { position, .. } | ParseError::UnknownIdentifier { position, .. } => *position,
        }
    }
}

/// Evaluation outside the domain of a sub-expression.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("domain error in `{expr}`: {message}")]
pub struct EvalError {
    pub expr: String,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X,
    Y,
    T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }
}

/// Parsed expression tree. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Pi,
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, f64),
    Call(Func, Box<Expr>),
    Atan2(Box<Expr>, Box<Expr>),
}

impl Expr {
    /// Evaluates with `x`, `y` bound to `point` and `t` bound to `t`.
    pub fn eval(&self, point: (f64, f64), t: f64) -> Result<f64, EvalError> {
        let v = match self {
            Expr::Num(v) => *v,
            Expr::Var(Var::X) => point.0,
            Expr::Var(Var::Y) => point.1,
            Expr::Var(Var::T) => t,
            Expr::Pi => std::f64::consts::PI,
            Expr::Neg(e) => -e.eval(point, t)?,
            Expr::Bin(op, l, r) => {
                let a = l.eval(point, t)?;
                let b = r.eval(point, t)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(self.domain("division by zero"));
                        }
                        a / b
                    }
                }
            }
            Expr::Pow(base, exp) => {
                let b = base.eval(point, t)?;
                if b < 0.0 && exp.fract() != 0.0 {
                    return Err(self.domain("negative base with non-integer exponent"));
                }
                if b == 0.0 && *exp < 0.0 {
                    return Err(self.domain("zero raised to a negative power"));
                }
                if exp.fract() == 0.0 && exp.abs() <= i32::MAX as f64 {
                    b.powi(*exp as i32)
                } else {
                    b.powf(*exp)
                }
            }
            Expr::Call(f, arg) => {
                let a = arg.eval(point, t)?;
                match f {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Tan => a.tan(),
                    Func::Exp => a.exp(),
                    Func::Log => {
                        if a <= 0.0 {
                            return Err(self.domain("log of a non-positive value"));
                        }
                        a.ln()
                    }
                    Func::Sqrt => {
                        if a < 0.0 {
                            return Err(self.domain("square root of a negative value"));
                        }
                        a.sqrt()
                    }
                    Func::Abs => a.abs(),
                }
            }
            Expr::Atan2(y, x) => {
                let yv = y.eval(point, t)?;
                let xv = x.eval(point, t)?;
                yv.atan2(xv)
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(self.domain("non-finite result"))
        }
    }

    fn domain(&self, message: &str) -> EvalError {
        EvalError {
            expr: self.to_string(),
            message: message.to_string(),
        }
    }

    pub fn uses(&self, var: Var) -> bool {
        match self {
            Expr::Var(v) => *v == var,
            Expr::Num(_) | Expr::Pi => false,
            Expr::Neg(e) | Expr::Pow(e, _) | Expr::Call(_, e) => e.uses(var),
            Expr::Bin(_, l, r) | Expr::Atan2(l, r) => l.uses(var) || r.uses(var),
        }
    }

    fn is_constant(&self) -> bool {
        !(self.uses(Var::X) || self.uses(Var::Y) || self.uses(Var::T))
    }
}

fn fmt_num(v: f64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if v < 0.0 {
        write!(f, "(-{:?})", -v)
    } else {
        write!(f, "{v:?}")
    }
}

/// Fully parenthesized form; re-parses to an expression that evaluates identically.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => fmt_num(*v, f),
            Expr::Var(Var::X) => f.write_str("x"),
            Expr::Var(Var::Y) => f.write_str("y"),
            Expr::Var(Var::T) => f.write_str("t"),
            Expr::Pi => f.write_str("pi"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Bin(op, l, r) => write!(f, "({l} {} {r})", op.symbol()),
            Expr::Pow(b, e) => {
                write!(f, "({b}^")?;
                fmt_num(*e, f)?;
                f.write_str(")")
            }
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
            Expr::Atan2(y, x) => write!(f, "atan2({y}, {x})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(v) => write!(f, "number {v}"),
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Op(c) => write!(f, "`{c}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text = &src[start..i];
            let v: f64 = text.parse().map_err(|_| ParseError::Syntax {
                position: start,
                expected: "a number".into(),
                found: format!("`{text}`"),
            })?;
            out.push((Tok::Num(v), start));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), start));
        } else if "+-*/^(),".contains(c) {
            out.push((Tok::Op(c), i));
            i += 1;
        } else {
            // position is a byte offset; report the full character
            let ch = src[i..].chars().next().unwrap_or(c);
            return Err(ParseError::Syntax {
                position: i,
                expected: "an operator, number or identifier".into(),
                found: format!("`{ch}`"),
            });
        }
    }
    out.push((Tok::Eof, src.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn new(src: &str) -> Result<Self, ParseError> {
        Ok(Parser {
            toks: tokenize(src)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &str) -> ParseError {
        ParseError::Syntax {
            position: self.offset(),
            expected: expected.to_string(),
            found: self.peek().to_string(),
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if *self.peek() == Tok::Op(c) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&format!("`{c}`")))
        }
    }

    fn expect_eof(&self) -> Result<(), ParseError> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            Err(self.error("an operator or end of input"))
        }
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.peek() {
                Tok::Op('+') => BinOp::Add,
                Tok::Op('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.product()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Op('*') => BinOp::Mul,
                Tok::Op('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Tok::Op('-') => {
                self.bump();
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Tok::Op('+') => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if *self.peek() != Tok::Op('^') {
            return Ok(base);
        }
        self.bump();
        let at = self.offset();
        let exponent = self.unary()?;
        if !exponent.is_constant() {
            return Err(ParseError::Syntax {
                position: at,
                expected: "a numeric exponent".into(),
                found: format!("`{exponent}`"),
            });
        }
        let value = exponent.eval((0.0, 0.0), 0.0).map_err(|e| ParseError::Syntax {
            position: at,
            expected: "a finite numeric exponent".into(),
            found: e.to_string(),
        })?;
        Ok(Expr::Pow(Box::new(base), value))
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let at = self.offset();
        let tok = self.peek().clone();
        if !matches!(tok, Tok::Num(_) | Tok::Ident(_) | Tok::Op('(')) {
            return Err(self.error("a number, variable, function or `(`"));
        }
        self.bump();
        match tok {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::Op('(') => {
                let e = self.sum()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => match name.as_str() {
                "x" => Ok(Expr::Var(Var::X)),
                "y" => Ok(Expr::Var(Var::Y)),
                "t" => Ok(Expr::Var(Var::T)),
                "pi" => Ok(Expr::Pi),
                "atan2" => {
                    self.expect('(')?;
                    let y = self.sum()?;
                    self.expect(',')?;
                    let x = self.sum()?;
                    self.expect(')')?;
                    Ok(Expr::Atan2(Box::new(y), Box::new(x)))
                }
                other => match Func::from_name(other) {
                    Some(f) => {
                        self.expect('(')?;
                        let arg = self.sum()?;
                        self.expect(')')?;
                        Ok(Expr::Call(f, Box::new(arg)))
                    }
                    None => Err(ParseError::UnknownIdentifier { name, position: at }),
                },
            },
            _ => unreachable!("filtered above"),
        }
    }
}

/// Parses a single expression.
pub fn parse_expr(source: &str) -> Result<Expr, ParseError> {
    let mut p = Parser::new(source)?;
    let e = p.sum()?;
    p.expect_eof()?;
    Ok(e)
}

/// Parses a component pair written `(e1, e2)` or `e1, e2`.
pub fn parse_pair(source: &str) -> Result<(Expr, Expr), ParseError> {
    let strict = (|| {
        let mut p = Parser::new(source)?;
        p.expect('(')?;
        let a = p.sum()?;
        p.expect(',')?;
        let b = p.sum()?;
        p.expect(')')?;
        p.expect_eof()?;
        Ok((a, b))
    })();
    if strict.is_ok() {
        return strict;
    }
    let bare = (|| {
        let mut p = Parser::new(source)?;
        let a = p.sum()?;
        p.expect(',')?;
        let b = p.sum()?;
        p.expect_eof()?;
        Ok((a, b))
    })();
    match bare {
        Ok(v) => Ok(v),
        Err(ParseError::UnknownIdentifier { .. }) => bare,
        Err(_) => strict,
    }
}

/// Free-function form of [`Expr::eval`].
pub fn eval_expr(e: &Expr, point: (f64, f64), t: f64) -> Result<f64, EvalError> {
    e.eval(point, t)
}
