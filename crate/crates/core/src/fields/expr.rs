//! Scalar expressions over chart variables `x1..xn`.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := ('-' | '+') unary | power
//! power  := atom ('^' exponent)?
//! exponent := ('-' | '+') exponent | power      (right-associative)
//! atom   := number | xN | func '(' expr ')' | '(' expr ')'
//! func   := exp | log | sqrt | cosh | sinh | tanh | coth
//! ```

use std::fmt;

use crate::error::{Error, Result};
use crate::special::coth;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sqrt,
    Cosh,
    Sinh,
    Tanh,
    Coth,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "cosh" => Func::Cosh,
            "sinh" => Func::Sinh,
            "tanh" => Func::Tanh,
            "coth" => Func::Coth,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Cosh => "cosh",
            Func::Sinh => "sinh",
            Func::Tanh => "tanh",
            Func::Coth => "coth",
        }
    }
}

/// Abstract syntax tree. Variables are stored zero-based.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    fn domain(&self, reason: &str) -> Error {
        Error::Domain { expr: self.to_string(), reason: reason.to_string() }
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let v = match self {
            Expr::Num(v) => *v,
            Expr::Var(i) => x[*i],
            Expr::Neg(a) => -a.eval(x)?,
            Expr::Bin(op, a, b) => {
                let l = a.eval(x)?;
                let r = b.eval(x)?;
                match op {
                    BinOp::Add => l + r,
                    BinOp::Sub => l - r,
                    BinOp::Mul => l * r,
                    BinOp::Div => {
                        if r == 0.0 {
                            return Err(self.domain("division by zero"));
                        }
                        l / r
                    }
                    BinOp::Pow => power(l, r).ok_or_else(|| self.domain("invalid power"))?,
                }
            }
            Expr::Call(f, a) => {
                let z = a.eval(x)?;
                match f {
                    Func::Exp => z.exp(),
                    Func::Log => {
                        if !(z > 0.0) {
                            return Err(self.domain("log of non-positive argument"));
                        }
                        z.ln()
                    }
                    Func::Sqrt => {
                        if z < 0.0 {
                            return Err(self.domain("sqrt of negative argument"));
                        }
                        z.sqrt()
                    }
                    Func::Cosh => z.cosh(),
                    Func::Sinh => z.sinh(),
                    Func::Tanh => z.tanh(),
                    Func::Coth => coth(z).ok_or_else(|| self.domain("coth pole at 0"))?,
                }
            }
        };
        if !v.is_finite() {
            return Err(self.domain("non-finite result"));
        }
        Ok(v)
    }
}

fn power(base: f64, exponent: f64) -> Option<f64> {
    if exponent.fract() == 0.0 && exponent.abs() <= i32::MAX as f64 {
        if base == 0.0 && exponent < 0.0 {
            return None;
        }
        return Some(base.powi(exponent as i32));
    }
    if base < 0.0 || (base == 0.0 && exponent < 0.0) {
        return None;
    }
    Some(base.powf(exponent))
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Var(i) => write!(f, "x{}", i + 1),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Bin(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

/// A parsed expression bound to a chart dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarExpr {
    root: Expr,
    dim: usize,
    source: String,
}

impl ScalarExpr {
    pub fn parse(text: &str, dim: usize) -> Result<Self> {
        let mut p = Parser { src: text, bytes: text.as_bytes(), pos: 0, dim };
        let root = p.expr()?;
        p.skip_ws();
        if p.pos < p.bytes.len() {
            return Err(Error::Syntax { offset: p.pos, message: format!("unexpected `{}`", p.peek_char()) });
        }
        Ok(ScalarExpr { root, dim, source: text.to_string() })
    }

    pub fn constant(value: f64, dim: usize) -> Self {
        ScalarExpr { root: Expr::Num(value), dim, source: format!("{value:?}") }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn root(&self) -> &Expr {
        &self.root
    }

    /// The text the expression was parsed from.
    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, actual: x.len() });
        }
        self.root.eval(x)
    }
}

impl fmt::Display for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    dim: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn peek_char(&self) -> char {
        self.src[self.pos..].chars().next().unwrap_or(' ')
    }

    fn error(&self, message: &str) -> Error {
        Error::Syntax { offset: self.pos, message: message.to_string() }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else if self.pos >= self.bytes.len() {
            Err(self.error(&format!("expected `{}`, found end of input", c as char)))
        } else {
            Err(self.error(&format!("expected `{}`, found `{}`", c as char, self.peek_char())))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => BinOp::Add,
                Some(b'-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => BinOp::Mul,
                Some(b'/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let exponent = self.exponent()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.exponent()?)))
            }
            Some(b'+') => {
                self.pos += 1;
                self.exponent()
            }
            _ => self.power(),
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.identifier(),
            Some(_) => Err(self.error(&format!("unexpected `{}`", self.peek_char()))),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        let b = self.bytes;
        let mut end = start;
        while end < b.len() && b[end].is_ascii_digit() {
            end += 1;
        }
        if end < b.len() && b[end] == b'.' {
            end += 1;
            while end < b.len() && b[end].is_ascii_digit() {
                end += 1;
            }
        }
        if end < b.len() && (b[end] == b'e' || b[end] == b'E') {
            let mut e = end + 1;
            if e < b.len() && (b[e] == b'+' || b[e] == b'-') {
                e += 1;
            }
            if e < b.len() && b[e].is_ascii_digit() {
                while e < b.len() && b[e].is_ascii_digit() {
                    e += 1;
                }
                end = e;
            }
        }
        let text = &self.src[start..end];
        let v: f64 = text.parse().map_err(|_| self.error(&format!("invalid number `{text}`")))?;
        self.pos = end;
        Ok(Expr::Num(v))
    }

    fn identifier(&mut self) -> Result<Expr> {
        let start = self.pos;
        let b = self.bytes;
        let mut end = start;
        while end < b.len() && (b[end].is_ascii_alphanumeric() || b[end] == b'_') {
            end += 1;
        }
        let name = &self.src[start..end];
        self.pos = end;
        if self.peek() == Some(b'(') {
            let func = Func::from_name(name)
                .ok_or_else(|| Error::UnknownFunction { name: name.to_string(), offset: start })?;
            self.pos += 1;
            let arg = self.expr()?;
            self.expect(b')')?;
            return Ok(Expr::Call(func, Box::new(arg)));
        }
        if let Some(index) = name.strip_prefix('x').and_then(|d| d.parse::<usize>().ok()) {
            if !name[1..].starts_with('0') && index >= 1 && index <= self.dim {
                return Ok(Expr::Var(index - 1));
            }
        }
        if Func::from_name(name).is_some() {
            return Err(Error::Syntax { offset: self.pos, message: format!("`{name}` must be called") });
        }
        Err(Error::UnknownVariable { name: name.to_string(), offset: start })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(text: &str, x: &[f64]) -> Result<f64> {
        ScalarExpr::parse(text, x.len()).and_then(|e| e.eval(x))
    }

    #[test]
    fn parses_sample_expression() {
        let e = ScalarExpr::parse("x1*x2 + cosh(2*x1)", 2).unwrap();
        let v = e.eval(&[0.5, 3.0]).unwrap();
        assert!((v - (1.5 + 1.0f64.cosh())).abs() < 1e-15);
    }

    #[test]
    fn syntax_error_offset() {
        assert_eq!(
            ScalarExpr::parse("x1 +", 1).unwrap_err(),
            Error::Syntax { offset: 4, message: "unexpected end of input".into() }
        );
        assert!(matches!(ScalarExpr::parse("x1 x2", 2), Err(Error::Syntax { offset: 3, .. })));
        assert!(matches!(ScalarExpr::parse("(x1", 1), Err(Error::Syntax { offset: 3, .. })));
    }

    #[test]
    fn unknown_names() {
        assert!(matches!(ScalarExpr::parse("x3", 2), Err(Error::UnknownVariable { offset: 0, .. })));
        assert!(matches!(ScalarExpr::parse("1 + y", 2), Err(Error::UnknownVariable { offset: 4, .. })));
        assert!(matches!(ScalarExpr::parse("x0", 2), Err(Error::UnknownVariable { .. })));
        assert!(matches!(ScalarExpr::parse("sin(x1)", 1), Err(Error::UnknownFunction { offset: 0, .. })));
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(eval("-2^2", &[]).unwrap(), -4.0);
        assert_eq!(eval("2^3^2", &[]).unwrap(), 512.0);
        assert_eq!(eval("2^-1", &[]).unwrap(), 0.5);
        assert_eq!(eval("8/4/2", &[]).unwrap(), 1.0);
        assert_eq!(eval("1 - 2 - 3", &[]).unwrap(), -4.0);
        assert_eq!(eval("2*-3", &[]).unwrap(), -6.0);
        assert_eq!(eval("(-2)^3", &[]).unwrap(), -8.0);
        assert_eq!(eval("1.5e2 + .5", &[]).unwrap(), 150.5);
    }

    #[test]
    fn evaluation_examples() {
        assert_eq!(eval("x1^3", &[2.0]).unwrap(), 8.0);
        let v = eval("exp(x1)+exp(-x1)", &[0.5]).unwrap();
        assert!((v - 2.0 * 0.5f64.cosh()).abs() < 1e-15);
        assert!((v - 2.2552519304).abs() < 1e-10);
        // (e^2 + 1)/(e^2 - 1) evaluated independently
        let e2 = std::f64::consts::E * std::f64::consts::E;
        let v = eval("coth(1)", &[]).unwrap();
        assert!((v - (e2 + 1.0) / (e2 - 1.0)).abs() < 1e-15);
        assert!((v - 1.3130352854993312).abs() < 1e-15);
        assert!((eval("coth(-0.7)", &[]).unwrap() + 1.0 / 0.7f64.tanh()).abs() < 1e-14);
    }

    #[test]
    fn domain_errors_name_the_subexpression() {
        match eval("1 + log(x1)", &[0.0]) {
            Err(Error::Domain { expr, .. }) => assert_eq!(expr, "log(x1)"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(eval("1/(x1-1)", &[1.0]), Err(Error::Domain { .. })));
        assert!(matches!(eval("coth(x1)", &[0.0]), Err(Error::Domain { .. })));
        assert!(matches!(eval("sqrt(x1)", &[-1.0]), Err(Error::Domain { .. })));
        assert!(matches!(eval("x1^0.5", &[-1.0]), Err(Error::Domain { .. })));
        assert!(matches!(eval("exp(x1)", &[1000.0]), Err(Error::Domain { .. })));
    }

    #[test]
    fn printed_form_reparses_to_same_tree() {
        for text in ["x1*x2 + cosh(2*x1)", "-x1^2^-3", "1e-7 - (x2 / -x1)", "coth(x1 + 0.1)*sqrt(x2)"] {
            let e = ScalarExpr::parse(text, 2).unwrap();
            let again = ScalarExpr::parse(&e.to_string(), 2).unwrap();
            assert_eq!(e.root(), again.root(), "{text}");
        }
    }
}
