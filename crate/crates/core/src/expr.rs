//! A small arithmetic expression language for user-supplied potentials.
//!
//! Grammar, lowest to highest precedence:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?
//! primary := number | 'x' | 'pi' | 'e' | func '(' expr ')' | '(' expr ')'
//! ```
//!
//! `^` binds tighter than unary minus and is right-associative, so `-2^2`
//! is `-4` and `2^3^2` is `512`. Implicit multiplication is rejected.
//! Evaluation never returns NaN or infinity: every pole or domain violation
//! is reported as an [`ExprError::Eval`].

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("evaluation error at x = {x}: {message}")]
    Eval { x: f64, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constant {
    Pi,
    E,
}

impl Constant {
    fn value(self) -> f64 {
        match self {
            Constant::Pi => std::f64::consts::PI,
            Constant::E => std::f64::consts::E,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Function {
    Sin,
    Cos,
    Tan,
    Cot,
    Sqrt,
    Exp,
    Ln,
    Abs,
}

impl Function {
    pub const ALL: [Function; 8] = [
        Function::Sin,
        Function::Cos,
        Function::Tan,
        Function::Cot,
        Function::Sqrt,
        Function::Exp,
        Function::Ln,
        Function::Abs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Function::Sin => "sin",
            Function::Cos => "cos",
            Function::Tan => "tan",
            Function::Cot => "cot",
            Function::Sqrt => "sqrt",
            Function::Exp => "exp",
            Function::Ln => "ln",
            Function::Abs => "abs",
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Call(Function),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinaryOp {
    fn symbol(self) -> char {
        match self {
            BinaryOp::Add => '+',
            BinaryOp::Sub => '-',
            BinaryOp::Mul => '*',
            BinaryOp::Div => '/',
            BinaryOp::Pow => '^',
        }
    }
}

/// Parsed expression tree in the single variable `x`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Number(f64),
    Variable,
    Constant(Constant),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn eval(&self, x: f64) -> Result<f64, ExprError> {
        let fail = |message: &str| ExprError::Eval {
            x,
            message: message.to_string(),
        };
        let value = match self {
            Expr::Number(v) => *v,
            Expr::Variable => x,
            Expr::Constant(c) => c.value(),
            Expr::Unary(UnaryOp::Neg, child) => -child.eval(x)?,
            Expr::Unary(UnaryOp::Call(func), child) => {
                let v = child.eval(x)?;
                match func {
                    Function::Sin => v.sin(),
                    Function::Cos => v.cos(),
                    Function::Tan => {
                        let c = v.cos();
                        if near_zero_trig(c, v) {
                            return Err(fail("tan at an odd multiple of pi/2"));
                        }
                        v.sin() / c
                    }
                    Function::Cot => {
                        let s = v.sin();
                        if near_zero_trig(s, v) {
                            return Err(fail("cot at a multiple of pi"));
                        }
                        v.cos() / s
                    }
                    Function::Sqrt => {
                        if v < 0.0 {
                            return Err(fail("sqrt of a negative number"));
                        }
                        v.sqrt()
                    }
                    Function::Exp => v.exp(),
                    Function::Ln => {
                        if v <= 0.0 {
                            return Err(fail("ln of a non-positive number"));
                        }
                        v.ln()
                    }
                    Function::Abs => v.abs(),
                }
            }
            Expr::Binary(op, lhs, rhs) => {
                let l = lhs.eval(x)?;
                let r = rhs.eval(x)?;
                match op {
                    BinaryOp::Add => l + r,
                    BinaryOp::Sub => l - r,
                    BinaryOp::Mul => l * r,
                    BinaryOp::Div => {
                        if r == 0.0 {
                            return Err(fail("division by zero"));
                        }
                        l / r
                    }
                    BinaryOp::Pow => pow(l, r),
                }
            }
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(fail("non-finite result"))
        }
    }
}

// Integer exponents go through powi so that `x^2` is exact for negative x.
fn pow(base: f64, exponent: f64) -> f64 {
    if exponent.fract() == 0.0 && exponent.abs() <= i32::MAX as f64 {
        base.powi(exponent as i32)
    } else {
        base.powf(exponent)
    }
}

fn near_zero_trig(value: f64, arg: f64) -> bool {
    value.abs() <= 4.0 * f64::EPSILON * arg.abs().max(1.0)
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Number(v) => write!(f, "{v}"),
            Expr::Variable => write!(f, "x"),
            Expr::Constant(Constant::Pi) => write!(f, "pi"),
            Expr::Constant(Constant::E) => write!(f, "e"),
            Expr::Unary(UnaryOp::Neg, child) => write!(f, "(-{child})"),
            Expr::Unary(UnaryOp::Call(func), child) => write!(f, "{}({child})", func.name()),
            Expr::Binary(op, l, r) => write!(f, "({l} {} {r})", op.symbol()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Number(v) => format!("number {v}"),
            Token::Ident(name) => format!("identifier `{name}`"),
            Token::Plus => "`+`".into(),
            Token::Minus => "`-`".into(),
            Token::Star => "`*`".into(),
            Token::Slash => "`/`".into(),
            Token::Caret => "`^`".into(),
            Token::LParen => "`(`".into(),
            Token::RParen => "`)`".into(),
        }
    }
}

fn tokenize(source: &str) -> Result<Vec<(Token, usize)>, ExprError> {
    let bytes = source.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let token = match c {
            b'+' => Token::Plus,
            b'-' => Token::Minus,
            b'*' => Token::Star,
            b'/' => Token::Slash,
            b'^' => Token::Caret,
            b'(' => Token::LParen,
            b')' => Token::RParen,
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                // exponent part only when followed by digits, so `2e` stays `2` `e`
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
                let text = &source[start..i];
                let value = text.parse::<f64>().map_err(|_| ExprError::Syntax {
                    offset: start,
                    message: format!("malformed number `{text}`"),
                })?;
                tokens.push((Token::Number(value), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                tokens.push((Token::Ident(source[start..i].to_string()), start));
                continue;
            }
            _ => {
                let ch = source[start..].chars().next().unwrap_or('?');
                return Err(ExprError::Syntax {
                    offset: start,
                    message: format!("unexpected character `{ch}`"),
                });
            }
        };
        tokens.push((token, start));
        i += 1;
    }
    Ok(tokens)
}

struct Parser<'a> {
    tokens: Vec<(Token, usize)>,
    pos: usize,
    source: &'a str,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|(_, o)| *o)
            .unwrap_or(self.source.len())
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t
    }

    fn error(&self, message: impl Into<String>) -> ExprError {
        ExprError::Syntax {
            offset: self.offset(),
            message: message.into(),
        }
    }

    fn expect(&mut self, want: Token) -> Result<(), ExprError> {
        match self.peek() {
            Some(t) if *t == want => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => Err(self.error(format!("expected {}, found {}", want.describe(), t.describe()))),
            None => Err(self.error(format!("expected {}, found end of input", want.describe()))),
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Token::Plus) => BinaryOp::Add,
                Some(Token::Minus) => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(Token::Star) => BinaryOp::Mul,
                Some(Token::Slash) => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.peek() == Some(&Token::Minus) {
            self.pos += 1;
            let child = self.unary()?;
            return Ok(Expr::Unary(UnaryOp::Neg, Box::new(child)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.primary()?;
        if self.peek() == Some(&Token::Caret) {
            self.pos += 1;
            let exponent = self.unary()?;
            return Ok(Expr::Binary(BinaryOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        let offset = self.offset();
        match self.bump() {
            Some(Token::Number(v)) => Ok(Expr::Number(v)),
            Some(Token::LParen) => {
                let inner = self.expr()?;
                self.expect(Token::RParen)?;
                Ok(inner)
            }
            Some(Token::Ident(name)) => match name.as_str() {
                "x" => Ok(Expr::Variable),
                "pi" => Ok(Expr::Constant(Constant::Pi)),
                "e" => Ok(Expr::Constant(Constant::E)),
                _ => {
                    let func = Function::from_name(&name)
                        .ok_or(ExprError::UnknownIdentifier { name, offset })?;
                    self.expect(Token::LParen)?;
                    let arg = self.expr()?;
                    self.expect(Token::RParen)?;
                    Ok(Expr::Unary(UnaryOp::Call(func), Box::new(arg)))
                }
            },
            Some(t) => {
                self.pos -= 1;
                Err(self.error(format!("unexpected {}", t.describe())))
            }
            None => Err(self.error("unexpected end of input")),
        }
    }
}

/// Parses `source` into an expression tree.
pub fn parse(source: &str) -> Result<Expr, ExprError> {
    let tokens = tokenize(source)?;
    if tokens.is_empty() {
        return Err(ExprError::Syntax {
            offset: 0,
            message: "empty expression".into(),
        });
    }
    let mut parser = Parser {
        tokens,
        pos: 0,
        source,
    };
    let ast = parser.expr()?;
    if let Some(t) = parser.peek() {
        let message = format!("unexpected {} after complete expression", t.describe());
        return Err(parser.error(message));
    }
    Ok(ast)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn eval_str(s: &str, x: f64) -> f64 {
        parse(s).unwrap().eval(x).unwrap()
    }

    #[test]
    fn half_x_squared() {
        assert_eq!(eval_str("0.5*x^2", 2.0), 2.0);
    }

    #[test]
    fn cot_squared_at_quarter() {
        let v = eval_str("cot(pi*x)^2", 0.25);
        assert!((v - 1.0).abs() < 1e-15, "{v}");
    }

    #[test]
    fn power_is_right_associative() {
        assert_eq!(eval_str("2^3^2", 0.0), 512.0);
    }

    #[test]
    fn power_binds_tighter_than_negation() {
        assert_eq!(eval_str("-2^2", 0.0), -4.0);
        assert_eq!(eval_str("2^-1", 0.0), 0.5);
        assert_eq!(eval_str("(-2)^2", 0.0), 4.0);
    }

    #[test]
    fn negative_base_integer_power_is_exact() {
        assert_eq!(eval_str("x^2", -3.0), 9.0);
        assert_eq!(eval_str("x^3", -2.0), -8.0);
    }

    #[test]
    fn functions_and_constants() {
        assert_eq!(eval_str("abs(x)", -3.0), 3.0);
        assert_eq!(eval_str("sqrt(x)", 4.0), 2.0);
        assert_eq!(eval_str("ln(e)", 0.0), 1.0);
        assert_eq!(eval_str("exp(0) + cos(0) - sin(0)", 0.0), 2.0);
        assert!((eval_str("tan(pi/4)", 0.0) - 1.0).abs() < 1e-15);
        assert_eq!(eval_str("1e-3 * 2E2", 0.0), 0.2);
    }

    #[test]
    fn whitespace_is_ignored() {
        assert_eq!(eval_str("  1 +\t2 * x ", 3.0), 7.0);
    }

    #[test]
    fn eval_errors() {
        let pole = parse("1/x").unwrap();
        assert!(matches!(pole.eval(0.0), Err(ExprError::Eval { .. })));
        assert!(parse("sqrt(x)").unwrap().eval(-1.0).is_err());
        assert!(parse("ln(x)").unwrap().eval(0.0).is_err());
        assert!(parse("cot(pi*x)").unwrap().eval(1.0).is_err());
        assert!(parse("cot(x)").unwrap().eval(0.0).is_err());
        assert!(parse("tan(pi/2)").unwrap().eval(0.0).is_err());
        assert!(parse("exp(x)").unwrap().eval(1000.0).is_err());
        assert!(parse("x^0.5").unwrap().eval(-1.0).is_err());
    }

    #[test]
    fn implicit_multiplication_is_rejected() {
        match parse("2x") {
            Err(ExprError::Syntax { offset, .. }) => assert_eq!(offset, 1),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("2 pi"), Err(ExprError::Syntax { .. })));
        assert!(matches!(parse("(x)(x)"), Err(ExprError::Syntax { .. })));
    }

    #[test]
    fn unknown_identifiers() {
        match parse("1 + foo(x)") {
            Err(ExprError::UnknownIdentifier { name, offset }) => {
                assert_eq!(name, "foo");
                assert_eq!(offset, 4);
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("y"), Err(ExprError::UnknownIdentifier { .. })));
    }

    #[test]
    fn syntax_errors() {
        for bad in ["", "   ", "1+", "(1", "1)", "*2", "sin x", "sin()", "1..2", "3 $ 4"] {
            assert!(matches!(parse(bad), Err(ExprError::Syntax { .. })), "{bad:?}");
        }
        match parse("1+") {
            Err(ExprError::Syntax { offset, .. }) => assert_eq!(offset, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn display_round_trips() {
        let src = "-2^x*cot(pi*x)/(1+abs(x))-e";
        let ast = parse(src).unwrap();
        let again = parse(&ast.to_string()).unwrap();
        for x in [0.1, 0.3, 0.7] {
            assert_eq!(ast.eval(x).unwrap(), again.eval(x).unwrap());
        }
    }

    proptest! {
        #[test]
        fn add_mul_precedence(a in -1e3f64..1e3, b in -1e3f64..1e3, c in -1e3f64..1e3) {
            let src = format!("{a:?}+{b:?}*{c:?}").replace("+-", "+ -").replace("*-", "* -");
            let v = parse(&src).unwrap().eval(0.0).unwrap();
            prop_assert_eq!(v, a + b * c);
        }

        #[test]
        fn evaluation_is_deterministic(x in -10f64..10.0) {
            let ast = parse("sin(x)^2 + 0.5*x^2 - exp(-abs(x))").unwrap();
            prop_assert_eq!(ast.eval(x).unwrap().to_bits(), ast.eval(x).unwrap().to_bits());
        }

        #[test]
        fn syntax_error_offsets_in_range(s in "[-+*/^()x0-9. a-z]{0,16}") {
            if let Err(ExprError::Syntax { offset, .. }) = parse(&s) {
                prop_assert!(offset <= s.len());
            }
        }
    }
}
