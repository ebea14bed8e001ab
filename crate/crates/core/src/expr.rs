//! Small arithmetic expression language over the parameter coordinates `x1`, `x2`.
//!
//! Grammar (lowest to highest precedence):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?
//! primary := number | 'x1' | 'x2' | 'pi' | 'e' | func '(' expr ')' | '(' expr ')'
//! func    := sin | cos | tan | exp | log | sqrt | abs
//! ```
//!
//! `+ - * /` associate to the left, `^` to the right, and unary minus binds
//! looser than `^` (so `-2^2 = -4`).

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    X1,
    X2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
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
    pub const ALL: [Func; 7] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Exp,
        Func::Log,
        Func::Sqrt,
        Func::Abs,
    ];

    pub fn name(self) -> &'static str {
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

    fn from_name(s: &str) -> Option<Func> {
        Func::ALL.iter().copied().find(|f| f.name() == s)
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Tan => v.tan(),
            Func::Exp => v.exp(),
            Func::Log => v.ln(),
            Func::Sqrt => v.sqrt(),
            Func::Abs => v.abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
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

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Pi,
    E,
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn parse(text: &str) -> Result<Expr> {
        let tokens = lex(text)?;
        let mut p = Parser {
            tokens,
            pos: 0,
            len: text.len(),
        };
        let e = p.expr()?;
        if let Some(t) = p.peek() {
            return Err(Error::Syntax {
                offset: t.offset,
                message: format!("unexpected {}", t.kind.describe()),
            });
        }
        Ok(e)
    }

    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    pub fn x1() -> Expr {
        Expr::Var(Var::X1)
    }

    pub fn x2() -> Expr {
        Expr::Var(Var::X2)
    }

    pub fn var(v: Var) -> Expr {
        Expr::Var(v)
    }

    /// Evaluates, reporting non-finite results as domain errors.
    pub fn eval(&self, x1: f64, x2: f64) -> Result<f64> {
        let v = self.eval_raw(x1, x2);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Domain(format!(
                "`{}` is not finite at ({x1}, {x2})",
                self
            )))
        }
    }

    /// Evaluates without domain checks (IEEE semantics).
    pub fn eval_raw(&self, x1: f64, x2: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var(Var::X1) => x1,
            Expr::Var(Var::X2) => x2,
            Expr::Pi => std::f64::consts::PI,
            Expr::E => std::f64::consts::E,
            Expr::Neg(a) => -a.eval_raw(x1, x2),
            Expr::Bin(op, a, b) => {
                let a = a.eval_raw(x1, x2);
                let b = b.eval_raw(x1, x2);
                apply_bin(*op, a, b)
            }
            Expr::Call(f, a) => f.apply(a.eval_raw(x1, x2)),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Num(v) if *v == 0.0)
    }

    fn as_num(&self) -> Option<f64> {
        match self {
            Expr::Num(v) => Some(*v),
            _ => None,
        }
    }

    /// Symbolic partial derivative with light algebraic simplification.
    pub fn derivative(&self, v: Var) -> Expr {
        match self {
            Expr::Num(_) | Expr::Pi | Expr::E => Expr::Num(0.0),
            Expr::Var(w) => Expr::Num(if *w == v { 1.0 } else { 0.0 }),
            Expr::Neg(a) => neg(a.derivative(v)),
            Expr::Bin(op, a, b) => {
                let da = a.derivative(v);
                let db = b.derivative(v);
                match op {
                    BinOp::Add => add(da, db),
                    BinOp::Sub => sub(da, db),
                    BinOp::Mul => add(mul(da, (**b).clone()), mul((**a).clone(), db)),
                    BinOp::Div => {
                        // (a/b)' = a'/b - a b' / b^2
                        let t1 = div(da, (**b).clone());
                        let t2 = div(mul((**a).clone(), db), pow((**b).clone(), Expr::Num(2.0)));
                        sub(t1, t2)
                    }
                    BinOp::Pow => {
                        if let Some(n) = b.as_num() {
                            mul(
                                mul(Expr::Num(n), pow((**a).clone(), Expr::Num(n - 1.0))),
                                da,
                            )
                        } else {
                            // (a^b)' = a^b (b' ln a + b a' / a)
                            let t1 = mul(db, call(Func::Log, (**a).clone()));
                            let t2 = div(mul((**b).clone(), da), (**a).clone());
                            mul(self.clone(), add(t1, t2))
                        }
                    }
                }
            }
            Expr::Call(f, a) => {
                let da = a.derivative(v);
                if da.is_zero() {
                    return Expr::Num(0.0);
                }
                let a = (**a).clone();
                let outer = match f {
                    Func::Sin => call(Func::Cos, a),
                    Func::Cos => neg(call(Func::Sin, a)),
                    Func::Tan => div(Expr::Num(1.0), pow(call(Func::Cos, a), Expr::Num(2.0))),
                    Func::Exp => call(Func::Exp, a),
                    Func::Log => div(Expr::Num(1.0), a),
                    Func::Sqrt => div(Expr::Num(0.5), call(Func::Sqrt, a)),
                    Func::Abs => div(a.clone(), call(Func::Abs, a)),
                };
                mul(outer, da)
            }
        }
    }

    pub fn compile(&self) -> Program {
        let mut code = Vec::new();
        let mut depth = 0usize;
        let mut max_depth = 0usize;
        emit(self, &mut code, &mut depth, &mut max_depth);
        Program { code, max_depth }
    }
}

fn apply_bin(op: BinOp, a: f64, b: f64) -> f64 {
    match op {
        BinOp::Add => a + b,
        BinOp::Sub => a - b,
        BinOp::Mul => a * b,
        BinOp::Div => a / b,
        BinOp::Pow => {
            if b == 2.0 {
                a * a
            } else if b.fract() == 0.0 && b.abs() <= 16.0 {
                a.powi(b as i32)
            } else {
                a.powf(b)
            }
        }
    }
}

pub fn add(a: Expr, b: Expr) -> Expr {
    match (a.as_num(), b.as_num()) {
        (Some(x), Some(y)) => Expr::Num(x + y),
        (Some(x), _) if x == 0.0 => b,
        (_, Some(y)) if y == 0.0 => a,
        _ => Expr::Bin(BinOp::Add, Box::new(a), Box::new(b)),
    }
}

pub fn sub(a: Expr, b: Expr) -> Expr {
    match (a.as_num(), b.as_num()) {
        (Some(x), Some(y)) => Expr::Num(x - y),
        (Some(x), _) if x == 0.0 => neg(b),
        (_, Some(y)) if y == 0.0 => a,
        _ => Expr::Bin(BinOp::Sub, Box::new(a), Box::new(b)),
    }
}

pub fn mul(a: Expr, b: Expr) -> Expr {
    match (a.as_num(), b.as_num()) {
        (Some(x), Some(y)) => Expr::Num(x * y),
        (Some(x), _) if x == 0.0 => Expr::Num(0.0),
        (_, Some(y)) if y == 0.0 => Expr::Num(0.0),
        (Some(x), _) if x == 1.0 => b,
        (_, Some(y)) if y == 1.0 => a,
        (Some(x), _) if x == -1.0 => neg(b),
        (_, Some(y)) if y == -1.0 => neg(a),
        _ => Expr::Bin(BinOp::Mul, Box::new(a), Box::new(b)),
    }
}

pub fn div(a: Expr, b: Expr) -> Expr {
    match (a.as_num(), b.as_num()) {
        (Some(x), _) if x == 0.0 => Expr::Num(0.0),
        (_, Some(y)) if y == 1.0 => a,
        (Some(x), Some(y)) => Expr::Num(x / y),
        _ => Expr::Bin(BinOp::Div, Box::new(a), Box::new(b)),
    }
}

pub fn pow(a: Expr, b: Expr) -> Expr {
    match (a.as_num(), b.as_num()) {
        (_, Some(y)) if y == 0.0 => Expr::Num(1.0),
        (_, Some(y)) if y == 1.0 => a,
        (Some(x), Some(y)) => Expr::Num(apply_bin(BinOp::Pow, x, y)),
        _ => Expr::Bin(BinOp::Pow, Box::new(a), Box::new(b)),
    }
}

pub fn neg(a: Expr) -> Expr {
    match a {
        Expr::Num(x) => Expr::Num(-x),
        Expr::Neg(inner) => *inner,
        other => Expr::Neg(Box::new(other)),
    }
}

pub fn call(f: Func, a: Expr) -> Expr {
    match a.as_num() {
        Some(x) => Expr::Num(f.apply(x)),
        None => Expr::Call(f, Box::new(a)),
    }
}

impl fmt::Display for Expr {
    /// Fully parenthesized form; re-parses to an identical tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => {
                if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) {
                    write!(f, "(-{:?})", -v)
                } else {
                    write!(f, "{:?}", v)
                }
            }
            Expr::Var(Var::X1) => write!(f, "x1"),
            Expr::Var(Var::X2) => write!(f, "x2"),
            Expr::Pi => write!(f, "pi"),
            Expr::E => write!(f, "e"),
            Expr::Neg(a) => write!(f, "(-{})", a),
            Expr::Bin(op, a, b) => write!(f, "({} {} {})", a, op.symbol(), b),
            Expr::Call(func, a) => write!(f, "{}({})", func.name(), a),
        }
    }
}

// ---------------------------------------------------------------------------
// Lexer / parser

#[derive(Debug, Clone, PartialEq)]
enum TokKind {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

impl TokKind {
    fn describe(&self) -> String {
        match self {
            TokKind::Num(v) => format!("number {v}"),
            TokKind::Ident(s) => format!("identifier `{s}`"),
            TokKind::Op(c) => format!("`{c}`"),
            TokKind::LParen => "`(`".to_string(),
            TokKind::RParen => "`)`".to_string(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokKind,
    offset: usize,
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || (c == b'.' && bytes.get(i + 1).is_some_and(|d| d.is_ascii_digit()))
        {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
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
            let s = &text[start..i];
            let v: f64 = s.parse().map_err(|_| Error::Syntax {
                offset: start,
                message: format!("malformed number `{s}`"),
            })?;
            out.push(Token {
                kind: TokKind::Num(v),
                offset: start,
            });
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Token {
                kind: TokKind::Ident(text[start..i].to_string()),
                offset: start,
            });
            continue;
        }
        let kind = match c {
            b'+' | b'-' | b'*' | b'/' | b'^' => TokKind::Op(c as char),
            b'(' => TokKind::LParen,
            b')' => TokKind::RParen,
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(Error::Syntax {
                    offset: start,
                    message: format!("unexpected character `{ch}`"),
                });
            }
        };
        out.push(Token {
            kind,
            offset: start,
        });
        i += 1;
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    len: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek_op(&self) -> Option<char> {
        match self.peek() {
            Some(Token {
                kind: TokKind::Op(c),
                ..
            }) => Some(*c),
            _ => None,
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(c @ ('+' | '-')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.term()?;
            let op = if c == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(c @ ('*' | '/')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.unary()?;
            let op = if c == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek_op() == Some('-') {
            self.pos += 1;
            let inner = self.unary()?;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if self.peek_op() == Some('^') {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn expect_rparen(&mut self) -> Result<()> {
        match self.peek() {
            Some(Token {
                kind: TokKind::RParen,
                ..
            }) => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => Err(Error::Syntax {
                offset: t.offset,
                message: format!("expected `)`, found {}", t.kind.describe()),
            }),
            None => Err(Error::Syntax {
                offset: self.len,
                message: "expected `)`, found end of input".into(),
            }),
        }
    }

    fn primary(&mut self) -> Result<Expr> {
        let Some(tok) = self.peek().cloned() else {
            return Err(Error::Syntax {
                offset: self.len,
                message: "unexpected end of input".into(),
            });
        };
        self.pos += 1;
        match tok.kind {
            TokKind::Num(v) => Ok(Expr::Num(v)),
            TokKind::LParen => {
                let e = self.expr()?;
                self.expect_rparen()?;
                Ok(e)
            }
            TokKind::Ident(name) => match name.as_str() {
                "x1" => Ok(Expr::Var(Var::X1)),
                "x2" => Ok(Expr::Var(Var::X2)),
                "pi" => Ok(Expr::Pi),
                "e" => Ok(Expr::E),
                other => {
                    let Some(func) = Func::from_name(other) else {
                        return Err(Error::UnknownIdentifier {
                            offset: tok.offset,
                            name: other.to_string(),
                        });
                    };
                    match self.peek() {
                        Some(Token {
                            kind: TokKind::LParen,
                            ..
                        }) => {
                            self.pos += 1;
                        }
                        Some(t) => {
                            return Err(Error::Syntax {
                                offset: t.offset,
                                message: format!("expected `(` after `{other}`"),
                            })
                        }
                        None => {
                            return Err(Error::Syntax {
                                offset: self.len,
                                message: format!("expected `(` after `{other}`"),
                            })
                        }
                    }
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    Ok(Expr::Call(func, Box::new(arg)))
                }
            },
            other => Err(Error::Syntax {
                offset: tok.offset,
                message: format!("unexpected {}", other.describe()),
            }),
        }
    }
}

// ---------------------------------------------------------------------------
// Stack-machine form for fast repeated evaluation

#[derive(Debug, Clone, Copy)]
enum Op {
    Const(f64),
    X1,
    X2,
    Neg,
    Bin(BinOp),
    Call(Func),
}

/// Compiled expression; evaluation is allocation-free for shallow trees.
#[derive(Debug, Clone)]
pub struct Program {
    code: Vec<Op>,
    max_depth: usize,
}

fn emit(e: &Expr, code: &mut Vec<Op>, depth: &mut usize, max_depth: &mut usize) {
    let mut push = |code: &mut Vec<Op>, op: Op, depth: &mut usize| {
        code.push(op);
        *depth += 1;
        *max_depth = (*max_depth).max(*depth);
    };
    match e {
        Expr::Num(v) => push(code, Op::Const(*v), depth),
        Expr::Pi => push(code, Op::Const(std::f64::consts::PI), depth),
        Expr::E => push(code, Op::Const(std::f64::consts::E), depth),
        Expr::Var(Var::X1) => push(code, Op::X1, depth),
        Expr::Var(Var::X2) => push(code, Op::X2, depth),
        Expr::Neg(a) => {
            emit(a, code, depth, max_depth);
            code.push(Op::Neg);
        }
        Expr::Call(f, a) => {
            emit(a, code, depth, max_depth);
            code.push(Op::Call(*f));
        }
        Expr::Bin(op, a, b) => {
            emit(a, code, depth, max_depth);
            emit(b, code, depth, max_depth);
            code.push(Op::Bin(*op));
            *depth -= 1;
        }
    }
}

impl Program {
    pub fn eval(&self, x1: f64, x2: f64) -> f64 {
        const INLINE: usize = 32;
        if self.max_depth <= INLINE {
            let mut stack = [0.0f64; INLINE];
            self.run(&mut stack, x1, x2)
        } else {
            let mut stack = vec![0.0f64; self.max_depth];
            self.run(&mut stack, x1, x2)
        }
    }

    fn run(&self, stack: &mut [f64], x1: f64, x2: f64) -> f64 {
        let mut sp = 0usize;
        for op in &self.code {
            match *op {
                Op::Const(v) => {
                    stack[sp] = v;
                    sp += 1;
                }
                Op::X1 => {
                    stack[sp] = x1;
                    sp += 1;
                }
                Op::X2 => {
                    stack[sp] = x2;
                    sp += 1;
                }
                Op::Neg => stack[sp - 1] = -stack[sp - 1],
                Op::Call(f) => stack[sp - 1] = f.apply(stack[sp - 1]),
                Op::Bin(b) => {
                    let r = stack[sp - 1];
                    sp -= 1;
                    stack[sp - 1] = apply_bin(b, stack[sp - 1], r);
                }
            }
        }
        stack[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluates_basic_example() {
        let e = Expr::parse("sin(pi*x1)*x2").unwrap();
        assert!((e.eval(0.5, 2.0).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn syntax_error_offset() {
        match Expr::parse("x1 + * 2") {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_identifier() {
        match Expr::parse("2*foo") {
            Err(Error::UnknownIdentifier { offset, name }) => {
                assert_eq!(offset, 2);
                assert_eq!(name, "foo");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn precedence_cases() {
        let cases = [
            ("1 - 2 - 3", -4.0),
            ("8 / 4 / 2", 1.0),
            ("2 + 3 * 4", 14.0),
            ("2 ^ 3 ^ 2", 512.0),
            ("-2 ^ 2", -4.0),
            ("(-2) ^ 2", 4.0),
            ("2 * -3", -6.0),
            ("2 ^ -1", 0.5),
            ("1e-3 * 1E3", 1.0),
            ("e - exp(1)", 0.0),
        ];
        for (s, v) in cases {
            let got = Expr::parse(s).unwrap().eval(0.0, 0.0).unwrap();
            assert!((got - v).abs() < 1e-14, "{s}: {got} != {v}");
        }
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(
            Expr::parse("log(x1)").unwrap().eval(-1.0, 0.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            Expr::parse("1/x2").unwrap().eval(0.0, 0.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn incomplete_inputs() {
        assert!(matches!(
            Expr::parse(""),
            Err(Error::Syntax { offset: 0, .. })
        ));
        assert!(matches!(
            Expr::parse("(x1"),
            Err(Error::Syntax { offset: 3, .. })
        ));
        assert!(matches!(
            Expr::parse("sin x1"),
            Err(Error::Syntax { offset: 4, .. })
        ));
        assert!(matches!(
            Expr::parse("x1 x2"),
            Err(Error::Syntax { offset: 3, .. })
        ));
        assert!(matches!(
            Expr::parse("x1 $ 2"),
            Err(Error::Syntax { offset: 3, .. })
        ));
    }

    #[test]
    fn derivative_matches_central_differences() {
        let exprs = [
            "sin(pi*x1)*x2^3",
            "exp(x1*x2)/(1+x1^2)",
            "sqrt(2+cos(x1))*log(3+x2)",
            "tan(0.3*x1) - abs(x2 - 5) + x1^x2",
        ];
        let (x1, x2) = (0.37, 1.21);
        let h = 1e-6;
        for s in exprs {
            let e = Expr::parse(s).unwrap();
            for v in [Var::X1, Var::X2] {
                let d = e.derivative(v).eval(x1, x2).unwrap();
                let (p, m) = match v {
                    Var::X1 => (e.eval(x1 + h, x2).unwrap(), e.eval(x1 - h, x2).unwrap()),
                    Var::X2 => (e.eval(x1, x2 + h).unwrap(), e.eval(x1, x2 - h).unwrap()),
                };
                let fd = (p - m) / (2.0 * h);
                assert!(
                    (d - fd).abs() < 1e-7 * (1.0 + fd.abs()),
                    "{s} {v:?}: {d} vs {fd}"
                );
            }
        }
    }

    #[test]
    fn program_matches_tree_evaluation() {
        let e = Expr::parse("sin(x1)^2 + cos(x2)*(x1 - 3/x2) - -x1^0.5").unwrap();
        let p = e.compile();
        for &(a, b) in &[(0.3, 1.7), (2.0, -0.4), (1e-3, 5.0)] {
            assert_eq!(p.eval(a, b).to_bits(), e.eval_raw(a, b).to_bits());
        }
    }

    #[test]
    fn printing_negative_constants_reparses() {
        let e = neg(Expr::Num(2.5));
        let back = Expr::parse(&e.to_string()).unwrap();
        assert_eq!(back.eval(0.0, 0.0).unwrap(), -2.5);
    }
}
