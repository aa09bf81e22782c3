//! Expression language for weight families.
//!
//! A definition gives `log a_n(i)` as a formula in the variables `i`, `n`,
//! named parameters and named sequences, e.g. `i*n*exp(i*n)`.
//!
//! Precedence, tightest first: `^` (right assoc), unary `-`, `*` `/`, `+` `-`.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    I,
    N,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnOp {
    Neg,
    Exp,
    Log,
    LogLog,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

/// AST node. Constants compare bitwise so round trips can be checked exactly.
#[derive(Debug, Clone)]
pub enum Expr {
    Const(f64),
    Var(Var),
    Param(String),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(String, Box<Expr>),
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        use Expr::*;
        match (self, other) {
            (Const(a), Const(b)) => a.to_bits() == b.to_bits(),
            (Var(a), Var(b)) => a == b,
            (Param(a), Param(b)) => a == b,
            (Unary(o, a), Unary(p, b)) => o == p && a == b,
            (Binary(o, a, x), Binary(p, b, y)) => o == p && a == b && x == y,
            (Call(f, a), Call(g, b)) => f == g && a == b,
            _ => false,
        }
    }
}

pub type WeightExpr = Expr;

pub const RESERVED_FUNCTIONS: [&str; 3] = ["exp", "log", "loglog"];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: expected {}, found {found}", expected.join(" | "))]
    Syntax {
        offset: usize,
        expected: Vec<String>,
        found: String,
    },
    #[error("unknown identifier `{name}` at byte {offset}; valid names: {}", valid.join(", "))]
    UnknownIdentifier {
        name: String,
        offset: usize,
        valid: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("log of non-positive value {value} in `{expr}`")]
    LogDomain { expr: String, value: f64 },
    #[error("loglog argument {value} must exceed 1 in `{expr}`")]
    LogLogDomain { expr: String, value: f64 },
    #[error("0^0 in `{expr}`")]
    ZeroPowZero { expr: String },
    #[error("division by zero in `{expr}`")]
    DivisionByZero { expr: String },
    #[error("indeterminate or non-real value in `{expr}`")]
    Indeterminate { expr: String },
    #[error("unbound parameter `{name}`")]
    UnboundParameter { name: String },
    #[error("unknown sequence `{name}`")]
    UnknownSequence { name: String },
    #[error("sequence `{name}` has no entry at index {index}")]
    SequenceIndex { name: String, index: f64 },
}

/// Built-in sequences usable through a named call.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Builtin {
    Identity,
    Log,
    LogLog,
}

impl Builtin {
    pub fn from_name(s: &str) -> Option<Builtin> {
        match s {
            "identity" => Some(Builtin::Identity),
            "log" => Some(Builtin::Log),
            "loglog" => Some(Builtin::LogLog),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Identity => "identity",
            Builtin::Log => "log",
            Builtin::LogLog => "loglog",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Sequence {
    Builtin(Builtin),
    /// 1-based table.
    Table(Vec<f64>),
}

/// Bindings for parameters and named sequences.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Env {
    pub params: BTreeMap<String, f64>,
    pub sequences: BTreeMap<String, Sequence>,
}

impl Env {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_param(mut self, name: &str, v: f64) -> Self {
        self.params.insert(name.to_string(), v);
        self
    }

    pub fn with_sequence(mut self, name: &str, s: Sequence) -> Self {
        self.sequences.insert(name.to_string(), s);
        self
    }

    /// Every identifier a formula may use in this environment.
    pub fn valid_names(&self) -> Vec<String> {
        let mut v: Vec<String> = vec!["i".into(), "n".into()];
        v.extend(RESERVED_FUNCTIONS.iter().map(|s| s.to_string()));
        v.extend(self.params.keys().cloned());
        v.extend(self.sequences.keys().cloned());
        v
    }
}

// ---------------------------------------------------------------- lexer

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let b = src.as_bytes();
    let mut out = Vec::new();
    let mut p = 0;
    while p < b.len() {
        let c = b[p];
        if c.is_ascii_whitespace() {
            p += 1;
            continue;
        }
        let start = p;
        let tok = match c {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' | b'.' => {
                while p < b.len() && b[p].is_ascii_digit() {
                    p += 1;
                }
                if p < b.len() && b[p] == b'.' {
                    p += 1;
                    while p < b.len() && b[p].is_ascii_digit() {
                        p += 1;
                    }
                }
                if p < b.len() && (b[p] == b'e' || b[p] == b'E') {
                    let mut q = p + 1;
                    if q < b.len() && (b[q] == b'+' || b[q] == b'-') {
                        q += 1;
                    }
                    if q < b.len() && b[q].is_ascii_digit() {
                        while q < b.len() && b[q].is_ascii_digit() {
                            q += 1;
                        }
                        p = q;
                    }
                }
                let text = &src[start..p];
                let v: f64 = text.parse().map_err(|_| ParseError::Syntax {
                    offset: start,
                    expected: vec!["number".into()],
                    found: format!("`{text}`"),
                })?;
                out.push((Tok::Num(v), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while p < b.len() && (b[p].is_ascii_alphanumeric() || b[p] == b'_') {
                    p += 1;
                }
                out.push((Tok::Ident(src[start..p].to_string()), start));
                continue;
            }
            _ => {
                let ch = src[start..].chars().next().unwrap_or('?');
                return Err(ParseError::Syntax {
                    offset: start,
                    expected: vec!["number".into(), "identifier".into(), "operator".into()],
                    found: format!("`{ch}`"),
                });
            }
        };
        p += 1;
        out.push((tok, start));
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

// ---------------------------------------------------------------- parser

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    env: Option<&'a Env>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &[&str]) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            offset: self.offset(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().describe(),
        })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            let e = self.unary()?;
            return Ok(Expr::Unary(UnOp::Neg, Box::new(e)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let exp = self.unary()?;
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let at = self.offset();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Const(v))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                if *self.peek() != Tok::RParen {
                    return self.fail(&["`)`", "operator"]);
                }
                self.bump();
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                if *self.peek() == Tok::LParen {
                    self.bump();
                    let arg = self.expr()?;
                    if *self.peek() != Tok::RParen {
                        return self.fail(&["`)`", "operator"]);
                    }
                    self.bump();
                    let node = match name.as_str() {
                        "exp" => Expr::Unary(UnOp::Exp, Box::new(arg)),
                        "log" => Expr::Unary(UnOp::Log, Box::new(arg)),
                        "loglog" => Expr::Unary(UnOp::LogLog, Box::new(arg)),
                        _ => {
                            if let Some(env) = self.env {
                                if !env.sequences.contains_key(&name) {
                                    return Err(self.unknown(name, at));
                                }
                            }
                            Expr::Call(name, Box::new(arg))
                        }
                    };
                    return Ok(node);
                }
                match name.as_str() {
                    "i" => Ok(Expr::Var(Var::I)),
                    "n" => Ok(Expr::Var(Var::N)),
                    "exp" | "log" | "loglog" => self.fail(&["`(`"]),
                    _ => {
                        if let Some(env) = self.env {
                            if !env.params.contains_key(&name) {
                                return Err(self.unknown(name, at));
                            }
                        }
                        Ok(Expr::Param(name))
                    }
                }
            }
            _ => self.fail(&["number", "identifier", "`(`", "`-`"]),
        }
    }

    fn unknown(&self, name: String, offset: usize) -> ParseError {
        let valid = self.env.map(|e| e.valid_names()).unwrap_or_default();
        ParseError::UnknownIdentifier {
            name,
            offset,
            valid,
        }
    }
}

fn parse_inner(src: &str, env: Option<&Env>) -> Result<Expr, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0, env };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.fail(&["operator", "end of input"]);
    }
    Ok(e)
}

/// Parse without checking identifiers; bare names become parameters and
/// non-reserved calls become sequence calls.
pub fn parse(src: &str) -> Result<Expr, ParseError> {
    parse_inner(src, None)
}

/// Parse and reject identifiers not bound in `env`.
pub fn parse_in(src: &str, env: &Env) -> Result<Expr, ParseError> {
    parse_inner(src, Some(env))
}

// ---------------------------------------------------------------- printer

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
        Expr::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
        Expr::Unary(UnOp::Neg, _) => 3,
        Expr::Binary(BinOp::Pow, ..) => 4,
        _ => 5,
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, e: &Expr, paren: bool) -> fmt::Result {
    if paren {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(v) => write!(f, "{v}"),
            Expr::Var(Var::I) => f.write_str("i"),
            Expr::Var(Var::N) => f.write_str("n"),
            Expr::Param(p) => f.write_str(p),
            Expr::Call(name, a) => write!(f, "{name}({a})"),
            Expr::Unary(UnOp::Exp, a) => write!(f, "exp({a})"),
            Expr::Unary(UnOp::Log, a) => write!(f, "log({a})"),
            Expr::Unary(UnOp::LogLog, a) => write!(f, "loglog({a})"),
            Expr::Unary(UnOp::Neg, a) => {
                f.write_str("-")?;
                write_child(f, a, prec(a) < 3)
            }
            Expr::Binary(op, a, b) => {
                let (sym, p) = match op {
                    BinOp::Add => (" + ", 1),
                    BinOp::Sub => (" - ", 1),
                    BinOp::Mul => (" * ", 2),
                    BinOp::Div => (" / ", 2),
                    BinOp::Pow => ("^", 4),
                };
                if *op == BinOp::Pow {
                    write_child(f, a, prec(a) <= 4)?;
                    f.write_str(sym)?;
                    write_child(f, b, prec(b) < 3)
                } else {
                    write_child(f, a, prec(a) < p)?;
                    f.write_str(sym)?;
                    write_child(f, b, prec(b) <= p)
                }
            }
        }
    }
}

// ---------------------------------------------------------------- eval

fn checked(v: f64, e: &Expr) -> Result<f64, EvalError> {
    if v.is_nan() {
        Err(EvalError::Indeterminate { expr: e.to_string() })
    } else {
        Ok(v)
    }
}

fn loglog(x: f64) -> f64 {
    x.ln().ln()
}

fn apply_sequence(name: &str, x: f64, env: &Env) -> Result<f64, EvalError> {
    let seq = env
        .sequences
        .get(name)
        .ok_or_else(|| EvalError::UnknownSequence { name: name.into() })?;
    match seq {
        Sequence::Builtin(Builtin::Identity) => Ok(x),
        Sequence::Builtin(Builtin::Log) => Ok(x.ln()),
        Sequence::Builtin(Builtin::LogLog) => Ok(loglog(x)),
        Sequence::Table(t) => {
            let k = x.round();
            if (x - k).abs() > 1e-9 || k < 1.0 || k > t.len() as f64 {
                return Err(EvalError::SequenceIndex {
                    name: name.into(),
                    index: x,
                });
            }
            Ok(t[k as usize - 1])
        }
    }
}

/// Evaluate in double precision. Infinities propagate; NaN-producing forms and
/// the listed domain violations are errors naming the subexpression.
pub fn eval(e: &Expr, i: u64, n: u64, env: &Env) -> Result<f64, EvalError> {
    match e {
        Expr::Const(v) => Ok(*v),
        Expr::Var(Var::I) => Ok(i as f64),
        Expr::Var(Var::N) => Ok(n as f64),
        Expr::Param(p) => env
            .params
            .get(p)
            .copied()
            .ok_or_else(|| EvalError::UnboundParameter { name: p.clone() }),
        Expr::Call(name, a) => {
            let x = eval(a, i, n, env)?;
            let seq = env.sequences.get(name);
            if let Some(Sequence::Builtin(b)) = seq {
                match b {
                    Builtin::Log if x <= 0.0 => {
                        return Err(EvalError::LogDomain {
                            expr: e.to_string(),
                            value: x,
                        })
                    }
                    Builtin::LogLog if x <= 1.0 => {
                        return Err(EvalError::LogLogDomain {
                            expr: e.to_string(),
                            value: x,
                        })
                    }
                    _ => {}
                }
            }
            checked(apply_sequence(name, x, env)?, e)
        }
        Expr::Unary(op, a) => {
            let x = eval(a, i, n, env)?;
            let v = match op {
                UnOp::Neg => -x,
                UnOp::Exp => x.exp(),
                UnOp::Log => {
                    if x <= 0.0 {
                        return Err(EvalError::LogDomain {
                            expr: e.to_string(),
                            value: x,
                        });
                    }
                    x.ln()
                }
                UnOp::LogLog => {
                    if x <= 1.0 {
                        return Err(EvalError::LogLogDomain {
                            expr: e.to_string(),
                            value: x,
                        });
                    }
                    loglog(x)
                }
            };
            checked(v, e)
        }
        Expr::Binary(op, a, b) => {
            let x = eval(a, i, n, env)?;
            let y = eval(b, i, n, env)?;
            let v = match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                BinOp::Div => {
                    if y == 0.0 {
                        return Err(EvalError::DivisionByZero { expr: e.to_string() });
                    }
                    x / y
                }
                BinOp::Pow => {
                    if x == 0.0 && y == 0.0 {
                        return Err(EvalError::ZeroPowZero { expr: e.to_string() });
                    }
                    if x == 0.0 && y < 0.0 {
                        return Err(EvalError::DivisionByZero { expr: e.to_string() });
                    }
                    x.powf(y)
                }
            };
            checked(v, e)
        }
    }
}

/// Names of parameters referenced by `e`.
pub fn parameters(e: &Expr) -> Vec<String> {
    fn walk(e: &Expr, out: &mut Vec<String>) {
        match e {
            Expr::Param(p) => {
                if !out.contains(p) {
                    out.push(p.clone())
                }
            }
            Expr::Unary(_, a) | Expr::Call(_, a) => walk(a, out),
            Expr::Binary(_, a, b) => {
                walk(a, out);
                walk(b, out)
            }
            _ => {}
        }
    }
    let mut v = Vec::new();
    walk(e, &mut v);
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }
    fn v(e: &str, i: u64, n: u64) -> f64 {
        eval(&p(e), i, n, &Env::new()).unwrap()
    }
    fn bx(e: Expr) -> Box<Expr> {
        Box::new(e)
    }

    #[test]
    fn single_variable() {
        assert_eq!(p("i"), Expr::Var(Var::I));
    }

    #[test]
    fn nested_exp_shape() {
        let inner = Expr::Binary(BinOp::Mul, bx(Expr::Var(Var::I)), bx(Expr::Var(Var::N)));
        let want = Expr::Binary(
            BinOp::Mul,
            bx(inner.clone()),
            bx(Expr::Unary(UnOp::Exp, bx(inner))),
        );
        assert_eq!(p("i*n*exp(i*n)"), want);
    }

    #[test]
    fn double_log_shape() {
        let want = Expr::Binary(
            BinOp::Mul,
            bx(Expr::Var(Var::N)),
            bx(Expr::Unary(
                UnOp::Log,
                bx(Expr::Unary(UnOp::Log, bx(Expr::Var(Var::I)))),
            )),
        );
        assert_eq!(p("n*log(log(i))"), want);
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(v("2+3*4", 1, 1), 14.0);
        assert_eq!(v("2^3^2", 1, 1), 512.0);
        assert_eq!(v("-2^2", 1, 1), -4.0);
        assert_eq!(v("2^-1", 1, 1), 0.5);
        assert_eq!(v("8-3-2", 1, 1), 3.0);
        assert_eq!(v("8/4/2", 1, 1), 1.0);
        assert_eq!(v("-i*n", 3, 2), -6.0);
        assert_eq!(v(" ( 1 + 2 ) * 3 ", 1, 1), 9.0);
    }

    #[test]
    fn basic_values() {
        assert_eq!(v("i*n", 3, 2), 6.0);
        assert!((v("i*n*exp(i*n)", 1, 1) - std::f64::consts::E).abs() < 1e-15);
        let ll = v("n*log(log(i))", 2, 1);
        assert!((ll - (2f64.ln()).ln()).abs() < 1e-15);
        assert!((ll + 0.366512920581664).abs() < 1e-12);
    }

    #[test]
    fn overflow_is_infinite() {
        assert_eq!(v("i*n*exp(i*n)", 1000, 1), f64::INFINITY);
        assert_eq!(v("-exp(i)", 1000, 1), f64::NEG_INFINITY);
    }

    #[test]
    fn domain_errors() {
        let e = Env::new();
        assert!(matches!(
            eval(&p("log(i-1)"), 1, 1, &e),
            Err(EvalError::LogDomain { .. })
        ));
        assert!(matches!(
            eval(&p("loglog(i)"), 1, 1, &e),
            Err(EvalError::LogLogDomain { .. })
        ));
        assert!(matches!(
            eval(&p("(i-1)^0"), 1, 1, &e),
            Err(EvalError::ZeroPowZero { .. })
        ));
        assert!(matches!(
            eval(&p("1/(n-1)"), 1, 1, &e),
            Err(EvalError::DivisionByZero { .. })
        ));
        assert!(matches!(
            eval(&p("exp(i) - exp(i)"), 1000, 1, &e),
            Err(EvalError::Indeterminate { .. })
        ));
        match eval(&p("n + log(i - 1)"), 1, 1, &e) {
            Err(EvalError::LogDomain { expr, .. }) => assert_eq!(expr, "log(i - 1)"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        match parse("i*(n+") {
            Err(ParseError::Syntax { offset, expected, .. }) => {
                assert_eq!(offset, 5);
                assert!(expected.iter().any(|s| s == "identifier"));
            }
            other => panic!("{other:?}"),
        }
        match parse("i n") {
            Err(ParseError::Syntax { offset, .. }) => assert_eq!(offset, 2),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("i $ n"), Err(ParseError::Syntax { offset: 2, .. })));
        assert!(matches!(parse("exp + 1"), Err(ParseError::Syntax { offset: 4, .. })));
    }

    #[test]
    fn unknown_identifiers_listed() {
        let env = Env::new().with_param("alpha", 0.5);
        match parse_in("alpha*beta", &env) {
            Err(ParseError::UnknownIdentifier { name, offset, valid }) => {
                assert_eq!(name, "beta");
                assert_eq!(offset, 6);
                assert!(valid.contains(&"alpha".to_string()));
                assert!(valid.contains(&"i".to_string()));
            }
            other => panic!("{other:?}"),
        }
        assert!(parse_in("foo(i)", &env).is_err());
        assert!(parse_in("alpha*log(i)", &env).is_ok());
    }

    #[test]
    fn sequences_and_params() {
        let env = Env::new()
            .with_param("s", 3.0)
            .with_sequence("alpha", Sequence::Builtin(Builtin::Log))
            .with_sequence("t", Sequence::Table(vec![10.0, 20.0]));
        let e = parse_in("n*alpha(i) + s", &env).unwrap();
        assert!((eval(&e, 8, 2, &env).unwrap() - (2.0 * 8f64.ln() + 3.0)).abs() < 1e-15);
        let t = parse_in("t(i)", &env).unwrap();
        assert_eq!(eval(&t, 2, 1, &env).unwrap(), 20.0);
        assert!(matches!(
            eval(&t, 3, 1, &env),
            Err(EvalError::SequenceIndex { .. })
        ));
        assert_eq!(parameters(&e), vec!["s".to_string()]);
    }

    #[test]
    fn printer_minimal_parens() {
        assert_eq!(p("(a-b)-(c-d)").to_string(), "a - b - (c - d)");
        assert_eq!(p("(-2)^2").to_string(), "(-2)^2");
        assert_eq!(p("2^(3^2)").to_string(), "2^3^2");
        assert_eq!(p("(2^3)^2").to_string(), "(2^3)^2");
        assert_eq!(p("-(i*n)").to_string(), "-(i * n)");
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (0u32..1000, 0u32..4).prop_map(|(a, s)| Expr::Const(a as f64 / 10f64.powi(s as i32))),
            Just(Expr::Var(Var::I)),
            Just(Expr::Var(Var::N)),
            "[a-h_][a-z0-9_]{0,3}"
                .prop_filter("reserved", |s| !RESERVED_FUNCTIONS.contains(&s.as_str()))
                .prop_map(Expr::Param),
        ];
        leaf.prop_recursive(6, 48, 2, |inner| {
            prop_oneof![
                (
                    prop_oneof![
                        Just(UnOp::Neg),
                        Just(UnOp::Exp),
                        Just(UnOp::Log),
                        Just(UnOp::LogLog)
                    ],
                    inner.clone()
                )
                    .prop_map(|(o, a)| Expr::Unary(o, Box::new(a))),
                (
                    prop_oneof![
                        Just(BinOp::Add),
                        Just(BinOp::Sub),
                        Just(BinOp::Mul),
                        Just(BinOp::Div),
                        Just(BinOp::Pow)
                    ],
                    inner.clone(),
                    inner.clone()
                )
                    .prop_map(|(o, a, b)| Expr::Binary(o, Box::new(a), Box::new(b))),
                inner.prop_map(|a| Expr::Call("alpha".into(), Box::new(a))),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(e in arb_expr()) {
            let printed = e.to_string();
            let back = parse(&printed).unwrap();
            prop_assert_eq!(back, e);
        }

        #[test]
        fn eval_is_deterministic(i in 1u64..5000, n in 1u64..20) {
            let e = p("n*log(i+1) - i/(n+2) + exp(-i)");
            let a = eval(&e, i, n, &Env::new()).unwrap();
            let b = eval(&e, i, n, &Env::new()).unwrap();
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}
