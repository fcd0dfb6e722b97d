//! Drift fields `f(β, x)` written as small arithmetic expressions, e.g.
//! `-x`, `x - x^3` or `x - beta*x^3`.
//!
//! Grammar (whitespace is ignored):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' DIGITS)*
//! primary := NUMBER | IDENT | '(' expr ')'
//! ```
//!
//! `x` is the state variable; every other identifier is a named parameter.
//! `^` binds tighter than unary minus, so `-x^2` is `-(x^2)`.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::error::{Error, Result};

const MAX_DEPTH: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub enum DriftExpr {
    Num(f64),
    Var,
    Param(String),
    Neg(Box<DriftExpr>),
    Add(Box<DriftExpr>, Box<DriftExpr>),
    Sub(Box<DriftExpr>, Box<DriftExpr>),
    Mul(Box<DriftExpr>, Box<DriftExpr>),
    Div(Box<DriftExpr>, Box<DriftExpr>),
    Pow(Box<DriftExpr>, u32),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("drift parse error at column {}: expected {expected}, found {found}", .position + 1)]
pub struct ParseError {
    /// Byte offset into the input.
    pub position: usize,
    pub expected: String,
    pub found: String,
}

/// Named parameter bindings used when evaluating a drift.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamEnv {
    bindings: BTreeMap<String, f64>,
}

impl ParamEnv {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: impl Into<String>, value: f64) -> Self {
        self.set(name, value);
        self
    }

    pub fn set(&mut self, name: impl Into<String>, value: f64) {
        self.bindings.insert(name.into(), value);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.bindings.get(name).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.bindings.contains_key(name)
    }

    pub fn remove(&mut self, name: &str) -> Option<f64> {
        self.bindings.remove(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.bindings.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }
}

impl<S: Into<String>> FromIterator<(S, f64)> for ParamEnv {
    fn from_iter<I: IntoIterator<Item = (S, f64)>>(iter: I) -> Self {
        Self { bindings: iter.into_iter().map(|(k, v)| (k.into(), v)).collect() }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64, String),
    Ident(String),
    Op(char),
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(_, s) => write!(f, "number `{s}`"),
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Op(c) => write!(f, "`{c}`"),
            Tok::End => f.write_str("end of input"),
        }
    }
}

fn tokenize(text: &str) -> std::result::Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == b'.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            // exponent part only if followed by digits, so `2e` stays an error
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
            let v: f64 = s.parse().map_err(|_| ParseError {
                position: start,
                expected: "a number".into(),
                found: format!("`{s}`"),
            })?;
            out.push((start, Tok::Num(v, s.to_string())));
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(text[start..i].to_string())));
        } else if b"+-*/^()".contains(&c) {
            out.push((i, Tok::Op(c as char)));
            i += 1;
        } else {
            let ch = text[i..].chars().next().unwrap_or('?');
            return Err(ParseError {
                position: i,
                expected: "an operator, number or identifier".into(),
                found: format!("`{ch}`"),
            });
        }
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    depth: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &str) -> ParseError {
        ParseError { position: self.offset(), expected: expected.into(), found: self.peek().to_string() }
    }

    fn expr(&mut self) -> std::result::Result<DriftExpr, ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(self.error("a shallower expression"));
        }
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Op('+') => {
                    self.bump();
                    lhs = DriftExpr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Op('-') => {
                    self.bump();
                    lhs = DriftExpr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => break,
            }
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn term(&mut self) -> std::result::Result<DriftExpr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Op('*') => {
                    self.bump();
                    lhs = DriftExpr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Tok::Op('/') => {
                    self.bump();
                    lhs = DriftExpr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> std::result::Result<DriftExpr, ParseError> {
        if let Tok::Op('-') = self.peek() {
            self.bump();
            self.depth += 1;
            if self.depth > MAX_DEPTH {
                return Err(self.error("a shallower expression"));
            }
            let inner = self.unary()?;
            self.depth -= 1;
            return Ok(DriftExpr::Neg(Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> std::result::Result<DriftExpr, ParseError> {
        let mut base = self.primary()?;
        while let Tok::Op('^') = self.peek() {
            self.bump();
            match self.peek().clone() {
                Tok::Num(_, s) if s.bytes().all(|b| b.is_ascii_digit()) => {
                    let n: u32 = s.parse().map_err(|_| self.error("an exponent that fits in 32 bits"))?;
                    self.bump();
                    base = DriftExpr::Pow(Box::new(base), n);
                }
                _ => return Err(self.error("a non-negative integer exponent")),
            }
        }
        Ok(base)
    }

    fn primary(&mut self) -> std::result::Result<DriftExpr, ParseError> {
        match self.peek().clone() {
            Tok::Num(v, _) => {
                self.bump();
                Ok(DriftExpr::Num(v))
            }
            Tok::Ident(name) => {
                self.bump();
                Ok(if name == "x" { DriftExpr::Var } else { DriftExpr::Param(name) })
            }
            Tok::Op('(') => {
                self.bump();
                let e = self.expr()?;
                match self.peek() {
                    Tok::Op(')') => {
                        self.bump();
                        Ok(e)
                    }
                    _ => Err(self.error("`)`")),
                }
            }
            _ => Err(self.error("a number, identifier or `(`")),
        }
    }
}

/// Parses a drift expression.
pub fn parse_drift(text: &str) -> std::result::Result<DriftExpr, ParseError> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, pos: 0, depth: 0 };
    if matches!(p.peek(), Tok::End) {
        return Err(p.error("an expression"));
    }
    let e = p.expr()?;
    match p.peek() {
        Tok::End => Ok(e),
        _ => Err(p.error("an operator or end of input")),
    }
}

impl std::str::FromStr for DriftExpr {
    type Err = ParseError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        parse_drift(s)
    }
}

impl DriftExpr {
    /// Evaluates the drift at `x` with parameters taken from `env`.
    pub fn eval(&self, env: &ParamEnv, x: f64) -> Result<f64> {
        let v = self.eval_raw(&|name| env.get(name).ok_or_else(|| Error::UnboundParameter(name.to_string())), x)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteDrift { x, value: v })
        }
    }

    fn eval_raw(&self, lookup: &dyn Fn(&str) -> Result<f64>, x: f64) -> Result<f64> {
        use DriftExpr::*;
        Ok(match self {
            Num(v) => *v,
            Var => x,
            Param(name) => lookup(name)?,
            Neg(a) => -a.eval_raw(lookup, x)?,
            Add(a, b) => a.eval_raw(lookup, x)? + b.eval_raw(lookup, x)?,
            Sub(a, b) => a.eval_raw(lookup, x)? - b.eval_raw(lookup, x)?,
            Mul(a, b) => a.eval_raw(lookup, x)? * b.eval_raw(lookup, x)?,
            Div(a, b) => a.eval_raw(lookup, x)? / b.eval_raw(lookup, x)?,
            Pow(a, n) => powu(a.eval_raw(lookup, x)?, *n),
        })
    }

    /// Parameter names in order of first appearance; `x` is never included.
    pub fn free_parameters(&self) -> Vec<String> {
        fn walk(e: &DriftExpr, out: &mut Vec<String>) {
            use DriftExpr::*;
            match e {
                Num(_) | Var => {}
                Param(name) => {
                    if !out.iter().any(|n| n == name) {
                        out.push(name.clone());
                    }
                }
                Neg(a) | Pow(a, _) => walk(a, out),
                Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }

    /// Substitutes every parameter, producing a drift that evaluates without
    /// lookups.
    pub fn bind(&self, env: &ParamEnv) -> Result<BoundDrift> {
        fn subst(e: &DriftExpr, env: &ParamEnv) -> Result<DriftExpr> {
            use DriftExpr::*;
            let b = |a: &DriftExpr| subst(a, env).map(Box::new);
            Ok(match e {
                Num(v) => Num(*v),
                Var => Var,
                Param(name) => Num(env.get(name).ok_or_else(|| Error::UnboundParameter(name.clone()))?),
                Neg(a) => Neg(b(a)?),
                Pow(a, n) => Pow(b(a)?, *n),
                Add(l, r) => Add(b(l)?, b(r)?),
                Sub(l, r) => Sub(b(l)?, b(r)?),
                Mul(l, r) => Mul(b(l)?, b(r)?),
                Div(l, r) => Div(b(l)?, b(r)?),
            })
        }
        Ok(BoundDrift(subst(self, env)?))
    }
}

// exact repeated squaring; powi may differ in the last bit between targets
fn powu(mut base: f64, mut n: u32) -> f64 {
    let mut acc = 1.0;
    while n > 0 {
        if n & 1 == 1 {
            acc *= base;
        }
        base *= base;
        n >>= 1;
    }
    acc
}

/// A drift with all parameters substituted.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundDrift(DriftExpr);

impl BoundDrift {
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        fn go(e: &DriftExpr, x: f64) -> f64 {
            use DriftExpr::*;
            match e {
                Num(v) => *v,
                Var => x,
                Param(_) => f64::NAN,
                Neg(a) => -go(a, x),
                Add(a, b) => go(a, x) + go(b, x),
                Sub(a, b) => go(a, x) - go(b, x),
                Mul(a, b) => go(a, x) * go(b, x),
                Div(a, b) => go(a, x) / go(b, x),
                Pow(a, n) => powu(go(a, x), *n),
            }
        }
        go(&self.0, x)
    }

    pub fn expr(&self) -> &DriftExpr {
        &self.0
    }
}

impl fmt::Display for DriftExpr {
    /// Fully parenthesized form; re-parsing yields the same tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use DriftExpr::*;
        match self {
            Num(v) => write!(f, "{v:?}"),
            Var => f.write_str("x"),
            Param(name) => f.write_str(name),
            Neg(a) => write!(f, "(-{a})"),
            Add(a, b) => write!(f, "({a} + {b})"),
            Sub(a, b) => write!(f, "({a} - {b})"),
            Mul(a, b) => write!(f, "({a} * {b})"),
            Div(a, b) => write!(f, "({a} / {b})"),
            Pow(a, n) => write!(f, "({a}^{n})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use DriftExpr::*;

    fn b(e: DriftExpr) -> Box<DriftExpr> {
        Box::new(e)
    }

    #[test]
    fn parses_paper_drifts() {
        assert_eq!(parse_drift("-x").unwrap(), Neg(b(Var)));
        assert_eq!(
            parse_drift("x - beta*x^3").unwrap(),
            Sub(b(Var), b(Mul(b(Param("beta".into())), b(Pow(b(Var), 3)))))
        );
        assert_eq!(parse_drift("x - x^3").unwrap(), Sub(b(Var), b(Pow(b(Var), 3))));
    }

    #[test]
    fn unary_minus_after_binary_operator() {
        let e = parse_drift("x - - 3").unwrap();
        assert_eq!(e, Sub(b(Var), b(Neg(b(Num(3.0))))));
        assert_eq!(e.eval(&ParamEnv::new(), 1.0).unwrap(), 4.0);
    }

    #[test]
    fn power_binds_tighter_than_negation() {
        let e = parse_drift("-x^2").unwrap();
        assert_eq!(e.eval(&ParamEnv::new(), 3.0).unwrap(), -9.0);
        let e = parse_drift("2*x^2^2").unwrap();
        assert_eq!(e.eval(&ParamEnv::new(), 2.0).unwrap(), 32.0);
    }

    #[test]
    fn evaluates_examples() {
        let env = ParamEnv::new().with("beta", 1.5);
        assert_eq!(parse_drift("x - beta*x^3").unwrap().eval(&env, 2.0).unwrap(), -10.0);
        assert_eq!(parse_drift("-x").unwrap().eval(&env, 0.25).unwrap(), -0.25);
        assert_eq!(parse_drift("x - x^3").unwrap().eval(&env, 1.0).unwrap(), 0.0);
        assert_eq!(parse_drift("0").unwrap().eval(&env, 0.3).unwrap(), 0.0);
        assert_eq!(parse_drift("1.5e-1 * (x + 1)").unwrap().eval(&env, 1.0).unwrap(), 0.3);
    }

    #[test]
    fn free_parameter_order() {
        assert_eq!(parse_drift("x - beta*x^3").unwrap().free_parameters(), vec!["beta"]);
        assert!(parse_drift("-x").unwrap().free_parameters().is_empty());
        assert_eq!(parse_drift("a*x + b*x^3 + a").unwrap().free_parameters(), vec!["a", "b"]);
    }

    #[test]
    fn unbound_parameter_is_named() {
        let err = parse_drift("x - beta*x^3").unwrap().eval(&ParamEnv::new(), 1.0).unwrap_err();
        assert!(matches!(err, Error::UnboundParameter(ref n) if n == "beta"));
        assert!(parse_drift("k*x").unwrap().bind(&ParamEnv::new()).is_err());
    }

    #[test]
    fn division_by_zero_reported() {
        let err = parse_drift("1/x").unwrap().eval(&ParamEnv::new(), 0.0).unwrap_err();
        assert!(matches!(err, Error::NonFiniteDrift { .. }));
    }

    #[test]
    fn parse_errors_carry_position() {
        let e = parse_drift("x ^ 2.5").unwrap_err();
        assert_eq!(e.position, 4);
        assert!(e.expected.contains("integer exponent"));
        assert!(parse_drift("x^-2").is_err());
        assert!(parse_drift("").is_err());
        assert!(parse_drift("   ").is_err());
        let e = parse_drift("x + (1").unwrap_err();
        assert!(e.expected.contains(')'));
        let e = parse_drift("x $ 2").unwrap_err();
        assert_eq!(e.position, 2);
        assert!(parse_drift("x x").is_err());
        assert!(parse_drift("x +").is_err());
    }

    #[test]
    fn deep_nesting_is_an_error_not_a_crash() {
        let deep = "(".repeat(10_000) + "x" + &")".repeat(10_000);
        assert!(parse_drift(&deep).is_err());
        let negs = "-".repeat(10_000) + "x";
        assert!(parse_drift(&negs).is_err());
    }

    #[test]
    fn bound_matches_env_eval() {
        let e = parse_drift("a*x - b*x^3 / (1 + x^2)").unwrap();
        let env = ParamEnv::new().with("a", 0.7).with("b", 2.5);
        let bound = e.bind(&env).unwrap();
        for x in [-1.3, 0.0, 0.4, 2.0] {
            assert_eq!(bound.eval(x), e.eval(&env, x).unwrap());
        }
    }

    fn arb_expr() -> impl Strategy<Value = DriftExpr> {
        let leaf = prop_oneof![
            (0.0f64..1e6).prop_map(Num),
            Just(Var),
            "[a-wyz_][a-z0-9_]{0,4}".prop_map(Param),
        ];
        leaf.prop_recursive(6, 64, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|a| Neg(Box::new(a))),
                (inner.clone(), 0u32..6).prop_map(|(a, n)| Pow(Box::new(a), n)),
                (inner.clone(), inner.clone()).prop_map(|(a, c)| Add(Box::new(a), Box::new(c))),
                (inner.clone(), inner.clone()).prop_map(|(a, c)| Sub(Box::new(a), Box::new(c))),
                (inner.clone(), inner.clone()).prop_map(|(a, c)| Mul(Box::new(a), Box::new(c))),
                (inner.clone(), inner).prop_map(|(a, c)| Div(Box::new(a), Box::new(c))),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(e in arb_expr()) {
            let printed = e.to_string();
            prop_assert_eq!(parse_drift(&printed).unwrap(), e);
        }

        #[test]
        fn parser_never_panics(s in "\\PC{0,40}") {
            let _ = parse_drift(&s);
        }

        #[test]
        fn parser_never_panics_on_grammar_soup(s in "[-+*/^()x0-9. a]{0,40}") {
            let _ = parse_drift(&s);
        }

        #[test]
        fn integer_polynomials_exact(c0 in -50i32..50, c1 in -50i32..50, c3 in -50i32..50, x in -20i32..20) {
            let text = format!("{c0} + {c1}*x + {c3}*x^3");
            let got = parse_drift(&text).unwrap().eval(&ParamEnv::new(), x as f64).unwrap();
            let want = c0 as i64 + c1 as i64 * x as i64 + c3 as i64 * (x as i64).pow(3);
            prop_assert_eq!(got, want as f64);
        }
    }
}
