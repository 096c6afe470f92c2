//! Small arithmetic expression language for Finsler function definitions.
//!
//! Grammar:
//! ```text
//! expr   := ['-'] term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := base ('^' number)?
//! base   := number | ident | func '(' expr ')' | '(' expr ')'
//! func   := 'sqrt' | 'exp' | 'log' | 'sin' | 'cos'
//! ident  := 'x1' | 'x2' | 'y1' | 'y2' | parameter-name
//! ```
//! Pure total arithmetic only: no conditionals, no loops.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::jets::{Jet, JetError};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{message} at line {line}, column {column}")]
pub struct ParseError {
    pub message: String,
    pub line: usize,
    pub column: usize,
}

impl ParseError {
    fn new(message: impl Into<String>, line: usize, column: usize) -> Self {
        ParseError {
            message: message.into(),
            line,
            column,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sqrt,
    Exp,
    Log,
    Sin,
    Cos,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        match name {
            "sqrt" => Some(Func::Sqrt),
            "exp" => Some(Func::Exp),
            "log" => Some(Func::Log),
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            _ => None,
        }
    }
}

/// Coordinate identifiers, in jet axis order.
pub const COORD_NAMES: [&str; 4] = ["x1", "x2", "y1", "y2"];

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    /// Coordinate variable by jet axis (0 = x1, 1 = x2, 2 = y1, 3 = y2).
    Var(usize),
    Param(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, f64),
    Call(Func, Box<Expr>),
}

impl Expr {
    /// Evaluate as a jet with the given coordinate jets and parameter values.
    pub fn eval_jet(
        &self,
        vars: &[Jet; 4],
        params: &BTreeMap<String, f64>,
    ) -> Result<Jet, EvalExprError> {
        let order = vars[0].order();
        match self {
            Expr::Num(v) => Ok(Jet::constant(order, *v)?),
            Expr::Var(axis) => Ok(vars[*axis].clone()),
            Expr::Param(name) => {
                let v = params
                    .get(name)
                    .ok_or_else(|| EvalExprError::UnknownIdentifier(name.clone()))?;
                Ok(Jet::constant(order, *v)?)
            }
            Expr::Neg(a) => Ok(-&a.eval_jet(vars, params)?),
            Expr::Add(a, b) => Ok(&a.eval_jet(vars, params)? + &b.eval_jet(vars, params)?),
            Expr::Sub(a, b) => Ok(&a.eval_jet(vars, params)? - &b.eval_jet(vars, params)?),
            Expr::Mul(a, b) => Ok(&a.eval_jet(vars, params)? * &b.eval_jet(vars, params)?),
            Expr::Div(a, b) => Ok(a.eval_jet(vars, params)?.div(&b.eval_jet(vars, params)?)?),
            Expr::Pow(a, e) => Ok(a.eval_jet(vars, params)?.powf(*e)?),
            Expr::Call(f, a) => {
                let a = a.eval_jet(vars, params)?;
                Ok(match f {
                    Func::Sqrt => a.sqrt()?,
                    Func::Exp => a.exp()?,
                    Func::Log => a.ln()?,
                    Func::Sin => a.sin()?,
                    Func::Cos => a.cos()?,
                })
            }
        }
    }

    /// Direct f64 evaluation, independent of the jet kernel. Used by the
    /// finite-difference oracles and the flow integrator end checks.
    pub fn eval_f64(
        &self,
        coords: &[f64; 4],
        params: &BTreeMap<String, f64>,
    ) -> Result<f64, EvalExprError> {
        Ok(match self {
            Expr::Num(v) => *v,
            Expr::Var(axis) => coords[*axis],
            Expr::Param(name) => *params
                .get(name)
                .ok_or_else(|| EvalExprError::UnknownIdentifier(name.clone()))?,
            Expr::Neg(a) => -a.eval_f64(coords, params)?,
            Expr::Add(a, b) => a.eval_f64(coords, params)? + b.eval_f64(coords, params)?,
            Expr::Sub(a, b) => a.eval_f64(coords, params)? - b.eval_f64(coords, params)?,
            Expr::Mul(a, b) => a.eval_f64(coords, params)? * b.eval_f64(coords, params)?,
            Expr::Div(a, b) => a.eval_f64(coords, params)? / b.eval_f64(coords, params)?,
            Expr::Pow(a, e) => a.eval_f64(coords, params)?.powf(*e),
            Expr::Call(f, a) => {
                let a = a.eval_f64(coords, params)?;
                match f {
                    Func::Sqrt => a.sqrt(),
                    Func::Exp => a.exp(),
                    Func::Log => a.ln(),
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                }
            }
        })
    }

    /// Collect the parameter names referenced by the expression.
    pub fn parameters(&self, out: &mut Vec<String>) {
        match self {
            Expr::Param(name) => {
                if !out.iter().any(|n| n == name) {
                    out.push(name.clone());
                }
            }
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.parameters(out),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.parameters(out);
                b.parameters(out);
            }
            Expr::Num(_) | Expr::Var(_) => {}
        }
    }

    /// Replace every occurrence of a coordinate variable by an expression.
    /// Used to build chart-changed metrics in tests.
    pub fn substitute(&self, axis: usize, replacement: &Expr) -> Expr {
        match self {
            Expr::Var(a) if *a == axis => replacement.clone(),
            Expr::Num(_) | Expr::Var(_) | Expr::Param(_) => self.clone(),
            Expr::Neg(a) => Expr::Neg(Box::new(a.substitute(axis, replacement))),
            Expr::Add(a, b) => Expr::Add(
                Box::new(a.substitute(axis, replacement)),
                Box::new(b.substitute(axis, replacement)),
            ),
            Expr::Sub(a, b) => Expr::Sub(
                Box::new(a.substitute(axis, replacement)),
                Box::new(b.substitute(axis, replacement)),
            ),
            Expr::Mul(a, b) => Expr::Mul(
                Box::new(a.substitute(axis, replacement)),
                Box::new(b.substitute(axis, replacement)),
            ),
            Expr::Div(a, b) => Expr::Div(
                Box::new(a.substitute(axis, replacement)),
                Box::new(b.substitute(axis, replacement)),
            ),
            Expr::Pow(a, e) => Expr::Pow(Box::new(a.substitute(axis, replacement)), *e),
            Expr::Call(f, a) => Expr::Call(*f, Box::new(a.substitute(axis, replacement))),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalExprError {
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error(transparent)]
    Jet(#[from] JetError),
}

impl fmt::Display for Expr {
    /// Fully parenthesized form; parse(print(e)) reproduces the tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(axis) => write!(f, "{}", COORD_NAMES[*axis]),
            Expr::Param(name) => write!(f, "{name}"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, e) => write!(f, "({a}^{e})"),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

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
}

struct Lexer<'a> {
    src: &'a str,
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    line: usize,
    column: usize,
}

struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src,
            chars: src.char_indices().peekable(),
            line: 1,
            column: 1,
        }
    }

    fn tokenize(mut self) -> Result<Vec<Spanned>, ParseError> {
        let mut out = Vec::new();
        while let Some(&(idx, c)) = self.chars.peek() {
            let (line, column) = (self.line, self.column);
            match c {
                ' ' | '\t' | '\r' => {
                    self.bump();
                }
                '\n' => {
                    self.bump();
                    self.line += 1;
                    self.column = 1;
                }
                '+' => out.push(self.single(Tok::Plus, line, column)),
                '-' => out.push(self.single(Tok::Minus, line, column)),
                '*' => out.push(self.single(Tok::Star, line, column)),
                '/' => out.push(self.single(Tok::Slash, line, column)),
                '^' => out.push(self.single(Tok::Caret, line, column)),
                '(' => out.push(self.single(Tok::LParen, line, column)),
                ')' => out.push(self.single(Tok::RParen, line, column)),
                c if c.is_ascii_digit() || c == '.' => {
                    let end = self.consume_while(|c| {
                        c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E'
                    });
                    let text = &self.src[idx..end];
                    let value = text.parse::<f64>().map_err(|_| {
                        ParseError::new(format!("invalid number `{text}`"), line, column)
                    })?;
                    out.push(Spanned {
                        tok: Tok::Num(value),
                        line,
                        column,
                    });
                }
                c if c.is_ascii_alphabetic() || c == '_' => {
                    let end =
                        self.consume_while(|c| c.is_ascii_alphanumeric() || c == '_');
                    out.push(Spanned {
                        tok: Tok::Ident(self.src[idx..end].to_string()),
                        line,
                        column,
                    });
                }
                other => {
                    return Err(ParseError::new(
                        format!("unexpected character `{other}`"),
                        line,
                        column,
                    ));
                }
            }
        }
        Ok(out)
    }

    fn bump(&mut self) {
        self.chars.next();
        self.column += 1;
    }

    fn single(&mut self, tok: Tok, line: usize, column: usize) -> Spanned {
        self.bump();
        Spanned { tok, line, column }
    }

    fn consume_while(&mut self, pred: impl Fn(char) -> bool) -> usize {
        let mut end = self.src.len();
        while let Some(&(idx, c)) = self.chars.peek() {
            if pred(c) {
                self.bump();
            } else {
                end = idx;
                break;
            }
        }
        end
    }
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    end_line: usize,
    end_column: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map(|s| (s.line, s.column))
            .unwrap_or((self.end_line, self.end_column))
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|s| s.tok.clone());
        self.pos += 1;
        t
    }

    fn err(&self, message: impl Into<String>) -> ParseError {
        let (line, column) = self.here();
        ParseError::new(message, line, column)
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.bump();
            Ok(())
        } else {
            Err(self.err(format!("expected {what}")))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = if self.peek() == Some(&Tok::Minus) {
            self.bump();
            Expr::Neg(Box::new(self.term()?))
        } else {
            self.term()?
        };
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Some(Tok::Slash) => {
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.base()?;
        if self.peek() == Some(&Tok::Caret) {
            self.bump();
            let neg = if self.peek() == Some(&Tok::Minus) {
                self.bump();
                true
            } else {
                false
            };
            match self.bump() {
                Some(Tok::Num(e)) => Ok(Expr::Pow(Box::new(base), if neg { -e } else { e })),
                _ => Err(self.err("expected numeric exponent after `^`")),
            }
        } else {
            Ok(base)
        }
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.bump();
                Ok(Expr::Num(v))
            }
            Some(Tok::Ident(name)) => {
                self.bump();
                if self.peek() == Some(&Tok::LParen) {
                    let func = Func::from_name(&name)
                        .ok_or_else(|| self.err(format!("unknown function `{name}`")))?;
                    self.bump();
                    let arg = self.expr()?;
                    self.expect(Tok::RParen, "closing `)`")?;
                    Ok(Expr::Call(func, Box::new(arg)))
                } else if let Some(axis) = COORD_NAMES.iter().position(|&n| n == name) {
                    Ok(Expr::Var(axis))
                } else {
                    Ok(Expr::Param(name))
                }
            }
            Some(Tok::LParen) => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "closing `)`")?;
                Ok(e)
            }
            Some(_) => Err(self.err("expected number, identifier, or `(`")),
            None => Err(self.err("unexpected end of input")),
        }
    }
}

/// Parse an expression; identifiers other than x1, x2, y1, y2 become
/// parameters, validated later against the metric's parameter table.
pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    let end_line = text.lines().count().max(1);
    let end_column = text.lines().last().map(|l| l.len() + 1).unwrap_or(1);
    let toks = Lexer::new(text).tokenize()?;
    let mut p = Parser {
        toks,
        pos: 0,
        end_line,
        end_column,
    };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_euclidean_norm() {
        let e = parse_expr("sqrt(y1^2 + y2^2)").unwrap();
        assert_eq!(
            e,
            Expr::Call(
                Func::Sqrt,
                Box::new(Expr::Add(
                    Box::new(Expr::Pow(Box::new(Expr::Var(2)), 2.0)),
                    Box::new(Expr::Pow(Box::new(Expr::Var(3)), 2.0)),
                ))
            )
        );
    }

    #[test]
    fn parses_randers() {
        let e = parse_expr("sqrt(y1^2+y2^2) + 0.5*y1").unwrap();
        match e {
            Expr::Add(lhs, rhs) => {
                assert!(matches!(*lhs, Expr::Call(Func::Sqrt, _)));
                assert_eq!(
                    *rhs,
                    Expr::Mul(Box::new(Expr::Num(0.5)), Box::new(Expr::Var(2)))
                );
            }
            other => panic!("unexpected tree: {other:?}"),
        }
    }

    #[test]
    fn syntax_error_at_end_of_input() {
        let err = parse_expr("sqrt(y1^2 +").unwrap_err();
        assert!(err.message.contains("end of input") || err.message.contains("expected"));
        assert_eq!(err.line, 1);
        assert_eq!(err.column, 12);
    }

    #[test]
    fn error_carries_position() {
        let err = parse_expr("y1 + $").unwrap_err();
        assert_eq!((err.line, err.column), (1, 6));
    }

    #[test]
    fn unknown_function_rejected() {
        let err = parse_expr("tanh(y1)").unwrap_err();
        assert!(err.message.contains("unknown function"));
    }

    #[test]
    fn print_parse_roundtrip_builtin() {
        let src = "(sqrt((1-x1^2-x2^2)*(y1^2+y2^2) + (x1*y1+x2*y2)^2) + x1*y1 + x2*y2)/(1-x1^2-x2^2)";
        let e = parse_expr(src).unwrap();
        let printed = e.to_string();
        assert_eq!(parse_expr(&printed).unwrap(), e);
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            // negative literals print through Neg, not Num
            (0.0..4.0f64).prop_map(Expr::Num),
            (0usize..4).prop_map(Expr::Var),
            Just(Expr::Param("b".to_string())),
        ];
        leaf.prop_recursive(4, 32, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Expr::Add(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Expr::Sub(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Expr::Mul(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Expr::Div(Box::new(a), Box::new(b))),
                (inner.clone(), 1.0..4.0f64).prop_map(|(a, e)| Expr::Pow(Box::new(a), e)),
                inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
                inner.prop_map(|a| Expr::Call(Func::Sin, Box::new(a))),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_roundtrip(e in arb_expr()) {
            let printed = e.to_string();
            let reparsed = parse_expr(&printed).unwrap();
            prop_assert_eq!(reparsed, e);
        }
    }
}
