//! The expression mini-language.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! query   := '[' sum 'lam' sum ']' | sum 'o(' int ')' sum | sum '_(' int ')' sum | sum
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | 'd^' int unary | power
//! power   := primary ('^' int)?
//! primary := int | 'i' | genref | coordinate | 'exp(i*' int '*' angle ')'
//!          | '(' sum ')' | ':' unary+ ':'
//! ```
//!
//! `*` is the Wick product (for scalars and functions it is the ordinary
//! product), `:a b c:` is the right-nested Wick product, and `/` only divides
//! by constants. Generator references are `b[i]`, `c[i]`, `beta[i]`,
//! `gamma[i]`, `dgamma[i,k]` or any abstract generator name.

use crate::coeff::CoeffFn;
use crate::scalar::Scalar;
use crate::va::{ExprPrinter, FieldExpr, GenKind, LambdaPoly, VaContext, VaError};
use num::{BigInt, BigRational, Zero};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error("syntax error at column {}: {msg}", pos + 1)]
    Syntax { pos: usize, msg: String },
    #[error("unbalanced normal-order delimiter opened at column {}", pos + 1)]
    UnbalancedColon { pos: usize },
    #[error("unknown generator `{name}` at column {}", pos + 1)]
    UnknownGenerator { pos: usize, name: String },
    #[error("division by a non-constant or zero at column {}", pos + 1)]
    BadDivisor { pos: usize },
    #[error("at column {}: {source}", pos + 1)]
    Va { pos: usize, source: VaError },
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    LBracket,
    RBracket,
    LParen,
    RParen,
    Colon,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Comma,
    ModeOpen,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (pos, ch) = chars[i];
        let next = chars.get(i + 1).map(|c| c.1);
        let simple = match ch {
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ':' => Some(Tok::Colon),
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            ',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(t) = simple {
            out.push((t, pos));
            i += 1;
        } else if ch.is_whitespace() {
            i += 1;
        } else if ch == '_' && next == Some('(') {
            out.push((Tok::ModeOpen, pos));
            i += 2;
        } else if ch.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].1.is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().map(|c| c.1).collect();
            out.push((Tok::Int(s.parse().expect("digits")), pos));
        } else if ch.is_alphabetic() {
            let start = i;
            while i < chars.len() {
                let c = chars[i].1;
                let mode_open = c == '_' && chars.get(i + 1).map(|c| c.1) == Some('(');
                if (c.is_alphanumeric() || c == '_') && !mode_open {
                    i += 1;
                } else {
                    break;
                }
            }
            let s: String = chars[start..i].iter().map(|c| c.1).collect();
            out.push((Tok::Ident(s), pos));
        } else {
            return Err(ExprError::Syntax {
                pos,
                msg: format!("unexpected character `{ch}`"),
            });
        }
    }
    Ok(out)
}

/// Parse tree of an expression. Names are resolved against a context only
/// when lowering.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Int(BigInt),
    Imag,
    /// A generator or coordinate name with optional bracketed indices.
    Name { name: String, indices: Vec<u32>, pos: usize },
    Fourier { k: i64, coord: String, pos: usize },
    Neg(Box<Expr>),
    Deriv(u32, Box<Expr>),
    Pow(Box<Expr>, u32),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>, usize),
    /// `:a₁ ⋯ a_k:`, right-nested.
    Normal(Vec<Expr>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Query {
    Value(Expr),
    Bracket(Expr, Expr),
    Circle(Expr, i64, Expr),
    Mode(Expr, i64, Expr),
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.0)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.at + k).map(|t| &t.0)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map(|t| t.1).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|t| t.0.clone());
        self.at += 1;
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError::Syntax {
            pos: self.pos(),
            msg: msg.into(),
        })
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), ExprError> {
        if self.peek() == Some(&t) {
            self.at += 1;
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn uint(&mut self) -> Result<u32, ExprError> {
        match self.peek() {
            Some(Tok::Int(v)) => {
                let v = u32::try_from(v.clone());
                match v {
                    Ok(v) => {
                        self.at += 1;
                        Ok(v)
                    }
                    Err(_) => self.err("integer too large"),
                }
            }
            _ => self.err("expected an integer"),
        }
    }

    fn sint(&mut self) -> Result<i64, ExprError> {
        let neg = self.peek() == Some(&Tok::Minus);
        if neg {
            self.at += 1;
        }
        let v = self.uint()? as i64;
        Ok(if neg { -v } else { v })
    }

    fn query(&mut self) -> Result<Query, ExprError> {
        if self.peek() == Some(&Tok::LBracket) {
            self.at += 1;
            let a = self.sum()?;
            match self.bump() {
                Some(Tok::Ident(s)) if s == "lam" => {}
                _ => {
                    self.at -= 1;
                    return self.err("expected `lam`");
                }
            }
            let b = self.sum()?;
            self.expect(Tok::RBracket, "`]`")?;
            return Ok(Query::Bracket(a, b));
        }
        let a = self.sum()?;
        match (self.peek(), self.peek_at(1)) {
            (Some(Tok::Ident(o)), Some(Tok::LParen)) if o == "o" => {
                self.at += 2;
                let n = self.sint()?;
                self.expect(Tok::RParen, "`)`")?;
                let b = self.sum()?;
                Ok(Query::Circle(a, n, b))
            }
            (Some(Tok::ModeOpen), _) => {
                self.at += 1;
                let n = self.sint()?;
                self.expect(Tok::RParen, "`)`")?;
                let b = self.sum()?;
                Ok(Query::Mode(a, n, b))
            }
            _ => Ok(Query::Value(a)),
        }
    }

    fn sum(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.product()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.at += 1;
                    acc = Expr::Add(Box::new(acc), Box::new(self.product()?));
                }
                Some(Tok::Minus) => {
                    self.at += 1;
                    acc = Expr::Sub(Box::new(acc), Box::new(self.product()?));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn product(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.at += 1;
                    acc = Expr::Mul(Box::new(acc), Box::new(self.unary()?));
                }
                Some(Tok::Slash) => {
                    let pos = self.pos();
                    self.at += 1;
                    acc = Expr::Div(Box::new(acc), Box::new(self.unary()?), pos);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        match (self.peek(), self.peek_at(1)) {
            (Some(Tok::Minus), _) => {
                self.at += 1;
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            (Some(Tok::Ident(d)), Some(Tok::Caret)) if d == "d" => {
                self.at += 2;
                let k = self.uint()?;
                Ok(Expr::Deriv(k, Box::new(self.unary()?)))
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.primary()?;
        if self.peek() == Some(&Tok::Caret) {
            self.at += 1;
            let k = self.uint()?;
            return Ok(Expr::Pow(Box::new(base), k));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        let pos = self.pos();
        match self.peek().cloned() {
            Some(Tok::Int(v)) => {
                self.at += 1;
                Ok(Expr::Int(v))
            }
            Some(Tok::LParen) => {
                self.at += 1;
                let e = self.sum()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Some(Tok::Colon) => {
                self.at += 1;
                let mut items = Vec::new();
                loop {
                    match self.peek() {
                        None => return Err(ExprError::UnbalancedColon { pos }),
                        Some(Tok::Colon) if !items.is_empty() => {
                            self.at += 1;
                            return Ok(Expr::Normal(items));
                        }
                        Some(Tok::Colon) => return self.err("empty normal-ordered product"),
                        _ => items.push(self.unary()?),
                    }
                }
            }
            Some(Tok::Ident(s)) if s == "exp" => {
                self.at += 1;
                self.expect(Tok::LParen, "`(`")?;
                let neg = self.peek() == Some(&Tok::Minus);
                if neg {
                    self.at += 1;
                }
                match self.bump() {
                    Some(Tok::Ident(s)) if s == "i" => {}
                    _ => {
                        self.at -= 1;
                        return self.err("expected `i` in a Fourier factor");
                    }
                }
                self.expect(Tok::Star, "`*`")?;
                let mut k = 1;
                if !matches!(self.peek(), Some(Tok::Ident(_))) {
                    k = self.sint()?;
                    self.expect(Tok::Star, "`*`")?;
                }
                if neg {
                    k = -k;
                }
                let cpos = self.pos();
                let coord = match self.bump() {
                    Some(Tok::Ident(s)) => s,
                    _ => {
                        self.at -= 1;
                        return self.err("expected an angular coordinate");
                    }
                };
                self.expect(Tok::RParen, "`)`")?;
                Ok(Expr::Fourier { k, coord, pos: cpos })
            }
            Some(Tok::Ident(s)) if s == "i" => {
                self.at += 1;
                Ok(Expr::Imag)
            }
            Some(Tok::Ident(name)) => {
                self.at += 1;
                let mut indices = Vec::new();
                if self.peek() == Some(&Tok::LBracket) {
                    self.at += 1;
                    indices.push(self.uint()?);
                    while self.peek() == Some(&Tok::Comma) {
                        self.at += 1;
                        indices.push(self.uint()?);
                    }
                    self.expect(Tok::RBracket, "`]`")?;
                }
                Ok(Expr::Name { name, indices, pos })
            }
            Some(_) => self.err("unexpected token"),
            None => self.err("unexpected end of input"),
        }
    }
}

/// Parses a query (a plain expression or a bracket, circle or mode query).
pub fn parse_query(text: &str) -> Result<Query, ExprError> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
        end: text.len(),
    };
    if p.peek().is_none() {
        return p.err("empty expression");
    }
    let q = p.query()?;
    if p.peek().is_some() {
        return p.err("unexpected trailing input");
    }
    Ok(q)
}

/// Parses a plain expression; queries are rejected.
pub fn parse_expr(text: &str) -> Result<Expr, ExprError> {
    match parse_query(text)? {
        Query::Value(e) => Ok(e),
        _ => Err(ExprError::Syntax {
            pos: 0,
            msg: "expected an expression, found a query".into(),
        }),
    }
}

fn va(pos: usize) -> impl Fn(VaError) -> ExprError {
    move |source| ExprError::Va { pos, source }
}

fn first_pos(e: &Expr) -> usize {
    match e {
        Expr::Name { pos, .. } | Expr::Fourier { pos, .. } | Expr::Div(_, _, pos) => *pos,
        Expr::Neg(a) | Expr::Deriv(_, a) | Expr::Pow(a, _) => first_pos(a),
        Expr::Add(a, _) | Expr::Sub(a, _) | Expr::Mul(a, _) => first_pos(a),
        Expr::Normal(v) => v.first().map(first_pos).unwrap_or(0),
        Expr::Int(_) | Expr::Imag => 0,
    }
}

fn resolve(ctx: &VaContext, name: &str, indices: &[u32], pos: usize) -> Result<FieldExpr, ExprError> {
    let unknown = || ExprError::UnknownGenerator {
        pos,
        name: if indices.is_empty() {
            name.to_string()
        } else {
            let ix: Vec<String> = indices.iter().map(|i| i.to_string()).collect();
            format!("{name}[{}]", ix.join(","))
        },
    };
    if name == "dgamma" {
        let [i, k] = indices else { return Err(unknown()) };
        let g = (*i as usize)
            .checked_sub(1)
            .and_then(|i| ctx.field_id(GenKind::Gamma, i))
            .ok_or_else(unknown)?;
        let k = u16::try_from(*k).map_err(|_| unknown())?;
        return ctx.jet(g, k).map_err(va(pos));
    }
    let full = match indices {
        [] => name.to_string(),
        [i] => format!("{name}[{i}]"),
        _ => return Err(unknown()),
    };
    if let Ok(g) = ctx.gen_id(&full) {
        return ctx.gen(g).map_err(va(pos));
    }
    if indices.is_empty() {
        if let Some(id) = ctx.coords().id_of(name) {
            let (n, m) = ctx.dims();
            if ctx.coords().is_angular(id) {
                return Err(va(pos)(VaError::AngularCoordinate(name.to_string())));
            }
            let f = CoeffFn::flat_coord(n, m, id).map_err(|e| va(pos)(e.into()))?;
            return Ok(FieldExpr::function(ctx, f));
        }
    }
    Err(unknown())
}

/// Lowers a parse tree to a canonical element of `ctx`.
pub fn lower(ctx: &VaContext, e: &Expr) -> Result<FieldExpr, ExprError> {
    let p = first_pos(e);
    match e {
        Expr::Int(v) => Ok(FieldExpr::constant(
            ctx,
            Scalar::new(BigRational::from_integer(v.clone()), BigRational::zero()),
        )),
        Expr::Imag => Ok(FieldExpr::constant(ctx, Scalar::i())),
        Expr::Name { name, indices, pos } => resolve(ctx, name, indices, *pos),
        Expr::Fourier { k, coord, pos } => {
            let (n, m) = ctx.dims();
            let id = ctx
                .coords()
                .id_of(coord)
                .filter(|&id| ctx.coords().is_angular(id))
                .ok_or_else(|| ExprError::UnknownGenerator {
                    pos: *pos,
                    name: coord.clone(),
                })?;
            let f = CoeffFn::fourier(n, m, id - n, *k).map_err(|e| va(*pos)(e.into()))?;
            Ok(FieldExpr::function(ctx, f))
        }
        Expr::Neg(a) => Ok(lower(ctx, a)?.neg()),
        Expr::Deriv(k, a) => {
            let mut x = lower(ctx, a)?;
            for _ in 0..*k {
                x = ctx.derivative(&x).map_err(va(p))?;
            }
            Ok(x)
        }
        Expr::Pow(a, k) => {
            let x = lower(ctx, a)?;
            let items = vec![x; *k as usize];
            ctx.wick_all(&items).map_err(va(p))
        }
        Expr::Add(a, b) => Ok(lower(ctx, a)?.add(&lower(ctx, b)?)),
        Expr::Sub(a, b) => Ok(lower(ctx, a)?.sub(&lower(ctx, b)?)),
        Expr::Mul(a, b) => {
            let (x, y) = (lower(ctx, a)?, lower(ctx, b)?);
            ctx.wick(&x, &y).map_err(va(p))
        }
        Expr::Div(a, b, pos) => {
            let inv = lower(ctx, b)?
                .as_constant()
                .and_then(|c| c.inv())
                .ok_or(ExprError::BadDivisor { pos: *pos })?;
            Ok(lower(ctx, a)?.scale(&inv))
        }
        Expr::Normal(items) => {
            let xs = items
                .iter()
                .map(|x| lower(ctx, x))
                .collect::<Result<Vec<_>, _>>()?;
            ctx.wick_all(&xs).map_err(va(p))
        }
    }
}

/// Parses and lowers a plain expression.
pub fn parse_field(ctx: &VaContext, text: &str) -> Result<FieldExpr, ExprError> {
    lower(ctx, &parse_expr(text)?)
}

/// The value of an evaluated query.
#[derive(Clone, Debug, PartialEq)]
pub enum QueryValue {
    Field(FieldExpr),
    Bracket(LambdaPoly),
}

pub fn evaluate(ctx: &VaContext, q: &Query) -> Result<QueryValue, ExprError> {
    let pair = |a: &Expr, b: &Expr| -> Result<(FieldExpr, FieldExpr), ExprError> {
        Ok((lower(ctx, a)?, lower(ctx, b)?))
    };
    match q {
        Query::Value(e) => Ok(QueryValue::Field(lower(ctx, e)?)),
        Query::Bracket(a, b) => {
            let (x, y) = pair(a, b)?;
            let lp = ctx.lambda_bracket(&x, &y).map_err(va(first_pos(a)))?;
            Ok(QueryValue::Bracket(lp))
        }
        Query::Circle(a, n, b) => {
            let (x, y) = pair(a, b)?;
            Ok(QueryValue::Field(ctx.circle(&x, *n, &y).map_err(va(first_pos(a)))?))
        }
        Query::Mode(a, n, b) => {
            let (x, y) = pair(a, b)?;
            Ok(QueryValue::Field(ctx.mode(&x, *n, &y).map_err(va(first_pos(a)))?))
        }
    }
}

/// Renders a query value. A bracket is shown as `lam^(k): a∘ₖb` per nonzero
/// entry, where `lam^(k)` stands for `λᵏ/k!`.
pub fn render_value(ctx: &VaContext, v: &QueryValue) -> String {
    let pr = ExprPrinter::new(ctx);
    match v {
        QueryValue::Field(e) => pr.print(e),
        QueryValue::Bracket(lp) => {
            let parts: Vec<String> = lp
                .entries
                .iter()
                .enumerate()
                .filter(|(_, e)| !e.is_zero())
                .map(|(k, e)| format!("lam^({k}): {}", pr.print(e)))
                .collect();
            if parts.is_empty() {
                "0".into()
            } else {
                parts.join("; ")
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Int(v) => write!(f, "{v}"),
            Expr::Imag => write!(f, "i"),
            Expr::Name { name, indices, .. } if indices.is_empty() => write!(f, "{name}"),
            Expr::Name { name, indices, .. } => {
                let ix: Vec<String> = indices.iter().map(|i| i.to_string()).collect();
                write!(f, "{name}[{}]", ix.join(","))
            }
            Expr::Fourier { k, coord, .. } => write!(f, "exp(i*{k}*{coord})"),
            Expr::Neg(a) => write!(f, "-({a})"),
            Expr::Deriv(k, a) => write!(f, "d^{k} ({a})"),
            Expr::Pow(a, k) => write!(f, "({a})^{k}"),
            Expr::Add(a, b) => write!(f, "{a} + {b}"),
            Expr::Sub(a, b) => write!(f, "{a} - ({b})"),
            Expr::Mul(a, b) => write!(f, "({a})*({b})"),
            Expr::Div(a, b, _) => write!(f, "({a})/({b})"),
            Expr::Normal(items) => {
                let s: Vec<String> = items.iter().map(|x| format!("({x})")).collect();
                write!(f, ":{}:", s.join(" "))
            }
        }
    }
}

