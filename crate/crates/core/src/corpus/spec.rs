//! The function-spec mini-language.
//!
//! ```text
//! spec   := name [":" params] ["(" spec ("," spec)* ")"]
//! params := param ("," param)*
//! param  := key "=" number | number
//! ```
//!
//! A comma after a parameter continues the parameter list only when it is
//! followed by a number or by `key =`; otherwise it separates sibling specs.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub const MAX_WEIERSTRASS_DEPTH: u32 = 40;
pub const MAX_POLY_DEGREE: usize = 16;
pub const MAX_ANTIDERIV: usize = 3;
pub const MAX_SIGN_POWER: u32 = 8;
pub const MAX_DIM: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub enum FnSpec {
    /// `Σ_{k<depth} 2^-k sin(2^k t)`.
    Weierstrass { depth: u32 },
    /// `x^p |x|^alpha`.
    PowerAbs { alpha: f64, p: u32 },
    /// `x log(1/|x|)`, extended by 0 at the origin.
    TLog,
    /// Ascending coefficients.
    Poly(Vec<f64>),
    Sin,
    Cos,
    Exp,
    /// Smooth bump supported on `[a, b]`.
    Bump { a: f64, b: f64 },
    /// `x` on `[-r, r]`, compactly supported in `[-2r, 2r]`.
    Cutoff { r: f64 },
    /// `m`-fold antiderivative with base point 0.
    Antideriv { m: usize, inner: Box<FnSpec> },
    /// `f(x) = Σ_j f_j(x_j)`.
    Tensor(Vec<FnSpec>),
}

impl FnSpec {
    pub fn dim(&self) -> usize {
        match self {
            FnSpec::Tensor(parts) => parts.len(),
            _ => 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::ParameterRange(msg));
        match self {
            FnSpec::Weierstrass { depth } => {
                if *depth == 0 || *depth > MAX_WEIERSTRASS_DEPTH {
                    return bad(format!("weierstrass depth must be in 1..={MAX_WEIERSTRASS_DEPTH}, got {depth}"));
                }
            }
            FnSpec::PowerAbs { alpha, p } => {
                if !(*alpha > 0.0 && *alpha <= 1.0) {
                    return bad(format!("power_abs alpha must be in (0, 1], got {alpha}"));
                }
                if *p > MAX_SIGN_POWER {
                    return bad(format!("power_abs p must be at most {MAX_SIGN_POWER}, got {p}"));
                }
            }
            FnSpec::Poly(c) => {
                if c.is_empty() || c.len() > MAX_POLY_DEGREE + 1 {
                    return bad(format!("polynomial degree must be at most {MAX_POLY_DEGREE}"));
                }
                if c.iter().any(|a| !a.is_finite()) {
                    return bad("polynomial coefficients must be finite".into());
                }
            }
            FnSpec::Bump { a, b } => {
                if !(a.is_finite() && b.is_finite() && a < b) {
                    return bad(format!("bump needs finite a < b, got a={a}, b={b}"));
                }
            }
            FnSpec::Cutoff { r } => {
                if !(r.is_finite() && *r > 0.0) {
                    return bad(format!("cutoff radius must be positive, got {r}"));
                }
            }
            FnSpec::Antideriv { m, inner } => {
                if *m == 0 || *m > MAX_ANTIDERIV {
                    return bad(format!("antideriv order must be in 1..={MAX_ANTIDERIV}, got {m}"));
                }
                if inner.dim() != 1 {
                    return Err(Error::Dimension("antiderivatives need a one-dimensional function".into()));
                }
                inner.validate()?;
            }
            FnSpec::Tensor(parts) => {
                if parts.is_empty() || parts.len() > MAX_DIM {
                    return Err(Error::Dimension(format!("tensor needs 1..={MAX_DIM} factors, got {}", parts.len())));
                }
                for p in parts {
                    if p.dim() != 1 {
                        return Err(Error::Dimension("tensor factors must be one-dimensional".into()));
                    }
                    p.validate()?;
                }
            }
            FnSpec::TLog | FnSpec::Sin | FnSpec::Cos | FnSpec::Exp => {}
        }
        Ok(())
    }
}

impl fmt::Display for FnSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FnSpec::Weierstrass { depth } => write!(f, "weierstrass:depth={depth}"),
            FnSpec::PowerAbs { alpha, p } => {
                write!(f, "power_abs:alpha={alpha}")?;
                if *p != 0 {
                    write!(f, ",p={p}")?;
                }
                Ok(())
            }
            FnSpec::TLog => f.write_str("tlog"),
            FnSpec::Poly(c) => {
                f.write_str("poly:")?;
                for (i, a) in c.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                Ok(())
            }
            FnSpec::Sin => f.write_str("sin"),
            FnSpec::Cos => f.write_str("cos"),
            FnSpec::Exp => f.write_str("exp"),
            FnSpec::Bump { a, b } => write!(f, "bump:a={a},b={b}"),
            FnSpec::Cutoff { r } => write!(f, "cutoff:r={r}"),
            FnSpec::Antideriv { m, inner } => write!(f, "antideriv:m={m}({inner})"),
            FnSpec::Tensor(parts) => {
                f.write_str("tensor(")?;
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{p}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl FromStr for FnSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let tokens = tokenize(s)?;
        let mut parser = Parser { tokens, pos: 0, len: s.len() };
        let spec = parser.spec()?;
        if let Some(tok) = parser.peek() {
            return Err(parser.error_at(tok, "trailing input"));
        }
        spec.validate()?;
        Ok(spec)
    }
}

impl Serialize for FnSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for FnSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Ident(String),
    Number(f64),
    Colon,
    Comma,
    Equals,
    Open,
    Close,
}

#[derive(Debug, Clone)]
struct Token {
    kind: Kind,
    text: String,
    pos: usize,
}

fn tokenize(s: &str) -> Result<Vec<Token>> {
    let bytes = s.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let kind = match c {
            ':' => Kind::Colon,
            ',' => Kind::Comma,
            '=' => Kind::Equals,
            '(' => Kind::Open,
            ')' => Kind::Close,
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push(Token {
                    kind: Kind::Ident(s[start..i].to_string()),
                    text: s[start..i].to_string(),
                    pos: start,
                });
                continue;
            }
            c if c.is_ascii_digit() || c == '-' || c == '+' || c == '.' => {
                i += 1;
                while i < bytes.len() {
                    let b = bytes[i];
                    let prev = bytes[i - 1];
                    let exp_sign = (b == b'-' || b == b'+') && (prev == b'e' || prev == b'E');
                    if b.is_ascii_digit() || b == b'.' || b == b'e' || b == b'E' || exp_sign {
                        i += 1;
                    } else {
                        break;
                    }
                }
                let text = &s[start..i];
                let value: f64 = text.parse().map_err(|_| Error::Parse {
                    position: start,
                    token: text.to_string(),
                    message: "malformed number".into(),
                })?;
                out.push(Token {
                    kind: Kind::Number(value),
                    text: text.to_string(),
                    pos: start,
                });
                continue;
            }
            _ => {
                let ch = s[start..].chars().next().unwrap_or(c);
                return Err(Error::Parse {
                    position: start,
                    token: ch.to_string(),
                    message: "unexpected character".into(),
                });
            }
        };
        i += 1;
        out.push(Token {
            kind,
            text: s[start..i].to_string(),
            pos: start,
        });
    }
    Ok(out)
}

enum Param {
    Keyed(String, f64, Token),
    Positional(f64, Token),
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

    fn peek_kind(&self, ahead: usize) -> Option<&Kind> {
        self.tokens.get(self.pos + ahead).map(|t| &t.kind)
    }

    fn error_at(&self, tok: &Token, message: &str) -> Error {
        Error::Parse {
            position: tok.pos,
            token: tok.text.clone(),
            message: message.into(),
        }
    }

    fn error_here(&self, message: &str) -> Error {
        match self.peek() {
            Some(tok) => self.error_at(tok, message),
            None => Error::Parse {
                position: self.len,
                token: "<end>".into(),
                message: message.into(),
            },
        }
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect(&mut self, kind: Kind, what: &str) -> Result<Token> {
        match self.peek() {
            Some(t) if t.kind == kind => Ok(self.next().unwrap()),
            _ => Err(self.error_here(&format!("expected {what}"))),
        }
    }

    fn params(&mut self) -> Result<Vec<Param>> {
        let mut out = Vec::new();
        loop {
            let tok = self.next().ok_or_else(|| self.error_here("expected parameter"))?;
            match tok.kind.clone() {
                Kind::Number(v) => out.push(Param::Positional(v, tok)),
                Kind::Ident(key) => {
                    self.expect(Kind::Equals, "`=` after parameter key")?;
                    let val = self.next();
                    match val {
                        Some(Token {
                            kind: Kind::Number(v), ..
                        }) => out.push(Param::Keyed(key, v, tok)),
                        _ => {
                            self.pos -= 1;
                            return Err(self.error_here("expected number"));
                        }
                    }
                }
                _ => return Err(self.error_at(&tok, "expected parameter")),
            }
            let continues = matches!(self.peek_kind(0), Some(Kind::Comma))
                && match self.peek_kind(1) {
                    Some(Kind::Number(_)) => true,
                    Some(Kind::Ident(_)) => matches!(self.peek_kind(2), Some(Kind::Equals)),
                    _ => false,
                };
            if !continues {
                return Ok(out);
            }
            self.next();
        }
    }

    fn spec(&mut self) -> Result<FnSpec> {
        let name_tok = self.next().ok_or_else(|| self.error_here("expected function name"))?;
        let Kind::Ident(name) = name_tok.kind.clone() else {
            return Err(self.error_at(&name_tok, "expected function name"));
        };
        let params = if matches!(self.peek_kind(0), Some(Kind::Colon)) {
            self.next();
            self.params()?
        } else {
            Vec::new()
        };
        let mut children = Vec::new();
        if matches!(self.peek_kind(0), Some(Kind::Open)) {
            self.next();
            loop {
                children.push(self.spec()?);
                match self.peek_kind(0) {
                    Some(Kind::Comma) => {
                        self.next();
                    }
                    Some(Kind::Close) => {
                        self.next();
                        break;
                    }
                    _ => return Err(self.error_here("expected `,` or `)`")),
                }
            }
        }
        build(&name, &name_tok, params, children)
    }
}

fn key_error(tok: &Token, message: String) -> Error {
    Error::Parse {
        position: tok.pos,
        token: tok.text.clone(),
        message,
    }
}

/// Collects keyed parameters, rejecting unknown keys, duplicates and positional values.
fn keyed(name: &str, params: Vec<Param>, allowed: &[&str]) -> Result<Vec<(String, f64, Token)>> {
    let mut out: Vec<(String, f64, Token)> = Vec::new();
    for p in params {
        match p {
            Param::Keyed(k, v, tok) => {
                if !allowed.contains(&k.as_str()) {
                    return Err(key_error(&tok, format!("unknown key `{k}` for {name}")));
                }
                if out.iter().any(|(seen, _, _)| *seen == k) {
                    return Err(key_error(&tok, format!("duplicate key `{k}`")));
                }
                out.push((k, v, tok));
            }
            Param::Positional(_, tok) => {
                return Err(key_error(&tok, format!("{name} takes keyed parameters only")));
            }
        }
    }
    Ok(out)
}

fn get(params: &[(String, f64, Token)], key: &str) -> Option<(f64, Token)> {
    params.iter().find(|(k, _, _)| k == key).map(|(_, v, t)| (*v, t.clone()))
}

fn integer(value: f64, tok: &Token) -> Result<u32> {
    if value.fract() != 0.0 || !(0.0..=u32::MAX as f64).contains(&value) {
        return Err(key_error(tok, "expected a nonnegative integer".into()));
    }
    Ok(value as u32)
}

fn build(name: &str, name_tok: &Token, params: Vec<Param>, children: Vec<FnSpec>) -> Result<FnSpec> {
    let leaf = |children: &Vec<FnSpec>| -> Result<()> {
        if children.is_empty() {
            Ok(())
        } else {
            Err(key_error(name_tok, format!("{name} takes no arguments")))
        }
    };
    let no_params = |params: &Vec<Param>| -> Result<()> {
        match params.first() {
            None => Ok(()),
            Some(Param::Keyed(_, _, tok)) | Some(Param::Positional(_, tok)) => {
                Err(key_error(tok, format!("{name} takes no parameters")))
            }
        }
    };
    let spec = match name {
        "weierstrass" => {
            leaf(&children)?;
            let kv = keyed(name, params, &["depth"])?;
            let depth = match get(&kv, "depth") {
                Some((v, tok)) => integer(v, &tok)?,
                None => 20,
            };
            FnSpec::Weierstrass { depth }
        }
        "power_abs" => {
            leaf(&children)?;
            let kv = keyed(name, params, &["alpha", "p"])?;
            let alpha = get(&kv, "alpha")
                .map(|(v, _)| v)
                .ok_or_else(|| key_error(name_tok, "power_abs requires `alpha`".into()))?;
            let p = match get(&kv, "p") {
                Some((v, tok)) => integer(v, &tok)?,
                None => 0,
            };
            FnSpec::PowerAbs { alpha, p }
        }
        "tlog" | "sin" | "cos" | "exp" | "zero" => {
            leaf(&children)?;
            no_params(&params)?;
            match name {
                "tlog" => FnSpec::TLog,
                "sin" => FnSpec::Sin,
                "cos" => FnSpec::Cos,
                "exp" => FnSpec::Exp,
                _ => FnSpec::Poly(vec![0.0]),
            }
        }
        "poly" => {
            leaf(&children)?;
            let mut coeffs = Vec::new();
            for p in params {
                match p {
                    Param::Positional(v, _) => coeffs.push(v),
                    Param::Keyed(k, _, tok) => return Err(key_error(&tok, format!("unknown key `{k}` for poly"))),
                }
            }
            if coeffs.is_empty() {
                return Err(key_error(name_tok, "poly needs at least one coefficient".into()));
            }
            FnSpec::Poly(coeffs)
        }
        "bump" => {
            leaf(&children)?;
            let kv = keyed(name, params, &["a", "b"])?;
            FnSpec::Bump {
                a: get(&kv, "a").map_or(-1.0, |(v, _)| v),
                b: get(&kv, "b").map_or(1.0, |(v, _)| v),
            }
        }
        "cutoff" => {
            leaf(&children)?;
            let kv = keyed(name, params, &["r"])?;
            FnSpec::Cutoff {
                r: get(&kv, "r").map_or(1.0, |(v, _)| v),
            }
        }
        "antideriv" => {
            let kv = keyed(name, params, &["m"])?;
            let m = match get(&kv, "m") {
                Some((v, tok)) => integer(v, &tok)? as usize,
                None => 1,
            };
            let mut children = children;
            if children.len() != 1 {
                return Err(key_error(name_tok, "antideriv takes exactly one argument".into()));
            }
            FnSpec::Antideriv {
                m,
                inner: Box::new(children.pop().unwrap()),
            }
        }
        "tensor" => {
            no_params(&params)?;
            if children.is_empty() {
                return Err(key_error(name_tok, "tensor needs at least one factor".into()));
            }
            FnSpec::Tensor(children)
        }
        _ => return Err(key_error(name_tok, format!("unknown function `{name}`"))),
    };
    Ok(spec)
}
