//! Multivariate polynomials with real coefficients and a small expression
//! grammar for writing them:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary ('*' unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' integer)?
//! atom   := number | 'x' index | '(' expr ')'
//! ```
//!
//! Variables are `x1 .. xn` (1-based).

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

/// Sparse polynomial: exponent vector → coefficient. Zero coefficients are
/// never stored.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    /// The coordinate function `x_{index+1}` (0-based `index`).
    pub fn var(nvars: usize, index: usize) -> Self {
        let mut e = vec![0; nvars];
        e[index] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(e, 1.0);
        p
    }

    /// `Σ coeffs[i] x_{i+1}`.
    pub fn linear(coeffs: &[f64]) -> Self {
        let n = coeffs.len();
        let mut p = Self::zero(n);
        for (i, &c) in coeffs.iter().enumerate() {
            let mut e = vec![0; n];
            e[i] = 1;
            p.add_term(e, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], f64)> {
        self.terms.iter().map(|(e, &c)| (e.as_slice(), c))
    }

    fn add_term(&mut self, exps: Vec<u32>, c: f64) {
        if c == 0.0 {
            return;
        }
        let v = self.terms.get(&exps).copied().unwrap_or(0.0) + c;
        if v == 0.0 {
            self.terms.remove(&exps);
        } else {
            self.terms.insert(exps, v);
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert!(x.len() >= self.nvars);
        self.terms
            .iter()
            .map(|(e, &c)| e.iter().zip(x).fold(c, |acc, (&k, &xi)| if k == 0 { acc } else { acc * xi.powi(k as i32) }))
            .sum()
    }

    /// Exact partial derivative with respect to `x_{k+1}`.
    pub fn partial(&self, k: usize) -> Polynomial {
        let mut out = Polynomial::zero(self.nvars);
        for (e, &c) in &self.terms {
            if e[k] == 0 {
                continue;
            }
            let mut d = e.clone();
            d[k] -= 1;
            out.add_term(d, c * e[k] as f64);
        }
        out
    }

    /// Coefficients `(a_1..a_n)` if the polynomial is exactly `Σ a_i x_i`.
    pub fn homogeneous_linear_coefficients(&self) -> Option<Vec<f64>> {
        let mut out = vec![0.0; self.nvars];
        for (e, &c) in &self.terms {
            if e.iter().sum::<u32>() != 1 {
                return None;
            }
            let i = e.iter().position(|&k| k == 1).expect("degree one");
            out[i] = c;
        }
        Some(out)
    }

    pub fn scale(&self, s: f64) -> Polynomial {
        let mut out = Polynomial::zero(self.nvars);
        for (e, &c) in &self.terms {
            out.add_term(e.clone(), c * s);
        }
        out
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        out.nvars = self.nvars.max(other.nvars);
        for (e, &c) in &other.terms {
            out.add_term(e.clone(), c);
        }
        out
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero(self.nvars.max(other.nvars));
        for (ea, &ca) in &self.terms {
            for (eb, &cb) in &other.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Polynomial {
        let mut out = Polynomial::constant(self.nvars, 1.0);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// Parses `src` as a polynomial in `x1 .. x{nvars}`.
    pub fn parse(src: &str, nvars: usize) -> Result<Polynomial> {
        let tokens = lex(src)?;
        let mut p = Parser { tokens, pos: 0, nvars, src_len: src.len() };
        let out = p.expr()?;
        if let Some(tok) = p.tokens.get(p.pos) {
            return Err(Error::Parse { position: tok.at, message: format!("unexpected {:?}", tok.kind) });
        }
        Ok(out)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (e, &c)) in self.terms.iter().enumerate() {
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| if k == 1 { format!("x{}", i + 1) } else { format!("x{}^{k}", i + 1) })
                .collect();
            let sign = if c < 0.0 { "-" } else if n > 0 { "+" } else { "" };
            let sep = if n > 0 { " " } else { "" };
            let mag = c.abs();
            if mono.is_empty() {
                write!(f, "{sep}{sign}{sep}{mag}")?;
            } else if mag == 1.0 {
                write!(f, "{sep}{sign}{sep}{}", mono.join("*"))?;
            } else {
                write!(f, "{sep}{sign}{sep}{mag}*{}", mono.join("*"))?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum TokKind {
    Num(f64),
    Var(usize),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

#[derive(Debug, Clone)]
struct Tok {
    kind: TokKind,
    at: usize,
}

fn lex(src: &str) -> Result<Vec<Tok>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let at = i;
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
                continue;
            }
            '+' => out.push(Tok { kind: TokKind::Plus, at }),
            '-' => out.push(Tok { kind: TokKind::Minus, at }),
            '*' => out.push(Tok { kind: TokKind::Star, at }),
            '^' => out.push(Tok { kind: TokKind::Caret, at }),
            '(' => out.push(Tok { kind: TokKind::LParen, at }),
            ')' => out.push(Tok { kind: TokKind::RParen, at }),
            'x' => {
                let start = i + 1;
                let mut j = start;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                if j == start {
                    return Err(Error::Parse { position: at, message: "expected variable index after 'x'".into() });
                }
                let idx: usize = src[start..j]
                    .parse()
                    .map_err(|_| Error::Parse { position: start, message: "bad variable index".into() })?;
                out.push(Tok { kind: TokKind::Var(idx), at });
                i = j;
                continue;
            }
            d if d.is_ascii_digit() || d == '.' => {
                let mut j = i;
                while j < bytes.len() && (bytes[j].is_ascii_digit() || bytes[j] == b'.') {
                    j += 1;
                }
                if j < bytes.len() && (bytes[j] == b'e' || bytes[j] == b'E') {
                    let mut k = j + 1;
                    if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                        k += 1;
                    }
                    if k < bytes.len() && bytes[k].is_ascii_digit() {
                        while k < bytes.len() && bytes[k].is_ascii_digit() {
                            k += 1;
                        }
                        j = k;
                    }
                }
                let v: f64 = src[i..j]
                    .parse()
                    .map_err(|_| Error::Parse { position: at, message: format!("bad number '{}'", &src[i..j]) })?;
                out.push(Tok { kind: TokKind::Num(v), at });
                i = j;
                continue;
            }
            other => {
                return Err(Error::Parse { position: at, message: format!("unexpected character '{other}'") });
            }
        }
        i += 1;
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Tok>,
    pos: usize,
    nvars: usize,
    src_len: usize,
}

impl Parser {
    fn peek(&self) -> Option<&TokKind> {
        self.tokens.get(self.pos).map(|t| &t.kind)
    }

    fn here(&self) -> usize {
        self.tokens.get(self.pos).map(|t| t.at).unwrap_or(self.src_len)
    }

    fn expr(&mut self) -> Result<Polynomial> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(TokKind::Plus) => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                Some(TokKind::Minus) => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?.scale(-1.0));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial> {
        let mut acc = self.unary()?;
        while let Some(TokKind::Star) = self.peek() {
            self.pos += 1;
            acc = acc.mul(&self.unary()?);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Polynomial> {
        if let Some(TokKind::Minus) = self.peek() {
            self.pos += 1;
            return Ok(self.unary()?.scale(-1.0));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Polynomial> {
        let base = self.atom()?;
        if let Some(TokKind::Caret) = self.peek() {
            self.pos += 1;
            let at = self.here();
            match self.peek().cloned() {
                Some(TokKind::Num(v)) if v >= 0.0 && v.fract() == 0.0 && v <= 64.0 => {
                    self.pos += 1;
                    return Ok(base.pow(v as u32));
                }
                _ => {
                    return Err(Error::Parse { position: at, message: "exponent must be a non-negative integer".into() })
                }
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Polynomial> {
        let at = self.here();
        match self.peek().cloned() {
            Some(TokKind::Num(v)) => {
                self.pos += 1;
                Ok(Polynomial::constant(self.nvars, v))
            }
            Some(TokKind::Var(i)) => {
                self.pos += 1;
                if i == 0 || i > self.nvars {
                    return Err(Error::Parse {
                        position: at,
                        message: format!("variable x{i} out of range x1..x{}", self.nvars),
                    });
                }
                Ok(Polynomial::var(self.nvars, i - 1))
            }
            Some(TokKind::LParen) => {
                self.pos += 1;
                let inner = self.expr()?;
                match self.peek() {
                    Some(TokKind::RParen) => {
                        self.pos += 1;
                        Ok(inner)
                    }
                    _ => Err(Error::Parse { position: self.here(), message: "expected ')'".into() }),
                }
            }
            Some(other) => Err(Error::Parse { position: at, message: format!("unexpected {other:?}") }),
            None => Err(Error::Parse { position: at, message: "unexpected end of input".into() }),
        }
    }
}
