//! Bracket notation for divisor classes.
//!
//! `[d; m^c, ...]` is `dL - sum m_i E_i` on a blown-up plane and
//! `[(p,q)_k; m^c, ...]` is `pB + qF - sum m_i E_i` on a blown-up F_e, where
//! `p` and `q` may be affine in `e` (`4-2e`). The `_k` annotation is kept
//! verbatim and has no meaning here.
//!
//! Grammar (whitespace ignored, `−` accepted for `-`):
//!
//! ```text
//! type   := "[" head (";" mults)? "]"
//! head   := int | "(" affine "," affine ")" ("_" int)?
//! affine := term (("+" | "-") term)?
//! term   := "-"? (int ("/" int)? "e"? | "e")
//! mults  := int ("^" int)? ("," int ("^" int)?)*
//! ```
//!
//! A fractional slope (`4-3/2e`) is accepted; it only resolves for the `e`
//! that make it integral.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::picard::{DivisorClass, PicardError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at column {column}: {message}")]
pub struct ParseError {
    /// 1-based character column in the input.
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConversionError {
    #[error("ruled type {0} needs an explicit e")]
    UnresolvedE(String),
    #[error("{expr} is not an integer at e = {e}")]
    NonIntegral { expr: String, e: u32 },
    #[error("exceptional coefficient {value} at E_{index} is positive; only the signed form can show it")]
    PositiveCoefficient { index: usize, value: i64 },
    #[error(transparent)]
    Lattice(#[from] PicardError),
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `constant + (num/den) e` with `den > 0` and the slope in lowest terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Affine {
    constant: i64,
    num: i64,
    den: i64,
}

impl Affine {
    pub fn new(constant: i64, num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        let g = gcd(num, den).max(1);
        let s = if den < 0 { -1 } else { 1 };
        Affine {
            constant,
            num: s * num / g,
            den: s * den / g,
        }
    }

    pub fn constant(c: i64) -> Self {
        Affine::new(c, 0, 1)
    }

    /// `c + k e` with integer slope.
    pub fn linear(c: i64, k: i64) -> Self {
        Affine::new(c, k, 1)
    }

    pub fn constant_term(&self) -> i64 {
        self.constant
    }

    /// Slope as (numerator, denominator).
    pub fn slope(&self) -> (i64, i64) {
        (self.num, self.den)
    }

    pub fn is_constant(&self) -> bool {
        self.num == 0
    }

    pub fn eval(&self, e: u32) -> Option<i64> {
        let t = self.num.checked_mul(e as i64)?;
        if t % self.den != 0 {
            return None;
        }
        self.constant.checked_add(t / self.den)
    }

    /// `self + c + k e`.
    pub fn shift(&self, c: i64, k: i64) -> Self {
        Affine::new(self.constant + c, self.num + k * self.den, self.den)
    }
}

impl FromStr for Affine {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Parser::new(s).parse_affine()
    }
}

impl Serialize for Affine {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl fmt::Display for Affine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.num == 0 {
            return write!(f, "{}", self.constant);
        }
        let mag = self.num.abs();
        let coef = match (mag, self.den) {
            (1, 1) => String::new(),
            (m, 1) => m.to_string(),
            (m, d) => format!("{m}/{d}"),
        };
        let sign = if self.num < 0 { "-" } else { "+" };
        if self.constant == 0 {
            let sign = if self.num < 0 { "-" } else { "" };
            write!(f, "{sign}{coef}e")
        } else {
            write!(f, "{}{sign}{coef}e", self.constant)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Head {
    Plane(i64),
    Ruled {
        p: Affine,
        q: Affine,
        annotation: Option<i64>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultGroup {
    pub mult: i64,
    pub count: usize,
}

/// A canonical type: multiplicity groups strictly decreasing, counts >= 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TypeExpr {
    head: Head,
    groups: Vec<MultGroup>,
}

impl TypeExpr {
    /// Builds a canonical type from an unordered multiplicity list.
    /// Panics on a non-positive multiplicity; use `parse` for untrusted input.
    pub fn new(head: Head, mults: &[i64]) -> Self {
        assert!(mults.iter().all(|m| *m > 0), "multiplicities must be positive");
        TypeExpr {
            head,
            groups: group(mults),
        }
    }

    pub fn plane(d: i64, mults: &[i64]) -> Self {
        TypeExpr::new(Head::Plane(d), mults)
    }

    pub fn ruled(p: Affine, q: Affine, mults: &[i64]) -> Self {
        TypeExpr::new(Head::Ruled { p, q, annotation: None }, mults)
    }

    pub fn parse(text: &str) -> Result<TypeExpr, ParseError> {
        Parser::new(text).parse_type()
    }

    pub fn head(&self) -> &Head {
        &self.head
    }

    pub fn groups(&self) -> &[MultGroup] {
        &self.groups
    }

    pub fn is_ruled(&self) -> bool {
        matches!(self.head, Head::Ruled { .. })
    }

    pub fn annotation(&self) -> Option<i64> {
        match self.head {
            Head::Ruled { annotation, .. } => annotation,
            Head::Plane(_) => None,
        }
    }

    pub fn exceptional_count(&self) -> usize {
        self.groups.iter().map(|g| g.count).sum()
    }

    /// Expanded multiplicities, non-increasing.
    pub fn multiplicities(&self) -> Vec<i64> {
        self.groups
            .iter()
            .flat_map(|g| std::iter::repeat_n(g.mult, g.count))
            .collect()
    }

    /// True when a head coefficient depends on `e`.
    pub fn is_symbolic(&self) -> bool {
        match &self.head {
            Head::Plane(_) => false,
            Head::Ruled { p, q, .. } => !p.is_constant() || !q.is_constant(),
        }
    }

    pub fn without_annotation(&self) -> TypeExpr {
        let head = match self.head {
            Head::Ruled { p, q, .. } => Head::Ruled { p, q, annotation: None },
            h => h,
        };
        TypeExpr {
            head,
            groups: self.groups.clone(),
        }
    }

    pub fn with_annotation(&self, annotation: Option<i64>) -> TypeExpr {
        let head = match self.head {
            Head::Ruled { p, q, .. } => Head::Ruled { p, q, annotation },
            h => h,
        };
        TypeExpr {
            head,
            groups: self.groups.clone(),
        }
    }

    /// Substitutes `e`, keeping the annotation.
    pub fn resolve(&self, e: u32) -> Result<TypeExpr, ConversionError> {
        match self.head {
            Head::Plane(_) => Ok(self.clone()),
            Head::Ruled { p, q, annotation } => {
                let (pv, qv) = eval_head(p, q, e)?;
                Ok(TypeExpr {
                    head: Head::Ruled {
                        p: Affine::constant(pv),
                        q: Affine::constant(qv),
                        annotation,
                    },
                    groups: self.groups.clone(),
                })
            }
        }
    }

    /// Realizes the type on a fresh model with `n = exceptional_count()`.
    /// Ruled types need `e`; plane types ignore it.
    pub fn to_divisor(&self, e: Option<u32>) -> Result<DivisorClass, ConversionError> {
        let mults = self.multiplicities();
        match self.head {
            Head::Plane(d) => Ok(DivisorClass::plane(d, &mults)),
            Head::Ruled { p, q, .. } => {
                let e = e.ok_or_else(|| ConversionError::UnresolvedE(self.to_string()))?;
                let (pv, qv) = eval_head(p, q, e)?;
                Ok(DivisorClass::ruled(e, pv, qv, &mults))
            }
        }
    }

    /// Reads a class back into notation. Exceptional classes with coefficient
    /// zero are omitted, so the result may live on fewer points.
    pub fn from_divisor(d: &DivisorClass) -> Result<TypeExpr, ConversionError> {
        let mut mults = Vec::new();
        for (i, c) in d.exceptional_coeffs().iter().enumerate() {
            if *c > 0 {
                return Err(ConversionError::PositiveCoefficient {
                    index: i + 1,
                    value: *c,
                });
            }
            if *c < 0 {
                mults.push(-c);
            }
        }
        let head = match *d.head() {
            [dd] => Head::Plane(dd),
            [p, q] => Head::Ruled {
                p: Affine::constant(p),
                q: Affine::constant(q),
                annotation: None,
            },
            _ => unreachable!(),
        };
        Ok(TypeExpr::new(head, &mults))
    }
}

fn eval_head(p: Affine, q: Affine, e: u32) -> Result<(i64, i64), ConversionError> {
    let pv = p
        .eval(e)
        .ok_or(ConversionError::NonIntegral { expr: p.to_string(), e })?;
    let qv = q
        .eval(e)
        .ok_or(ConversionError::NonIntegral { expr: q.to_string(), e })?;
    Ok((pv, qv))
}

fn group(mults: &[i64]) -> Vec<MultGroup> {
    let mut sorted = mults.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let mut out: Vec<MultGroup> = Vec::new();
    for m in sorted {
        match out.last_mut() {
            Some(g) if g.mult == m => g.count += 1,
            _ => out.push(MultGroup { mult: m, count: 1 }),
        }
    }
    out
}

impl fmt::Display for Head {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Head::Plane(d) => write!(f, "{d}"),
            Head::Ruled { p, q, annotation } => {
                write!(f, "({p},{q})")?;
                if let Some(k) = annotation {
                    write!(f, "_{k}")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for TypeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}", self.head)?;
        for (i, g) in self.groups.iter().enumerate() {
            let sep = if i == 0 { ';' } else { ',' };
            write!(f, "{sep}{}^{}", g.mult, g.count)?;
        }
        write!(f, "]")
    }
}

impl FromStr for TypeExpr {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TypeExpr::parse(s)
    }
}

impl Serialize for TypeExpr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TypeExpr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        TypeExpr::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Canonical ordering: plane before ruled, then by printed form.
impl Ord for TypeExpr {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.is_ruled(), self.to_string()).cmp(&(other.is_ruled(), other.to_string()))
    }
}

impl PartialOrd for TypeExpr {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Inclusive range of Hirzebruch parameters, written `lo..hi`.
/// Serialized as `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "[u32; 2]", into = "[u32; 2]")]
pub struct ERange {
    lo: u32,
    hi: u32,
}

impl ERange {
    pub fn new(lo: u32, hi: u32) -> Option<Self> {
        (lo <= hi).then_some(ERange { lo, hi })
    }

    pub fn single(e: u32) -> Self {
        ERange { lo: e, hi: e }
    }

    pub fn lo(&self) -> u32 {
        self.lo
    }

    pub fn hi(&self) -> u32 {
        self.hi
    }

    pub fn contains(&self, e: u32) -> bool {
        self.lo <= e && e <= self.hi
    }

    pub fn iter(&self) -> std::ops::RangeInclusive<u32> {
        self.lo..=self.hi
    }
}

impl TryFrom<[u32; 2]> for ERange {
    type Error = String;
    fn try_from(v: [u32; 2]) -> Result<Self, String> {
        ERange::new(v[0], v[1]).ok_or_else(|| format!("empty e-range {}..{}", v[0], v[1]))
    }
}

impl From<ERange> for [u32; 2] {
    fn from(r: ERange) -> Self {
        [r.lo, r.hi]
    }
}

impl fmt::Display for ERange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.lo, self.hi)
    }
}

impl FromStr for ERange {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s
            .split_once("..")
            .ok_or_else(|| format!("expected LO..HI, got {s:?}"))?;
        let lo: u32 = a.trim().parse().map_err(|_| format!("bad lower bound {a:?}"))?;
        let hi: u32 = b.trim().parse().map_err(|_| format!("bad upper bound {b:?}"))?;
        ERange::new(lo, hi).ok_or_else(|| format!("empty e-range {s}"))
    }
}

struct Parser {
    chars: Vec<(usize, char)>,
    pos: usize,
}

impl Parser {
    fn new(text: &str) -> Self {
        let chars = text
            .chars()
            .enumerate()
            .filter(|(_, c)| !c.is_whitespace())
            .map(|(i, c)| (i + 1, if c == '−' { '-' } else { c }))
            .collect();
        Parser { chars, pos: 0 }
    }

    fn column(&self) -> usize {
        match self.chars.get(self.pos) {
            Some((col, _)) => *col,
            None => self.chars.last().map_or(1, |(c, _)| c + 1),
        }
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            column: self.column(),
            message: message.into(),
        })
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|(_, c)| *c)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            match self.peek() {
                Some(got) => self.err(format!("expected '{c}', found '{got}'")),
                None => self.err(format!("expected '{c}', found end of input")),
            }
        }
    }

    fn uint(&mut self) -> Result<i64, ParseError> {
        let start = self.pos;
        let mut v: i64 = 0;
        while let Some(c) = self.peek().filter(char::is_ascii_digit) {
            let d = c.to_digit(10).unwrap() as i64;
            v = match v.checked_mul(10).and_then(|x| x.checked_add(d)) {
                Some(v) => v,
                None => {
                    self.pos = start;
                    return self.err("integer too large");
                }
            };
            self.pos += 1;
        }
        if self.pos == start {
            return self.err("expected an integer");
        }
        Ok(v)
    }

    fn int(&mut self) -> Result<i64, ParseError> {
        let neg = self.eat('-');
        let v = self.uint()?;
        Ok(if neg { -v } else { v })
    }

    fn parse_affine(mut self) -> Result<Affine, ParseError> {
        let a = self.affine()?;
        if self.peek().is_some() {
            return self.err("trailing input");
        }
        Ok(a)
    }

    fn parse_type(mut self) -> Result<TypeExpr, ParseError> {
        self.expect('[')?;
        let head = self.head()?;
        let mut mults = Vec::new();
        if self.eat(';') {
            loop {
                let col = self.column();
                let m = self.int()?;
                let count = if self.eat('^') {
                    let ccol = self.column();
                    let c = self.uint()?;
                    if c == 0 {
                        return Err(ParseError {
                            column: ccol,
                            message: "multiplicity count must be positive".into(),
                        });
                    }
                    c
                } else {
                    1
                };
                if m <= 0 {
                    return Err(ParseError {
                        column: col,
                        message: format!("multiplicity {m} is not positive"),
                    });
                }
                for _ in 0..count {
                    mults.push(m);
                }
                if !self.eat(',') {
                    break;
                }
            }
        }
        self.expect(']')?;
        if self.pos != self.chars.len() {
            return self.err("trailing input after ']'");
        }
        Ok(TypeExpr::new(head, &mults))
    }

    fn head(&mut self) -> Result<Head, ParseError> {
        if !self.eat('(') {
            return Ok(Head::Plane(self.int()?));
        }
        let p = self.affine()?;
        self.expect(',')?;
        let q = self.affine()?;
        self.expect(')')?;
        let annotation = if self.eat('_') { Some(self.int()?) } else { None };
        Ok(Head::Ruled { p, q, annotation })
    }

    fn affine(&mut self) -> Result<Affine, ParseError> {
        let mut constant: Option<i64> = None;
        let mut slope: Option<(i64, i64)> = None;
        let mut first = true;
        loop {
            let col = self.column();
            let sign = if self.eat('-') {
                -1
            } else if first || self.eat('+') {
                1
            } else {
                break;
            };
            let (num, den, has_e) = self.term()?;
            let dup = if has_e { slope.is_some() } else { constant.is_some() };
            if dup {
                return Err(ParseError {
                    column: col,
                    message: "repeated term in affine expression".into(),
                });
            }
            if has_e {
                slope = Some((sign * num, den));
            } else if den != 1 {
                return Err(ParseError {
                    column: col,
                    message: "fractional constant term".into(),
                });
            } else {
                constant = Some(sign * num);
            }
            first = false;
        }
        let (num, den) = slope.unwrap_or((0, 1));
        Ok(Affine::new(constant.unwrap_or(0), num, den))
    }

    /// `int ("/" int)? "e"?` or a bare `e`.
    fn term(&mut self) -> Result<(i64, i64, bool), ParseError> {
        if self.eat('e') {
            return Ok((1, 1, true));
        }
        let num = self.uint()?;
        let den = if self.eat('/') {
            let d = self.uint()?;
            if d == 0 {
                return self.err("zero denominator");
            }
            d
        } else {
            1
        };
        let has_e = self.eat('e');
        Ok((num, den, has_e))
    }
}
