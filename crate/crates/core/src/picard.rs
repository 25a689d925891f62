//! Picard lattices of blown-up planes and blown-up Hirzebruch surfaces.
//!
//! A class is stored as its raw coefficient vector over the basis
//! `L, E_1..E_n` (plane) or `B, F, E_1..E_n` (ruled). A type
//! `dL - sum m_i E_i` therefore stores `-m_i` in the exceptional slots.
//! All arithmetic is checked: an overflow is an error, never a wrap.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PicardError {
    #[error("classes live on different models ({0} vs {1})")]
    ModelMismatch(SurfaceModel, SurfaceModel),
    #[error("coefficient vector has length {got}, model {model} needs {expected}")]
    Length {
        model: SurfaceModel,
        expected: usize,
        got: usize,
    },
    #[error("{what} does not apply to {model}")]
    Domain { what: &'static str, model: SurfaceModel },
    #[error("integer overflow in lattice arithmetic")]
    Overflow,
    #[error("D^2 + D.K = {0} is odd; the lattice arithmetic is inconsistent")]
    Parity(i64),
}

pub type Result<T> = std::result::Result<T, PicardError>;

/// Shape of the ambient rational surface.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SurfaceModel {
    /// P^2 blown up at `n` points.
    Plane { n: usize },
    /// F_e blown up at `n` points. `B^2 = e`, `B.F = 1`, `F^2 = 0`.
    Ruled { e: u32, n: usize },
}

impl SurfaceModel {
    pub fn plane(n: usize) -> Self {
        SurfaceModel::Plane { n }
    }

    pub fn ruled(e: u32, n: usize) -> Self {
        SurfaceModel::Ruled { e, n }
    }

    pub fn n(&self) -> usize {
        match *self {
            SurfaceModel::Plane { n } | SurfaceModel::Ruled { n, .. } => n,
        }
    }

    pub fn e(&self) -> Option<u32> {
        match *self {
            SurfaceModel::Plane { .. } => None,
            SurfaceModel::Ruled { e, .. } => Some(e),
        }
    }

    pub fn is_plane(&self) -> bool {
        matches!(self, SurfaceModel::Plane { .. })
    }

    /// Number of non-exceptional basis vectors (1 for L, 2 for B and F).
    pub fn head_len(&self) -> usize {
        match self {
            SurfaceModel::Plane { .. } => 1,
            SurfaceModel::Ruled { .. } => 2,
        }
    }

    pub fn rank(&self) -> usize {
        self.head_len() + self.n()
    }

    /// Same surface family with a different number of blown-up points.
    pub fn with_points(&self, n: usize) -> Self {
        match *self {
            SurfaceModel::Plane { .. } => SurfaceModel::Plane { n },
            SurfaceModel::Ruled { e, .. } => SurfaceModel::Ruled { e, n },
        }
    }

    pub fn canonical_square(&self) -> i64 {
        let base = if self.is_plane() { 9 } else { 8 };
        base - self.n() as i64
    }

    /// Entry of the intersection matrix in the head block.
    fn head_form(&self, i: usize, j: usize) -> i64 {
        match *self {
            SurfaceModel::Plane { .. } => 1,
            SurfaceModel::Ruled { e, .. } => match (i, j) {
                (0, 0) => e as i64,
                (1, 1) => 0,
                _ => 1,
            },
        }
    }
}

impl fmt::Display for SurfaceModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            SurfaceModel::Plane { n } => write!(f, "P2({n})"),
            SurfaceModel::Ruled { e, n } => write!(f, "F{e}({n})"),
        }
    }
}

/// (degree, sectional genus, K^2) of a polarized model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Invariants {
    pub degree: i64,
    pub genus: i64,
    pub k2: i64,
}

impl fmt::Display for Invariants {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(deg {}, pi {}, K^2 {})", self.degree, self.genus, self.k2)
    }
}

pub(crate) fn mul(a: i64, b: i64) -> Result<i64> {
    a.checked_mul(b).ok_or(PicardError::Overflow)
}

pub(crate) fn add(a: i64, b: i64) -> Result<i64> {
    a.checked_add(b).ok_or(PicardError::Overflow)
}

pub(crate) fn sub(a: i64, b: i64) -> Result<i64> {
    a.checked_sub(b).ok_or(PicardError::Overflow)
}

fn half_even(v: i64) -> Result<i64> {
    if v % 2 != 0 {
        return Err(PicardError::Parity(v));
    }
    Ok(v / 2)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DivisorClass {
    model: SurfaceModel,
    coeffs: Vec<i64>,
}

impl DivisorClass {
    pub fn new(model: SurfaceModel, coeffs: Vec<i64>) -> Result<Self> {
        if coeffs.len() != model.rank() {
            return Err(PicardError::Length {
                model,
                expected: model.rank(),
                got: coeffs.len(),
            });
        }
        Ok(DivisorClass { model, coeffs })
    }

    pub fn zero(model: SurfaceModel) -> Self {
        DivisorClass {
            model,
            coeffs: vec![0; model.rank()],
        }
    }

    /// `d L - sum m_i E_i` on the plane blown up at `mults.len()` points.
    pub fn plane(d: i64, mults: &[i64]) -> Self {
        let mut coeffs = Vec::with_capacity(mults.len() + 1);
        coeffs.push(d);
        coeffs.extend(mults.iter().map(|m| -m));
        DivisorClass {
            model: SurfaceModel::plane(mults.len()),
            coeffs,
        }
    }

    /// `p B + q F - sum m_i E_i` on F_e blown up at `mults.len()` points.
    pub fn ruled(e: u32, p: i64, q: i64, mults: &[i64]) -> Self {
        let mut coeffs = Vec::with_capacity(mults.len() + 2);
        coeffs.push(p);
        coeffs.push(q);
        coeffs.extend(mults.iter().map(|m| -m));
        DivisorClass {
            model: SurfaceModel::ruled(e, mults.len()),
            coeffs,
        }
    }

    /// The `idx`-th basis vector (0-based over the full basis).
    pub fn basis(model: SurfaceModel, idx: usize) -> Self {
        let mut d = DivisorClass::zero(model);
        d.coeffs[idx] = 1;
        d
    }

    /// The exceptional class `E_i`, 1-based as in the notation.
    pub fn exceptional(model: SurfaceModel, i: usize) -> Self {
        assert!(i >= 1 && i <= model.n(), "E_{i} outside {model}");
        DivisorClass::basis(model, model.head_len() + i - 1)
    }

    pub fn canonical(model: SurfaceModel) -> Self {
        let mut coeffs = vec![1; model.rank()];
        match model {
            SurfaceModel::Plane { .. } => coeffs[0] = -3,
            SurfaceModel::Ruled { e, .. } => {
                coeffs[0] = -2;
                coeffs[1] = e as i64 - 2;
            }
        }
        DivisorClass { model, coeffs }
    }

    pub fn model(&self) -> SurfaceModel {
        self.model
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    /// Coefficients of L (plane) or of B and F (ruled).
    pub fn head(&self) -> &[i64] {
        &self.coeffs[..self.model.head_len()]
    }

    /// Raw coefficients of E_1..E_n.
    pub fn exceptional_coeffs(&self) -> &[i64] {
        &self.coeffs[self.model.head_len()..]
    }

    /// Multiplicities `m_i`, i.e. the negated exceptional coefficients.
    pub fn multiplicities(&self) -> Vec<i64> {
        self.exceptional_coeffs().iter().map(|c| -c).collect()
    }

    fn same_model(&self, other: &DivisorClass) -> Result<()> {
        if self.model != other.model {
            return Err(PicardError::ModelMismatch(self.model, other.model));
        }
        Ok(())
    }

    pub fn intersect(&self, other: &DivisorClass) -> Result<i64> {
        self.same_model(other)?;
        let h = self.model.head_len();
        let mut acc = 0i64;
        for i in 0..h {
            for j in 0..h {
                let f = self.model.head_form(i, j);
                if f != 0 {
                    acc = add(acc, mul(mul(self.coeffs[i], other.coeffs[j])?, f)?)?;
                }
            }
        }
        for k in h..self.coeffs.len() {
            acc = sub(acc, mul(self.coeffs[k], other.coeffs[k])?)?;
        }
        Ok(acc)
    }

    pub fn checked_add(&self, other: &DivisorClass) -> Result<DivisorClass> {
        self.same_model(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| add(*a, *b))
            .collect::<Result<_>>()?;
        Ok(DivisorClass {
            model: self.model,
            coeffs,
        })
    }

    pub fn checked_sub(&self, other: &DivisorClass) -> Result<DivisorClass> {
        self.same_model(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| sub(*a, *b))
            .collect::<Result<_>>()?;
        Ok(DivisorClass {
            model: self.model,
            coeffs,
        })
    }

    pub fn checked_scale(&self, k: i64) -> Result<DivisorClass> {
        let coeffs = self.coeffs.iter().map(|a| mul(*a, k)).collect::<Result<_>>()?;
        Ok(DivisorClass {
            model: self.model,
            coeffs,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == 0)
    }

    pub fn degree(&self) -> Result<i64> {
        self.intersect(self)
    }

    pub fn dot_canonical(&self) -> Result<i64> {
        self.intersect(&DivisorClass::canonical(self.model))
    }

    /// `p_a(D) = (D^2 + D.K)/2 + 1`.
    pub fn arithmetic_genus(&self) -> Result<i64> {
        let s = add(self.degree()?, self.dot_canonical()?)?;
        add(half_even(s)?, 1)
    }

    /// Genus of a hyperplane section; the same formula as `arithmetic_genus`.
    pub fn sectional_genus(&self) -> Result<i64> {
        self.arithmetic_genus()
    }

    /// Riemann-Roch on a rational surface: `1 + (D^2 - D.K)/2`.
    pub fn euler_char(&self) -> Result<i64> {
        let s = sub(self.degree()?, self.dot_canonical()?)?;
        add(half_even(s)?, 1)
    }

    pub fn invariants(&self) -> Result<Invariants> {
        Ok(Invariants {
            degree: self.degree()?,
            genus: self.sectional_genus()?,
            k2: self.model.canonical_square(),
        })
    }

    /// Raw signed rendering, e.g. `⟨-1; +1@1, +1@9⟩` for `-L + E_1 + E_9`.
    /// Only nonzero exceptional coefficients are listed.
    pub fn signed(&self) -> String {
        let head = match self.head() {
            [d] => d.to_string(),
            [p, q] => format!("({p},{q})"),
            _ => unreachable!(),
        };
        let tail: Vec<String> = self
            .exceptional_coeffs()
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0)
            .map(|(i, c)| format!("{c:+}@{}", i + 1))
            .collect();
        if tail.is_empty() {
            format!("⟨{head}⟩")
        } else {
            format!("⟨{head}; {}⟩", tail.join(", "))
        }
    }
}

impl fmt::Display for DivisorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} on {}", self.signed(), self.model)
    }
}
