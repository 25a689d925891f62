//! Adjunction `H -> H + K` on the model lattices, its inverse, and the
//! resulting chains of surfaces.
//!
//! Blow-down is numeric: an exceptional class with multiplicity exactly 1 in
//! `H` meets `H + K` in zero and is contracted.

use serde::Serialize;
use thiserror::Error;

use crate::picard::{self, DivisorClass, Invariants, PicardError};

/// Guard against pathological inputs; flagship chains have at most 8 steps.
pub const STEP_CAP: usize = 32;

/// Genus at or below which the next adjoint surface is terminal.
pub const TERMINAL_GENUS: i64 = 5;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AdjunctionError {
    #[error("exceptional coefficient of E_{index} is {value}; expected a type with non-negative multiplicities")]
    NotAType { index: usize, value: i64 },
    #[error("adjunction leaves the model family: {reason} (adjoint {class})")]
    LeavesFamily { class: Box<DivisorClass>, reason: String },
    #[error("degree {0} is not positive")]
    NonPositiveDegree(i64),
    #[error("adjunction sequence exceeded {STEP_CAP} steps")]
    StepCap,
    #[error("internal invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Lattice(#[from] PicardError),
}

pub type Result<T> = std::result::Result<T, AdjunctionError>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AdjunctionStep {
    pub before: DivisorClass,
    pub after: DivisorClass,
    /// 1-based indices (in `before`) of the contracted exceptional classes.
    pub blown_down: Vec<usize>,
    pub invariants_before: Invariants,
    pub invariants_after: Invariants,
}

fn ensure_type(h: &DivisorClass) -> Result<()> {
    for (i, c) in h.exceptional_coeffs().iter().enumerate() {
        if *c > 0 {
            return Err(AdjunctionError::NotAType {
                index: i + 1,
                value: *c,
            });
        }
    }
    Ok(())
}

/// One adjunction step.
pub fn adjoin(h: &DivisorClass) -> Result<AdjunctionStep> {
    ensure_type(h)?;
    let model = h.model();
    let k = DivisorClass::canonical(model);
    let adj = h.checked_add(&k)?;

    let hl = model.head_len();
    let mut blown_down = Vec::new();
    let mut kept = adj.head().to_vec();
    for (i, c) in h.exceptional_coeffs().iter().enumerate() {
        if *c == -1 {
            blown_down.push(i + 1);
        } else {
            kept.push(adj.coeffs()[hl + i]);
        }
    }
    let after_model = model.with_points(model.n() - blown_down.len());
    let after = DivisorClass::new(after_model, kept)?;

    let leaves = if after.head()[0] < 0 {
        Some(format!("leading coefficient {} is negative", after.head()[0]))
    } else {
        after.exceptional_coeffs().iter().position(|c| *c > 0).map(|i| {
            format!(
                "exceptional class {} gets multiplicity {}",
                i + 1,
                -after.exceptional_coeffs()[i]
            )
        })
    };
    if let Some(reason) = leaves {
        return Err(AdjunctionError::LeavesFamily {
            class: Box::new(after),
            reason,
        });
    }

    let before_inv = h.invariants()?;
    let after_inv = after.invariants()?;
    let hk = h.dot_canonical()?;
    let k2 = before_inv.k2;
    if after_inv.degree != adj.degree()? {
        return Err(AdjunctionError::Invariant(format!(
            "pruning changed (H+K)^2 for {}",
            h.signed()
        )));
    }
    let expected_genus = picard::add(picard::add(before_inv.genus, hk)?, k2)?;
    if after_inv.genus != expected_genus {
        return Err(AdjunctionError::Invariant(format!(
            "genus {} after adjunction, recursion gives {expected_genus}",
            after_inv.genus
        )));
    }
    if after.dot_canonical()? != adj.dot_canonical()? {
        return Err(AdjunctionError::Invariant(
            "H'.K' differs from H'.K on the unpruned model".into(),
        ));
    }
    Ok(AdjunctionStep {
        before: h.clone(),
        after,
        blown_down,
        invariants_before: before_inv,
        invariants_after: after_inv,
    })
}

/// Inverse of `adjoin`: `H - K` on a model with `new_points` further
/// exceptional classes, each of multiplicity 1, appended at the end.
pub fn reverse_adjoin(h: &DivisorClass, new_points: usize) -> std::result::Result<DivisorClass, PicardError> {
    let model = h.model().with_points(h.model().n() + new_points);
    let mut coeffs = h.coeffs().to_vec();
    coeffs.extend(std::iter::repeat_n(0, new_points));
    let lifted = DivisorClass::new(model, coeffs)?;
    lifted.checked_sub(&DivisorClass::canonical(model))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// A surface with genus at most 5 was reached and adjoined once more.
    Terminal,
    /// `(H+K)^2 <= 0`: a Del Pezzo surface, conic bundle or smaller case.
    DegenerateAdjoint,
    /// The next adjoint has a negative leading or exceptional coefficient.
    LeavesFamily,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AdjunctionSequence {
    pub steps: Vec<AdjunctionStep>,
    /// Index of the terminal surface; counted so that the chain
    /// `S_0 -> ... -> S_{N0}` ends one step after the first genus <= 5.
    pub n0: usize,
    pub terminal: DivisorClass,
    pub stop: StopReason,
}

impl AdjunctionSequence {
    /// K^2 of every surface in the chain, starting with `S_0`.
    pub fn k_squares(&self) -> Vec<i64> {
        let mut out = Vec::with_capacity(self.steps.len() + 1);
        match self.steps.first() {
            Some(s) => out.push(s.invariants_before.k2),
            None => out.push(self.terminal.model().canonical_square()),
        }
        out.extend(self.steps.iter().map(|s| s.invariants_after.k2));
        out
    }
}

pub fn sequence(h: &DivisorClass) -> Result<AdjunctionSequence> {
    let d = h.degree()?;
    if d <= 0 {
        return Err(AdjunctionError::NonPositiveDegree(d));
    }
    let mut steps: Vec<AdjunctionStep> = Vec::new();
    let mut cur = h.clone();
    loop {
        if steps.len() >= STEP_CAP {
            return Err(AdjunctionError::StepCap);
        }
        let genus = cur.sectional_genus()?;
        let step = match adjoin(&cur) {
            Ok(s) => s,
            Err(AdjunctionError::LeavesFamily { .. }) => {
                return Ok(finish(steps, cur, StopReason::LeavesFamily));
            }
            Err(e) => return Err(e),
        };
        if step.invariants_after.degree <= 0 {
            return Ok(finish(steps, cur, StopReason::DegenerateAdjoint));
        }
        if step.invariants_after.k2 < step.invariants_before.k2 {
            return Err(AdjunctionError::Invariant("K^2 decreased along the chain".into()));
        }
        let next = step.after.clone();
        steps.push(step);
        if genus <= TERMINAL_GENUS {
            return Ok(finish(steps, next, StopReason::Terminal));
        }
        cur = next;
    }
}

fn finish(steps: Vec<AdjunctionStep>, terminal: DivisorClass, stop: StopReason) -> AdjunctionSequence {
    AdjunctionSequence {
        n0: steps.len(),
        steps,
        terminal,
        stop,
    }
}

/// `ceil(a / b)` for `b > 0`, rounding toward positive infinity.
pub fn ceil_div(a: i64, b: i64) -> i64 {
    assert!(b > 0);
    a.div_euclid(b) + i64::from(a.rem_euclid(b) != 0)
}

/// `ceil((H.K)^2 / H^2)` from the numbers alone.
pub fn hodge_bound(h2: i64, hk: i64) -> std::result::Result<i64, PicardError> {
    Ok(ceil_div(picard::mul(hk, hk)?, h2))
}

/// `pi - 2 - H^2 - 2 H.K` from the numbers alone.
pub fn nondegeneracy_bound(h2: i64, genus: i64, hk: i64) -> std::result::Result<i64, PicardError> {
    picard::sub(picard::sub(genus - 2, h2)?, picard::mul(2, hk)?)
}

pub fn hodge_upper_bound(h: &DivisorClass) -> Result<i64> {
    let h2 = h.degree()?;
    if h2 <= 0 {
        return Err(AdjunctionError::NonPositiveDegree(h2));
    }
    Ok(hodge_bound(h2, h.dot_canonical()?)?)
}

pub fn nondegeneracy_lower_bound(h: &DivisorClass) -> Result<i64> {
    let h2 = h.degree()?;
    if h2 <= 0 {
        return Err(AdjunctionError::NonPositiveDegree(h2));
    }
    Ok(nondegeneracy_bound(h2, h.sectional_genus()?, h.dot_canonical()?)?)
}
