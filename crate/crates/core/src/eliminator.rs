//! Numeric elimination through decompositions `H = A + B`.
//!
//! For a decomposition the six numbers `chi(A), p_a(A), H.A, chi(B), p_a(B),
//! H.B` decide everything:
//!
//! - `A` is effective when `chi(A) > 0`, or when `h^1(H) + chi(A) > 0` and
//!   `H.B > 2p_a(B) - 2` (cohomology of `0 -> O(A) -> O(H) -> O_B(H) -> 0`,
//!   assuming `h^2(A) = 0`).
//! - An effective `A` with `p_a(A) <= 2` and `H.A <= 2p_a(A)` contradicts very
//!   ampleness of `H`.
//! - Symmetrically `B` is effective when `h^1(H) = 1`, `chi(B) = 0` and
//!   `H.A > 2p_a(A) - 2`; if moreover `H.B > 2p_a(B) - 2` and
//!   `A^2 > 2p_a(A) - 2` then `h^1(H) = 1` cannot hold.
//!
//! The special hypothesis `h^1(H) = 1` comes from `chi(H) = 5` and six
//! sections; it is carried as a flag, never computed.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{heaviest_exceptional, Move};
use crate::picard::{self, DivisorClass, Invariants, PicardError, SurfaceModel};
use crate::typelang::{ConversionError, ERange, TypeExpr};

/// The shipped decomposition table.
pub const PART2_CORPUS: &str = include_str!("../data/part2.jsonl");

pub const COLUMNS: [&str; 6] = ["chi(A)", "p_a(A)", "H.A", "chi(B)", "p_a(B)", "H.B"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlignError {
    #[error("A has {a} exceptional classes but only {slots} slots are available")]
    TooLong { a: usize, slots: usize },
    #[error("H lives on {h} but A on {a}")]
    ModelMismatch { h: SurfaceModel, a: SurfaceModel },
    #[error("A.E_9 = 0 needs at least 9 exceptional classes in H")]
    NoNinthPoint,
    #[error(transparent)]
    Conversion(#[from] ConversionError),
    #[error(transparent)]
    Lattice(#[from] PicardError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("corpus line {line}: {message}")]
pub struct CorpusError {
    pub line: usize,
    pub message: String,
}

/// One line of a decomposition corpus.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusRow {
    #[serde(rename = "H")]
    pub h: TypeExpr,
    #[serde(rename = "A")]
    pub a: TypeExpr,
    #[serde(default)]
    pub subscripts: Vec<u8>,
    /// Printed values in `COLUMNS` order; `None` where nothing is printed.
    pub expected: [Option<i64>; 6],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_range: Option<ERange>,
}

impl CorpusRow {
    pub fn has(&self, subscript: u8) -> bool {
        self.subscripts.contains(&subscript)
    }
}

pub fn parse_corpus(text: &str) -> Result<Vec<CorpusRow>, CorpusError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: String| CorpusError { line: i + 1, message };
        let row: CorpusRow = serde_json::from_str(line).map_err(|e| err(e.to_string()))?;
        if let Some(s) = row.subscripts.iter().find(|s| !(1..=5).contains(*s)) {
            return Err(err(format!("unknown subscript {s}")));
        }
        if row.h.is_ruled() != row.a.is_ruled() {
            return Err(err("H and A must both be plane or both be ruled".into()));
        }
        out.push(row);
    }
    Ok(out)
}

pub fn shipped_corpus() -> Vec<CorpusRow> {
    parse_corpus(PART2_CORPUS).expect("shipped corpus parses")
}

/// `F_0 -> P^2` through the quadric: `B -> L - E_a`, `F -> L - E_b`, and the
/// heaviest exceptional class `E_c -> L - E_a - E_b`. With no exceptional
/// class a fresh point is blown up first. The image basis is
/// `L, E_a, E_b` followed by the other exceptional classes in order.
pub fn base_change_f0_to_p2(d: &DivisorClass) -> Result<DivisorClass, PicardError> {
    let m = d.model();
    if m.e() != Some(0) {
        return Err(PicardError::Domain {
            what: "base change from F_0",
            model: m,
        });
    }
    let d = if m.n() == 0 {
        let mut c = d.coeffs().to_vec();
        c.push(0);
        DivisorClass::new(m.with_points(1), c)?
    } else {
        d.clone()
    };
    let chosen = heaviest_exceptional(&d).expect("at least one exceptional class");
    Move::F0ToPlane { chosen }.apply(&d)
}

/// Places `A` on the model of `H`.
///
/// Multiplicities of both are taken in non-increasing order and paired by
/// position; `H` positions left over get multiplicity 0 in `A`. Subscript 3
/// keeps `E_9` out of `A`, and subscript 4 moves an `F_0` pair to the plane.
pub fn align(
    h: &TypeExpr,
    a: &TypeExpr,
    subscripts: &[u8],
    e: Option<u32>,
) -> Result<(DivisorClass, DivisorClass), AlignError> {
    let hc = h.to_divisor(e)?;
    let ac = a.to_divisor(e)?;
    let (hm, am) = (hc.model(), ac.model());
    if hm.head_len() != am.head_len() || hm.e() != am.e() {
        return Err(AlignError::ModelMismatch { h: hm, a: am });
    }
    let mut slots: Vec<usize> = (0..hm.n()).collect();
    if subscripts.contains(&3) {
        if slots.len() < 9 {
            return Err(AlignError::NoNinthPoint);
        }
        slots.remove(8);
    }
    let a_ex = ac.exceptional_coeffs();
    if a_ex.len() > slots.len() {
        return Err(AlignError::TooLong {
            a: a_ex.len(),
            slots: slots.len(),
        });
    }
    let mut coeffs = ac.head().to_vec();
    coeffs.resize(hm.rank(), 0);
    for (&slot, &c) in slots.iter().zip(a_ex) {
        coeffs[hm.head_len() + slot] = c;
    }
    let aligned = DivisorClass::new(hm, coeffs)?;
    if subscripts.contains(&4) && hm.e() == Some(0) {
        let chosen = heaviest_exceptional(&hc).ok_or(AlignError::NoNinthPoint)?;
        let mv = Move::F0ToPlane { chosen };
        return Ok((mv.apply(&hc)?, mv.apply(&aligned)?));
    }
    Ok((hc, aligned))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Derived {
    pub chi_a: i64,
    pub pa_a: i64,
    pub ha: i64,
    pub chi_b: i64,
    pub pa_b: i64,
    pub hb: i64,
}

impl Derived {
    pub fn compute(h: &DivisorClass, a: &DivisorClass) -> Result<(Derived, i64), PicardError> {
        let b = h.checked_sub(a)?;
        let d = Derived {
            chi_a: a.euler_char()?,
            pa_a: a.arithmetic_genus()?,
            ha: h.intersect(a)?,
            chi_b: b.euler_char()?,
            pa_b: b.arithmetic_genus()?,
            hb: h.intersect(&b)?,
        };
        Ok((d, a.intersect(a)?))
    }

    pub fn as_array(&self) -> [i64; 6] {
        [self.chi_a, self.pa_a, self.ha, self.chi_b, self.pa_b, self.hb]
    }
}

impl fmt::Display for Derived {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d, e, g] = self.as_array();
        write!(f, "({a},{b},{c},{d},{e},{g})")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// An effective curve of genus at most 2 and too small a degree.
    LowGenus,
    /// The special hypothesis `h^1(H) = 1` is contradicted.
    Specialty,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::LowGenus => "low_genus",
            Rule::Specialty => "specialty",
        })
    }
}

impl FromStr for Rule {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "low_genus" => Ok(Rule::LowGenus),
            "specialty" => Ok(Rule::Specialty),
            _ => Err(format!("unknown rule {s}")),
        }
    }
}

/// One inference made while deciding a row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Step {
    /// `chi(A) > 0` and `h^2(A) = 0`.
    AEffectiveByChi,
    /// `h^1(H) + chi(A) > 0` and `H.B > 2p_a(B) - 2`.
    AEffectiveBySequence,
    LowGenus,
    /// `chi(B) = 0`, `h^1(H) = 1` and `H.A > 2p_a(A) - 2`.
    BEffective,
    Specialty,
}

fn canonical_degree(pa: i64) -> Result<i64, PicardError> {
    picard::sub(picard::mul(2, pa)?, 2)
}

/// Applies the rules to recomputed numbers. `special` is the hypothesis
/// `h^1(H) = 1`.
pub fn decide(d: &Derived, a_squared: i64, special: bool) -> Result<(Vec<Step>, Option<Rule>), PicardError> {
    let mut steps = Vec::new();
    let ka = canonical_degree(d.pa_a)?;
    let kb = canonical_degree(d.pa_b)?;
    let a_effective = if i64::from(special) + d.chi_a > 0 && d.hb > kb {
        steps.push(Step::AEffectiveBySequence);
        true
    } else if d.chi_a > 0 {
        steps.push(Step::AEffectiveByChi);
        true
    } else {
        false
    };
    if a_effective && d.pa_a <= 2 && d.ha <= picard::mul(2, d.pa_a)? {
        steps.push(Step::LowGenus);
        return Ok((steps, Some(Rule::LowGenus)));
    }
    if special && d.chi_b == 0 && d.ha > ka {
        steps.push(Step::BEffective);
        if d.hb > kb && a_squared > ka {
            steps.push(Step::Specialty);
            return Ok((steps, Some(Rule::Specialty)));
        }
    }
    Ok((steps, None))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub column: &'static str,
    pub printed: i64,
    pub computed: i64,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: printed {}, computed {} (delta {:+})",
            self.column,
            self.printed,
            self.computed,
            self.computed - self.printed
        )
    }
}

/// What the hyperplane classes of a table are supposed to be.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Target {
    pub degree: i64,
    pub genus: i64,
    /// Assume `h^1(O_S(H)) = 1`.
    pub special: bool,
}

impl Default for Target {
    fn default() -> Self {
        Target {
            degree: 11,
            genus: 8,
            special: true,
        }
    }
}

/// A row evaluated at one value of `e` (`None` for plane rows).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RowOutcome {
    pub e: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_invariants: Option<Invariants>,
    /// `B = H - A`, in type notation when it has one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub derived: Option<Derived>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a_squared: Option<i64>,
    pub steps: Vec<Step>,
    pub rule: Option<Rule>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub mismatches: Vec<Mismatch>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub problems: Vec<String>,
    /// The aligned classes, for callers that transport the decomposition.
    #[serde(skip)]
    pub classes: Option<(DivisorClass, DivisorClass)>,
}

impl RowOutcome {
    fn failed(e: Option<u32>, problem: String) -> Self {
        RowOutcome {
            e,
            h_invariants: None,
            b: None,
            derived: None,
            a_squared: None,
            steps: Vec::new(),
            rule: None,
            mismatches: Vec::new(),
            problems: vec![problem],
            classes: None,
        }
    }

    pub fn is_clean(&self) -> bool {
        self.mismatches.is_empty() && self.problems.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Eliminated { rule: Rule },
    Survivor,
    Flagged { reasons: Vec<String> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EliminationRow {
    /// 1-based position in the corpus.
    pub index: usize,
    #[serde(flatten)]
    pub input: CorpusRow,
    pub assumptions: Vec<String>,
    pub outcomes: Vec<RowOutcome>,
    #[serde(flatten)]
    pub verdict: Verdict,
    /// The rule the recomputed numbers give when it is the same at every
    /// `e`, whether or not the row is flagged.
    pub recomputed: Option<Rule>,
}

impl EliminationRow {
    pub fn is_flagged(&self) -> bool {
        matches!(self.verdict, Verdict::Flagged { .. })
    }

    pub fn outcome_at(&self, e: Option<u32>) -> Option<&RowOutcome> {
        self.outcomes.iter().find(|o| o.e == e)
    }

    pub fn mismatches(&self) -> impl Iterator<Item = (Option<u32>, &Mismatch)> {
        self.outcomes
            .iter()
            .flat_map(|o| o.mismatches.iter().map(move |m| (o.e, m)))
    }
}

fn b_text(b: &DivisorClass) -> String {
    TypeExpr::from_divisor(b)
        .map(|t| t.to_string())
        .unwrap_or_else(|_| b.signed())
}

fn evaluate(row: &CorpusRow, e: Option<u32>, target: &Target) -> RowOutcome {
    let (h, a) = match align(&row.h, &row.a, &row.subscripts, e) {
        Ok(pair) => pair,
        Err(err) => return RowOutcome::failed(e, err.to_string()),
    };
    let computed = h
        .invariants()
        .and_then(|inv| Ok((inv, Derived::compute(&h, &a)?, h.checked_sub(&a)?)))
        .and_then(|(inv, (d, a2), b)| Ok((inv, d, a2, b, decide(&d, a2, target.special)?)));
    let (inv, derived, a2, b, (steps, rule)) = match computed {
        Ok(v) => v,
        Err(err) => return RowOutcome::failed(e, err.to_string()),
    };
    let mut problems = Vec::new();
    if (inv.degree, inv.genus) != (target.degree, target.genus) {
        problems.push(format!(
            "H has degree {} and genus {}, not {} and {}",
            inv.degree, inv.genus, target.degree, target.genus
        ));
    }
    let mismatches = row
        .expected
        .iter()
        .zip(derived.as_array())
        .zip(COLUMNS)
        .filter_map(|((p, c), column)| match p {
            Some(p) if *p != c => Some(Mismatch {
                column,
                printed: *p,
                computed: c,
            }),
            _ => None,
        })
        .collect();
    let wanted = if row.has(5) { Rule::Specialty } else { Rule::LowGenus };
    match rule {
        None => problems.push("no rule applies".into()),
        Some(r) if r != wanted => problems.push(format!("subscripts call for {wanted}, numbers give {r}")),
        _ => {}
    }
    RowOutcome {
        e,
        h_invariants: Some(inv),
        b: Some(b_text(&b)),
        derived: Some(derived),
        a_squared: Some(a2),
        steps,
        rule,
        mismatches,
        problems,
        classes: Some((h, a)),
    }
}

fn assumptions(row: &CorpusRow, target: &Target) -> Vec<String> {
    let mut out = vec!["h^2(O_S(A)) = 0 (S rational)".to_string()];
    if target.special {
        out.push("h^1(O_S(H)) = 1 (chi(H) = 5 and h^0(H) = 6)".into());
    }
    if row.has(5) {
        out.push("h^2(O_S(B)) = 0 (S rational)".into());
    }
    out
}

/// Recomputes one row at every `e` of its range. A row is eliminated only if
/// every `e` is, by the same rule, with no mismatch against the printed
/// numbers.
pub fn eliminate_row(index: usize, row: &CorpusRow, target: &Target) -> EliminationRow {
    let es: Vec<Option<u32>> = match (row.h.is_ruled(), row.e_range) {
        (false, _) => vec![None],
        (true, Some(r)) => r.iter().map(Some).collect(),
        (true, None) => Vec::new(),
    };
    let outcomes: Vec<RowOutcome> = if es.is_empty() {
        vec![RowOutcome::failed(None, "ruled row without an e-range".into())]
    } else {
        es.into_iter().map(|e| evaluate(row, e, target)).collect()
    };
    let first = outcomes[0].rule;
    let recomputed = first.filter(|_| outcomes.iter().all(|o| o.rule == first));
    let mut reasons = Vec::new();
    for o in &outcomes {
        let at = o.e.map(|e| format!("e = {e}: ")).unwrap_or_default();
        reasons.extend(o.mismatches.iter().map(|m| format!("{at}{m}")));
        reasons.extend(o.problems.iter().map(|p| format!("{at}{p}")));
    }
    let verdict = if !reasons.is_empty() {
        Verdict::Flagged { reasons }
    } else {
        match recomputed {
            Some(rule) => Verdict::Eliminated { rule },
            None => Verdict::Survivor,
        }
    };
    EliminationRow {
        index,
        input: row.clone(),
        assumptions: assumptions(row, target),
        outcomes,
        verdict,
        recomputed,
    }
}

/// Every row, evaluated in parallel and returned in corpus order.
pub fn run_table(corpus: &[CorpusRow], target: &Target) -> Vec<EliminationRow> {
    corpus
        .par_iter()
        .enumerate()
        .map(|(i, row)| eliminate_row(i + 1, row, target))
        .collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TableSummary {
    pub rows: usize,
    pub eliminated: usize,
    pub flagged: usize,
    pub survivors: usize,
}

pub fn summarize(rows: &[EliminationRow]) -> TableSummary {
    let mut s = TableSummary {
        rows: rows.len(),
        ..TableSummary::default()
    };
    for r in rows {
        match r.verdict {
            Verdict::Eliminated { .. } => s.eliminated += 1,
            Verdict::Survivor => s.survivors += 1,
            Verdict::Flagged { .. } => s.flagged += 1,
        }
    }
    s
}
