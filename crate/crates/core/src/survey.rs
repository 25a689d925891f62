//! The whole pipeline for one `(degree, genus)`: candidates from the
//! classifier, then the decomposition table, then the lifting arguments.
//!
//! A decomposition row disposes of a candidate at a given `e` when the row's
//! `H` and the candidate's class have the same normal form. The row's `A` is
//! carried over along the two normalizing isometries and the numbers are
//! recomputed on the candidate's own lattice, so a row printed on `P^2` can
//! dispose of a candidate on `F_e` and vice versa.

use rayon::prelude::*;
use serde::Serialize;

use crate::classifier::printed::{self, CrossReport};
use crate::classifier::{self, CandidateRecord, CandidateStatus, ClassifyError, ClassifyReport};
use crate::eliminator::{self, CorpusRow, Derived, EliminationRow, Rule, Target};
use crate::lattice::{self, Isometry};
use crate::picard::DivisorClass;
use crate::typelang::TypeExpr;
use crate::verifier::{self, CheckReport};

/// The surfaces of degree 11 and sectional genus 8 that nothing eliminates.
/// `e_max` is the bound on `e` stated alongside the type.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MainType {
    pub number: usize,
    #[serde(rename = "type")]
    pub type_text: &'static str,
    pub k_squared: i64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_max: Option<u32>,
}

pub const MAIN_TYPES: [MainType; 5] = [
    MainType {
        number: 1,
        type_text: "[7;2^7,1^10]",
        k_squared: -8,
        e_max: None,
    },
    MainType {
        number: 2,
        type_text: "[9;3^6,2^2,1^8]",
        k_squared: -7,
        e_max: None,
    },
    MainType {
        number: 3,
        type_text: "[(4,4-2e);2^1,1^17]",
        k_squared: -10,
        e_max: Some(2),
    },
    MainType {
        number: 4,
        type_text: "[(4,5-2e);2^4,1^13]",
        k_squared: -9,
        e_max: Some(3),
    },
    MainType {
        number: 5,
        type_text: "[(4,6-2e);2^7,1^9]",
        k_squared: -8,
        e_max: Some(5),
    },
];

/// Lifting arguments that apply when the target is `(11, 8)`, keyed by the
/// type of `H` they treat. They are geometric statements about one fixed
/// presentation of `S` as a blown-up plane, so unlike the decomposition rows
/// they are matched on the literal type and never transported.
const LIFTINGS: [(&str, &str); 2] = [("lifting-1", "[10;4^1,3^7,2^1,1^6]"), ("lifting-2", "[6;2^2,1^17]")];

pub fn main_type(t: &TypeExpr) -> Option<&'static MainType> {
    let key = t.without_annotation().to_string();
    MAIN_TYPES.iter().find(|m| m.type_text == key)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "by", rename_all = "snake_case")]
pub enum Disposal {
    Row {
        row: usize,
        #[serde(skip_serializing_if = "Option::is_none")]
        row_e: Option<u32>,
        rule: Rule,
        /// The row's `H` is a different class with the same normal form.
        transported: bool,
        /// The row itself carries a flag (a printed number that does not
        /// reproduce), though its recomputed verdict stands.
        row_flagged: bool,
    },
    Lifting {
        scenario: &'static str,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Resolution {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub disposal: Option<Disposal>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SurveyEntry {
    pub candidate: CandidateRecord,
    pub resolutions: Vec<Resolution>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub main_type: Option<MainType>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub reasons: Vec<String>,
}

impl SurveyEntry {
    pub fn type_text(&self) -> String {
        self.candidate.type_expr.to_string()
    }

    pub fn is_eliminated(&self) -> bool {
        self.resolutions.iter().all(|r| r.disposal.is_some())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Discrepancies {
    /// Printed classification lines that do not reproduce.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub classification: Vec<printed::RowReport>,
    /// Decomposition rows that carry a flag.
    pub decompositions: Vec<EliminationRow>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub liftings: Vec<CheckReport>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Survey {
    pub degree: i64,
    pub genus: i64,
    pub survivors: Vec<SurveyEntry>,
    pub eliminated: Vec<SurveyEntry>,
    pub flagged: Vec<SurveyEntry>,
    pub discrepancies: Discrepancies,
}

impl Survey {
    pub fn has_flags(&self) -> bool {
        !self.flagged.is_empty()
            || !self.discrepancies.classification.is_empty()
            || !self.discrepancies.decompositions.is_empty()
            || !self.discrepancies.liftings.is_empty()
    }
}

/// A row outcome usable for disposal, with its normal form precomputed.
struct Usable<'a> {
    row: &'a EliminationRow,
    row_e: Option<u32>,
    h: DivisorClass,
    a: DivisorClass,
    derived: Derived,
    rule: Rule,
    nf: Option<(Isometry, DivisorClass)>,
}

fn usable_outcomes(table: &[EliminationRow]) -> Vec<Usable<'_>> {
    let mut out = Vec::new();
    for row in table {
        for o in &row.outcomes {
            let (Some((h, a)), Some(rule), Some(derived)) = (&o.classes, o.rule, o.derived) else {
                continue;
            };
            if !o.problems.is_empty() {
                continue;
            }
            out.push(Usable {
                row,
                row_e: o.e,
                h: h.clone(),
                a: a.clone(),
                derived,
                rule,
                nf: lattice::normal_form(h).ok().flatten(),
            });
        }
    }
    out
}

/// Moves the row's `A` onto the candidate's lattice and re-decides there.
fn transport(u: &Usable<'_>, h: &DivisorClass, h_nf: &(Isometry, DivisorClass), special: bool) -> Option<Rule> {
    let (row_iso, row_nf) = u.nf.as_ref()?;
    if *row_nf != h_nf.1 {
        return None;
    }
    let a = h_nf.0.apply_inverse(&row_iso.apply(&u.a).ok()?).ok()?;
    let (derived, a2) = Derived::compute(h, &a).ok()?;
    // An isometry fixing K cannot move these numbers.
    debug_assert_eq!(derived, u.derived);
    let (_, rule) = eliminator::decide(&derived, a2, special).ok()?;
    rule.filter(|r| *r == u.rule)
}

fn dispose(
    h: &DivisorClass,
    usable: &[Usable<'_>],
    liftings: &[(&'static str, &'static str, bool)],
    special: bool,
) -> Option<Disposal> {
    let h_nf = lattice::normal_form(h).ok().flatten();
    let mut best: Option<(bool, bool, Disposal)> = None;
    for u in usable {
        let direct = u.h == *h;
        let rule = if direct {
            Some(u.rule)
        } else {
            h_nf.as_ref().and_then(|nf| transport(u, h, nf, special))
        };
        let Some(rule) = rule else { continue };
        let key = (u.row.is_flagged(), !direct);
        if best.as_ref().is_none_or(|(f, t, _)| key < (*f, *t)) {
            best = Some((
                key.0,
                key.1,
                Disposal::Row {
                    row: u.row.index,
                    row_e: u.row_e,
                    rule,
                    transported: !direct,
                    row_flagged: u.row.is_flagged(),
                },
            ));
        }
    }
    if let Some((_, _, d)) = best {
        return Some(d);
    }
    let text = TypeExpr::from_divisor(h).ok()?.to_string();
    liftings
        .iter()
        .find(|(_, t, passed)| *passed && **t == text)
        .map(|(scenario, _, _)| Disposal::Lifting { scenario })
}

fn lifting_forms(reports: &[CheckReport]) -> Vec<(&'static str, &'static str, bool)> {
    LIFTINGS
        .iter()
        .filter_map(|(name, text)| {
            let report = reports.iter().find(|r| r.scenario == *name)?;
            Some((report.scenario, *text, report.passed()))
        })
        .collect()
}

fn is_flagship(degree: i64, genus: i64) -> bool {
    (degree, genus) == (11, 8)
}

/// Runs the whole pipeline. The printed classification and the lifting
/// arguments only exist for `(11, 8)`; for other targets only the corpus is
/// consulted.
pub fn survey(degree: i64, genus: i64, corpus: &[CorpusRow]) -> Result<Survey, ClassifyError> {
    let report = classifier::classify(degree, genus)?;
    Ok(survey_from(&report, corpus))
}

pub fn survey_from(report: &ClassifyReport, corpus: &[CorpusRow]) -> Survey {
    let (degree, genus) = (report.degree, report.genus);
    let target = Target {
        degree,
        genus,
        special: true,
    };
    let table = eliminator::run_table(corpus, &target);
    let usable = usable_outcomes(&table);
    let flagship = is_flagship(degree, genus);
    let lifting_reports: Vec<CheckReport> = if flagship {
        vec![verifier::verify_lifting_1(), verifier::verify_lifting_2()]
    } else {
        Vec::new()
    };
    let liftings = lifting_forms(&lifting_reports);
    let cross: Option<CrossReport> = flagship.then(|| printed::cross_report(report, &printed::shipped_rows()));

    let entries: Vec<SurveyEntry> = report
        .candidates
        .par_iter()
        .map(|c| {
            let mut reasons = Vec::new();
            let resolutions: Vec<Resolution> = c
                .realizations()
                .into_iter()
                .map(|(e, h)| Resolution {
                    e,
                    disposal: dispose(&h, &usable, &liftings, target.special),
                })
                .collect();
            if c.status == CandidateStatus::Flagged {
                reasons.extend(c.flags.iter().cloned());
            }
            if let Some(x) = &cross {
                let key = c.type_expr.to_string();
                if x.unprinted.iter().any(|u| u.type_expr == key) {
                    reasons.push("absent from the printed classification".into());
                }
            }
            let open: Vec<String> = resolutions
                .iter()
                .filter(|r| r.disposal.is_none())
                .filter_map(|r| r.e.map(|e| e.to_string()))
                .collect();
            if !open.is_empty() && open.len() < resolutions.len() {
                reasons.push(format!("not eliminated at e = {}", open.join(", ")));
            }
            SurveyEntry {
                main_type: main_type(&c.type_expr).copied(),
                candidate: c.clone(),
                resolutions,
                reasons,
            }
        })
        .collect();

    let mut survivors = Vec::new();
    let mut eliminated = Vec::new();
    let mut flagged = Vec::new();
    for entry in entries {
        if entry.is_eliminated() {
            eliminated.push(entry);
        } else if entry.reasons.is_empty() {
            survivors.push(entry);
        } else {
            flagged.push(entry);
        }
    }
    survivors.sort_by_key(|s: &SurveyEntry| s.main_type.map_or(usize::MAX, |m| m.number));
    Survey {
        degree,
        genus,
        survivors,
        eliminated,
        flagged,
        discrepancies: Discrepancies {
            classification: cross
                .map(|x| {
                    x.rows
                        .into_iter()
                        .filter(|r| r.verdict == printed::RowVerdict::Flagged)
                        .collect()
                })
                .unwrap_or_default(),
            decompositions: table.into_iter().filter(|r| r.is_flagged()).collect(),
            liftings: lifting_reports.into_iter().filter(|r| !r.passed()).collect(),
        },
    }
}

#[cfg(test)]
mod tests;
