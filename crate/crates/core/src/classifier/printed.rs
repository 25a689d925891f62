//! Cross-check of a classification against a transcription of printed
//! tables: listed K^2 tuples, terminal solutions and reconstructed types.
//!
//! Every printed row either matches the search exactly or is flagged with
//! the recomputed evidence. Candidates that no printed row reproduces are
//! listed separately.

use serde::{Deserialize, Serialize};

use super::{Branch, CandidateRecord, ClassifyReport, Provenance, TerminalKind};
use crate::lattice;
use crate::picard::DivisorClass;
use crate::typelang::{Affine, TypeExpr};

/// Transcription shipped with the crate for the degree 11, genus 8 query.
pub const PRINTED_PART1: &str = include_str!("../../data/part1_printed.jsonl");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchClass {
    /// Adjoint of square zero.
    Null,
    /// Adjoint of positive square.
    Positive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PrintedRow {
    /// A listed tuple; `null` entries are free.
    Tuple {
        list: String,
        branch: BranchClass,
        tuple: Vec<Option<i64>>,
    },
    DelPezzo {
        tuple: Vec<i64>,
        #[serde(rename = "type")]
        type_expr: TypeExpr,
    },
    Conic {
        tuple: Vec<i64>,
        a: String,
        #[serde(rename = "type")]
        type_expr: TypeExpr,
    },
    Minimal {
        terminal: TerminalKind,
        tuple: Vec<i64>,
        #[serde(rename = "type")]
        type_expr: TypeExpr,
    },
    /// A claim that a terminal kind yields no class of the queried degree
    /// and genus at this tuple.
    ClaimNone { terminal: TerminalKind, tuple: Vec<i64> },
    Dictionary {
        n0: usize,
        tuple: Vec<i64>,
        /// Degree of the terminal surface.
        degree: i64,
        /// Genus of the class before the terminal surface.
        ambient_genus: i64,
        terminal: TypeExpr,
        #[serde(rename = "type")]
        type_expr: TypeExpr,
    },
}

impl PrintedRow {
    fn kind_name(&self) -> &'static str {
        match self {
            PrintedRow::Tuple { .. } => "tuple",
            PrintedRow::DelPezzo { .. } => "del_pezzo",
            PrintedRow::Conic { .. } => "conic",
            PrintedRow::Minimal { .. } => "minimal",
            PrintedRow::ClaimNone { .. } => "claim_none",
            PrintedRow::Dictionary { .. } => "dictionary",
        }
    }

    fn tuple(&self) -> Vec<Option<i64>> {
        match self {
            PrintedRow::Tuple { tuple, .. } => tuple.clone(),
            PrintedRow::DelPezzo { tuple, .. }
            | PrintedRow::Conic { tuple, .. }
            | PrintedRow::Minimal { tuple, .. }
            | PrintedRow::ClaimNone { tuple, .. }
            | PrintedRow::Dictionary { tuple, .. } => tuple.iter().copied().map(Some).collect(),
        }
    }

    pub fn printed_type(&self) -> Option<&TypeExpr> {
        match self {
            PrintedRow::DelPezzo { type_expr, .. }
            | PrintedRow::Conic { type_expr, .. }
            | PrintedRow::Minimal { type_expr, .. }
            | PrintedRow::Dictionary { type_expr, .. } => Some(type_expr),
            _ => None,
        }
    }

    fn terminal_kind(&self) -> Option<TerminalKind> {
        match self {
            PrintedRow::DelPezzo { .. } => Some(TerminalKind::DelPezzo),
            PrintedRow::Conic { .. } => Some(TerminalKind::ConicBundle),
            PrintedRow::Minimal { terminal, .. } | PrintedRow::ClaimNone { terminal, .. } => Some(*terminal),
            PrintedRow::Dictionary { .. } => Some(TerminalKind::Dictionary),
            PrintedRow::Tuple { .. } => None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct RowParseError {
    pub line: usize,
    pub message: String,
}

/// Parses JSON lines; blank lines are skipped.
pub fn parse_rows(text: &str) -> Result<Vec<(usize, PrintedRow)>, RowParseError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map(|r| (i + 1, r)).map_err(|e| RowParseError {
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn shipped_rows() -> Vec<(usize, PrintedRow)> {
    parse_rows(PRINTED_PART1).expect("shipped transcription parses")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RowVerdict {
    Match,
    Flagged,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RowReport {
    pub line: usize,
    pub kind: &'static str,
    pub tuple: Vec<Option<i64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub printed: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reconstructed: Option<String>,
    pub verdict: RowVerdict,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub details: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UnprintedCandidate {
    #[serde(rename = "type")]
    pub type_expr: String,
    pub k_squares: Vec<i64>,
    pub terminal_kind: TerminalKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CrossReport {
    pub rows: Vec<RowReport>,
    /// Candidates no printed row reproduces with the same tuple and type.
    pub unprinted: Vec<UnprintedCandidate>,
    pub matched: usize,
    pub flagged: usize,
}

fn fmt_tuple(t: &[i64]) -> String {
    let parts: Vec<String> = t.iter().map(|k| k.to_string()).collect();
    format!("({})", parts.join(","))
}

fn provenances(c: &CandidateRecord) -> impl Iterator<Item = &Provenance> {
    std::iter::once(&c.provenance).chain(c.also_from.iter())
}

fn pattern_matches(pattern: &[Option<i64>], t: &[i64]) -> bool {
    pattern.len() == t.len() && pattern.iter().zip(t).all(|(p, k)| p.is_none_or(|p| p == *k))
}

/// Degree and genus of a printed type at `e = 0` (or as a plane class).
fn printed_invariants(t: &TypeExpr) -> Option<(i64, i64)> {
    let e = t.is_ruled().then_some(0);
    let d = t.to_divisor(e).ok()?;
    Some((d.degree().ok()?, d.sectional_genus().ok()?))
}

fn normal_form(d: &DivisorClass) -> Option<DivisorClass> {
    lattice::normal_form(d).ok().flatten().map(|(_, f)| f)
}

/// Candidates lattice-equivalent to `printed` at some `e` in `0..=max_e`,
/// one line per printed `e`.
fn equivalents(report: &ClassifyReport, printed: &TypeExpr, max_e: u32) -> Vec<String> {
    let mut out = Vec::new();
    let es: Vec<Option<u32>> = if printed.is_ruled() {
        (0..=max_e).map(Some).collect()
    } else {
        vec![None]
    };
    for pe in es {
        let Ok(p) = printed.to_divisor(pe) else { continue };
        let Some(pf) = normal_form(&p) else { continue };
        let mut found = Vec::new();
        for c in &report.candidates {
            let mut at: Vec<String> = Vec::new();
            for (ce, d) in c.realizations() {
                if d.model().canonical_square() == p.model().canonical_square() && normal_form(&d).as_ref() == Some(&pf)
                {
                    at.push(ce.map_or(String::new(), |e| e.to_string()));
                }
            }
            match at.as_slice() {
                [] => {}
                [x] if x.is_empty() => found.push(c.type_expr.to_string()),
                _ => found.push(format!("{} at e = {}", c.type_expr, at.join(","))),
            }
        }
        if !found.is_empty() {
            let head = pe.map_or("printed class".to_string(), |e| format!("printed class at e = {e}"));
            out.push(format!("{head} is lattice-equivalent to {}", found.join("; ")));
        }
    }
    out
}

fn hits<'a>(
    report: &'a ClassifyReport,
    kind: TerminalKind,
    tuple: &[i64],
) -> Vec<(&'a CandidateRecord, &'a Provenance)> {
    let mut out = Vec::new();
    for c in &report.candidates {
        for p in provenances(c) {
            if p.terminal_kind == kind && p.k_squares == tuple {
                out.push((c, p));
            }
        }
    }
    out
}

fn same_type(a: &TypeExpr, b: &TypeExpr) -> bool {
    a.without_annotation() == b.without_annotation()
}

/// Compares a classification with printed rows.
pub fn cross_report(report: &ClassifyReport, rows: &[(usize, PrintedRow)]) -> CrossReport {
    let mut out = Vec::new();
    let mut covered: Vec<(String, Vec<i64>, TerminalKind)> = Vec::new();

    for (line, row) in rows {
        let mut details = Vec::new();
        let mut reconstructed = None;
        let ok = match row {
            PrintedRow::Tuple { branch, tuple, .. } => {
                // A free trailing entry stands for a case settled at the prefix.
                let mut tuple = tuple.clone();
                while tuple.last() == Some(&None) {
                    tuple.pop();
                }
                let tuple = &tuple;
                let nodes: Vec<_> = report
                    .nodes
                    .iter()
                    .filter(|n| pattern_matches(tuple, &n.k_squares))
                    .collect();
                if nodes.is_empty() {
                    details.push("tuple is not a node of the search".into());
                    let near = near_tuples(report, tuple);
                    if !near.is_empty() {
                        details.push(format!("productive tuples one entry away: {}", near.join(", ")));
                    }
                    false
                } else {
                    let want = |b: &Branch| match branch {
                        BranchClass::Null => *b == Branch::AdjointNull,
                        BranchClass::Positive => !matches!(b, Branch::AdjointNull | Branch::Pruned { .. }),
                    };
                    if nodes.iter().any(|n| want(&n.branch)) {
                        let productive = report
                            .candidates
                            .iter()
                            .flat_map(provenances)
                            .any(|p| pattern_matches(tuple, &p.k_squares));
                        if !productive {
                            details.push("tuple is visited but yields no candidate".into());
                            let near = near_tuples(report, tuple);
                            if !near.is_empty() {
                                details.push(format!("productive tuples one entry away: {}", near.join(", ")));
                            }
                        }
                        productive
                    } else {
                        for n in &nodes {
                            details.push(format!(
                                "{} is visited with adjoint square {} ({:?})",
                                fmt_tuple(&n.k_squares),
                                n.adjoint.degree,
                                n.branch
                            ));
                        }
                        false
                    }
                }
            }
            PrintedRow::ClaimNone { terminal, tuple } => {
                let found = hits(report, *terminal, tuple);
                for (c, _) in &found {
                    details.push(format!(
                        "claim contradicted: {} reconstructs {} with (degree, genus) = ({}, {})",
                        terminal, c.type_expr, c.invariants.degree, c.invariants.genus
                    ));
                }
                found.is_empty()
            }
            _ => {
                let kind = row.terminal_kind().unwrap();
                let printed = row.printed_type().unwrap();
                let tuple: Vec<i64> = row.tuple().into_iter().flatten().collect();
                let at_tuple = hits(report, kind, &tuple);
                let exact = at_tuple.iter().find(|(c, _)| same_type(&c.type_expr, printed));
                let mut ok = true;
                match exact {
                    Some((c, p)) => {
                        covered.push((c.type_expr.to_string(), tuple.clone(), kind));
                        reconstructed = Some(c.type_expr.to_string());
                        ok &= check_fields(row, p, &mut details);
                    }
                    None => {
                        ok = false;
                        if let Some((pd, pg)) = printed_invariants(printed) {
                            details.push(format!("printed type has (degree, genus) = ({pd}, {pg})"));
                        }
                        if at_tuple.is_empty() {
                            details.push(format!("{} yields no {} candidate", fmt_tuple(&tuple), kind));
                        }
                        for (c, p) in &at_tuple {
                            reconstructed.get_or_insert_with(|| c.type_expr.to_string());
                            details.push(format!(
                                "{} reconstructs {} ({}, {})",
                                fmt_tuple(&tuple),
                                c.type_expr,
                                c.invariants.degree,
                                c.invariants.genus
                            ));
                            check_fields(row, p, &mut details);
                        }
                        for c in report.candidates.iter().filter(|c| same_type(&c.type_expr, printed)) {
                            details.push(format!(
                                "printed type is reconstructed from {}",
                                fmt_tuple(&c.provenance.k_squares)
                            ));
                        }
                        if at_tuple.is_empty() {
                            let near = near_candidates(report, kind, &tuple);
                            if !near.is_empty() {
                                details.push(format!("candidates one entry away: {}", near.join(", ")));
                            }
                            let max_e = match row {
                                PrintedRow::Conic { a, .. } => a
                                    .parse::<Affine>()
                                    .ok()
                                    .map(|a| a.constant_term().max(0) as u32)
                                    .unwrap_or(0),
                                _ => 0,
                            };
                            details.extend(equivalents(report, printed, max_e));
                        }
                    }
                }
                ok
            }
        };
        out.push(RowReport {
            line: *line,
            kind: row.kind_name(),
            tuple: row.tuple(),
            printed: row.printed_type().map(|t| t.to_string()),
            reconstructed,
            verdict: if ok { RowVerdict::Match } else { RowVerdict::Flagged },
            details,
        });
    }

    let mut unprinted = Vec::new();
    for c in &report.candidates {
        let key = c.type_expr.to_string();
        let seen = provenances(c).any(|p| {
            covered
                .iter()
                .any(|(t, tup, k)| *t == key && *tup == p.k_squares && *k == p.terminal_kind)
        });
        if !seen {
            unprinted.push(UnprintedCandidate {
                type_expr: key,
                k_squares: c.provenance.k_squares.clone(),
                terminal_kind: c.provenance.terminal_kind,
            });
        }
    }
    let matched = out.iter().filter(|r| r.verdict == RowVerdict::Match).count();
    CrossReport {
        flagged: out.len() - matched,
        matched,
        rows: out,
        unprinted,
    }
}

/// Field-by-field comparison once the reconstructed type is known.
fn check_fields(row: &PrintedRow, p: &Provenance, details: &mut Vec<String>) -> bool {
    let mut ok = true;
    match row {
        PrintedRow::Conic { a, .. } => match (a.parse::<Affine>(), p.a) {
            (Ok(pa), Some(ca)) if pa == ca => {}
            (_, ca) => {
                ok = false;
                details.push(format!(
                    "printed a = {a}, computed a = {}",
                    ca.map_or("none".into(), |x| x.to_string())
                ));
            }
        },
        PrintedRow::Dictionary {
            n0,
            degree,
            ambient_genus,
            terminal,
            ..
        } => {
            let t_inv = printed_invariants(terminal);
            if let Some((td, _)) = t_inv {
                if td != *degree {
                    ok = false;
                    details.push(format!(
                        "printed terminal {terminal} has degree {td}, printed degree column says {degree}"
                    ));
                }
            }
            if !same_type(&p.terminal, terminal) {
                ok = false;
                details.push(format!("printed terminal {terminal}, computed terminal {}", p.terminal));
            }
            if p.terminal_index != *n0 {
                ok = false;
                details.push(format!("printed n0 = {n0}, computed {}", p.terminal_index));
            }
            if let Some(amb) = p.ambient {
                if amb + 1 != *ambient_genus {
                    ok = false;
                    details.push(format!(
                        "printed genus {ambient_genus} before the terminal, computed {}",
                        amb + 1
                    ));
                }
            }
        }
        _ => {}
    }
    ok
}

fn distance_one(a: &[Option<i64>], b: &[i64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).filter(|(x, y)| x.is_some_and(|x| x != **y)).count() == 1
}

fn near_tuples(report: &ClassifyReport, tuple: &[Option<i64>]) -> Vec<String> {
    let mut out: Vec<String> = report
        .candidates
        .iter()
        .flat_map(provenances)
        .filter(|p| distance_one(tuple, &p.k_squares))
        .map(|p| fmt_tuple(&p.k_squares))
        .collect();
    out.sort();
    out.dedup();
    out
}

fn near_candidates(report: &ClassifyReport, kind: TerminalKind, tuple: &[i64]) -> Vec<String> {
    let pattern: Vec<Option<i64>> = tuple.iter().copied().map(Some).collect();
    let mut out: Vec<String> = Vec::new();
    for c in &report.candidates {
        for p in provenances(c) {
            if p.terminal_kind == kind && distance_one(&pattern, &p.k_squares) {
                out.push(format!("{} -> {}", fmt_tuple(&p.k_squares), c.type_expr));
            }
        }
    }
    out.sort();
    out.dedup();
    out
}
