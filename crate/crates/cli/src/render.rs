//! Text tables and CSV for each command. JSON goes straight through serde.

use std::fmt::Write as _;

use serde::Serialize;

use ratsurf::adjunction::{AdjunctionSequence, AdjunctionStep};
use ratsurf::eliminator::{EliminationRow, Rule, TableSummary, Verdict};
use ratsurf::picard::{DivisorClass, PicardError};
use ratsurf::survey::{Disposal, Survey, SurveyEntry};
use ratsurf::typelang::TypeExpr;
use ratsurf::verifier::CheckReport;

/// Column-aligned text with a two-space gutter.
struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    fn render(&self, out: &mut String) {
        let mut widths: Vec<usize> = self.header.iter().map(|h| h.chars().count()).collect();
        for r in &self.rows {
            for (w, c) in widths.iter_mut().zip(r) {
                *w = (*w).max(c.chars().count());
            }
        }
        for r in std::iter::once(&self.header).chain(&self.rows) {
            let mut line = String::new();
            for (i, (c, w)) in r.iter().zip(&widths).enumerate() {
                if i + 1 == r.len() {
                    line.push_str(c);
                } else {
                    let _ = write!(line, "{c:<w$}  ");
                }
            }
            out.push_str(line.trim_end());
            out.push('\n');
        }
    }
}

fn csv_text<R: AsRef<[u8]>>(header: &[&str], rows: impl IntoIterator<Item = Vec<R>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("writing to memory");
    for r in rows {
        w.write_record(&r).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flushing to memory")).expect("csv output is utf-8")
}

/// The bracket form when it exists, the signed form otherwise.
fn show(d: &DivisorClass) -> String {
    TypeExpr::from_divisor(d)
        .map(|t| t.to_string())
        .unwrap_or_else(|_| d.signed())
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn e_label(e: Option<u32>) -> String {
    e.map_or_else(|| "-".to_string(), |e| e.to_string())
}

fn join<T: ToString>(items: &[T], sep: &str) -> String {
    items.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(sep)
}

#[derive(Serialize)]
pub struct InfoRecord {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e: Option<u32>,
    #[serde(rename = "type")]
    pub type_text: String,
    pub model: String,
    pub class: String,
    pub degree: i64,
    pub genus: i64,
    pub k2: i64,
    pub chi: i64,
    pub hk: i64,
}

impl InfoRecord {
    pub fn new(t: &TypeExpr, e: Option<u32>, d: &DivisorClass) -> Result<Self, PicardError> {
        let inv = d.invariants()?;
        Ok(InfoRecord {
            e,
            type_text: t.to_string(),
            model: d.model().to_string(),
            class: d.signed(),
            degree: inv.degree,
            genus: inv.genus,
            k2: inv.k2,
            chi: d.euler_char()?,
            hk: d.dot_canonical()?,
        })
    }

    fn cells(&self) -> Vec<String> {
        vec![
            e_label(self.e),
            self.type_text.clone(),
            self.model.clone(),
            self.degree.to_string(),
            self.genus.to_string(),
            self.k2.to_string(),
            self.chi.to_string(),
            self.hk.to_string(),
        ]
    }
}

const INFO_HEADER: [&str; 8] = ["e", "type", "model", "degree", "genus", "K^2", "chi", "H.K"];

pub fn info_table(records: &[InfoRecord]) -> String {
    let mut t = Table::new(&INFO_HEADER);
    for r in records {
        t.push(r.cells());
    }
    let mut out = String::new();
    t.render(&mut out);
    out
}

pub fn info_csv(records: &[InfoRecord]) -> String {
    csv_text(&INFO_HEADER, records.iter().map(InfoRecord::cells))
}

#[derive(Serialize)]
pub struct AdjoinRecord {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e: Option<u32>,
    #[serde(flatten)]
    pub step: AdjunctionStep,
}

const STEP_HEADER: [&str; 8] = ["e", "step", "before", "after", "blown down", "degree", "genus", "K^2"];

fn step_cells(e: Option<u32>, i: usize, s: &AdjunctionStep) -> Vec<String> {
    vec![
        e_label(e),
        i.to_string(),
        show(&s.before),
        show(&s.after),
        join(&s.blown_down, " "),
        s.invariants_after.degree.to_string(),
        s.invariants_after.genus.to_string(),
        s.invariants_after.k2.to_string(),
    ]
}

pub fn adjoin_table(records: &[AdjoinRecord]) -> String {
    let mut t = Table::new(&STEP_HEADER);
    for r in records {
        t.push(step_cells(r.e, 1, &r.step));
    }
    let mut out = String::new();
    t.render(&mut out);
    out
}

pub fn adjoin_csv(records: &[AdjoinRecord]) -> String {
    csv_text(&STEP_HEADER, records.iter().map(|r| step_cells(r.e, 1, &r.step)))
}

#[derive(Serialize)]
pub struct SequenceRecord {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e: Option<u32>,
    pub k_squares: Vec<i64>,
    #[serde(flatten)]
    pub sequence: AdjunctionSequence,
}

impl SequenceRecord {
    pub fn new(e: Option<u32>, sequence: AdjunctionSequence) -> Self {
        SequenceRecord {
            e,
            k_squares: sequence.k_squares(),
            sequence,
        }
    }
}

fn stop_text(s: &AdjunctionSequence) -> String {
    serde_json::to_value(s.stop)
        .ok()
        .and_then(|v| v.as_str().map(String::from))
        .unwrap_or_default()
}

pub fn sequence_table(records: &[SequenceRecord]) -> String {
    let mut out = String::new();
    for r in records {
        let s = &r.sequence;
        if let Some(e) = r.e {
            let _ = write!(out, "e = {e}: ");
        }
        let _ = writeln!(
            out,
            "K^2 sequence ({}), terminal {} on {}, stop {}",
            join(&r.k_squares, ","),
            show(&s.terminal),
            s.terminal.model(),
            stop_text(s)
        );
        let mut t = Table::new(&STEP_HEADER);
        for (i, step) in s.steps.iter().enumerate() {
            t.push(step_cells(r.e, i + 1, step));
        }
        t.render(&mut out);
    }
    out
}

pub fn sequence_csv(records: &[SequenceRecord]) -> String {
    csv_text(
        &STEP_HEADER,
        records.iter().flat_map(|r| {
            r.sequence
                .steps
                .iter()
                .enumerate()
                .map(|(i, s)| step_cells(r.e, i + 1, s))
        }),
    )
}

fn disposal_text(d: &Disposal) -> String {
    match d {
        Disposal::Row {
            row,
            row_e,
            rule,
            transported,
            row_flagged,
        } => {
            let mut s = format!("row {row}");
            if let Some(e) = row_e {
                let _ = write!(s, " at e = {e}");
            }
            let _ = write!(s, ", {rule}");
            if *transported {
                s.push_str(", transported");
            }
            if *row_flagged {
                s.push_str(", row flagged");
            }
            s
        }
        Disposal::Lifting { scenario } => scenario.to_string(),
    }
}

fn entry_disposals(entry: &SurveyEntry) -> String {
    let rs = &entry.resolutions;
    if rs.len() > 1 {
        let same: Option<Vec<(usize, Rule)>> = rs
            .iter()
            .map(|r| match &r.disposal {
                Some(Disposal::Row {
                    row,
                    row_e,
                    rule,
                    transported: false,
                    row_flagged: false,
                }) if *row_e == r.e => Some((*row, *rule)),
                _ => None,
            })
            .collect();
        if let Some(v) = same {
            if v.windows(2).all(|w| w[0] == w[1]) {
                return format!("row {} at each e, {}", v[0].0, v[0].1);
            }
        }
    }
    entry
        .resolutions
        .iter()
        .map(|r| {
            let what = r.disposal.as_ref().map_or_else(|| "open".to_string(), disposal_text);
            match r.e {
                Some(e) => format!("e = {e}: {what}"),
                None => what,
            }
        })
        .collect::<Vec<_>>()
        .join("; ")
}

fn candidate_cells(block: &str, entry: &SurveyEntry) -> Vec<String> {
    let c = &entry.candidate;
    let main = entry.main_type;
    vec![
        block.to_string(),
        entry.type_text(),
        opt(c.e_range),
        join(&c.provenance.k_squares, ","),
        c.provenance.terminal_kind.to_string(),
        entry_disposals(entry),
        entry.reasons.join("; "),
        opt(main.map(|m| m.number)),
        opt(main.and_then(|m| m.e_max)),
    ]
}

pub fn survey_csv(s: &Survey) -> String {
    let header = [
        "block",
        "type",
        "e_range",
        "k_squares",
        "terminal",
        "disposal",
        "reasons",
        "main_type",
        "e_max",
    ];
    let rows = s
        .eliminated
        .iter()
        .map(|e| candidate_cells("eliminated", e))
        .chain(s.flagged.iter().map(|e| candidate_cells("flagged", e)))
        .chain(s.survivors.iter().map(|e| candidate_cells("survivor", e)));
    csv_text(&header, rows)
}

pub fn survey_table(s: &Survey) -> String {
    let mut out = String::new();
    let total = s.survivors.len() + s.eliminated.len() + s.flagged.len();
    let _ = writeln!(
        out,
        "degree {}, genus {}: {} candidates, {} eliminated, {} flagged, {} survivors\n",
        s.degree,
        s.genus,
        total,
        s.eliminated.len(),
        s.flagged.len(),
        s.survivors.len()
    );

    out.push_str("Eliminated\n");
    let mut t = Table::new(&["type", "K^2 sequence", "e", "disposal"]);
    for e in &s.eliminated {
        t.push(vec![
            e.type_text(),
            join(&e.candidate.provenance.k_squares, ","),
            opt(e.candidate.e_range),
            entry_disposals(e),
        ]);
    }
    t.render(&mut out);

    if !s.flagged.is_empty() {
        out.push_str("\nFlagged\n");
        let mut t = Table::new(&["type", "K^2 sequence", "e", "reasons"]);
        for e in &s.flagged {
            t.push(vec![
                e.type_text(),
                join(&e.candidate.provenance.k_squares, ","),
                opt(e.candidate.e_range),
                e.reasons.join("; "),
            ]);
        }
        t.render(&mut out);
    }

    let d = &s.discrepancies;
    if !d.classification.is_empty() {
        out.push_str("\nClassification lines that do not reproduce\n");
        for r in &d.classification {
            let _ = writeln!(out, "  line {}: {}", r.line, r.details.join("; "));
        }
    }
    if !d.decompositions.is_empty() {
        out.push_str("\nDecomposition rows with flags\n");
        for r in &d.decompositions {
            if let Verdict::Flagged { reasons } = &r.verdict {
                let _ = writeln!(out, "  row {} {}: {}", r.index, r.input.h, reasons.join("; "));
            }
        }
    }
    for r in &d.liftings {
        let _ = writeln!(out, "\n{} fails:", r.scenario);
        for c in r.failures() {
            let _ = writeln!(out, "  {c}");
        }
    }

    out.push_str("\nSurvivors\n");
    let mut t = Table::new(&["#", "type", "K^2", "e"]);
    for e in &s.survivors {
        let bound = match (e.main_type.and_then(|m| m.e_max), e.candidate.e_range) {
            (Some(hi), Some(r)) => format!("e <= {hi} (computed {r})"),
            (None, Some(r)) => r.to_string(),
            _ => "-".into(),
        };
        t.push(vec![
            opt(e.main_type.map(|m| format!("({})", m.number))),
            e.type_text(),
            e.candidate.k0_squared.to_string(),
            bound,
        ]);
    }
    t.render(&mut out);
    out
}

#[derive(Serialize)]
pub struct TablePayload<'a> {
    pub summary: TableSummary,
    pub rows: &'a [EliminationRow],
}

const ELIM_HEADER: [&str; 13] = [
    "row", "e", "H", "A", "B", "chi(A)", "p_a(A)", "H.A", "chi(B)", "p_a(B)", "H.B", "rule", "verdict",
];

fn verdict_text(v: &Verdict) -> &'static str {
    match v {
        Verdict::Eliminated { .. } => "eliminated",
        Verdict::Survivor => "survivor",
        Verdict::Flagged { .. } => "flagged",
    }
}

fn eliminate_rows(rows: &[EliminationRow]) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    for r in rows {
        for o in &r.outcomes {
            let nums = o.derived.map(|d| d.as_array());
            let mut cells = vec![
                r.index.to_string(),
                e_label(o.e),
                r.input.h.to_string(),
                r.input.a.to_string(),
                o.b.clone().unwrap_or_default(),
            ];
            for i in 0..6 {
                cells.push(opt(nums.map(|n| n[i])));
            }
            cells.push(opt(o.rule));
            cells.push(verdict_text(&r.verdict).into());
            out.push(cells);
        }
    }
    out
}

pub fn eliminate_csv(rows: &[EliminationRow]) -> String {
    csv_text(&ELIM_HEADER, eliminate_rows(rows))
}

pub fn eliminate_table(rows: &[EliminationRow], summary: &TableSummary) -> String {
    let mut out = String::new();
    let mut t = Table::new(&ELIM_HEADER);
    for r in eliminate_rows(rows) {
        t.push(r);
    }
    t.render(&mut out);
    for r in rows {
        if let Verdict::Flagged { reasons } = &r.verdict {
            let _ = writeln!(out, "row {} flagged:", r.index);
            for reason in reasons {
                let _ = writeln!(out, "  {reason}");
            }
        }
    }
    let _ = writeln!(
        out,
        "{} rows: {} eliminated, {} flagged, {} survivors",
        summary.rows, summary.eliminated, summary.flagged, summary.survivors
    );
    out
}

pub fn verify_table(reports: &[CheckReport]) -> String {
    let mut out = String::new();
    for r in reports {
        let failed = r.failures().count();
        let _ = writeln!(out, "{}: {} checks, {} failed", r.scenario, r.checks.len(), failed);
        for a in &r.assumptions {
            let _ = writeln!(out, "  assumed: {a}");
        }
        for c in &r.checks {
            let _ = writeln!(out, "  {c}");
        }
        for o in &r.observations {
            let _ = writeln!(out, "  note: {}: {}", o.description, o.value);
        }
    }
    out
}

pub fn verify_csv(reports: &[CheckReport]) -> String {
    csv_text(
        &["scenario", "pass", "description", "expected", "computed"],
        reports.iter().flat_map(|r| {
            r.checks.iter().map(move |c| {
                vec![
                    r.scenario.to_string(),
                    c.pass.to_string(),
                    c.description.clone(),
                    c.expected.clone(),
                    c.computed.clone(),
                ]
            })
        }),
    )
}
