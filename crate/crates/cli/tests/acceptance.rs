//! One PASS/FAIL line per acceptance criterion. Runs without the libtest
//! harness so the lines always reach the output. The process fails when the
//! set of red criteria differs from `KNOWN_RED`, so a regression and an
//! unexplained fix both show up.

use std::process::{Command, ExitCode};

use ratsurf::adjunction;
use ratsurf::classifier::printed::{self, RowVerdict};
use ratsurf::classifier::{self, NodeInvariants, TerminalKind};
use ratsurf::eliminator::{self, Rule, Target, Verdict};
use ratsurf::properties;
use ratsurf::typelang::{Head, TypeExpr};
use ratsurf::verifier;

/// Criteria that are red for reasons recorded in the decisions ledger: the
/// printed classification tables carry typos and omissions beyond the
/// (-7,0) line, and the O5 class of the construction has p_a 3.
const KNOWN_RED: [u8; 2] = [3, 5];

struct Outcome {
    number: u8,
    title: &'static str,
    pass: bool,
    detail: String,
}

fn outcome(number: u8, title: &'static str, failures: Vec<String>, ok: String) -> Outcome {
    Outcome {
        number,
        title,
        pass: failures.is_empty(),
        detail: if failures.is_empty() { ok } else { failures.join("; ") },
    }
}

/// (degree, genus, K^2) straight from the intersection forms.
fn oracle(t: &TypeExpr, e: Option<u32>) -> (i64, i64, i64) {
    let m = t.multiplicities();
    let n = m.len() as i64;
    let sum: i64 = m.iter().sum();
    let sq: i64 = m.iter().map(|x| x * x).sum();
    let (h2, hk, k2) = match (t.head(), e) {
        (Head::Plane(d), _) => (d * d - sq, -3 * d + sum, 9 - n),
        (Head::Ruled { p, q, .. }, Some(e)) => {
            let (e64, p, q) = (e as i64, p.eval(e).unwrap(), q.eval(e).unwrap());
            (p * p * e64 + 2 * p * q - sq, -p * e64 - 2 * p - 2 * q + sum, 8 - n)
        }
        _ => panic!("ruled type without e"),
    };
    (h2, (h2 + hk) / 2 + 1, k2)
}

fn criterion_1() -> Outcome {
    // Rows of the main theorem with the K^2 column of the classification.
    let table: [(&str, i64, Option<u32>); 5] = [
        ("[(4,4-2e);2^1,1^17]", -10, Some(2)),
        ("[(4,5-2e);2^4,1^13]", -9, Some(3)),
        ("[(4,6-2e);2^7,1^9]", -8, Some(5)),
        ("[7;2^7,1^10]", -8, None),
        ("[9;3^6,2^2,1^8]", -7, None),
    ];
    let mut failures = Vec::new();
    let mut checked = 0;
    for (text, k2, bound) in table {
        let t = TypeExpr::parse(text).unwrap();
        let es: Vec<Option<u32>> = match bound {
            Some(hi) => (0..=hi).map(Some).collect(),
            None => vec![None],
        };
        for e in es {
            let d = t.to_divisor(e).unwrap();
            let inv = d.invariants().unwrap();
            let got = (inv.degree, inv.genus, inv.k2);
            if got != (11, 8, k2) || got != oracle(&t, e) {
                failures.push(format!("{text} at e = {e:?}: {got:?}, oracle {:?}", oracle(&t, e)));
            }
            checked += 1;
        }
    }
    outcome(
        1,
        "main types have degree 11, genus 8 and the stated K^2",
        failures,
        format!("{checked} (type, e) pairs"),
    )
}

fn criterion_2() -> Outcome {
    let mut failures = Vec::new();
    let report = classifier::classify(11, 8).unwrap();
    let root = NodeInvariants::root(11, 8).unwrap();
    let hodge = adjunction::hodge_bound(11, root.hk).unwrap();
    if hodge != 1 {
        failures.push(format!("Hodge bound {hodge}"));
    }
    if root.upper_bound().unwrap() != -1 {
        failures.push(format!("upper bound {}", root.upper_bound().unwrap()));
    }
    if root.lower_bound().unwrap() != -11 {
        failures.push(format!("lower bound {}", root.lower_bound().unwrap()));
    }
    if report.k0_range != Some((-11, -1)) {
        failures.push(format!("search range {:?}", report.k0_range));
    }
    outcome(
        2,
        "K_0^2 search range is -11..-1",
        failures,
        "Hodge 1, tightened to -1, lower bound -11".into(),
    )
}

fn criterion_3() -> Outcome {
    let report = classifier::classify(11, 8).unwrap();
    let mut failures = Vec::new();

    for (pair, a) in [
        ([-10, 7], "2-e"),
        ([-9, 4], "3-e"),
        ([-8, 1], "4-e"),
        ([-7, -2], "5-e"),
        ([-6, -5], "6-e"),
    ] {
        let found = report.cases.iter().any(|c| {
            c.kind == TerminalKind::ConicBundle
                && c.k_squares == pair
                && c.a.map(|x| x.to_string()).as_deref() == Some(a)
        });
        if !found {
            failures.push(format!("no conic bundle at {pair:?} with a = {a}"));
        }
    }

    let six = [
        (vec![-8, 2], "[7;2^7,1^10]"),
        (vec![-7, 1], "[9;3^6,2^2,1^8]"),
        (vec![-6, -2], "[8;3^1,2^10,1^4]"),
        (vec![-6, -1], "[9;3^5,2^5,1^5]"),
        (vec![-6, 0], "[10;4^1,3^7,2^1,1^6]"),
        (vec![-7, 0], "[(5,5);2^8,1^7]"),
    ];
    for (tuple, text) in &six {
        let found = report.candidates.iter().any(|c| {
            c.type_expr.to_string() == *text
                && std::iter::once(&c.provenance)
                    .chain(&c.also_from)
                    .any(|p| p.k_squares == *tuple)
        });
        if !found {
            failures.push(format!("{tuple:?} does not reconstruct {text}"));
        }
    }

    let cross = printed::cross_report(&report, &printed::shipped_rows());
    let seven_zero = cross
        .rows
        .iter()
        .find(|r| r.tuple == [Some(-7), Some(0)] && r.printed.is_some());
    match seven_zero {
        Some(r) if r.verdict == RowVerdict::Flagged && r.reconstructed.as_deref() == Some("[(5,5);2^8,1^7]") => {}
        other => failures.push(format!("(-7,0) line not flagged as expected: {other:?}")),
    }
    let others: Vec<String> = cross
        .rows
        .iter()
        .filter(|r| r.verdict == RowVerdict::Flagged && r.tuple != [Some(-7), Some(0)])
        .map(|r| r.line.to_string())
        .collect();
    if !others.is_empty() {
        failures.push(format!(
            "{} further printed lines do not reproduce (lines {})",
            others.len(),
            others.join(", ")
        ));
    }
    outcome(
        3,
        "classification tables reproduce, only (-7,0) flagged",
        failures,
        format!("{} lines match", cross.matched),
    )
}

fn criterion_4() -> Outcome {
    let rows = eliminator::run_table(&eliminator::shipped_corpus(), &Target::default());
    let mut failures = Vec::new();
    let mut flagged = Vec::new();
    for r in &rows {
        let wanted = if r.input.has(5) {
            Rule::Specialty
        } else {
            Rule::LowGenus
        };
        let mismatched = r.outcomes.iter().any(|o| !o.mismatches.is_empty());
        match &r.verdict {
            Verdict::Eliminated { rule } => {
                if *rule != wanted || mismatched {
                    failures.push(format!(
                        "row {} eliminated by {rule} with mismatches {mismatched}",
                        r.index
                    ));
                }
                for o in &r.outcomes {
                    let printed: Vec<Option<i64>> = r.input.expected.to_vec();
                    let computed = o.derived.map(|d| d.as_array());
                    let silent = computed.is_none_or(|c| printed.iter().zip(c).any(|(p, c)| p.is_some_and(|p| p != c)));
                    if silent {
                        failures.push(format!("row {} passes silently at e = {:?}", r.index, o.e));
                    }
                }
            }
            Verdict::Flagged { reasons } if !reasons.is_empty() => flagged.push(format!("{}", r.index)),
            v => failures.push(format!("row {}: {v:?}", r.index)),
        }
    }
    let worked = rows
        .iter()
        .find(|r| r.input.h.to_string() == "[24;8^5,7^5]")
        .and_then(|r| r.outcomes[0].derived)
        .map(|d| d.as_array());
    if worked != Some([0, 1, 2, 3, 5, 9]) {
        failures.push(format!("[24;8^5,7^5] gives {worked:?}"));
    }
    let eliminated = rows.len() - flagged.len();
    outcome(
        4,
        "decomposition rows reproduce or are flagged with the difference",
        failures,
        format!(
            "{eliminated} of {} rows eliminated by their subscript rule, flagged rows {}",
            rows.len(),
            flagged.join(", ")
        ),
    )
}

fn scenario(number: u8, title: &'static str, names: &[&str]) -> Outcome {
    let mut failures = Vec::new();
    let mut checks = 0;
    for name in names {
        let report = verifier::run_scenario(name).unwrap();
        checks += report.checks.len();
        failures.extend(report.failures().map(|c| format!("{name}: {c}")));
    }
    outcome(number, title, failures, format!("{checks} checks"))
}

fn criterion_7() -> Outcome {
    let results = properties::run_all(properties::DEFAULT_CASES);
    let failures = results
        .iter()
        .filter(|o| !o.passed())
        .map(|o| format!("{}: {}", o.name, o.failure.as_deref().unwrap_or("")))
        .collect();
    outcome(
        7,
        "property suites",
        failures,
        format!("{} suites x {} cases", results.len(), properties::DEFAULT_CASES),
    )
}

fn run_classify(threads: Option<&str>) -> (Option<i32>, Vec<u8>) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ratsurf"));
    cmd.args(["classify", "--degree", "11", "--genus", "8", "--format", "json"]);
    if let Some(t) = threads {
        cmd.env("RAYON_NUM_THREADS", t);
    }
    let out = cmd.output().expect("binary runs");
    (out.status.code(), out.stdout)
}

fn criterion_8() -> Outcome {
    let runs = [
        run_classify(None),
        run_classify(None),
        run_classify(Some("1")),
        run_classify(Some("8")),
    ];
    let mut failures = Vec::new();
    if runs[0].1.is_empty() {
        failures.push("no output".into());
    }
    for (i, r) in runs.iter().enumerate().skip(1) {
        if *r != runs[0] {
            failures.push(format!("run {i} differs from run 0"));
        }
    }
    outcome(
        8,
        "classify JSON is byte-identical across runs and thread counts",
        failures,
        format!("4 runs, {} bytes each", runs[0].1.len()),
    )
}

fn main() -> ExitCode {
    let results = [
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        scenario(5, "construction checks", &["construction"]),
        scenario(6, "lifting checks", &["lifting-1", "lifting-2"]),
        criterion_7(),
        criterion_8(),
    ];
    for r in &results {
        let mark = if r.pass { "PASS" } else { "FAIL" };
        println!("{mark} criterion {}: {} ({})", r.number, r.title, r.detail);
    }
    let red: Vec<u8> = results.iter().filter(|r| !r.pass).map(|r| r.number).collect();
    if red == KNOWN_RED {
        ExitCode::SUCCESS
    } else {
        eprintln!("red criteria {red:?}, expected {KNOWN_RED:?}");
        ExitCode::FAILURE
    }
}
