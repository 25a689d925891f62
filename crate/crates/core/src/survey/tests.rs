use std::collections::BTreeSet;
use std::sync::OnceLock;

use super::*;
use crate::eliminator::shipped_corpus;

fn flagship() -> &'static Survey {
    static S: OnceLock<Survey> = OnceLock::new();
    S.get_or_init(|| survey(11, 8, &shipped_corpus()).unwrap())
}

fn texts(block: &[SurveyEntry]) -> BTreeSet<String> {
    block.iter().map(|e| e.type_text()).collect()
}

fn entry(text: &str) -> &'static SurveyEntry {
    let s = flagship();
    s.survivors
        .iter()
        .chain(&s.eliminated)
        .chain(&s.flagged)
        .find(|e| e.type_text() == text)
        .unwrap_or_else(|| panic!("{text} is not a candidate"))
}

#[test]
fn survivors_are_the_main_types() {
    let s = flagship();
    let got: Vec<String> = s.survivors.iter().map(|e| e.type_text()).collect();
    let want: Vec<&str> = MAIN_TYPES.iter().map(|m| m.type_text).collect();
    assert_eq!(got, want);
    for (e, m) in s.survivors.iter().zip(&MAIN_TYPES) {
        assert_eq!(e.main_type, Some(*m));
        assert_eq!(e.candidate.k0_squared, m.k_squared);
        assert!(e.resolutions.iter().all(|r| r.disposal.is_none()));
    }
}

#[test]
fn main_types_have_the_right_invariants_up_to_the_bound() {
    for m in &MAIN_TYPES {
        let t = TypeExpr::parse(m.type_text).unwrap();
        let es: Vec<Option<u32>> = match m.e_max {
            None => vec![None],
            Some(hi) => (0..=hi).map(Some).collect(),
        };
        for e in es {
            let d = t.to_divisor(e).unwrap();
            let inv = d.invariants().unwrap();
            assert_eq!((inv.degree, inv.genus), (11, 8), "{} at {e:?}", m.type_text);
            assert_eq!(d.model().canonical_square(), m.k_squared);
        }
    }
}

#[test]
fn computed_e_ranges_sit_inside_the_stated_bounds() {
    let mut short = Vec::new();
    for e in &flagship().survivors {
        let m = e.main_type.unwrap();
        match (e.candidate.e_range, m.e_max) {
            (None, None) => {}
            (Some(r), Some(hi)) => {
                assert_eq!(r.lo(), 0);
                assert!(r.hi() <= hi);
                if r.hi() < hi {
                    short.push((m.number, r.hi(), hi));
                }
            }
            other => panic!("{}: {other:?}", m.type_text),
        }
    }
    // (4, 6-2e) comes from the conic bundle 2B + (4-e)F, and 4 - e >= 0
    // stops at e = 4.
    assert_eq!(short, vec![(5, 4, 5)]);
}

#[test]
fn flagged_candidates() {
    let want: BTreeSet<String> = [
        "[(3,-1);1^19]",
        "[(3,2);1^19]",
        "[(3,5);1^19]",
        "[10;3^8,2^4,1^1]",
        "[13;5^1,4^7,3^2,1^3]",
        "[(12,14-6e);6^9,1^1]",
    ]
    .into_iter()
    .map(String::from)
    .collect();
    assert_eq!(texts(&flagship().flagged), want);
    for e in &flagship().flagged {
        assert!(!e.is_eliminated());
        assert!(e.reasons.iter().any(|r| r.contains("absent from the printed")));
    }
}

#[test]
fn blocks_partition_the_candidates() {
    let s = flagship();
    let report = classifier::classify(11, 8).unwrap();
    assert_eq!(
        s.survivors.len() + s.eliminated.len() + s.flagged.len(),
        report.candidates.len()
    );
    let all: BTreeSet<String> = texts(&s.survivors)
        .into_iter()
        .chain(texts(&s.eliminated))
        .chain(texts(&s.flagged))
        .collect();
    assert_eq!(all.len(), report.candidates.len());
}

#[test]
fn liftings_match_literally() {
    assert_eq!(
        entry("[10;4^1,3^7,2^1,1^6]").resolutions[0].disposal,
        Some(Disposal::Lifting { scenario: "lifting-1" })
    );
    assert_eq!(
        entry("[6;2^2,1^17]").resolutions[0].disposal,
        Some(Disposal::Lifting { scenario: "lifting-2" })
    );
    // The conic-bundle type has the same normal form as the second lifting's
    // H but is a different presentation, and it survives.
    let plane = TypeExpr::parse("[6;2^2,1^17]").unwrap().to_divisor(None).unwrap();
    let ruled = TypeExpr::parse("[(4,4-2e);2^1,1^17]")
        .unwrap()
        .to_divisor(Some(1))
        .unwrap();
    let nf = |d: &DivisorClass| lattice::normal_form(d).unwrap().unwrap().1;
    assert_eq!(nf(&plane), nf(&ruled));
    assert!(flagship()
        .survivors
        .iter()
        .any(|e| e.type_text() == "[(4,4-2e);2^1,1^17]"));
}

/// Recomputes every transported disposal from scratch: same normal form,
/// carried `A` gives the row's numbers, and the decision agrees.
#[test]
fn transported_disposals_recompute() {
    let table = eliminator::run_table(&shipped_corpus(), &Target::default());
    let mut seen = 0;
    for entry in &flagship().eliminated {
        for (res, (e, h)) in entry.resolutions.iter().zip(entry.candidate.realizations()) {
            assert_eq!(res.e, e);
            let Some(Disposal::Row {
                row,
                row_e,
                rule,
                transported: true,
                ..
            }) = &res.disposal
            else {
                continue;
            };
            seen += 1;
            let o = table[row - 1].outcome_at(*row_e).unwrap();
            let (rh, ra) = o.classes.as_ref().unwrap();
            let (ri, rn) = lattice::normal_form(rh).unwrap().unwrap();
            let (ci, cn) = lattice::normal_form(&h).unwrap().unwrap();
            assert_eq!(rn, cn);
            let a = ci.apply_inverse(&ri.apply(ra).unwrap()).unwrap();
            let b = h.checked_sub(&a).unwrap();
            let rb = rh.checked_sub(ra).unwrap();
            for (x, y) in [(&a, ra), (&b, &rb)] {
                assert_eq!(x.euler_char().unwrap(), y.euler_char().unwrap());
                assert_eq!(x.arithmetic_genus().unwrap(), y.arithmetic_genus().unwrap());
            }
            assert_eq!(h.intersect(&a).unwrap(), rh.intersect(ra).unwrap());
            assert_eq!(a.intersect(&a).unwrap(), ra.intersect(ra).unwrap());
            let (d, a2) = Derived::compute(&h, &a).unwrap();
            assert_eq!(eliminator::decide(&d, a2, true).unwrap().1, Some(*rule));
        }
    }
    // (5,5), (7,7), the two (-5,-4) scrolls, [8;2^13,1], and the odd e of
    // (6,7-3e).
    assert_eq!(seen, 7);
}

#[test]
fn odd_e_of_row_22_is_covered_by_transport() {
    let e = entry("[(6,7-3e);3^5,2^7]");
    assert!(e.is_eliminated());
    for r in &e.resolutions {
        let Some(Disposal::Row {
            row,
            row_e,
            transported,
            ..
        }) = &r.disposal
        else {
            panic!("{r:?}");
        };
        assert_eq!(*row, 22);
        assert_eq!(*transported, r.e.unwrap() % 2 == 1);
        assert_eq!(row_e.unwrap() % 2, 0);
    }
}

#[test]
fn discrepancies() {
    let d = &flagship().discrepancies;
    let rows: Vec<usize> = d.decompositions.iter().map(|r| r.index).collect();
    assert_eq!(rows, vec![19, 21, 22]);
    assert!(d.liftings.is_empty());
    let lines: Vec<usize> = d.classification.iter().map(|r| r.line).collect();
    assert_eq!(
        lines,
        vec![20, 22, 25, 26, 42, 46, 48, 49, 61, 63, 67, 72, 75, 77, 79, 80, 81]
    );
    assert!(flagship().has_flags());
}

#[test]
fn other_targets_skip_the_flagship_references() {
    let s = survey(1, 0, &shipped_corpus()).unwrap();
    assert_eq!(texts(&s.survivors), BTreeSet::from(["[1]".to_string()]));
    assert!(s.discrepancies.classification.is_empty());
    assert!(s.discrepancies.liftings.is_empty());
    assert!(s.survivors[0].main_type.is_none());
}

#[test]
fn deterministic_across_pools() {
    let run = |threads| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| serde_json::to_string(&survey(11, 8, &shipped_corpus()).unwrap()).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(4));
    assert_eq!(one, run(8));
}
