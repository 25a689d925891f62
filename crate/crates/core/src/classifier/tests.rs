use super::*;
use crate::adjunction::{sequence, StopReason};

fn flagship() -> &'static ClassifyReport {
    static R: OnceLock<ClassifyReport> = OnceLock::new();
    R.get_or_init(|| classify(11, 8).unwrap())
}

fn node<'a>(r: &'a ClassifyReport, t: &[i64]) -> &'a SearchNode {
    r.nodes.iter().find(|n| n.k_squares == t).unwrap()
}

fn types_of(r: &ClassifyReport, kind: TerminalKind, t: &[i64]) -> Vec<String> {
    let mut v: Vec<String> = r
        .candidates
        .iter()
        .filter(|c| c.provenance.terminal_kind == kind && c.provenance.k_squares == t)
        .map(|c| c.type_expr.to_string())
        .collect();
    v.sort();
    v
}

#[test]
fn depth_zero_range() {
    let r = flagship();
    assert_eq!(r.k0_range, Some((-11, -1)));
    let root = NodeInvariants::root(11, 8).unwrap();
    assert_eq!(root.hk, 3);
    assert_eq!(root.lower_bound().unwrap(), -11);
    // Hodge gives 1, H.K >= -2 tightens it.
    assert_eq!(adjunction::hodge_bound(11, 3).unwrap(), 1);
    assert_eq!(root.upper_bound().unwrap(), -1);
}

#[test]
fn first_adjoint_genus_is_11_plus_k0() {
    let r = flagship();
    for n in r.nodes.iter().filter(|n| n.depth() == 0) {
        let k0 = n.k_squares[0];
        assert_eq!(n.adjoint.genus, 11 + k0);
        // The chain stops after one step exactly for K_0^2 <= -6.
        assert_eq!(n.adjoint.genus <= TERMINAL_GENUS, k0 <= -6);
    }
}

#[test]
fn second_adjoint_degree_formula() {
    let r = flagship();
    for n in r.nodes.iter().filter(|n| n.depth() == 1) {
        let (k0, k1) = (n.k_squares[0], n.k_squares[1]);
        assert_eq!(n.adjoint.degree, 23 + 3 * k0 + k1);
    }
}

#[test]
fn null_adjoint_pairs_at_depth_one() {
    let r = flagship();
    let mut pairs: Vec<Vec<i64>> = r
        .nodes
        .iter()
        .filter(|n| n.depth() == 1 && n.branch == Branch::AdjointNull)
        .map(|n| n.k_squares.clone())
        .collect();
    pairs.sort();
    assert_eq!(
        pairs,
        vec![vec![-10, 7], vec![-9, 4], vec![-8, 1], vec![-7, -2], vec![-6, -5]]
    );
}

#[test]
fn search_node_invariants() {
    let r = flagship();
    for n in &r.nodes {
        assert!(n.k_squares.windows(2).all(|w| w[0] <= w[1]), "{:?}", n.k_squares);
        let k = n.last_k2();
        assert_eq!(n.adjoint, n.current.adjoint(k).unwrap());
        if !matches!(n.branch, Branch::Pruned { .. }) {
            assert!(k <= n.current.upper_bound().unwrap());
            assert!(k >= n.current.lower_bound().unwrap() || n.branch == Branch::AdjointNull);
        }
    }
}

#[test]
fn conic_bundle_a_values() {
    let r = flagship();
    let a = |t: &[i64]| solve_conic_bundle(node(r, t))[0].a.unwrap().to_string();
    assert_eq!(a(&[-10, 7]), "2-e");
    assert_eq!(a(&[-9, 4]), "3-e");
    assert_eq!(a(&[-6, -5]), "6-e");
    assert_eq!(a(&[-5, -1, -1]), "4-e");
    // The node-local formula agrees with 2a = 1 - 2e - sum K_i^2.
    for n in r.nodes.iter().filter(|n| n.branch == Branch::AdjointNull) {
        for c in solve_conic_bundle(n) {
            let sum: i64 = n.k_squares.iter().sum();
            assert_eq!(2 * c.a.unwrap().constant_term(), 1 - sum);
        }
    }
}

#[test]
fn conic_bundle_parity() {
    // Even sum of K^2 leaves 2a odd.
    let n = SearchNode {
        k_squares: vec![-9, 5],
        current: NodeInvariants {
            degree: 9,
            genus: 3,
            hk: -6,
        },
        adjoint: NodeInvariants {
            degree: 0,
            genus: 2,
            hk: -1,
        },
        branch: Branch::AdjointNull,
    };
    assert!(solve_conic_bundle(&n).is_empty());
}

#[test]
fn del_pezzo_branch() {
    let r = flagship();
    assert_eq!(types_of(r, TerminalKind::DelPezzo, &[-10, 7]), ["[6;2^2,1^17]"]);
    let rej = r
        .rejected
        .iter()
        .find(|x| x.provenance.k_squares == [-9, 4] && x.provenance.terminal_kind == TerminalKind::DelPezzo)
        .unwrap();
    assert_ne!(rej.computed.unwrap().genus, 8);
    // At depth 2 only (-5,-3,5) survives, and pi_0 = 1 + K_1^2 + 2 K_2^2
    // there.
    let dp2: Vec<_> = r
        .candidates
        .iter()
        .filter(|c| c.provenance.terminal_kind == TerminalKind::DelPezzo && c.provenance.k_squares.len() == 3)
        .collect();
    assert_eq!(dp2.len(), 1);
    assert_eq!(dp2[0].type_expr.to_string(), "[9;3^4,2^8,1^2]");
    for x in r
        .rejected
        .iter()
        .filter(|x| x.provenance.terminal_kind == TerminalKind::DelPezzo && x.provenance.k_squares.len() == 3)
    {
        let k = &x.provenance.k_squares;
        assert_eq!(x.computed.unwrap().genus, 1 + k[1] + 2 * k[2]);
    }
}

#[test]
fn minimal_degree_branches() {
    let r = flagship();
    assert_eq!(types_of(r, TerminalKind::Veronese, &[-5, -4]), ["[8;2^13,1^1]"]);
    // Scroll reconstructions do reach degree 11 and genus 8.
    assert_eq!(
        types_of(r, TerminalKind::Scroll, &[-11]),
        ["[(3,-1);1^19]", "[(3,2);1^19]", "[(3,5);1^19]"]
    );
    assert_eq!(
        types_of(r, TerminalKind::Scroll, &[-5, -4]),
        ["[(5,1);2^12,1^1]", "[(5,6);2^12,1^1]"]
    );
    // By hand: 3B + 5F - sum E_1..E_19 on F_0 has H^2 = 30 - 19 and
    // H.K = -6 - 10 + 19.
    let h = DivisorClass::ruled(0, 3, 5, &[1; 19]);
    assert_eq!((h.degree().unwrap(), h.dot_canonical().unwrap()), (11, 3));
    // The continuation below (-5,-4) reaches the conic bundle (-5,-4,8).
    assert_eq!(
        types_of(r, TerminalKind::ConicBundle, &[-5, -4, 8]),
        ["[(6,5-3e);2^12,1^1]"]
    );
}

#[test]
fn dictionary_rows() {
    let r = flagship();
    let d = |t: &[i64]| types_of(r, TerminalKind::Dictionary, t);
    assert_eq!(d(&[-8, 2]), ["[7;2^7,1^10]"]);
    assert_eq!(d(&[-7, 1]), ["[9;3^6,2^2,1^8]"]);
    assert_eq!(d(&[-6, -2]), ["[8;3^1,2^10,1^4]"]);
    assert_eq!(d(&[-6, -1]), ["[9;3^5,2^5,1^5]"]);
    assert_eq!(d(&[-6, 0]), ["[10;4^1,3^7,2^1,1^6]"]);
    assert_eq!(d(&[-7, 0]), ["[(5,5);2^8,1^7]"]);
    assert_eq!(d(&[-1, -1, -1, -1, -1, -1, -1]), ["[24;8^5,7^5]"]);
    assert!(r.gaps.is_empty());
}

#[test]
fn candidate_inventory() {
    let r = flagship();
    assert_eq!(r.candidates.len(), 46);
    for t in [
        "[7;2^7,1^10]",
        "[9;3^6,2^2,1^8]",
        "[(4,4-2e);2^1,1^17]",
        "[24;8^5,7^5]",
        "[16;6^1,5^7,4^1,3^2]",
    ] {
        assert!(r.find(t).is_some(), "{t}");
    }
    assert_eq!(r.find("[(4,4-2e)_2;2^1,1^17]").unwrap().e_range, ERange::new(0, 2));
    assert_eq!(r.find("[(4,6-2e);2^7,1^9]").unwrap().e_range, ERange::new(0, 4));
    assert!(r.find("[(5,5);2^9,1^7]").is_none());
    assert!(r.flagged().next().is_none());
}

#[test]
fn candidates_have_query_invariants() {
    for c in &flagship().candidates {
        for (_, d) in c.realizations() {
            let inv = d.invariants().unwrap();
            assert_eq!((inv.degree, inv.genus), (11, 8), "{}", c.type_expr);
            assert_eq!(inv.k2, c.k0_squared);
            assert_eq!(inv.k2, d.model().canonical_square());
        }
    }
}

/// Forward adjunction on each reconstructed class must walk back down the
/// recorded K^2 sequence to the recorded terminal.
#[test]
fn forward_oracle() {
    for c in &flagship().candidates {
        for p in std::iter::once(&c.provenance).chain(&c.also_from) {
            for (e, h0) in c.realizations() {
                let seq = sequence(&h0).unwrap();
                let term = p.terminal.to_divisor(e).unwrap();
                assert_eq!(seq.terminal, term, "{} via {:?}", c.type_expr, p.k_squares);
                let mut expect = p.k_squares[..p.terminal_index].to_vec();
                expect.push(term.model().canonical_square());
                assert_eq!(seq.k_squares(), expect, "{}", c.type_expr);
                let stop = match p.terminal_kind {
                    TerminalKind::DelPezzo | TerminalKind::ConicBundle => StopReason::DegenerateAdjoint,
                    TerminalKind::Veronese | TerminalKind::Scroll => StopReason::LeavesFamily,
                    TerminalKind::Dictionary => StopReason::Terminal,
                };
                assert_eq!(seq.stop, stop, "{}", c.type_expr);
            }
        }
    }
}

#[test]
fn reverse_type_matches_reverse_adjoin() {
    let t = TypeExpr::parse("[(2,3-e);1^5]").unwrap();
    let r = reverse_type(&t, 4);
    assert_eq!(r.to_string(), "[(4,5-2e);2^5,1^4]");
    for e in 0..=3 {
        let concrete = adjunction::reverse_adjoin(&t.to_divisor(Some(e)).unwrap(), 4).unwrap();
        assert_eq!(r.to_divisor(Some(e)).unwrap(), concrete);
    }
    assert_eq!(new_point_counts(-1, &[-8, 2]), None);
    assert_eq!(new_point_counts(9, &[-8, 2]), Some(vec![7, 10]));
}

#[test]
fn case3_table() {
    for (name, text) in CASE3_FAMILIES {
        let d = TypeExpr::parse(text).unwrap().to_divisor(None).unwrap();
        assert_eq!(case3_family(&d).unwrap(), Some(*name));
    }
    let h = TypeExpr::parse("[7;2^7,1^10]").unwrap().to_divisor(None).unwrap();
    assert_eq!(case3_family(&h).unwrap(), None);
    // The flagship search never passes through these classes.
    assert!(flagship().rejected.iter().all(|x| !x.reason.contains("case 3")));
}

#[test]
fn plane_query() {
    let r = classify(1, 0).unwrap();
    let types: Vec<String> = r.candidates.iter().map(|c| c.type_expr.to_string()).collect();
    assert_eq!(types, ["[1]"]);
}

#[test]
fn deterministic_across_pools() {
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| serde_json::to_string(&classify(11, 8).unwrap()).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(4));
    assert_eq!(one, run(8));
}

#[test]
fn printed_cross_report() {
    let x = printed::cross_report(flagship(), &printed::shipped_rows());
    let flagged: Vec<usize> = x
        .rows
        .iter()
        .filter(|r| r.verdict == printed::RowVerdict::Flagged)
        .map(|r| r.line)
        .collect();
    assert_eq!(
        flagged,
        [20, 22, 25, 26, 42, 46, 48, 49, 61, 63, 67, 72, 75, 77, 79, 80, 81]
    );
    let row = |line: usize| x.rows.iter().find(|r| r.line == line).unwrap();
    assert_eq!(row(22).reconstructed.as_deref(), Some("[(5,5);2^8,1^7]"));
    assert!(row(22).details.iter().any(|d| d.contains("(7, 7)")));
    assert!(row(42).details.iter().any(|d| d.contains("(-4,-3,1)")));
    let unprinted: Vec<&str> = x.unprinted.iter().map(|u| u.type_expr.as_str()).collect();
    assert!(unprinted.contains(&"[13;5^1,4^7,3^2,1^3]"));
    assert!(unprinted.contains(&"[(12,14-6e);6^9,1^1]"));
}
