//! Classification of hyperplane classes with given degree and sectional
//! genus by walking the possible K^2 sequences of their adjunction chains.
//!
//! A node at depth `i` fixes `K_0^2, ..., K_i^2`. The invariants of `H_i` on
//! `S_i` and of the adjoint `H_{i+1}` follow from the recursions
//!
//! ```text
//! H_{i+1}^2 = H_i^2 + 2 H_i.K_i + K_i^2
//! pi_{i+1}  = pi_i + H_i.K_i + K_i^2
//! H_{i+1}.K_{i+1} = H_i.K_i + K_i^2
//! ```
//!
//! and `K_i^2` ranges between the nondegeneracy bound and the Hodge bound
//! (tightened to `-1` when `H_i.K_i >= -2`). A node stops when the adjoint
//! has square zero (Del Pezzo or conic bundle), when the surface already has
//! genus at most 5 (its adjoint lives in `P^{pi_i - 1}` with `pi_i - 1 <= 4`
//! and is looked up in the dictionary), or when the adjoint has genus 0
//! (a surface of minimal degree; the chain is followed one step further as
//! well). Terminal classes are then pulled back to `H_0` by reverse
//! adjunction.

mod dictionary;
pub mod printed;

pub use dictionary::{
    entries as dictionary_entries, terminal_dictionary, DictEntry, DictionaryGap, DICTIONARY_VERSION,
};

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adjunction::{self, TERMINAL_GENUS};
use crate::lattice;
use crate::picard::{self, DivisorClass, Invariants, PicardError};
use crate::typelang::{Affine, ConversionError, ERange, Head, TypeExpr};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassifyError {
    #[error(transparent)]
    Lattice(#[from] PicardError),
    #[error(transparent)]
    Conversion(#[from] ConversionError),
}

type Result<T> = std::result::Result<T, ClassifyError>;

/// Degree, sectional genus and `H.K` of one class in a chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct NodeInvariants {
    pub degree: i64,
    pub genus: i64,
    pub hk: i64,
}

impl NodeInvariants {
    pub fn root(degree: i64, genus: i64) -> Result<Self> {
        let hk = picard::sub(picard::sub(picard::mul(2, genus)?, 2)?, degree)?;
        Ok(NodeInvariants { degree, genus, hk })
    }

    /// Invariants of `H + K` when `K^2 = k2`.
    pub fn adjoint(&self, k2: i64) -> Result<Self> {
        Ok(NodeInvariants {
            degree: picard::add(picard::add(self.degree, picard::mul(2, self.hk)?)?, k2)?,
            genus: picard::add(picard::add(self.genus, self.hk)?, k2)?,
            hk: picard::add(self.hk, k2)?,
        })
    }

    /// Largest admissible `K^2`: Hodge index, at most 9, and negative when
    /// `H.K >= -2`. Needs a positive degree.
    pub fn upper_bound(&self) -> Result<i64> {
        let mut hi = adjunction::hodge_bound(self.degree, self.hk)?.min(9);
        if self.hk >= -2 {
            hi = hi.min(-1);
        }
        Ok(hi)
    }

    /// Smallest admissible `K^2` for a nondegenerate adjoint image.
    pub fn lower_bound(&self) -> Result<i64> {
        Ok(adjunction::nondegeneracy_bound(self.degree, self.genus, self.hk)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PruneReason {
    NegativeAdjointDegree,
    BelowNondegeneracy,
    NegativeGenus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "branch", rename_all = "snake_case")]
pub enum Branch {
    Continuing,
    /// `H_{i+1}^2 = 0`.
    AdjointNull,
    /// `pi_i <= 5`; the adjoint surface sits in `P^ambient`.
    Dictionary {
        ambient: i64,
    },
    /// `pi_{i+1} = 0`; the adjoint surface has minimal degree. The search
    /// also continues below this node.
    MinimalDegree {
        ambient: i64,
    },
    Pruned {
        reason: PruneReason,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SearchNode {
    /// `K_0^2, ..., K_i^2`.
    pub k_squares: Vec<i64>,
    /// `H_i` on `S_i`.
    pub current: NodeInvariants,
    /// `H_{i+1} = H_i + K_i`.
    pub adjoint: NodeInvariants,
    pub branch: Branch,
}

impl SearchNode {
    pub fn depth(&self) -> usize {
        self.k_squares.len() - 1
    }

    pub fn last_k2(&self) -> i64 {
        *self.k_squares.last().expect("nodes fix at least K_0^2")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SearchTree {
    pub root: NodeInvariants,
    /// Inclusive range of `K_0^2`, if any.
    pub k0_range: Option<(i64, i64)>,
    /// Preorder; the tree structure is carried by the `k_squares` prefixes.
    pub nodes: Vec<SearchNode>,
}

/// All nodes of the K^2 search for `(degree, genus)`.
pub fn enumerate_k_sequences(degree: i64, genus: i64) -> Result<SearchTree> {
    let root = NodeInvariants::root(degree, genus)?;
    if degree <= 0 {
        return Ok(SearchTree {
            root,
            k0_range: None,
            nodes: Vec::new(),
        });
    }
    let lo = root.lower_bound()?;
    let hi = root.upper_bound()?;
    let subtrees: Vec<Result<Vec<SearchNode>>> = (lo..=hi)
        .into_par_iter()
        .map(|k| {
            let mut out = Vec::new();
            visit(&[], root, lo, k, &mut out)?;
            Ok(out)
        })
        .collect();
    let mut nodes = Vec::new();
    for s in subtrees {
        nodes.extend(s?);
    }
    Ok(SearchTree {
        root,
        k0_range: (lo <= hi).then_some((lo, hi)),
        nodes,
    })
}

fn visit(prefix: &[i64], state: NodeInvariants, lower: i64, k: i64, out: &mut Vec<SearchNode>) -> Result<()> {
    let next = state.adjoint(k)?;
    let branch = if next.degree == 0 {
        Branch::AdjointNull
    } else if next.degree < 0 {
        Branch::Pruned {
            reason: PruneReason::NegativeAdjointDegree,
        }
    } else if k < lower {
        Branch::Pruned {
            reason: PruneReason::BelowNondegeneracy,
        }
    } else if state.genus <= TERMINAL_GENUS {
        Branch::Dictionary {
            ambient: state.genus - 1,
        }
    } else if next.genus == 0 {
        Branch::MinimalDegree {
            ambient: state.genus - 1,
        }
    } else if next.genus < 0 {
        Branch::Pruned {
            reason: PruneReason::NegativeGenus,
        }
    } else {
        Branch::Continuing
    };
    let mut path = prefix.to_vec();
    path.push(k);
    out.push(SearchNode {
        k_squares: path.clone(),
        current: state,
        adjoint: next,
        branch,
    });
    if matches!(branch, Branch::Continuing | Branch::MinimalDegree { .. }) {
        let lower = next.lower_bound()?;
        let upper = next.upper_bound()?;
        for k2 in k..=upper {
            visit(&path, next, lower, k2, out)?;
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminalKind {
    DelPezzo,
    ConicBundle,
    Veronese,
    Scroll,
    Dictionary,
}

impl fmt::Display for TerminalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TerminalKind::DelPezzo => "del_pezzo",
            TerminalKind::ConicBundle => "conic_bundle",
            TerminalKind::Veronese => "veronese",
            TerminalKind::Scroll => "scroll",
            TerminalKind::Dictionary => "dictionary",
        };
        f.write_str(s)
    }
}

/// A terminal surface proposed for a node.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TerminalCase {
    pub kind: TerminalKind,
    /// The node's `K_0^2, ..., K_i^2`.
    pub k_squares: Vec<i64>,
    /// Index of the terminal surface in the chain.
    pub terminal_index: usize,
    /// Hyperplane class of the terminal surface; affine in `e` for conic
    /// bundles and scrolls.
    pub terminal: TypeExpr,
    pub e_range: Option<ERange>,
    /// Conic bundles: `H.F` of the terminal class.
    pub a: Option<Affine>,
    /// Scrolls: `d = 2 alpha - e`.
    pub alpha: Option<i64>,
    pub ambient: Option<i64>,
    /// Dictionary entry name.
    pub entry: Option<&'static str>,
}

impl TerminalCase {
    fn new(kind: TerminalKind, node: &SearchNode, terminal_index: usize, terminal: TypeExpr) -> Self {
        TerminalCase {
            kind,
            k_squares: node.k_squares.clone(),
            terminal_index,
            terminal,
            e_range: None,
            a: None,
            alpha: None,
            ambient: None,
            entry: None,
        }
    }

    /// `K_0^2, ..., K_{t-1}^2` for the terminal index `t`.
    pub fn prefix(&self) -> &[i64] {
        &self.k_squares[..self.terminal_index]
    }
}

fn ones(n: i64) -> Vec<i64> {
    vec![1; n.max(0) as usize]
}

/// Del Pezzo terminal `H_i = -K_i` on `S_i` for an adjoint-null node.
/// Whether it reproduces the query genus is decided after reconstruction.
pub fn solve_del_pezzo(node: &SearchNode) -> Vec<TerminalCase> {
    let k = node.last_k2();
    if node.branch != Branch::AdjointNull || !(1..=9).contains(&k) {
        return Vec::new();
    }
    vec![TerminalCase::new(
        TerminalKind::DelPezzo,
        node,
        node.depth(),
        TypeExpr::plane(3, &ones(9 - k)),
    )]
}

/// Conic bundle terminal `H_i = 2B + aF - E_1 - ... - E_{8-K_i^2}` on `S_i`.
///
/// `H_i.K_i = -2e - 4 - 2a + 8 - K_i^2` gives `2a = 4 - 2e - K_i^2 - H_i.K_i`,
/// so `a = c - e` with `c` fixed by the node; `e` runs over `0..=c`.
pub fn solve_conic_bundle(node: &SearchNode) -> Vec<TerminalCase> {
    let k = node.last_k2();
    if node.branch != Branch::AdjointNull || k > 8 {
        return Vec::new();
    }
    let two_c = 4 - k - node.current.hk;
    if two_c < 0 || two_c % 2 != 0 {
        return Vec::new();
    }
    let c = two_c / 2;
    let a = Affine::linear(c, -1);
    let mut case = TerminalCase::new(
        TerminalKind::ConicBundle,
        node,
        node.depth(),
        TypeExpr::ruled(Affine::constant(2), a, &ones(8 - k)),
    );
    case.a = Some(a);
    case.e_range = ERange::new(0, c as u32);
    vec![case]
}

/// Veronese surface and rational normal scrolls for a minimal-degree node:
/// `2L` when the adjoint degree is 4, and `B + (alpha - e)F` on `F_e` for
/// every `d = 2 alpha - e` with `0 <= e < alpha`.
pub fn solve_minimal_degree(node: &SearchNode) -> Vec<TerminalCase> {
    let Branch::MinimalDegree { ambient } = node.branch else {
        return Vec::new();
    };
    let d = node.adjoint.degree;
    let t = node.depth() + 1;
    let mut out = Vec::new();
    if d == 4 {
        let mut v = TerminalCase::new(TerminalKind::Veronese, node, t, TypeExpr::plane(2, &[]));
        v.ambient = Some(ambient);
        out.push(v);
    }
    for e in 0..=d {
        if (d + e) % 2 != 0 {
            continue;
        }
        let alpha = (d + e) / 2;
        if e >= alpha {
            continue;
        }
        let mut s = TerminalCase::new(
            TerminalKind::Scroll,
            node,
            t,
            TypeExpr::ruled(Affine::constant(1), Affine::linear(alpha, -1), &[]),
        );
        s.alpha = Some(alpha);
        s.ambient = Some(ambient);
        s.e_range = Some(ERange::single(e as u32));
        out.push(s);
    }
    out
}

/// Dictionary terminals for a node whose surface has genus at most 5.
pub fn solve_dictionary(node: &SearchNode) -> std::result::Result<Vec<TerminalCase>, DictionaryGap> {
    let Branch::Dictionary { ambient } = node.branch else {
        return Ok(Vec::new());
    };
    let found = terminal_dictionary(node.adjoint.degree, node.adjoint.genus, ambient)?;
    Ok(found
        .into_iter()
        .map(|entry| {
            let mut c = TerminalCase::new(
                TerminalKind::Dictionary,
                node,
                node.depth() + 1,
                entry.type_expr.clone(),
            );
            c.ambient = Some(ambient);
            c.entry = Some(entry.name);
            c.e_range = entry.e.map(ERange::single);
            c
        })
        .collect())
}

/// The classes of case 3 of the adjunction theorem: adjoint image of
/// positive degree but the adjunction map is not birational. A chain through
/// one of them is not a chain of birational adjunction maps.
pub const CASE3_FAMILIES: &[(&str, &str)] = &[
    ("case 3 (i)", "[6;2^7]"),
    ("case 3 (ii)", "[6;2^7,1^1]"),
    ("case 3 (iii)", "[9;3^8]"),
];

fn case3_normal_forms() -> &'static [(&'static str, DivisorClass)] {
    static FORMS: OnceLock<Vec<(&'static str, DivisorClass)>> = OnceLock::new();
    FORMS.get_or_init(|| {
        CASE3_FAMILIES
            .iter()
            .map(|(name, text)| {
                let d = TypeExpr::parse(text).unwrap().to_divisor(None).unwrap();
                let (_, nf) = lattice::normal_form(&d).unwrap().unwrap();
                (*name, nf)
            })
            .collect()
    })
}

/// Name of the case-3 family `h` is lattice-equivalent to, if any.
pub fn case3_family(h: &DivisorClass) -> Result<Option<&'static str>> {
    let Some((_, nf)) = lattice::normal_form(h)? else {
        return Ok(None);
    };
    Ok(case3_normal_forms().iter().find(|(_, f)| *f == nf).map(|(n, _)| *n))
}

fn terminal_k2(t: &TypeExpr) -> i64 {
    let n = t.exceptional_count() as i64;
    if t.is_ruled() {
        8 - n
    } else {
        9 - n
    }
}

/// Symbolic reverse adjunction: `d + 3`, or `(p + 2, q + 2 - e)`, every
/// multiplicity up by one and `new_points` fresh points of multiplicity 1.
pub fn reverse_type(t: &TypeExpr, new_points: usize) -> TypeExpr {
    let head = match *t.head() {
        Head::Plane(d) => Head::Plane(d + 3),
        Head::Ruled { p, q, .. } => Head::Ruled {
            p: p.shift(2, 0),
            q: q.shift(2, -1),
            annotation: None,
        },
    };
    let mut mults: Vec<i64> = t.multiplicities().iter().map(|m| m + 1).collect();
    mults.extend(std::iter::repeat_n(1, new_points));
    TypeExpr::new(head, &mults)
}

/// Points added at each reverse step, from the terminal back to `S_0`;
/// `None` if some step would need a negative count.
pub fn new_point_counts(terminal_k2: i64, prefix: &[i64]) -> Option<Vec<usize>> {
    let mut prev = terminal_k2;
    let mut out = Vec::with_capacity(prefix.len());
    for &k in prefix.iter().rev() {
        let n = prev.checked_sub(k)?;
        if n < 0 {
            return None;
        }
        out.push(n as usize);
        prev = k;
    }
    Some(out)
}

/// Reverse-adjoins a terminal type along `prefix`, symbolically in `e`.
pub fn reconstruct_type(terminal: &TypeExpr, prefix: &[i64]) -> Option<TypeExpr> {
    let counts = new_point_counts(terminal_k2(terminal), prefix)?;
    Some(counts.iter().fold(terminal.clone(), |t, &n| reverse_type(&t, n)))
}

/// Concrete reconstruction; returns the chain `H_0, ..., H_t` (terminal last).
pub fn reconstruct_class(terminal: &DivisorClass, prefix: &[i64]) -> Result<Option<Vec<DivisorClass>>> {
    let Some(counts) = new_point_counts(terminal.model().canonical_square(), prefix) else {
        return Ok(None);
    };
    let mut chain = vec![terminal.clone()];
    for n in counts {
        let next = adjunction::reverse_adjoin(chain.last().unwrap(), n)?;
        chain.push(next);
    }
    chain.reverse();
    Ok(Some(chain))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Plane,
    Ruled,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub k_squares: Vec<i64>,
    pub terminal_kind: TerminalKind,
    pub terminal_index: usize,
    pub terminal: TypeExpr,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<Affine>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ambient: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub entry: Option<&'static str>,
}

impl From<&TerminalCase> for Provenance {
    fn from(c: &TerminalCase) -> Self {
        Provenance {
            k_squares: c.k_squares.clone(),
            terminal_kind: c.kind,
            terminal_index: c.terminal_index,
            terminal: c.terminal.clone(),
            a: c.a,
            alpha: c.alpha,
            ambient: c.ambient,
            entry: c.entry,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateStatus {
    Valid,
    Flagged,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CandidateRecord {
    #[serde(rename = "type")]
    pub type_expr: TypeExpr,
    pub family: Family,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_range: Option<ERange>,
    pub k0_squared: i64,
    pub invariants: Invariants,
    pub provenance: Provenance,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub also_from: Vec<Provenance>,
    pub status: CandidateStatus,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
    /// Observations that do not affect the status.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl CandidateRecord {
    /// The class at a given `e` (ignored for plane types).
    pub fn class_at(&self, e: Option<u32>) -> std::result::Result<DivisorClass, ConversionError> {
        self.type_expr.to_divisor(e)
    }

    /// Every concrete realization, one per `e` in range.
    pub fn realizations(&self) -> Vec<(Option<u32>, DivisorClass)> {
        match self.e_range {
            None => vec![(None, self.type_expr.to_divisor(None).expect("plane type converts"))],
            Some(r) => r
                .iter()
                .filter_map(|e| self.type_expr.to_divisor(Some(e)).ok().map(|d| (Some(e), d)))
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RejectedCase {
    pub provenance: Provenance,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none", rename = "type")]
    pub type_expr: Option<TypeExpr>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub computed: Option<Invariants>,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassifyReport {
    pub degree: i64,
    pub genus: i64,
    pub k0_range: Option<(i64, i64)>,
    pub dictionary_version: u32,
    pub nodes: Vec<SearchNode>,
    pub cases: Vec<TerminalCase>,
    pub candidates: Vec<CandidateRecord>,
    pub rejected: Vec<RejectedCase>,
    pub gaps: Vec<DictionaryGap>,
    pub diagnostics: Vec<String>,
}

impl ClassifyReport {
    pub fn flagged(&self) -> impl Iterator<Item = &CandidateRecord> {
        self.candidates.iter().filter(|c| c.status == CandidateStatus::Flagged)
    }

    pub fn find(&self, type_text: &str) -> Option<&CandidateRecord> {
        let t = TypeExpr::parse(type_text).ok()?.without_annotation();
        self.candidates.iter().find(|c| c.type_expr == t)
    }
}

enum Realized {
    Candidate(CandidateRecord),
    Rejected(RejectedCase),
}

/// Kinds whose terminal is only a guess to be filtered by the query; a
/// mismatch rejects the case instead of flagging it.
fn filtered_kind(k: TerminalKind) -> bool {
    matches!(
        k,
        TerminalKind::DelPezzo | TerminalKind::Veronese | TerminalKind::Scroll
    )
}

fn realize(case: &TerminalCase, degree: i64, genus: i64) -> Result<Vec<Realized>> {
    let prov = Provenance::from(case);
    let reject = |e: Option<u32>, t: Option<TypeExpr>, computed: Option<Invariants>, reason: String| {
        Realized::Rejected(RejectedCase {
            provenance: prov.clone(),
            e,
            type_expr: t,
            computed,
            reason,
        })
    };

    let t_k2 = terminal_k2(&case.terminal);
    if let Some(&node_k2) = case.k_squares.get(case.terminal_index) {
        if t_k2 != node_k2 {
            return Ok(vec![reject(
                None,
                None,
                None,
                format!("terminal K^2 = {t_k2} differs from the node's {node_k2}"),
            )]);
        }
    } else if let Some(&last) = case.k_squares.last() {
        if t_k2 < last {
            return Ok(vec![reject(
                None,
                None,
                None,
                format!("terminal K^2 = {t_k2} is below K^2 = {last} of the surface it follows"),
            )]);
        }
    }
    let Some(sym) = reconstruct_type(&case.terminal, case.prefix()) else {
        return Ok(vec![reject(
            None,
            None,
            None,
            "reconstruction needs a negative number of points".into(),
        )]);
    };

    let es: Vec<Option<u32>> = match case.e_range {
        None => vec![None],
        Some(r) => r.iter().map(Some).collect(),
    };
    let mut kept: Vec<Option<u32>> = Vec::new();
    let mut inv0: Option<Invariants> = None;
    let mut flags = Vec::new();
    let mut notes = Vec::new();
    let mut out = Vec::new();
    for e in es {
        let at = e.unwrap_or(0);
        let term = case.terminal.to_divisor(e)?;
        let chain = reconstruct_class(&term, case.prefix())?.expect("point counts checked above");
        let h0 = &chain[0];
        if sym.to_divisor(e)? != *h0 {
            flags.push(format!(
                "symbolic reconstruction {sym} disagrees with {} at e = {at}",
                h0.signed()
            ));
        }
        let inv = h0.invariants()?;
        let shown = match e {
            Some(e) => Some(sym.resolve(e)?),
            None => Some(sym.clone()),
        };
        if (inv.degree, inv.genus) != (degree, genus) {
            if filtered_kind(case.kind) {
                out.push(reject(
                    e,
                    shown,
                    Some(inv),
                    format!("reconstructs to ({}, {})", inv.degree, inv.genus),
                ));
                continue;
            }
            flags.push(format!(
                "reconstruction at e = {at} has (degree, genus) = ({}, {})",
                inv.degree, inv.genus
            ));
        }
        if let Some(&k0) = case.k_squares.first() {
            if inv.k2 != k0 && case.terminal_index > 0 {
                flags.push(format!("reconstructed K^2 = {} but the chain starts at {k0}", inv.k2));
            }
        }
        let mut hit = None;
        for (i, h) in chain[..chain.len() - 1].iter().enumerate() {
            if h.degree()? > 0 {
                if let Some(name) = case3_family(h)? {
                    hit = Some((i, name));
                    break;
                }
            }
        }
        if let Some((i, name)) = hit {
            out.push(reject(e, shown, Some(inv), format!("H_{i} lies in {name}")));
            continue;
        }
        match inv0 {
            None => inv0 = Some(inv),
            Some(prev) if prev != inv => flags.push(format!("invariants vary with e: {prev} and {inv} at e = {at}")),
            _ => {}
        }
        if e.is_some() {
            let q = h0.head()[1];
            if q <= 0 {
                notes.push(format!("H.(B-eF) = {q} at e = {at}"));
            }
        }
        kept.push(e);
    }
    let Some(inv) = inv0 else {
        return Ok(out);
    };
    let es: Vec<u32> = kept.iter().flatten().copied().collect();
    let e_range = match (es.first(), es.last()) {
        (Some(&lo), Some(&hi)) => {
            if (hi - lo + 1) as usize != es.len() {
                flags.push(format!("surviving e values {es:?} are not contiguous"));
            }
            ERange::new(lo, hi)
        }
        _ => None,
    };
    let type_expr = match e_range {
        Some(r) if r.lo() == r.hi() => sym.resolve(r.lo())?,
        _ => sym,
    };
    let family = if type_expr.is_ruled() {
        Family::Ruled
    } else {
        Family::Plane
    };
    out.push(Realized::Candidate(CandidateRecord {
        type_expr,
        family,
        e_range,
        k0_squared: inv.k2,
        invariants: inv,
        provenance: prov.clone(),
        also_from: Vec::new(),
        status: if flags.is_empty() {
            CandidateStatus::Valid
        } else {
            CandidateStatus::Flagged
        },
        flags,
        notes,
    }));
    Ok(out)
}

fn solve_node(node: &SearchNode) -> (Vec<TerminalCase>, Option<DictionaryGap>) {
    match node.branch {
        Branch::AdjointNull => {
            let mut v = solve_del_pezzo(node);
            v.extend(solve_conic_bundle(node));
            (v, None)
        }
        Branch::MinimalDegree { .. } => (solve_minimal_degree(node), None),
        Branch::Dictionary { .. } => match solve_dictionary(node) {
            Ok(v) => (v, None),
            Err(g) => (Vec::new(), Some(g)),
        },
        _ => (Vec::new(), None),
    }
}

/// Terminal cases for a query whose genus is already at most 5: the
/// dictionary and the minimal-degree surfaces, matched directly.
fn direct_cases(degree: i64, genus: i64) -> Vec<TerminalCase> {
    let mut out = Vec::new();
    let base = |kind, terminal: TypeExpr| TerminalCase {
        kind,
        k_squares: Vec::new(),
        terminal_index: 0,
        terminal,
        e_range: None,
        a: None,
        alpha: None,
        ambient: None,
        entry: None,
    };
    for entry in dictionary_entries() {
        if entry.invariants.degree == degree && entry.invariants.genus == genus {
            let mut c = base(TerminalKind::Dictionary, entry.type_expr.clone());
            c.ambient = Some(entry.ambient);
            c.entry = Some(entry.name);
            c.e_range = entry.e.map(ERange::single);
            out.push(c);
        }
    }
    if genus == 0 {
        if degree == 4 {
            let mut v = base(TerminalKind::Veronese, TypeExpr::plane(2, &[]));
            v.ambient = Some(5);
            out.push(v);
        }
        for e in 0..=degree.max(0) {
            if (degree + e) % 2 != 0 || e >= (degree + e) / 2 {
                continue;
            }
            let alpha = (degree + e) / 2;
            let mut s = base(
                TerminalKind::Scroll,
                TypeExpr::ruled(Affine::constant(1), Affine::linear(alpha, -1), &[]),
            );
            s.alpha = Some(alpha);
            s.ambient = Some(degree + 1);
            s.e_range = Some(ERange::single(e as u32));
            out.push(s);
        }
    }
    out
}

fn sort_key(c: &CandidateRecord) -> (i64, Family, String, Option<ERange>) {
    (c.k0_squared, c.family, c.type_expr.to_string(), c.e_range)
}

fn prov_key(p: &Provenance) -> (Vec<i64>, TerminalKind, String) {
    (p.k_squares.clone(), p.terminal_kind, p.terminal.to_string())
}

/// Full pipeline: search, terminal solvers, reconstruction, validation,
/// deduplication and a deterministic order.
pub fn classify(degree: i64, genus: i64) -> Result<ClassifyReport> {
    let mut diagnostics = Vec::new();
    let (tree, cases, gaps) = if degree > 0 && genus <= TERMINAL_GENUS {
        diagnostics.push(format!(
            "genus {genus} <= {TERMINAL_GENUS}: matched directly against the dictionary and minimal-degree surfaces"
        ));
        let tree = SearchTree {
            root: NodeInvariants::root(degree, genus)?,
            k0_range: None,
            nodes: Vec::new(),
        };
        (tree, direct_cases(degree, genus), Vec::new())
    } else {
        let tree = enumerate_k_sequences(degree, genus)?;
        let solved: Vec<_> = tree.nodes.par_iter().map(solve_node).collect();
        let mut cases = Vec::new();
        let mut gaps = Vec::new();
        for (c, g) in solved {
            cases.extend(c);
            gaps.extend(g);
        }
        (tree, cases, gaps)
    };
    for g in &gaps {
        diagnostics.push(g.to_string());
    }

    let realized: Vec<Result<Vec<Realized>>> = cases.par_iter().map(|c| realize(c, degree, genus)).collect();
    let mut merged: BTreeMap<(String, Option<ERange>), CandidateRecord> = BTreeMap::new();
    let mut rejected = Vec::new();
    for r in realized {
        for item in r? {
            match item {
                Realized::Rejected(x) => rejected.push(x),
                Realized::Candidate(c) => {
                    let key = (c.type_expr.to_string(), c.e_range);
                    match merged.get_mut(&key) {
                        Some(existing) => {
                            let mut provs = vec![existing.provenance.clone(), c.provenance];
                            provs.append(&mut existing.also_from);
                            provs.sort_by_key(prov_key);
                            existing.provenance = provs.remove(0);
                            existing.also_from = provs;
                            existing.flags.extend(c.flags);
                            existing.flags.sort();
                            existing.flags.dedup();
                            if !existing.flags.is_empty() {
                                existing.status = CandidateStatus::Flagged;
                            }
                        }
                        None => {
                            merged.insert(key, c);
                        }
                    }
                }
            }
        }
    }
    let mut candidates: Vec<CandidateRecord> = merged.into_values().collect();
    candidates.sort_by_key(sort_key);

    Ok(ClassifyReport {
        degree,
        genus,
        k0_range: tree.k0_range,
        dictionary_version: DICTIONARY_VERSION,
        nodes: tree.nodes,
        cases,
        candidates,
        rejected,
        gaps,
        diagnostics,
    })
}

#[cfg(test)]
mod tests;
