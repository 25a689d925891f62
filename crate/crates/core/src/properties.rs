//! Randomized checks of the lattice laws and the type notation. Compiled for
//! the crate's own tests and, behind the `proptest` feature, for downstream
//! harnesses that want to run the same suites.

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

use crate::adjunction;
use crate::classifier::{printed, reverse_type};
use crate::eliminator::{self, base_change_f0_to_p2};
use crate::lattice::Move;
use crate::picard::{DivisorClass, SurfaceModel};
use crate::typelang::{Affine, Head, TypeExpr};

pub const DEFAULT_CASES: u32 = 10_000;

#[derive(Clone, Debug)]
pub struct PropertyOutcome {
    pub name: &'static str,
    pub cases: u32,
    /// The shrunk counterexample, if any.
    pub failure: Option<String>,
}

impl PropertyOutcome {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

fn runner(cases: u32) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn model() -> impl Strategy<Value = SurfaceModel> {
    prop_oneof![
        (0usize..=12).prop_map(SurfaceModel::plane),
        (0u32..=6, 0usize..=12).prop_map(|(e, n)| SurfaceModel::ruled(e, n)),
    ]
}

fn class_on(m: SurfaceModel) -> impl Strategy<Value = DivisorClass> {
    prop::collection::vec(-30i64..=30, m.rank()).prop_map(move |c| DivisorClass::new(m, c).expect("rank matches"))
}

fn classes(k: usize) -> impl Strategy<Value = Vec<DivisorClass>> {
    model().prop_flat_map(move |m| prop::collection::vec(class_on(m), k))
}

fn check<T: std::fmt::Debug>(
    name: &'static str,
    cases: u32,
    strategy: impl Strategy<Value = T>,
    test: impl Fn(T) -> Result<(), TestCaseError>,
) -> PropertyOutcome {
    let failure = runner(cases).run(&strategy, test).err().map(|e| e.to_string());
    PropertyOutcome { name, cases, failure }
}

fn lattice<T>(r: Result<T, crate::picard::PicardError>) -> Result<T, TestCaseError> {
    r.map_err(|e| TestCaseError::fail(e.to_string()))
}

pub fn bilinearity(cases: u32) -> PropertyOutcome {
    check(
        "intersection bilinearity and symmetry",
        cases,
        (classes(3), -20i64..=20, -20i64..=20),
        |(ds, a, b)| {
            let (x, y, z) = (&ds[0], &ds[1], &ds[2]);
            prop_assert_eq!(lattice(x.intersect(y))?, lattice(y.intersect(x))?);
            let combo = lattice(lattice(x.checked_scale(a))?.checked_add(&lattice(y.checked_scale(b))?))?;
            let lhs = lattice(combo.intersect(z))?;
            let rhs = a * lattice(x.intersect(z))? + b * lattice(y.intersect(z))?;
            prop_assert_eq!(lhs, rhs);
            Ok(())
        },
    )
}

pub fn parity(cases: u32) -> PropertyOutcome {
    check("D^2 + D.K is even", cases, classes(1), |ds| {
        let d = &ds[0];
        let s = lattice(d.degree())? + lattice(d.dot_canonical())?;
        prop_assert_eq!(s.rem_euclid(2), 0);
        lattice(d.arithmetic_genus())?;
        Ok(())
    })
}

pub fn serre_duality(cases: u32) -> PropertyOutcome {
    check("chi(D) = chi(K - D)", cases, classes(1), |ds| {
        let d = &ds[0];
        let k = DivisorClass::canonical(d.model());
        let dual = lattice(k.checked_sub(d))?;
        prop_assert_eq!(lattice(d.euler_char())?, lattice(dual.euler_char())?);
        Ok(())
    })
}

/// Classes whose exceptional coefficients are all at most -1 and whose
/// leading coefficient is non-negative, the shape adjunction accepts back.
fn adjoint_shape() -> impl Strategy<Value = DivisorClass> {
    model().prop_flat_map(|m| {
        let hl = m.head_len();
        (
            0i64..=30,
            prop::collection::vec(-30i64..=30, hl - 1),
            prop::collection::vec(-12i64..=-1, m.n()),
        )
            .prop_map(move |(lead, rest, ex)| {
                let mut c = vec![lead];
                c.extend(rest);
                c.extend(ex);
                DivisorClass::new(m, c).expect("rank matches")
            })
    })
}

pub fn adjoin_inverts_reverse(cases: u32) -> PropertyOutcome {
    check(
        "adjoin after reverse_adjoin is the identity",
        cases,
        (adjoint_shape(), 0usize..=8),
        |(h, k)| {
            let lifted = lattice(adjunction::reverse_adjoin(&h, k))?;
            let step = adjunction::adjoin(&lifted).map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert_eq!(&step.after, &h);
            let n = h.model().n();
            let fresh: Vec<usize> = (n + 1..=n + k).collect();
            prop_assert_eq!(step.blown_down, fresh);
            Ok(())
        },
    )
}

pub fn base_change(cases: u32) -> PropertyOutcome {
    let on_f0 = (1usize..=12).prop_flat_map(|n| {
        let m = SurfaceModel::ruled(0, n);
        (prop::collection::vec(class_on(m), 2), 0..n)
    });
    check("F_0 to P^2 preserves products and K", cases, on_f0, |(ds, chosen)| {
        let mv = Move::F0ToPlane { chosen };
        let (x, y) = (&ds[0], &ds[1]);
        let (ix, iy) = (lattice(mv.apply(x))?, lattice(mv.apply(y))?);
        prop_assert_eq!(lattice(x.intersect(y))?, lattice(ix.intersect(&iy))?);
        let k = DivisorClass::canonical(x.model());
        prop_assert_eq!(lattice(mv.apply(&k))?, DivisorClass::canonical(ix.model()));
        // The table's base change picks its own exceptional slot per class.
        let bx = lattice(base_change_f0_to_p2(x))?;
        prop_assert_eq!(lattice(bx.degree())?, lattice(x.degree())?);
        prop_assert_eq!(lattice(bx.dot_canonical())?, lattice(x.dot_canonical())?);
        Ok(())
    })
}

fn affine() -> impl Strategy<Value = Affine> {
    (-40i64..=40, -6i64..=6, 1i64..=3).prop_map(|(c, num, den)| Affine::new(c, num, den))
}

fn type_expr() -> impl Strategy<Value = TypeExpr> {
    let head = prop_oneof![
        (-5i64..=40).prop_map(Head::Plane),
        (affine(), affine(), prop::option::of(0i64..=9)).prop_map(|(p, q, annotation)| Head::Ruled {
            p,
            q,
            annotation
        }),
    ];
    (head, prop::collection::vec(1i64..=12, 0..=24)).prop_map(|(h, m)| TypeExpr::new(h, &m))
}

/// Type strings shipped with the crate: the reference list, both printed
/// tables.
pub fn corpus_type_strings() -> Vec<String> {
    let mut out: Vec<String> = include_str!("../data/reference_types.txt")
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(String::from)
        .collect();
    for row in eliminator::shipped_corpus() {
        out.push(row.h.to_string());
        out.push(row.a.to_string());
    }
    for (_, row) in printed::shipped_rows() {
        if let Some(t) = row.printed_type() {
            out.push(t.to_string());
        }
    }
    out
}

pub fn typelang_round_trip(cases: u32) -> PropertyOutcome {
    let corpus = corpus_type_strings();
    for s in &corpus {
        let parsed = match TypeExpr::parse(s) {
            Ok(t) => t,
            Err(e) => {
                return PropertyOutcome {
                    name: "type notation round trip",
                    cases,
                    failure: Some(format!("{s}: {e}")),
                }
            }
        };
        if parsed.to_string() != *s || TypeExpr::parse(&parsed.to_string()).as_ref() != Ok(&parsed) {
            return PropertyOutcome {
                name: "type notation round trip",
                cases,
                failure: Some(format!("{s} prints back as {parsed}")),
            };
        }
    }
    check("type notation round trip", cases, type_expr(), |t| {
        let text = t.to_string();
        let back = TypeExpr::parse(&text).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
        prop_assert_eq!(back, t);
        Ok(())
    })
}

pub fn reverse_type_agrees(cases: u32) -> PropertyOutcome {
    let ty = prop_oneof![
        ((0i64..=30), prop::collection::vec(1i64..=12, 0..=16)).prop_map(|(d, m)| TypeExpr::plane(d, &m)),
        (
            (0i64..=20),
            (0i64..=30),
            (-3i64..=0),
            prop::collection::vec(1i64..=12, 0..=16)
        )
            .prop_map(|(p, q, k, m)| TypeExpr::ruled(Affine::constant(p), Affine::linear(q, k), &m)),
    ];
    check(
        "reverse_type agrees with reverse_adjoin",
        cases,
        (ty, 0usize..=8, 0u32..=6),
        |(t, k, e)| {
            let e = t.is_ruled().then_some(e);
            let Ok(d) = t.to_divisor(e) else {
                return Ok(());
            };
            let symbolic = reverse_type(&t, k)
                .to_divisor(e)
                .map_err(|err| TestCaseError::fail(err.to_string()))?;
            prop_assert_eq!(symbolic, lattice(adjunction::reverse_adjoin(&d, k))?);
            Ok(())
        },
    )
}

pub fn run_all(cases: u32) -> Vec<PropertyOutcome> {
    vec![
        bilinearity(cases),
        parity(cases),
        serre_duality(cases),
        adjoin_inverts_reverse(cases),
        base_change(cases),
        typelang_round_trip(cases),
        reverse_type_agrees(cases),
    ]
}
