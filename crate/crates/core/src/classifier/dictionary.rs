//! Smooth nondegenerate rational surfaces in small projective spaces.
//!
//! This is imported classification data, not something the search derives.
//! Each ambient dimension carries the degree range for which the list is
//! believed complete; a lookup outside it is a gap, not an empty answer.

use std::sync::OnceLock;

use serde::Serialize;

use crate::picard::Invariants;
use crate::typelang::TypeExpr;

pub const DICTIONARY_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DictEntry {
    /// Dimension of the ambient projective space.
    pub ambient: i64,
    #[serde(rename = "type")]
    pub type_expr: TypeExpr,
    /// Hirzebruch parameter for ruled entries.
    pub e: Option<u32>,
    pub name: &'static str,
    pub source: &'static str,
    pub invariants: Invariants,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DictionaryGap {
    pub degree: i64,
    pub genus: i64,
    pub ambient: i64,
}

impl std::fmt::Display for DictionaryGap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "dictionary gap: no complete list for degree {} genus {} in P^{}",
            self.degree, self.genus, self.ambient
        )
    }
}

/// (ambient, type, e, name, source)
const RAW: &[(i64, &str, Option<u32>, &str, &str)] = &[
    (2, "[1]", None, "plane", "P^2 itself"),
    (3, "[(1,1)]", Some(0), "quadric", "smooth quadrics in P^3"),
    (3, "[3;1^6]", None, "cubic surface", "smooth cubics in P^3"),
    (4, "[2;1^1]", None, "cubic scroll", "minimal degree surfaces"),
    (4, "[3;1^5]", None, "quartic Del Pezzo", "Alexander (1988), degree 4"),
    (
        4,
        "[4;2^1,1^7]",
        None,
        "Castelnuovo surface",
        "Alexander (1988), degree 5",
    ),
    (4, "[4;1^10]", None, "Bordiga surface", "Alexander (1988), degree 6"),
];

/// Highest degree for which the list at the given ambient dimension is
/// complete. Ambient dimension 1 or less holds no nondegenerate surface.
fn complete_up_to(ambient: i64) -> Option<i64> {
    match ambient {
        i64::MIN..=1 => Some(i64::MAX),
        2 => Some(i64::MAX),
        // A smooth surface in P^3 of degree >= 4 is not rational.
        3 => Some(i64::MAX),
        4 => Some(6),
        _ => None,
    }
}

pub fn entries() -> &'static [DictEntry] {
    static ENTRIES: OnceLock<Vec<DictEntry>> = OnceLock::new();
    ENTRIES.get_or_init(|| {
        RAW.iter()
            .map(|&(ambient, text, e, name, source)| {
                let type_expr = TypeExpr::parse(text).expect("dictionary type parses");
                let invariants = type_expr
                    .to_divisor(e)
                    .and_then(|d| Ok(d.invariants()?))
                    .expect("dictionary type converts");
                DictEntry {
                    ambient,
                    type_expr,
                    e,
                    name,
                    source,
                    invariants,
                }
            })
            .collect()
    })
}

/// Smooth rational nondegenerate surfaces of the given degree and sectional
/// genus in `P^ambient`.
pub fn terminal_dictionary(degree: i64, genus: i64, ambient: i64) -> Result<Vec<&'static DictEntry>, DictionaryGap> {
    match complete_up_to(ambient) {
        Some(max) if degree <= max => Ok(entries()
            .iter()
            .filter(|d| d.ambient == ambient && d.invariants.degree == degree && d.invariants.genus == genus)
            .collect()),
        _ => Err(DictionaryGap { degree, genus, ambient }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(v: &[&DictEntry]) -> Vec<&'static str> {
        v.iter().map(|d| d.name).collect()
    }

    #[test]
    fn entries_are_nondegenerate_in_their_span() {
        // Adjoint surfaces are linearly normal, so h^0 = chi (non-special)
        // must be ambient + 1. This is what keeps the projected Veronese
        // out of the P^4 list.
        for d in entries() {
            let cls = d.type_expr.to_divisor(d.e).unwrap();
            assert_eq!(cls.euler_char().unwrap(), d.ambient + 1, "{}", d.name);
        }
    }

    #[test]
    fn lookups() {
        assert_eq!(names(&terminal_dictionary(1, 0, 2).unwrap()), ["plane"]);
        assert_eq!(names(&terminal_dictionary(3, 1, 3).unwrap()), ["cubic surface"]);
        assert_eq!(names(&terminal_dictionary(3, 0, 4).unwrap()), ["cubic scroll"]);
        assert_eq!(names(&terminal_dictionary(5, 2, 4).unwrap()), ["Castelnuovo surface"]);
        assert_eq!(names(&terminal_dictionary(6, 3, 4).unwrap()), ["Bordiga surface"]);
        assert_eq!(names(&terminal_dictionary(4, 1, 4).unwrap()), ["quartic Del Pezzo"]);
        assert!(terminal_dictionary(4, 3, 3).unwrap().is_empty());
        assert!(terminal_dictionary(2, 0, 1).unwrap().is_empty());
    }

    #[test]
    fn gaps_are_reported() {
        assert_eq!(
            terminal_dictionary(7, 4, 4),
            Err(DictionaryGap {
                degree: 7,
                genus: 4,
                ambient: 4
            })
        );
        assert!(terminal_dictionary(4, 0, 5).is_err());
    }
}
