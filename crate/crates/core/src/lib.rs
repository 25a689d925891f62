//! Exact divisor-class arithmetic on rational surfaces and the adjunction
//! machinery used to classify smooth rational surfaces of a given degree and
//! sectional genus.

pub mod adjunction;
pub mod classifier;
pub mod eliminator;
pub mod lattice;
pub mod picard;
#[cfg(any(test, feature = "proptest"))]
pub mod properties;
pub mod survey;
pub mod typelang;
pub mod verifier;
