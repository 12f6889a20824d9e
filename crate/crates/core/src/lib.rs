//! Sunflowers in restricted-intersection set families.
//!
//! The crate provides bitset set families ([`family`]), exact and certified bound
//! arithmetic ([`bounds`]), sunflower finders including the constructive recursion
//! for `L`-intersecting families ([`finders`]), spread and satisfying-probability
//! analysis ([`spread`]), the bad-pair encoding audit ([`encoding`]), seeded family
//! generators ([`generators`]) and the command-line front end ([`cli`]).

pub mod bounds;
pub mod cli;
pub mod encoding;
pub mod family;
pub mod finders;
pub mod format;
pub mod generators;
pub mod interval;
pub mod rational;
pub mod set;
pub mod spread;

pub use family::{SetFamily, Sunflower, WeightedFamily};
pub use set::ElementSet;
