//! Schottky subgroups of `SL(d,R)` acting on the symmetric space
//! `SL(d,R)/SO(d)`: Cartan and Jordan projections, flag geometry, free-group
//! word combinatorics, and an exhaustive word census from which orbit counts
//! `N(R)`, closed-geodesic counts `P(t)` and growth statistics are derived.

pub mod census;
pub mod error;
pub mod exec;
pub mod freegroup;
pub mod schottky;
pub mod symspace;

pub use error::{Error, Result};
pub use exec::Execution;
pub use freegroup::{ConjClass, Letter, Word};
pub use schottky::{GroupElement, SchottkySystem, SystemConfig, ValidationReport};
pub use symspace::{Flag, SquareMatrix, Tolerances, WeylVector};
