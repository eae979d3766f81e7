//! Convex analysis over commutative monoids and groups, in exact arithmetic.

pub mod algebra;
pub mod duality;
pub mod error;
pub mod functions;
pub mod hull;
pub mod instances;
pub mod io;
pub mod linear;
pub mod optimize;
pub mod scalar;

pub use algebra::{
    combine_residual, enumerate_combinations, nth_multiple, probe_divisibility, Bounds, Divisibility,
    DivisibilityProbe, DualKind, NCombination, Structure,
};
pub use error::{Error, Result};
pub use scalar::{ExtendedScalar, Rational};
