//! Exact rational linear algebra and linear programming.

pub mod fourier_motzkin;
pub mod matrix;
pub mod simplex;

pub use simplex::{feasible_point, maximize, minimize, LpOutcome};
