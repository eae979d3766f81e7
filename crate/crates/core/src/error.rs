use thiserror::Error;

/// Errors surfaced by the library.
///
/// Failed law checks, infeasible systems and non-memberships are *results*,
/// not errors; this type only covers malformed input and unmet preconditions.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid instance parameters: {0}")]
    InvalidInstance(String),

    #[error("lattice generators are dependent over the integers")]
    DependentGenerators,

    #[error("vector is not a lattice point")]
    NotInLattice,

    #[error("malformed combination: {0}")]
    MalformedCombination(String),

    #[error("element is outside the window and the table has no outside policy")]
    OutsideWindow,

    #[error("function table is missing a value for a window element: {0}")]
    MissingValue(String),

    #[error("function tables do not share a window")]
    WindowMismatch,

    #[error("rational hull is unbounded or infinite in this instance; cannot enumerate")]
    UnboundedHull,

    #[error("strategy `{0}` is not available for this instance")]
    StrategyUnavailable(String),

    #[error("dimension {0} exceeds the supported bound {1}")]
    DimensionTooLarge(usize, usize),

    #[error("map is not additive: {0}")]
    NotAdditive(String),

    #[error("precondition failed: {0}")]
    PreconditionFailed(String),

    #[error("relation does not hold: {0}")]
    RelationDoesNotHold(String),

    #[error("core-of-domain probe failed: no (n, g) with n*g = h and finite value in the schedule")]
    CorePrereqFailed,

    #[error("directional derivative did not stabilize within the schedule")]
    NotStabilized,

    #[error("hypothesis failed: {0}")]
    HypothesisFailed(String),

    #[error("probe set is empty")]
    EmptyProbeSet,

    #[error("additive dual is not supported for this instance")]
    UnsupportedDual,

    #[error("no defining relation found within bounds")]
    BoundsExhausted,

    #[error("witness does not separate the sets: {0}")]
    NotSeparating(String),

    #[error("multiplier has a negative component")]
    NegativeMultiplier,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
