use thiserror::Error;

use crate::space::{Dist, PointId};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    // --- space construction and queries ---
    #[error("distance matrix is not square: row {row} has {len} entries, expected {expected}")]
    NotSquare { row: usize, len: usize, expected: usize },
    #[error("distance matrix is not symmetric at ({x}, {y}): {dxy} vs {dyx}")]
    NonSymmetric { x: PointId, y: PointId, dxy: f64, dyx: f64 },
    #[error("triangle inequality fails for ({x}, {y}, {z}): d(x,z)={dxz} > d(x,y)+d(y,z)={via}")]
    TriangleViolation { x: PointId, y: PointId, z: PointId, dxz: f64, via: f64 },
    #[error("distance value {value} at ({x}, {y}) is not a valid discrete distance")]
    NotDiscrete { x: PointId, y: PointId, value: f64 },
    #[error("distinct points {x} and {y} are at distance zero")]
    ZeroDistance { x: PointId, y: PointId },
    #[error("unknown point id {0}")]
    UnknownPoint(PointId),
    #[error("invalid space descriptor: {0}")]
    InvalidDescriptor(String),

    // --- operators ---
    #[error("duplicate entry at ({x}, {y})")]
    DuplicateEntry { x: PointId, y: PointId },
    #[error("entry block has {got} values, expected {expected}")]
    BlockShape { got: usize, expected: usize },
    #[error("block dimension {0} is not supported (must be 1..=4)")]
    BlockDim(usize),
    #[error("operands live on different spaces or block dimensions")]
    SpaceMismatch,
    #[error("power iteration did not converge after {iterations} iterations (last change {last_change:e})")]
    NonConvergence { iterations: usize, last_change: f64 },
    #[error("exponent p={0} is outside (1, inf)")]
    BadExponent(f64),

    // --- three colouring ---
    #[error("three-colouring precondition fails at {witness}: {reason}")]
    ColoringPrecondition { witness: u64, reason: String },

    // --- lower norms ---
    #[error("restriction set is empty")]
    EmptyRestriction,
    #[error("exclusion radius {radius} leaves no admissible columns")]
    ExclusionExhausts { radius: Dist },
    #[error("inconsistent schedules: {0}")]
    Schedule(String),
    #[error("dimension {dim} exceeds the limit {max} for this method")]
    DimensionTooLarge { dim: usize, max: usize },
    #[error("sparsifier has no constants for separation m={m} at c={c}")]
    MissingConstants { m: Dist, c: f64 },

    // --- sparsification / partitions ---
    #[error("measure is zero or negative somewhere")]
    BadMeasure,
    #[error("sparsification shortfall: best c={best_c} < target {target_c} (block length {block_len}, m={m})")]
    Shortfall { best_c: f64, target_c: f64, block_len: u32, m: Dist },
    #[error("cannot build a net at scale {0} on this space")]
    NetFailure(u32),
    #[error("local operator {index} has norm {norm} exceeding bound {bound}")]
    UnboundedLocal { index: usize, norm: f64, bound: f64 },
    #[error("commutator mode requires an operator")]
    MissingOperator,

    // --- limit extraction ---
    #[error("basepoint {point} has interior margin {margin} < required {required}")]
    MarginViolation { point: PointId, margin: Dist, required: Dist },
    #[error("direction is invalid: {0}")]
    BadDirection(String),
    #[error("metric windows did not stabilise: {classes} isometry classes among the last {window} basepoints")]
    NotStabilized { classes: usize, window: usize },
    #[error("windows are not Cauchy: tail deviation {deviation:e} exceeds tolerance {tol:e}")]
    CauchyFailure { deviation: f64, tol: f64, profile: Vec<f64> },
    #[error("space carries no group structure")]
    NotGroup,

    // --- parametrix ---
    #[error("Neumann factor has norm {0} >= 1/2; increase the partition scale")]
    CommutatorTooLarge(f64),
    #[error("local inverse failures cover the interior ({failed} of {total} indices failed)")]
    FailuresCoverInterior { failed: usize, total: usize },

    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
