//! Pathline compression and tracing on B-spline control points.
//!
//! The library fits one B-spline curve per particle trajectory (with automatic
//! knot placement driven by a cumulative feature function), then traces new
//! pathlines by interpolating the knots and control points of neighboring
//! curves instead of stepping through every time step of the raw particle
//! data. A baseline displacement-interpolation tracer over the raw particles
//! is included as the accuracy/timing reference, together with an evaluation
//! harness that produces per-step RMSE series and timing tables.
//!
//! Module map:
//! - [`flowdata`]: trajectory datasets, synthetic flow fields, CSV/PLN1 I/O
//! - [`bspline`]: basis evaluation, knot placement, least-squares fitting, SPL1 I/O
//! - [`neighbors`]: exact k-d tree search and inverse-distance weights
//! - [`tracer`]: the particle-space baseline and the control-point tracer
//! - [`eval`]: accuracy and timing experiments with machine-readable reports

// Negated float comparisons like `!(x > 0.0)` are used on purpose: they
// treat NaN as a failed precondition instead of silently passing it on.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bspline;
pub mod eval;
pub mod flowdata;
pub mod geom;
pub mod neighbors;
pub mod tracer;

use std::path::PathBuf;

pub use geom::{Aabb, Vec3};

/// Crate-wide error type. Variants carry enough context to point at the
/// offending pathline, step, or file without a backtrace.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("pathline set: {0}")]
    InvalidPathlineSet(String),

    #[error("flow field: {0}")]
    InvalidFlowSpec(String),

    #[error("flow field: non-finite velocity on pathline {pathline} at step {step}")]
    NonFiniteVelocity { pathline: usize, step: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {msg}")]
    FileFormat { path: PathBuf, msg: String },

    #[error("pathline {pathline} is ragged: expected {expected} steps, found {found}")]
    RaggedPathline {
        pathline: usize,
        expected: usize,
        found: usize,
    },

    #[error("non-finite position on pathline {pathline} at step {step}")]
    NonFinitePosition { pathline: usize, step: usize },

    #[error("bspline: basis index {index} out of range for {count} control points")]
    BasisIndexOutOfRange { index: usize, count: usize },

    #[error("bspline: parameter {u} outside [0, 1]")]
    ParamOutOfRange { u: f64 },

    #[error("bspline: invalid curve: {0}")]
    InvalidCurve(String),

    #[error(
        "bspline: insufficient data points: {points} points for {control_points} control points"
    )]
    InsufficientData {
        points: usize,
        control_points: usize,
    },

    #[error("bspline: collocation matrix is rank deficient at column {column} (pivot {pivot:.3e}); knot vector likely violates the span feasibility condition")]
    RankDeficient { column: usize, pivot: f64 },

    #[error("bspline: fit failed for pathline {pathline}: {source}")]
    FitFailure {
        pathline: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("neighbors: {0}")]
    InvalidNeighborQuery(String),

    #[error("neighbors: non-finite point at index {0}")]
    NonFiniteNeighborPoint(usize),

    #[error("tracer: seed time {tau} outside the dataset's range [{lo}, {hi}]")]
    SeedOutOfRange { tau: f64, lo: f64, hi: f64 },

    #[error("tracer: seed time {tau} does not coincide with a stored time step (particle tracing starts at an existing step)")]
    SeedNotOnStep { tau: f64 },

    #[error("eval: {0}")]
    InvalidEval(String),

    #[error("eval: curve count {curves} does not match pathline count {pathlines}")]
    CurveCountMismatch { curves: usize, pathlines: usize },

    #[error("eval: test split leaves {train} training curves, need at least {need}")]
    SplitTooSmall { train: usize, need: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        Error::FileFormat {
            path: path.into(),
            msg: msg.into(),
        }
    }
}
