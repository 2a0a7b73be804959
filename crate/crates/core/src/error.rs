use serde::Serialize;
use thiserror::Error;

/// A grid location attached to failures and report entries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct Location {
    pub i: usize,
    pub j: usize,
    pub u: f64,
    pub v: f64,
}

/// Index rectangle `[i0, i1] x [j0, j1]` (inclusive) on a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct IndexRect {
    pub i0: usize,
    pub i1: usize,
    pub j0: usize,
    pub j1: usize,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grids do not match")]
    GridMismatch,

    #[error("non-finite value at {0:?}")]
    NonFinite(Location),

    #[error("Goursat data disagree at the corner: {data_u} vs {data_v}")]
    CornerMismatch { data_u: f64, data_v: f64 },

    #[error("elliptic system is singular or resonant (pivot {pivot:e} at row {row})")]
    Resonant { row: usize, pivot: f64 },

    #[error("elliptic solve did not reach tolerance: residual {residual:e}")]
    NotConverged { residual: f64 },

    #[error("mu = <k,k> is not positive on {rect:?} (first at {at:?}, value {value:e})")]
    MuNonPositive { at: Location, rect: IndexRect, value: f64 },

    #[error("induced metric is not Riemannian at {at:?}")]
    MetricNotRiemannian { at: Location },

    #[error("first component g1 vanishes on the whole patch")]
    G1Vanishes,

    #[error("r changes sign; largest usable sub-rectangle {rect:?} is too small")]
    RSignChange { rect: Option<IndexRect> },

    #[error("r must be positive (at {at:?})")]
    RNonPositive { at: Location },

    #[error("h is not an immersion at {at:?}")]
    NotImmersion { at: Location },

    #[error("gradient of r reaches {norm} >= 1 at {at:?}")]
    GradientTooLarge { at: Location, norm: f64 },

    #[error("singular linear system: {0}")]
    Singular(String),

    #[error("mu path integration is path dependent: {residual:e} > {tolerance:e}")]
    PathDependent { residual: f64, tolerance: f64 },

    #[error("skew part required: |C + C^T| = {0:e}")]
    NotSkew(f64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unsupported format version {found} (expected {expected})")]
    FormatVersion { found: u32, expected: u32 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable machine-readable code; generation failures name the violated
    /// hypothesis of the construction.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::InvalidGrid(_) => "invalid_grid",
            Error::GridMismatch => "grid_mismatch",
            Error::NonFinite(_) => "non_finite",
            Error::CornerMismatch { .. } => "corner_mismatch",
            Error::Resonant { .. } => "resonant",
            Error::NotConverged { .. } => "not_converged",
            Error::MuNonPositive { .. } => "mu_nonpositive",
            Error::MetricNotRiemannian { .. } => "metric_not_riemannian",
            Error::G1Vanishes => "g1_vanishes",
            Error::RSignChange { .. } => "r_sign_change",
            Error::RNonPositive { .. } => "r_nonpositive",
            Error::NotImmersion { .. } => "not_immersion",
            Error::GradientTooLarge { .. } => "grad_r_ge_1",
            Error::Singular(_) => "singular",
            Error::PathDependent { .. } => "path_dependent",
            Error::NotSkew(_) => "not_skew",
            Error::Config(_) => "config",
            Error::FormatVersion { .. } => "format_version",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }

    /// True for failures caused by the input data violating a hypothesis of
    /// the construction (as opposed to I/O or configuration problems).
    pub fn is_generation_failure(&self) -> bool {
        matches!(
            self,
            Error::MuNonPositive { .. }
                | Error::MetricNotRiemannian { .. }
                | Error::G1Vanishes
                | Error::RSignChange { .. }
                | Error::RNonPositive { .. }
                | Error::NotImmersion { .. }
                | Error::GradientTooLarge { .. }
                | Error::CornerMismatch { .. }
                | Error::NonFinite(_)
                | Error::Resonant { .. }
                | Error::NotConverged { .. }
                | Error::Singular(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
