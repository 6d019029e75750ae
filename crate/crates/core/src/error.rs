use alloc::string::String;

use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Everything that can go wrong inside the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("series must contain at least one observation")]
    EmptySeries,
    #[error("missing mask has length {mask} but series has length {values}")]
    MaskLength { values: usize, mask: usize },
    #[error("non-finite value {value} at position {index}")]
    NonFinite { index: usize, value: f64 },
    #[error("a multivariate series needs at least one member")]
    NoSeries,
    #[error("duplicate series name `{0}`")]
    DuplicateName(String),
    #[error("series `{0}` contains missing values; impute them first")]
    MissingValues(String),
    #[error("window length {window} outside [{min}, {max}] for series length {len}")]
    WindowOutOfRange {
        window: usize,
        min: usize,
        max: usize,
        len: usize,
    },
    #[error("rank {rank} outside 1..={max}")]
    RankOutOfRange { rank: usize, max: usize },
    #[error("component index {index} outside 1..={rank}")]
    ComponentIndex { index: usize, rank: usize },
    #[error("component {0} appears in more than one group")]
    OverlappingGroups(usize),
    #[error("SVD of a {rows}x{cols} matrix did not converge within {sweeps} sweeps")]
    SvdNoConvergence {
        rows: usize,
        cols: usize,
        sweeps: usize,
    },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("series too short: need at least {need} values, got {got}")]
    TooShort { need: usize, got: usize },
    #[error("zero denominator in {0}")]
    ZeroDenominator(&'static str),
    #[error("residual variance is zero (residuals are constant)")]
    ZeroResidualVariance,
    #[error("zero w-norm: a series is w-orthogonal to itself")]
    ZeroWNorm,
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter {
        name: &'static str,
        reason: &'static str,
    },
    #[error("p-value {value} at position {index} is outside [0, 1]")]
    PValueOutOfRange { index: usize, value: f64 },
    #[error("degenerate data: {0}")]
    Degenerate(&'static str),
    #[error("nothing to impute: series has no missing values")]
    NothingToImpute,
    #[error("all entries are missing")]
    AllMissing,
    #[error("{observed} observed values is fewer than the window length {window}")]
    InsufficientObservations { observed: usize, window: usize },
}
