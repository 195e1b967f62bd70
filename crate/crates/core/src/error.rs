use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid feature data: {0}")]
    InvalidFeatureData(String),

    #[error("invalid membership kernel: {0}")]
    InvalidKernel(String),

    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("missing landmark `{0}`")]
    MissingLandmark(String),

    #[error("invalid face `{id}`: {reason}")]
    InvalidFace { id: String, reason: String },

    #[error("degenerate feature `{0}`: distance is zero")]
    DegenerateFeature(String),

    #[error("feature sets do not match: {0}")]
    FeatureMismatch(String),

    #[error("polygon has {0} vertices, at least 3 are required")]
    TooFewVertices(usize),

    #[error("polygon is not simple: edges {0} and {1} intersect")]
    SelfIntersecting(usize, usize),

    #[error("mask dimensions differ: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),

    #[error("silhouette mask for input {0} has zero area")]
    EmptyMask(u8),

    #[error("{name} = {value} is outside [{lo}, {hi}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("degenerate calibration sample: beta {beta} <= alpha {alpha}")]
    DegenerateSample { beta: f64, alpha: f64 },

    #[error("calibration state has no accepted samples")]
    Uninitialized,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("could not draw a valid face after {0} attempts")]
    RetryExhausted(usize),
}
