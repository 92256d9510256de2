use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("incompatible dimensions: {left} vs {right}")]
    IncompatibleDimensions { left: usize, right: usize },

    #[error("point has no coordinates")]
    ZeroDimension,

    #[error("non-finite coordinate {0}")]
    NonFinite(f64),

    #[error("finite set must be nonempty")]
    EmptySet,

    #[error("out of domain: {0:?}")]
    OutOfDomain(Vec<f64>),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid mapping: {0}")]
    InvalidMapping(String),

    #[error("empty sample: at least two distinct sample points are required")]
    EmptySample,

    #[error("bound inapplicable: {0}")]
    BoundInapplicable(String),

    #[error("bound inapplicable: Górnicki constant M = {0} is not below 1/3")]
    GornickiPrecondition(f64),

    #[error("fixed-point set of {0} is empty at the requested resolution")]
    EmptyFixedPointSet(&'static str),

    #[error("mapping kind `{0}` has no JSON representation")]
    NotSerializable(&'static str),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
