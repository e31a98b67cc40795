use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point and domain do not match: {0}")]
    DomainMismatch(String),

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{0} is not a subset of {1}")]
    NotSubset(String, String),

    #[error("sets are at zero distance")]
    ZeroDistance,

    #[error("region is not aligned with the level-{0} mesh")]
    NotMeshAligned(u32),

    #[error("increment sets overlap")]
    Overlap,

    #[error("tolerance {eps} unachievable, best distance {best}")]
    Unachievable { eps: f64, best: f64 },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("only {0} usable scales, need at least 3")]
    InsufficientScales(usize),

    #[error("degenerate cell masses")]
    DegenerateMass,

    #[error("operation requires a purely Poissonian path (sigma2 = 0)")]
    NotPurelyPoissonian,

    #[error("integrand unbounded on the scanned region")]
    Unbounded,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("malformed path file: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
