use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Dimension or configuration constraint violated.
    #[error("configuration error: {0}")]
    Config(String),

    /// Argument outside the domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    /// Eigenvalue at or below the bulk edge, so no consistent spike estimate exists.
    #[error("lambda = {lambda} does not exceed the right bulk edge {d_right}; spike is not identifiable")]
    BelowThreshold { lambda: f64, d_right: f64 },

    /// Numerically singular covariance block.
    #[error("{block} is numerically singular (reciprocal condition {rcond:.3e})")]
    Singular { block: &'static str, rcond: f64 },

    /// Resolvent argument too close to singular.
    #[error(
        "resolvent is singular at lambda = {lambda} (smallest singular value {sigma_min:.3e})"
    )]
    ResolventSingular { lambda: f64, sigma_min: f64 },

    /// Evaluation point lies on a branch cut.
    #[error("branch error: {0}")]
    Branch(String),

    /// Eigenvalues outside [0, 1] beyond the numerical slack.
    #[error("eigenvalue {value} outside [0, 1] beyond slack")]
    OutOfRange { value: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("linear algebra failure: {0}")]
    LinAlg(String),

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
    /// Process exit code: 1 usage/config, 2 I/O, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Parse(_) | Error::Unsupported(_) => 1,
            Error::Io(_) => 2,
            Error::Csv(e) if matches!(e.kind(), csv::ErrorKind::Io(_)) => 2,
            Error::Csv(_) => 1,
            Error::Json(e) if e.is_io() => 2,
            Error::Json(_) => 1,
            Error::Domain(_)
            | Error::BelowThreshold { .. }
            | Error::Singular { .. }
            | Error::ResolventSingular { .. }
            | Error::Branch(_)
            | Error::OutOfRange { .. }
            | Error::LinAlg(_) => 3,
        }
    }
}
