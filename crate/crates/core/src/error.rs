use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("numerical routine produced a non-finite or non-positive result: {0}")]
    NonFiniteResult(String),

    #[error("eigenvalue modulus underflowed")]
    ZeroModulus,

    #[error("element is not regular: {0}")]
    NotRegular(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("zero vector has no direction")]
    ZeroVector,

    #[error("word is not very reduced: {0}")]
    NotVeryReduced(String),

    #[error("word is conjugate to the identity")]
    EmptyCore,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("matrix is not unimodular (det = {det})")]
    NotUnimodular { det: f64 },

    #[error("fixed flags are not transverse: {0}")]
    NotTransverse(String),

    #[error("ping-pong certificate failed: {0}")]
    PingPongFailed(String),

    #[error("no power <= {max_power} yields a valid Schottky system")]
    NoPowerFound { max_power: u32 },

    #[error("generator system has not been validated")]
    NotValidated,

    #[error("matrix entries overflowed while evaluating {0}")]
    Overflow(String),

    #[error("census would hold {projected} records, above the budget of {budget}")]
    BudgetExceeded { projected: u128, budget: u128 },

    #[error("window upper end {upper} exceeds the census horizon {horizon}")]
    WindowBeyondHorizon { upper: f64, horizon: f64 },

    #[error("degenerate regression window: {0}")]
    DegenerateWindow(String),

    #[error("limit cone is a single ray in rank one")]
    RankOne,

    #[error("census fingerprint {found} does not match system fingerprint {expected}")]
    FingerprintMismatch { expected: String, found: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
