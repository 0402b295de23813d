use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("nu must have unit modulus (got |nu| = {modulus})")]
    NonUnimodular { modulus: f64 },

    #[error("path string must contain at least one step")]
    EmptyPath,

    #[error("path of {t} steps exceeds the {max} step limit of the bit-packed representation")]
    PathTooLong { t: u32, max: u32 },

    #[error("invalid path string: {0}")]
    InvalidPath(String),

    #[error("time must be nonnegative (got t = {0})")]
    NegativeTime(i64),

    #[error("enumeration of {class_size} strings refused: cap is {cap}")]
    CapExceeded { class_size: u128, cap: u128 },

    #[error("hypergeometric form undefined: lower parameter {lower} is not positive, use the signed binomial sum")]
    UseNormativePath { lower: i64 },

    #[error("hypergeometric series does not terminate or hits a zero denominator: {0}")]
    Hypergeometric(String),

    #[error("window too small: nonzero amplitude at ({x}, {y}) on the edge of a padded window")]
    WindowTooSmall { x: i64, y: i64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("malformed kernel table: {0}")]
    MalformedTable(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
