use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported field d={d}: {reason}")]
    UnsupportedField { d: i64, reason: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unsupported level {level}: {reason}")]
    UnsupportedLevel { level: String, reason: String },

    #[error("divisor {divisor} does not divide the level {level}")]
    InvalidDivisor { divisor: String, level: String },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("prime {0} is a bad-reduction prime for this curve")]
    BadReduction(u64),

    #[error("coefficient table has no entry for the prime {0}")]
    IncompleteTable(String),

    #[error("coefficient table covers norms up to {available}, but norm {required} is needed")]
    InsufficientCoverage { required: u64, available: u64 },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate lattice: {0}")]
    DegenerateLattice(String),

    #[error("quadrature did not reach tolerance; achieved error {achieved:e}")]
    Quadrature { achieved: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
