use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("duplicate interpolation abscissa {0}")]
    DuplicateAbscissa(String),

    #[error("alphabet mismatch: {left} vs {right}")]
    AlphabetMismatch { left: u32, right: u32 },

    #[error("symbol {symbol} is outside the alphabet of size {k}")]
    SymbolOutOfRange { symbol: u32, k: u32 },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("cell ({i}, {j}) is outside the band of reach {r} on a {n}x{n} lattice")]
    OutOfBand { i: usize, j: usize, r: usize, n: usize },

    #[error("resource cap exceeded: {what} (requested {requested}, cap {cap}; override with {env})")]
    ResourceCap {
        what: &'static str,
        requested: u64,
        cap: u64,
        env: &'static str,
    },

    #[error("degenerate characteristic polynomial: {0}")]
    Degenerate(String),

    #[error("stationary vector is not unique: left nullspace has dimension {0}")]
    NonUnique(usize),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("model mismatch: {0}")]
    ModelMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
