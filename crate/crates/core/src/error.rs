use thiserror::Error;

/// Errors raised while building spaces, filtrations and reports.
///
/// Everything except [`Error::Invariant`] is caused by bad input.
#[derive(Debug, Error)]
pub enum Error {
    #[error("sequence length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("duplicate point id `{0}`")]
    DuplicateId(String),
    #[error("matrix is not square: {rows} rows, row {row} has {len} entries")]
    NotSquare { rows: usize, row: usize, len: usize },
    #[error("nonzero diagonal entry at point `{0}`")]
    NonzeroDiagonal(String),
    #[error("asymmetric distance between `{0}` and `{1}`")]
    Asymmetric(String, String),
    #[error("zero distance between distinct points `{0}` and `{1}`")]
    ZeroDistance(String, String),
    #[error("point `{0}` has no time label")]
    MissingLabel(String),
    #[error("label {label} of point `{id}` exceeds horizon {horizon}")]
    LabelOutOfRange { id: String, label: usize, horizon: usize },
    #[error("horizon {requested} is below the largest label {largest}")]
    HorizonTooSmall { requested: usize, largest: usize },
    #[error("time step {step} outside 0..={horizon}")]
    StepOutOfRange { step: usize, horizon: usize },
    #[error("arithmetic overflow: {0}")]
    Overflow(&'static str),
    #[error("{0} is not a supported prime")]
    InvalidPrime(u32),
    #[error("invalid cap: {0}")]
    InvalidCap(String),
    #[error("edge ({0}, {1}) of the chain is not present at the requested value")]
    EdgeMissing(usize, usize),
    #[error("no metadata row for sequence `{0}`")]
    MissingMetadata(String),
    #[error("sequence `{id}` has length {len}, expected {expected}")]
    RaggedSequence { id: String, len: usize, expected: usize },
    #[error("invalid time `{value}` for `{id}`")]
    InvalidTime { id: String, value: String },
    #[error("matrix line {line}: expected {expected} entries, found {found}")]
    RaggedRow { line: usize, expected: usize, found: usize },
    #[error("matrix line {line}: invalid entry `{value}`")]
    InvalidEntry { line: usize, value: String },
    #[error("time vector has {times} entries for {points} points")]
    TimeCountMismatch { times: usize, points: usize },
    #[error("malformed input: {0}")]
    Parse(String),
    #[error("reports are not comparable: {0}")]
    Mismatch(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn is_invariant(&self) -> bool {
        matches!(self, Error::Invariant(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
