use std::path::PathBuf;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("qubit index {index} out of range for a {num_qubits}-qubit state")]
    QubitOutOfRange { index: usize, num_qubits: usize },

    #[error("qubit {0} appears more than once in a gate specification")]
    DuplicateQubit(usize),

    #[error("state has zero norm; nothing to sample or normalize")]
    ZeroNorm,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("column {column} has zero variance (constant feature)")]
    ZeroVarianceColumn { column: usize },

    #[error("invalid table: {0}")]
    InvalidTable(String),

    #[error("malformed CSV at line {line}: {message}")]
    Csv { line: u64, message: String },

    #[error("IO error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("degenerate response phase: |cos phi_0| = {0:e} is too small to recover weights")]
    DegeneratePhase(f64),

    #[error("post-selection has zero success probability")]
    ZeroSuccessProbability,

    #[error("shot count must be positive")]
    ZeroShots,

    #[error("{snapshots} snapshots cannot fill {groups} median-of-means groups")]
    TooFewSnapshots { snapshots: usize, groups: usize },

    #[error("objective returned NaN at {point:?}")]
    NanObjective { point: Vec<f64> },

    #[error("layout mismatch: {0}")]
    LayoutMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
