use alloc::string::String;

/// Errors produced by the algorithmic core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("pauli word `{word}` has length {found}, expected {expected}")]
    WrongLength {
        word: String,
        expected: usize,
        found: usize,
    },
    #[error("illegal character '{ch}' at index {index} in pauli word `{word}`")]
    IllegalCharacter { word: String, ch: char, index: usize },
    #[error("pauli words on more than {max} qubits are not supported")]
    TooManyQubits { max: usize },
    #[error("duplicate pauli word `{0}` in hamiltonian")]
    DuplicateTerm(String),
    #[error("hamiltonian terms mix {expected} and {found} qubits")]
    QubitMismatch { expected: usize, found: usize },
    #[error("coefficient of `{0}` is not finite")]
    NonFiniteCoefficient(String),
    #[error("dense matrix requested for {n_qubits} qubits, the limit is {limit}")]
    DenseGuard { n_qubits: usize, limit: usize },
    #[error("no expectation value supplied for pauli word `{0}`")]
    MissingPauli(String),
    #[error("coefficient vector has zero norm")]
    ZeroHamiltonian,
    #[error("expected {expected} parameters, got {found}")]
    ParameterCount { expected: usize, found: usize },
    #[error("non-finite parameter at index {0}")]
    NonFiniteParameter(usize),
    #[error("state has {state} qubits but the pauli word acts on {word}")]
    SizeMismatch { state: usize, word: usize },
    #[error("invalid ansatz: {0}")]
    InvalidAnsatz(String),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("point has dimension {found}, model expects {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("kernel matrix is not positive definite even with jitter {jitter:e}")]
    NotPositiveDefinite { jitter: f64 },
    #[error("all hyperparameter restarts failed")]
    FitFailed,
    #[error("unknown geometry {0}")]
    UnknownGeometry(usize),
    #[error("invalid problem family: {0}")]
    InvalidFamily(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("reference energy of geometry {0} is zero")]
    ZeroReference(usize),
    #[error("cache entry for point {point} and word `{word}` already written")]
    CacheOverwrite { point: u64, word: String },
    #[error("geometry {geometry} at iteration {iteration}: {source}")]
    Step {
        geometry: usize,
        iteration: usize,
        #[source]
        source: alloc::boxed::Box<Error>,
    },
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
