use thiserror::Error;

/// Errors raised across the simulation, compilation and optimization stack.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("qubit index {index} out of range for a {n_qubits}-qubit register")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    #[error("gate targets must be distinct, got {0:?}")]
    DuplicateTargets(Vec<usize>),

    #[error("gate {gate} expects {expected} target(s), got {got}")]
    Arity {
        gate: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("parameter index {index} is unbound (parameter vector has length {len})")]
    UnboundParameter { index: usize, len: usize },

    #[error("parameter vector has length {got}, expected {expected}")]
    ParameterLength { expected: usize, got: usize },

    #[error("gate {0} requires an angle")]
    MissingAngle(&'static str),

    #[error("observable is not Hermitian: term {0} has a complex coefficient")]
    NonHermitian(String),

    #[error("observable acts on {observable} qubits but the state has {state}")]
    ObservableSize { observable: usize, state: usize },

    #[error("register of {n_qubits} qubits exceeds the limit of {limit} for this operation")]
    TooManyQubits { n_qubits: usize, limit: usize },

    #[error("chain length must be at least 2, got {0}")]
    ChainTooShort(usize),

    #[error("state is not a symmetry eigenstate: {0}")]
    NotSymmetryEigenstate(String),

    #[error("invalid ansatz specification: {0}")]
    InvalidAnsatz(String),

    #[error("unknown state label `{0}`")]
    UnknownLabel(String),

    #[error("no initialization circuit is available for `{0}`")]
    NoCircuit(String),

    #[error("target is not reachable by the excitation cascade: {0}")]
    Unreachable(String),

    #[error("invalid cost specification: {0}")]
    InvalidCost(String),

    #[error("all shots discarded by postselection")]
    AllShotsDiscarded,

    #[error("invalid optimizer configuration: {0}")]
    InvalidOptimizer(String),

    #[error("invalid noise model: {0}")]
    InvalidNoise(String),

    #[error("gate {0} cannot be folded; only N_H/N_I blocks carry additive generators")]
    NotFoldable(&'static str),

    #[error("initializer folding requires an odd scale factor, got {0}")]
    EvenFoldFactor(usize),

    #[error("noise scale factor must be positive")]
    ZeroFoldFactor,

    #[error("extrapolation needs at least 3 points, got {0}")]
    TooFewPoints(usize),

    #[error("duplicate scale factor k={0} in series")]
    DuplicateScale(usize),

    #[error("confusion matrix for qubit {0} is singular")]
    SingularConfusion(usize),

    #[error("gate {0} is not supported by the pulse compiler; lower it first")]
    UnsupportedGate(&'static str),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
