use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("empty permutation")]
    EmptyInput,
    #[error("duplicate value {0} in permutation word")]
    DuplicateValue(usize),
    #[error("value {value} out of range 1..={order}")]
    ValueOutOfRange { value: usize, order: usize },
    #[error("cannot parse {what}: {text:?}")]
    Parse { what: &'static str, text: String },
    #[error("{what} = {value} outside supported range {min}..={max}")]
    OutOfRange {
        what: &'static str,
        value: usize,
        min: usize,
        max: usize,
    },
    #[error("root position {position} outside 1..={order}")]
    RootOutOfRange { position: usize, order: usize },
    #[error("root types differ: {left} vs {right}")]
    RootTypeMismatch { left: String, right: String },
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not doubly stochastic: {0}")]
    NotDoublyStochastic(String),
    #[error("perturbation x[{i},{j}] violates |x| <= 1/(4n)")]
    PerturbationBound { i: usize, j: usize },
    #[error("interpolation parameter outside [0,1]")]
    ParameterOutOfRange,
    #[error("densities do not straddle the uniform value")]
    Straddle,
    #[error("computation budget of {0} exceeded")]
    BudgetExceeded(u64),
    #[error("internal identity violated: {0}")]
    IdentityViolated(String),
    #[error("ties present in the {0} coordinate")]
    TiesPresent(&'static str),
    #[error("invalid sample: {0}")]
    InvalidSample(String),
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
