use thiserror::Error;

/// Errors raised by the reduction toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("mass matrix is singular")]
    SingularMass,
    #[error("companion block J is singular")]
    SingularJ,
    #[error("matrix {0} is not symmetric positive definite")]
    NotSpd(&'static str),
    #[error("gamma {gamma} outside admissible range (0, {bound})")]
    GammaOutOfRange { gamma: f64, bound: f64 },
    #[error("transfer function is singular at s = {re} + {im}j")]
    SingularAtFrequency { re: f64, im: f64 },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("state became non-finite at t = {time}")]
    NonFiniteState { time: f64 },
    #[error("dimension {n} exceeds the dense limit {limit}")]
    DimensionTooLarge { n: usize, limit: usize },
    #[error("non-finite entries in {0}")]
    NonFinite(&'static str),
    #[error("matrix has an eigenvalue on the closed negative real axis")]
    BranchCutViolation,
    #[error("realization is not c-stable")]
    UnstableRealization,
    #[error("invalid frequency band: {0}")]
    InvalidBand(String),
    #[error("invalid time window: {0}")]
    InvalidWindow(String),
    #[error("iteration did not converge within {iterations} steps")]
    NotConverged { iterations: usize },
    #[error("matrix pencil is not c-stable")]
    UnstablePencil,
    #[error("vectorized Lyapunov operator is singular")]
    SingularOperator,
    #[error("projected pencil is not c-stable")]
    UnstableProjection,
    #[error("balanced product is rank deficient at order {r}")]
    RankDeficient { r: usize },
    #[error("coupling matrix S is singular (condition {cond:e})")]
    SingularS { cond: f64 },
    #[error("empty singular value spectrum")]
    EmptySpectrum,
    #[error("shifted second-order matrix is singular at s = {re} + {im}j")]
    SingularShiftedSystem { re: f64, im: f64 },
    #[error("singular matrix in {0}")]
    Singular(&'static str),
    #[error("matrix market: {0}")]
    MatrixMarket(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
