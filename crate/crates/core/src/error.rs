use alloc::string::String;

/// Errors raised by graph construction and the numerical routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("self-loop at vertex {0}")]
    SelfLoop(String),
    #[error("edge {u}-{v} has non-positive weight {weight}")]
    NonPositiveWeight { u: String, v: String, weight: f64 },
    #[error("edge {u}-{v} listed more than once")]
    DuplicateEdge { u: String, v: String },
    #[error("vertex {0} listed more than once")]
    DuplicateVertex(String),
    #[error("unknown vertex {0}")]
    UnknownVertex(String),
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("circles {0} and {1} overlap")]
    OverlappingCircles(usize, usize),
    #[error("measure vanishes at vertex {0}")]
    DegenerateMeasure(String),
    #[error("measure must be strictly positive (vertex {0})")]
    NonPositiveMeasure(String),
    #[error("function is negative at vertex {0}")]
    NegativeFunction(String),
    #[error("phase is not antisymmetric on edge {u}-{v}")]
    AsymmetricTheta { u: String, v: String },
    #[error("endomorphism at vertex {0} is not Hermitian")]
    NonHermitian(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("bundle validation failed: {0}")]
    ValidationFailure(String),
    #[error("sections are not aligned at vertex {0}")]
    AlignmentViolated(String),
    #[error("function is not a subsolution at vertex {0}")]
    NotSubsolution(String),
    #[error("iterative solver did not converge: {0}")]
    ConvergenceFailure(String),
    #[error("alpha {alpha} must exceed {bound}")]
    AlphaTooSmall { alpha: f64, bound: f64 },
    #[error("weight is negative at vertex {0}")]
    NegativeWeight(String),
    #[error("potential must vanish identically")]
    NonZeroPotential,
    #[error("edge lengths do not match the edge set")]
    SigmaEdgeMismatch,
    #[error("edge endpoint {0} has zero degree")]
    IsolatedEndpoint(String),
    #[error("no coordinate for vertex {0}")]
    MissingCoordinate(String),
    #[error("negative boundary distance at vertex {0}")]
    NegativeDistance(String),
    #[error("distance to the boundary must be positive (vertex {0})")]
    NonPositiveD(String),
    #[error("function is not injective ({0} and {1} coincide)")]
    NotInjective(String, String),
    #[error("subset is empty")]
    EmptySubset,
    #[error("linear solve failed: {0}")]
    SolveFailure(String),
    #[error("h is negative at vertex {0}")]
    NegativeH(String),
    #[error("h is not 1-excessive (violation {0})")]
    NotExcessive(f64),
    #[error("path is invalid: {0}")]
    InvalidPath(String),
    #[error("vertex {0} on the path has zero degree")]
    ZeroDegree(String),
    #[error("f is negative at vertex {0}")]
    NegativeF(String),
    #[error("f does not vanish outside the subset (vertex {0})")]
    SupportViolation(String),
}

impl Error {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::SelfLoop(_) => "SelfLoop",
            Error::NonPositiveWeight { .. } => "NonPositiveWeight",
            Error::DuplicateEdge { .. } => "DuplicateEdge",
            Error::DuplicateVertex(_) => "DuplicateVertex",
            Error::UnknownVertex(_) => "UnknownVertex",
            Error::BadParameter(_) => "BadParameter",
            Error::OverlappingCircles(..) => "OverlappingCircles",
            Error::DegenerateMeasure(_) => "DegenerateMeasure",
            Error::NonPositiveMeasure(_) => "NonPositiveMeasure",
            Error::NegativeFunction(_) => "NegativeFunction",
            Error::AsymmetricTheta { .. } => "AsymmetricTheta",
            Error::NonHermitian(_) => "NonHermitian",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::ValidationFailure(_) => "ValidationFailure",
            Error::AlignmentViolated(_) => "AlignmentViolated",
            Error::NotSubsolution(_) => "NotSubsolution",
            Error::ConvergenceFailure(_) => "ConvergenceFailure",
            Error::AlphaTooSmall { .. } => "AlphaTooSmall",
            Error::NegativeWeight(_) => "NegativeWeight",
            Error::NonZeroPotential => "NonZeroPotential",
            Error::SigmaEdgeMismatch => "SigmaEdgeMismatch",
            Error::IsolatedEndpoint(_) => "IsolatedEndpoint",
            Error::MissingCoordinate(_) => "MissingCoordinate",
            Error::NegativeDistance(_) => "NegativeDistance",
            Error::NonPositiveD(_) => "NonPositiveD",
            Error::NotInjective(..) => "NotInjective",
            Error::EmptySubset => "EmptySubset",
            Error::SolveFailure(_) => "SolveFailure",
            Error::NegativeH(_) => "NegativeH",
            Error::NotExcessive(_) => "NotExcessive",
            Error::InvalidPath(_) => "InvalidPath",
            Error::ZeroDegree(_) => "ZeroDegree",
            Error::NegativeF(_) => "NegativeF",
            Error::SupportViolation(_) => "SupportViolation",
        }
    }

    /// True for errors caused by malformed input rather than numerical trouble.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::ConvergenceFailure(_) | Error::SolveFailure(_) | Error::AlphaTooSmall { .. }
        )
    }
}

pub type Result<T> = core::result::Result<T, Error>;
