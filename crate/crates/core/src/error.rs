use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension must be at least 1")]
    ZeroDimension,

    #[error("point has {got} coordinates, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("domain must contain at least one point")]
    EmptyDomain,

    #[error("duplicate point {0:?} in domain")]
    DuplicatePoint(Vec<i64>),

    #[error("invalid interval [{a}, {b}]")]
    InvalidInterval { a: i64, b: i64 },

    #[error("point {0:?} is not in the domain")]
    PointNotInDomain(Vec<i64>),

    #[error("sub-domain is not contained in the ambient domain")]
    NotSubdomain,

    #[error("domain is not a box [-n, n]^d")]
    NotABox,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("potential must be nonnegative and finite, got {value} at index {index}")]
    NegativePotential { index: usize, value: f64 },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("potential is defined on a different domain")]
    DomainMismatch,

    #[error("cannot parse distribution spec {0:?}")]
    ParseSpec(String),

    #[error("distribution satisfies neither the atom-at-zero nor the power-law condition")]
    Unclassifiable,

    #[error("degenerate value: {0}")]
    Degenerate(String),

    #[error("size {size} exceeds dense cap {cap}")]
    SizeCap { size: usize, cap: usize },

    #[error("linear solver hit iteration cap {iterations} with relative residual {residual:e}")]
    SolverIterationCap { iterations: usize, residual: f64 },

    #[error("eigensolver did not converge in {iterations} iterations (residual {residual:e}, lambda {lambda})")]
    EigenNonConvergence {
        iterations: usize,
        residual: f64,
        lambda: f64,
    },

    #[error("no ball of radius 1 fits under the threshold")]
    NoBall,

    #[error("no site has both one-sided windows reached ({excluded} sites excluded)")]
    NoReachedSites { excluded: usize },

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// Short machine-readable tag used in CLI error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::ZeroDimension => "zero_dimension",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::EmptyDomain => "empty_domain",
            Error::DuplicatePoint(_) => "duplicate_point",
            Error::InvalidInterval { .. } => "invalid_interval",
            Error::PointNotInDomain(_) => "point_not_in_domain",
            Error::NotSubdomain => "not_subdomain",
            Error::NotABox => "not_a_box",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::NegativePotential { .. } => "negative_potential",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::DomainMismatch => "domain_mismatch",
            Error::ParseSpec(_) => "parse_spec",
            Error::Unclassifiable => "unclassifiable",
            Error::Degenerate(_) => "degenerate",
            Error::SizeCap { .. } => "size_cap",
            Error::SolverIterationCap { .. } => "solver_iteration_cap",
            Error::EigenNonConvergence { .. } => "eigen_non_convergence",
            Error::NoBall => "no_ball",
            Error::NoReachedSites { .. } => "no_reached_sites",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
