use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{0} is not a prime")]
    InvalidPrime(u64),
    #[error("invalid extension degree: {0}")]
    InvalidDegree(String),
    #[error("field of size {size} exceeds the table cap {cap}")]
    TableCapExceeded { size: u128, cap: u64 },
    #[error("element does not lie in the requested subfield F_(q^{0})")]
    NotInSubfield(u32),
    #[error("degree {inner} does not divide {outer}")]
    DegreeNotDividing { inner: u32, outer: u32 },
    #[error("zero element has no discrete logarithm")]
    ZeroElement,
    #[error("dlog cache error: {0}")]
    Cache(String),
    #[error("character tuple does not match the partition: {0}")]
    ShapeMismatch(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("invalid support point: {0}")]
    InvalidSupportPoint(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("additive character twist must be a nonzero element of the base field")]
    TrivialAdditiveCharacter,
    #[error("estimated cost {estimate} exceeds the cap {cap}")]
    CostExceeded { estimate: u128, cap: u128 },
    #[error("group too large for the explicit Hecke algebra: {0} elements")]
    GroupTooLarge(u128),
    #[error("inconsistent support coset for point {0}")]
    InconsistentSupport(String),
    #[error("no generic element separates the eigenvalues after {0} draws")]
    DiagonalizationDegenerate(u32),
    #[error("oracle match failed: {0}")]
    MatchFailed(String),
    #[error("root finder did not converge")]
    NoConvergence,
    #[error("unknown route: {0}")]
    UnknownRoute(String),
    #[error("{what}: deviation {deviation:e} exceeds tolerance {tolerance:e}")]
    ToleranceExceeded {
        what: String,
        deviation: f64,
        tolerance: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
