use thiserror::Error;

/// Errors produced by qeilab computations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed table: {0}")]
    MalformedTable(String),
    #[error("component missing for object `{0}`")]
    ComponentMissing(String),
    #[error("source categories differ: {0}")]
    SourceMismatch(String),
    #[error("world mismatch: expected `{expected}`, found `{found}`")]
    WorldMismatch { expected: String, found: String },
    #[error("null operation: omega(A*A) = {0:e} is below threshold")]
    NullOperation(f64),
    #[error("state is not faithful: minimal eigenvalue {0:e}")]
    NotFaithful(f64),
    #[error("operator is not hermitian (defect {0:e})")]
    NonHermitian(f64),
    #[error("operator is not normal (defect {0:e})")]
    NonNormal(f64),
    #[error("test sets differ: {0}")]
    TestSetMismatch(String),
    #[error("map is not an isomorphism: {0}")]
    NonIsomorphism(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid morphism: {0}")]
    InvalidMorphism(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("massless field on the torus has no ground state")]
    MasslessTorus,
    #[error("curve is not timelike: {0}")]
    NotTimelike(String),
    #[error("epsilon extrapolation diverged: {0}")]
    ExtrapolationDivergence(String),
    #[error("negative integrand {value:e} at alpha = {alpha}")]
    NegativeIntegrand { alpha: f64, value: f64 },
    #[error("singular difference kernel at coincidence: {0}")]
    SingularDifference(String),
    #[error("reference dependence {spread:e} exceeds tolerance {tol:e}")]
    ReferenceDependence { spread: f64, tol: f64 },
    #[error("dimension overflow: basis size {size} exceeds cap {cap}")]
    DimensionOverflow { size: u128, cap: u128 },
    #[error("unknown identifier `{0}`")]
    Unknown(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
