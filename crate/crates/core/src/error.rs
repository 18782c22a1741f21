use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("vector has no coordinates")]
    EmptyVector,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("linear system is numerically singular")]
    SingularSystem,

    #[error("point is outside the operator domain")]
    DomainError,

    #[error("operator is set-valued at this point")]
    SetValuedAt,

    #[error("set has no closed-form projection")]
    UnsupportedSet,

    #[error("composite function has no closed-form proximity operator")]
    UnsupportedComposite,

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error(
        "intersection appears empty: no convergence after {iterations} Dykstra cycles \
         (feasibility residual {residual:e})"
    )]
    EmptyIntersection { iterations: usize, residual: f64 },

    #[error("mean operator is singular; the zero is not unique")]
    SingularMean,

    #[error("mean operator is not strongly monotone (modulus {modulus:e})")]
    NotStronglyMonotone { modulus: f64 },

    #[error("iterate left the finite range at step {step}")]
    NonFiniteIterate { step: usize },

    #[error(
        "step exponent gamma = {gamma} outside (1/2, 1]: the step sizes must be \
         square-summable but not summable (l2 minus l1)"
    )]
    InvalidSchedule { gamma: f64 },

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("certificate failed: residual {residual:e} exceeds {tolerance:e}")]
    CertificateFailed { residual: f64, tolerance: f64 },
}
