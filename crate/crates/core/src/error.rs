use thiserror::Error;

/// Errors raised by constructors, evaluators and integrators in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SearchError {
    #[error("energy scale must be positive, got {0}")]
    NonPositiveEnergy(f64),
    #[error("coupling magnitude r must be non-negative, got {0} (fold the sign into phi as phi + pi)")]
    NegativeCoupling(f64),
    #[error("non-finite input: {0}")]
    NonFiniteInput(&'static str),

    #[error("dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),
    #[error("dimension {dim} exceeds the dense-matrix cap {cap}")]
    DimensionTooLarge { dim: usize, cap: usize },
    #[error("initial vector has length {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("target set is empty")]
    EmptyTargets,
    #[error("target set covers every index of the {0}-dimensional space")]
    TargetsCoverAll(usize),
    #[error("target index {index} out of range for dimension {dim}")]
    TargetOutOfRange { index: usize, dim: usize },
    #[error("initial state has no overlap with the target subspace (norm {0:e})")]
    ZeroOverlap(f64),
    #[error("initial state lies inside the target subspace (overlap {0})")]
    InitialInsideTargets(f64),
    #[error("initial vector norm {0} deviates from 1 by more than 1e-6")]
    UnnormalizedInput(f64),

    #[error("overlap must be in (0,1), got {0}")]
    OverlapOutOfRange(f64),
    #[error("singular denominator in {0}")]
    SingularDenominator(&'static str),
    #[error("D = {0:e}: the state never rotates toward the target")]
    NoOscillation(f64),
    #[error("integrator norm drift {0:e} exceeds 1e-8")]
    IntegratorDriftExceeded(f64),
    #[error("integrator step size underflow at t = {0}")]
    StepSizeUnderflow(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = SearchError> = std::result::Result<T, E>;
