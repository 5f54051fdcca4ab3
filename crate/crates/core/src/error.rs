use thiserror::Error;

/// Errors raised by the geometric routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MaslovError {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("metric averaging failed: {0}")]
    AveragingFailed(String),
    #[error("compatible structure construction failed: {0}")]
    CompatibleStructureFailed(String),
    #[error("matrix is not positive definite (min eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },
    #[error("frame is not Lagrangian (isotropy defect {defect:e})")]
    NotLagrangian { defect: f64 },
    #[error("degenerate frame (min singular value {min_singular:e})")]
    DegenerateFrame { min_singular: f64 },
    #[error("undersampled loop: phase gap {gap:.4} rad after sample {index}; refine the sampling (at least double it)")]
    UndersampledLoop { index: usize, gap: f64 },
    #[error("ambiguous degree: raw value {raw}, residual {residual}")]
    AmbiguousDegree { raw: f64, residual: f64 },
    #[error("invalid loop: {0}")]
    InvalidLoop(String),
    #[error("point or connection belongs to a different bundle")]
    WrongBundle,
    #[error("integration failed: {0}")]
    IntegrationFailed(String),
    #[error("horizontal lift failed: {0}")]
    LiftFailed(String),
    #[error("vector is not tangent (defect {defect:e})")]
    NotTangent { defect: f64 },
    #[error("invalid frame: {0}")]
    InvalidFrame(String),
    #[error("element does not fix the base point (defect {defect:e})")]
    NotIsotropy { defect: f64 },
    #[error("point is not fixed by the action (defect {defect:e})")]
    NotFixedPoint { defect: f64 },
    #[error("linearized action is not periodic: {0}")]
    NotPeriodic(String),
    #[error("not a symplectic potential (defect {defect:e})")]
    NotAPotential { defect: f64 },
    #[error("connection is not invariant under the lifted action (defect {defect:e})")]
    InvariantConnectionRequired { defect: f64 },
    #[error("the action has no fixed points among the candidates")]
    NoFixedPoints,
    #[error("torus components do not commute (defect {defect:e})")]
    NotCommuting { defect: f64 },
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, MaslovError>;
