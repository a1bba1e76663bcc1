//! Crate-wide error type.
//!
//! Numeric operations report structured failures; configuration loading
//! reports parse and validation failures separately so the CLI can map
//! them to distinct exit codes.

use thiserror::Error;

/// Errors surfaced by the numerical kernels, the physics pipelines and the
/// configuration layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: residual {residual:.3e} exceeds tol {tol:.3e}")]
    NotHermitian { residual: f64, tol: f64 },

    #[error("matrix is not unitary: residual {residual:.3e} exceeds tol {tol:.3e}")]
    NotUnitary { residual: f64, tol: f64 },

    #[error("not a density matrix: {reason}")]
    NotDensityMatrix { reason: String },

    #[error("state is not pure: Tr[rho^2] = {purity}")]
    NotPure { purity: f64 },

    #[error("eigensolver did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("spectral factorization failed: residual {residual:.3e}")]
    FactorizationFailed { residual: f64 },

    #[error("matrix logarithm branch ambiguity: eigenphase {phase} is within tolerance of pi")]
    BranchAmbiguity { phase: f64 },

    #[error("Simpson quadrature needs an even panel count >= 2, got {n_panels}")]
    BadPanelCount { n_panels: usize },

    #[error(
        "step count {n_steps} too small: Richardson error estimate {estimate:.3e} exceeds {tol:.3e}"
    )]
    StepCountTooSmall {
        n_steps: usize,
        estimate: f64,
        tol: f64,
    },

    #[error("imaginary residue {residue:.3e} exceeds {tol:.3e} on a real-valued quantity")]
    ImaginaryResidue { residue: f64, tol: f64 },

    #[error("bad mixture weights: {reason}")]
    BadWeights { reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    #[error("channel decomposition infeasible: {reason}")]
    Infeasible { reason: String },

    #[error("depolarising mixing parameter {s} outside [0, 1]")]
    BadMixingParameter { s: f64 },

    #[error("condition-matrix constant must be positive, got {c}")]
    BadC { c: f64 },

    #[error("argument `{name}` = {value} outside its valid range")]
    BadInputRange { name: &'static str, value: f64 },

    #[error("too few usable points for the fit: need {needed}, have {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("log-log fit requires g > 0, got {value}")]
    NonPositiveG { value: f64 },

    #[error("operational condition test failed: best minimal eigenvalue {min_eigenvalue:.3e}")]
    ConditionFailed { min_eigenvalue: f64 },

    #[error("pulse is not cyclic: |V(0)| = {v0:.3e}, |V(tau)| = {vtau:.3e}")]
    NotCyclic { v0: f64, vtau: f64 },

    #[error("bad POVM: {reason}")]
    BadPovm { reason: String },

    #[error("outcome {outcome} has degenerate probability {probability:.3e}")]
    DegenerateProbability { outcome: usize, probability: f64 },

    #[error("delta = {delta} too large: leading-order bound requires 2*K*delta^2 < min p(x)")]
    DeltaTooLarge { delta: f64 },

    #[error("limit estimate unstable: {first:.6e} vs {second:.6e}")]
    UnstableLimit { first: f64, second: f64 },

    #[error("bad parameters: {reason}")]
    BadParameters { reason: String },

    #[error("cross-check failed: {detail}")]
    CrossCheck { detail: String },

    #[error("config parse error: {message}")]
    Parse { message: String },

    #[error("config validation error in `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code the CLI maps this error to: 2 for configuration
    /// problems, 3 for numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Validation { .. } => 2,
            _ => 3,
        }
    }
}
