//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by model construction, quadrature, sampling and the
/// equipartition diagnostics.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: state has n={actual}, model `{model}` expects n={expected}")]
    DimensionMismatch {
        model: String,
        expected: usize,
        actual: usize,
    },

    #[error("state contains a non-finite coordinate")]
    NonFiniteState,

    #[error("energy {e} is below the ground-state energy {e_min}")]
    BelowGroundState { e: f64, e_min: f64 },

    #[error("energy {e} lies inside the guard band around the critical energy {critical}")]
    GuardBand { e: f64, critical: f64 },

    #[error("component `{component}` is not available at energy {e}")]
    ComponentUnavailable { component: String, e: f64 },

    #[error("unknown component `{0}` (expected oscillation, rotation_pos or rotation_neg)")]
    UnknownComponent(String),

    #[error("unknown model `{name}` (available: {available})")]
    UnknownModel { name: String, available: String },

    #[error("unknown parameter `{key}` for model `{model}`")]
    UnknownParameter { model: String, key: String },

    #[error("invalid parameter {key}={value} for model `{model}`: {reason}")]
    InvalidParameter {
        model: String,
        key: String,
        value: f64,
        reason: String,
    },

    #[error("unknown field token `{token}` (available: {available})")]
    UnknownField { token: String, available: String },

    #[error("field `{token}` requires a one-degree-of-freedom model, `{model}` has n={n}")]
    FieldNotApplicable {
        token: String,
        model: String,
        n: usize,
    },

    #[error("coordinate index {index} out of range for phase-space dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("model `{0}` is not separable; the leapfrog stepper requires H = T(p) + V(q)")]
    NotSeparable(String),

    #[error("`{op}` requires a one-degree-of-freedom model, `{model}` has n={n}")]
    NotOneDof {
        op: &'static str,
        model: String,
        n: usize,
    },

    #[error("step budget exceeded: {steps} steps requested, hard cap is {cap}")]
    StepBudgetExceeded { steps: u64, cap: u64 },

    #[error("invalid integration setup: {0}")]
    InvalidIntegration(String),

    #[error("state is a stationary point of the Hamiltonian")]
    StationaryPoint,

    #[error("degenerate bounding box at energy {e}")]
    DegenerateBox { e: f64 },

    #[error("invalid Monte Carlo configuration: {0}")]
    InvalidMcConfig(String),

    #[error("no samples accepted in the energy shell [{e}, {e_top}]")]
    EmptyShell { e: f64, e_top: f64 },

    #[error("finite-difference window [{lo}, {hi}] crosses the critical energy {critical}")]
    FdWindowCrossesCritical { lo: f64, hi: f64, critical: f64 },

    #[error("energy grid is empty after skipping guard-band values")]
    EmptyGrid,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
