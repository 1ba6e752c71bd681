//! Numerical estimates with provenance.

use std::fmt;

/// How an [`Estimate`] was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Arithmetic mean of a function along an integrated orbit.
    TimeAverage,
    /// Deterministic adaptive quadrature on a one-degree-of-freedom model.
    Quadrature1Dof,
    /// Rejection-sampling volume estimate over `H <= E`.
    McVolume,
    /// Rejection-sampling average over a thin shell `E <= H <= E + eps`.
    McShell,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::TimeAverage => "time_average",
            Method::Quadrature1Dof => "quadrature_1dof",
            Method::McVolume => "mc_volume",
            Method::McShell => "mc_shell",
        }
    }

    /// Deterministic methods may legitimately report a zero standard error.
    pub fn is_deterministic(self) -> bool {
        matches!(self, Method::Quadrature1Dof)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A value with a standard error and enough metadata to reproduce it.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub method: Method,
    pub n_samples: u64,
    pub seed: Option<u64>,
}

impl Estimate {
    pub fn new(value: f64, std_error: f64, method: Method, n_samples: u64) -> Self {
        debug_assert!(std_error >= 0.0, "standard error must be nonnegative");
        Estimate {
            value,
            std_error,
            method,
            n_samples,
            seed: None,
        }
    }

    /// A quadrature result: deterministic, zero standard error.
    pub fn exact(value: f64, n_evals: u64) -> Self {
        Estimate::new(value, 0.0, Method::Quadrature1Dof, n_evals)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    /// `|value - other.value|` measured in combined standard errors.
    /// Returns infinity when both errors are zero and the values differ.
    pub fn sigma_distance(&self, other: &Estimate) -> f64 {
        let combined = self.std_error.hypot(other.std_error);
        let gap = (self.value - other.value).abs();
        if combined == 0.0 {
            if gap == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            gap / combined
        }
    }

    /// True when `target` lies within `k` combined standard errors.
    pub fn consistent_with(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.std_error
    }
}
