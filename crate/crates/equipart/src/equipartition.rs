//! Comparison of the classical coordinate equipartition law against the
//! coordinate-free law, failure diagnostics for discontinuous fields, and
//! the boundary correction identity above the pendulum separatrix.
//!
//! The classical law predicts `<x^i dH/dx^j> = delta_ij kT` in canonical
//! coordinates. The intrinsic law replaces the Kronecker delta by
//! `(1/Vol(M_E)) int div(X) dmu`, which agrees with the classical form for
//! coordinate fields but remains valid for any globally smooth field. When
//! a field is discontinuous somewhere on `M_E` neither law applies; the
//! report flags that case instead of claiming a prediction.

use crate::dynamics::{
    orbit_period, orbit_period_total, time_average, DEFAULT_AVERAGING_PERIODS,
    DEFAULT_STEP_DIVISOR,
};
use crate::error::{Error, Result};
use crate::estimate::Estimate;
use crate::fields::{coordinate_field, smooth_on_me, CoordinateFieldIndex, VectorField};
use crate::microcanonical::{
    ensemble_average_1dof, ensemble_average_mc_shell, me_div_stats, temperature_kt,
    vol_me_quadrature_1dof, McConfig, MeDivStats,
};
use crate::models::{CriticalKind, HamiltonianModel, HarmonicOscillator, PhaseState};
use rayon::prelude::*;

/// Knobs for a full law check: Monte Carlo settings plus the trajectory
/// length and step divisor used for the time-average route.
#[derive(Debug, Clone, PartialEq)]
pub struct LawConfig {
    pub mc: McConfig,
    /// Averaging length in orbit periods.
    pub periods: f64,
    /// Step divisor: `h = T / step_divisor`.
    pub step_divisor: f64,
}

impl Default for LawConfig {
    fn default() -> Self {
        LawConfig {
            mc: McConfig::default(),
            periods: DEFAULT_AVERAGING_PERIODS,
            step_divisor: DEFAULT_STEP_DIVISOR,
        }
    }
}

impl LawConfig {
    pub fn new(mc: McConfig) -> Self {
        LawConfig {
            mc,
            ..LawConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.mc.validate()?;
        if !(self.periods >= 1.0 && self.periods.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "periods must be at least 1, got {}",
                self.periods
            )));
        }
        if !(self.step_divisor >= 16.0 && self.step_divisor.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "step divisor must be at least 16, got {}",
                self.step_divisor
            )));
        }
        Ok(())
    }
}

/// Per-energy, per-field comparison of every estimator of `<X(H)>` against
/// both laws.
#[derive(Debug, Clone)]
pub struct EquipartitionReport {
    pub model: String,
    pub e: f64,
    pub field: String,
    pub kt: Estimate,
    /// Orbit time average, combined over components by period weights.
    /// Absent for models with more than one degree of freedom.
    pub lhs_time: Option<Estimate>,
    /// Microcanonical ensemble average (quadrature for n = 1, shell Monte
    /// Carlo otherwise).
    pub lhs_ensemble: Estimate,
    /// Right-hand side of the intrinsic law.
    pub rhs_intrinsic: Estimate,
    /// Classical prediction `delta kT`, when the field has constant
    /// divergence.
    pub tolman_value: Option<f64>,
    /// `lhs_ensemble - rhs_intrinsic`.
    pub residual_intrinsic: f64,
    /// `lhs_ensemble - tolman_value`, when defined.
    pub residual_tolman: Option<f64>,
    /// Whether the field is smooth on all of `M_E`; when false the
    /// intrinsic law does not apply and the residuals are diagnostics, not
    /// discrepancies.
    pub field_smooth_on_me: bool,
}

/// The classical prediction `delta_ij kT` for the field `x^i d/dx^j`.
pub fn tolman_prediction(
    model: &dyn HamiltonianModel,
    idx: CoordinateFieldIndex,
    e: f64,
    cfg: &McConfig,
) -> Result<f64> {
    let field = coordinate_field(model, idx)?;
    let delta = field
        .constant_divergence()
        .expect("coordinate fields have constant divergence");
    let kt = temperature_kt(model, e, cfg)?;
    Ok(delta * kt.value)
}

fn rhs_from(kt: &Estimate, stats: &MeDivStats) -> Estimate {
    let value = kt.value * stats.mean_div;
    let se = (stats.mean_div * kt.std_error).hypot(kt.value * stats.se_mean_div);
    let mut est = Estimate::new(value, se, kt.method, stats.vol.n_samples);
    est.seed = stats.vol.seed;
    est
}

/// Right-hand side of the intrinsic law,
/// `kT / Vol(M_E) * int div(X) dmu`, evaluated as `kT` times the mean
/// divergence over the accepted sample stream (shared with the volume
/// estimate). For a field of constant divergence `d` this is `d * kT`
/// by the same floating-point ratio.
pub fn rhs_intrinsic(
    model: &dyn HamiltonianModel,
    field: &dyn VectorField,
    e: f64,
    cfg: &McConfig,
) -> Result<Estimate> {
    let kt = temperature_kt(model, e, cfg)?;
    let stats = me_div_stats(model, field, e, cfg)?;
    Ok(rhs_from(&kt, &stats))
}

/// Time average of `X(H)` over each component, combined by period weights.
fn lhs_time_combined(
    model: &dyn HamiltonianModel,
    field: &dyn VectorField,
    e: f64,
    cfg: &LawConfig,
) -> Result<Estimate> {
    let components = model.list_components(e)?;
    let mut weighted_value = 0.0;
    let mut weighted_var = 0.0;
    let mut total_period = 0.0;
    let mut n_samples = 0;
    let mut periods_and_avgs = Vec::new();
    for c in components {
        let period = orbit_period(model, e, c)?;
        let x0 = model.initial_state_on_shell(e, c)?;
        let h = period / cfg.step_divisor;
        let f = |x: &PhaseState| {
            field
                .derive_along(model, x)
                .expect("state and field dimensions agree")
        };
        let avg = time_average(model, f, &x0, cfg.periods * period, h)?;
        periods_and_avgs.push((period, avg));
        total_period += period;
    }
    for (period, avg) in &periods_and_avgs {
        let w = period / total_period;
        weighted_value += w * avg.value;
        weighted_var += (w * avg.std_error) * (w * avg.std_error);
        n_samples += avg.n_samples;
    }
    Ok(Estimate::new(
        weighted_value,
        weighted_var.sqrt(),
        crate::estimate::Method::TimeAverage,
        n_samples,
    ))
}

/// Full comparison at one energy: every estimator of `<X(H)>`, both law
/// predictions, the residuals and the smoothness flag.
pub fn check_law(
    model: &dyn HamiltonianModel,
    field: &dyn VectorField,
    e: f64,
    cfg: &LawConfig,
) -> Result<EquipartitionReport> {
    cfg.validate()?;
    model.require_regular(e)?;
    let kt = temperature_kt(model, e, &cfg.mc)?;
    let stats = me_div_stats(model, field, e, &cfg.mc)?;
    let rhs = rhs_from(&kt, &stats);
    let smooth = smooth_on_me(field, model, e);

    let one_dof = model.one_dof().is_some();
    let lhs_ensemble = if one_dof {
        let f = |x: &PhaseState| {
            field
                .derive_along(model, x)
                .expect("state and field dimensions agree")
        };
        ensemble_average_1dof(model, f, e, None)?
    } else {
        let f = |x: &PhaseState| {
            field
                .derive_along(model, x)
                .expect("state and field dimensions agree")
        };
        ensemble_average_mc_shell(model, f, e, &cfg.mc)?.estimate
    };
    let lhs_time = if one_dof {
        Some(lhs_time_combined(model, field, e, cfg)?)
    } else {
        None
    };

    let tolman_value = field.constant_divergence().map(|d| d * kt.value);
    let residual_intrinsic = lhs_ensemble.value - rhs.value;
    let residual_tolman = tolman_value.map(|t| lhs_ensemble.value - t);

    Ok(EquipartitionReport {
        model: model.name().to_string(),
        e,
        field: field.name().to_string(),
        kt,
        lhs_time,
        lhs_ensemble,
        rhs_intrinsic: rhs,
        tolman_value,
        residual_intrinsic,
        residual_tolman,
        field_smooth_on_me: smooth,
    })
}

/// Outcome of one grid energy in a scan.
#[derive(Debug, Clone)]
pub enum ScanOutcome {
    Report(Box<EquipartitionReport>),
    /// Energy skipped by design (guard band around a critical value).
    Skipped { e: f64, reason: String },
    /// Energy whose report could not be computed.
    Failed { e: f64, reason: String },
}

/// Run [`check_law`] over an energy grid. Guard-band energies are skipped
/// with a warning entry instead of failing the scan; the output order
/// follows the grid. Returns an error if no report remains at all.
pub fn scan_energies(
    model: &dyn HamiltonianModel,
    field: &dyn VectorField,
    e_grid: &[f64],
    cfg: &LawConfig,
) -> Result<Vec<ScanOutcome>> {
    cfg.validate()?;
    let outcomes: Vec<ScanOutcome> = e_grid
        .par_iter()
        .map(|&e| {
            if let Some(c) = model.guard_band_violation(e) {
                return ScanOutcome::Skipped {
                    e,
                    reason: format!(
                        "guard band around critical energy {} ({})",
                        c.energy,
                        match c.kind {
                            CriticalKind::Minimum => "minimum",
                            CriticalKind::Separatrix => "separatrix",
                        }
                    ),
                };
            }
            match check_law(model, field, e, cfg) {
                Ok(report) => ScanOutcome::Report(Box::new(report)),
                Err(err) => ScanOutcome::Failed {
                    e,
                    reason: err.to_string(),
                },
            }
        })
        .collect();
    if !outcomes
        .iter()
        .any(|o| matches!(o, ScanOutcome::Report(_)))
    {
        return Err(Error::EmptyGrid);
    }
    Ok(outcomes)
}

/// Both sides of the boundary correction identity above the separatrix.
///
/// `lhs = (Vol(Sigma_{E+dE}) <f11>_{E+dE} - Vol(Sigma_E) <f11>_E) / 2`
/// (level-set volumes totalled over both rotation components), and
/// `rhs = Vol(M(E, dE)) / 2 - 2 pi dp` with
/// `dp = sqrt(2k(E+dE-u)) - sqrt(2k(E-u))`. The `2 pi dp` term is the
/// contribution of the two seam segments where the multiplier `q` jumps.
#[derive(Debug, Clone)]
pub struct CorrectionCheck {
    pub e: f64,
    pub delta_e: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub delta_p: f64,
    /// `Vol(M_{E+dE}) - Vol(M_E)`, both components.
    pub vol_band: f64,
    /// `|lhs - rhs| / max(|lhs|, |rhs|)`; 0 when both sides vanish.
    pub rel_gap: f64,
    /// Gibbs temperature at `E`, for scale.
    pub kt: f64,
}

/// Verify the correction identity at `(E, E + delta_e)` on a pendulum-type
/// model (one angular degree of freedom with a separatrix). All pieces are
/// deterministic quadratures.
pub fn correction_identity(
    model: &dyn HamiltonianModel,
    e: f64,
    delta_e: f64,
    cfg: &McConfig,
) -> Result<CorrectionCheck> {
    let od = model.one_dof().ok_or_else(|| Error::NotOneDof {
        op: "correction_identity",
        model: model.name().to_string(),
        n: model.dof(),
    })?;
    let separatrix = model
        .critical_energies()
        .into_iter()
        .find(|c| c.kind == CriticalKind::Separatrix)
        .ok_or_else(|| {
            Error::InvalidArgument(format!(
                "model `{}` has no separatrix to correct across",
                model.name()
            ))
        })?;
    if !(delta_e > 0.0 && delta_e.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "delta_e must be positive, got {delta_e}"
        )));
    }
    if e <= separatrix.energy {
        return Err(Error::InvalidArgument(format!(
            "correction identity requires E above the separatrix energy {}, got {e}",
            separatrix.energy
        )));
    }
    model.require_regular(e)?;
    model.require_regular(e + delta_e)?;

    let f11 = coordinate_field(model, CoordinateFieldIndex { i: 0, j: 0 })?;
    let xh = |x: &PhaseState| {
        f11.derive_along(model, x)
            .expect("state and field dimensions agree")
    };
    let side = |energy: f64| -> Result<f64> {
        let sigma = orbit_period_total(model, energy)?;
        let avg = ensemble_average_1dof(model, xh, energy, None)?;
        Ok(sigma * avg.value)
    };
    let lhs = 0.5 * (side(e + delta_e)? - side(e)?);

    let vol_lo = vol_me_quadrature_1dof(model, e)?.value;
    let vol_hi = vol_me_quadrature_1dof(model, e + delta_e)?.value;
    let vol_band = vol_hi - vol_lo;
    let k = od.inertia();
    let u = separatrix.energy;
    let delta_p = (2.0 * k * (e + delta_e - u)).sqrt() - (2.0 * k * (e - u)).sqrt();
    let rhs = 0.5 * vol_band - 2.0 * std::f64::consts::PI * delta_p;

    let scale = lhs.abs().max(rhs.abs());
    let rel_gap = if scale == 0.0 {
        0.0
    } else {
        (lhs - rhs).abs() / scale
    };
    let kt = temperature_kt(model, e, cfg)?.value;
    Ok(CorrectionCheck {
        e,
        delta_e,
        lhs,
        rhs,
        delta_p,
        vol_band,
        rel_gap,
        kt,
    })
}

/// The action-angle failure table on the 2-D harmonic oscillator:
/// `entries[mu][nu] = omega_nu <I_mu>` from shell averages. Off-diagonal
/// entries stay away from zero (the classical law would demand zero) while
/// diagonal entries equal `kT`.
#[derive(Debug, Clone)]
pub struct CounterexampleTable {
    pub omega: [f64; 2],
    pub e: f64,
    pub entries: [[Estimate; 2]; 2],
    pub kt: Estimate,
    pub shell_thickness: f64,
}

pub fn action_angle_counterexample(
    omega1: f64,
    omega2: f64,
    e: f64,
    cfg: &McConfig,
) -> Result<CounterexampleTable> {
    let model = HarmonicOscillator::ho2d(omega1, omega2)?;
    model.require_regular(e)?;
    let omegas = [omega1, omega2];
    let action = |mu: usize| {
        move |x: &PhaseState| {
            let (q, p) = (x.q()[mu], x.p()[mu]);
            (p * p + omegas[mu] * omegas[mu] * q * q) / (2.0 * omegas[mu])
        }
    };
    let avg1 = ensemble_average_mc_shell(&model, action(0), e, cfg)?;
    let avg2 = ensemble_average_mc_shell(&model, action(1), e, cfg)?;
    let scaled = |base: &Estimate, w: f64| {
        let mut est = Estimate::new(w * base.value, w * base.std_error, base.method, base.n_samples);
        est.seed = base.seed;
        est
    };
    let entries = [
        [
            scaled(&avg1.estimate, omegas[0]),
            scaled(&avg1.estimate, omegas[1]),
        ],
        [
            scaled(&avg2.estimate, omegas[0]),
            scaled(&avg2.estimate, omegas[1]),
        ],
    ];
    let kt = temperature_kt(&model, e, cfg)?;
    Ok(CounterexampleTable {
        omega: omegas,
        e,
        entries,
        kt,
        shell_thickness: avg1.thickness,
    })
}
