//! Phase-space volumes, Gibbs temperature and microcanonical averages.
//!
//! Two routes everywhere: rejection-sampling Monte Carlo for any model, and
//! deterministic quadrature for one-degree-of-freedom models. The n = 1
//! quadrature paths are preferred where available; Monte Carlo stays as a
//! cross-validation and as the only route for n > 1.

use crate::dynamics::orbit_period_total;
use crate::error::{Error, Result};
use crate::estimate::{Estimate, Method};
use crate::fields::VectorField;
use crate::models::{Component, CriticalKind, HamiltonianModel, OneDof, PhaseState, GUARD_REL};
use crate::quad::adaptive_quad;
use crate::sampling::{
    chunked_map_reduce, reduce_sums, CounterRng, STREAM_ME, STREAM_SHELL, STREAM_SIGMA,
};

/// Relative quadrature tolerance for the n = 1 volume paths.
const VOL_TOL: f64 = 1e-10;

/// Monte Carlo configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct McConfig {
    /// Sample count; at least 10^4.
    pub n_samples: u64,
    /// Master seed; every derived stream is keyed by `(seed, stream id)`.
    pub seed: u64,
    /// Relative finite-difference step for `dVol/dE`, in `(0, 1e-2]`.
    pub fd_step: f64,
    /// Absolute shell thickness for shell averages; `None` selects the
    /// default `1e-3 * max(1, |E - e_min|)` at each energy.
    pub shell_thickness: Option<f64>,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            n_samples: 100_000,
            seed: 0,
            fd_step: 1e-3,
            shell_thickness: None,
        }
    }
}

impl McConfig {
    pub fn new(n_samples: u64, seed: u64) -> Self {
        McConfig {
            n_samples,
            seed,
            ..McConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples < 10_000 {
            return Err(Error::InvalidMcConfig(format!(
                "n_samples must be at least 10^4, got {}",
                self.n_samples
            )));
        }
        if !(self.fd_step > 0.0 && self.fd_step <= 1e-2) {
            return Err(Error::InvalidMcConfig(format!(
                "fd_step must lie in (0, 1e-2], got {}",
                self.fd_step
            )));
        }
        if let Some(eps) = self.shell_thickness {
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(Error::InvalidMcConfig(format!(
                    "shell_thickness must be positive, got {eps}"
                )));
            }
        }
        Ok(())
    }

    /// Absolute finite-difference half-window at energy `e`.
    pub fn fd_delta(&self, model: &dyn HamiltonianModel, e: f64) -> f64 {
        self.fd_step * (e - model.e_min()).abs().max(1.0)
    }

    /// Shell thickness in effect at energy `e`.
    pub fn effective_shell(&self, model: &dyn HamiltonianModel, e: f64) -> f64 {
        self.shell_thickness
            .unwrap_or_else(|| 1e-3 * (e - model.e_min()).abs().max(1.0))
    }
}

/// Shell average together with the thickness it was taken at.
#[derive(Debug, Clone, PartialEq)]
pub struct ShellAverage {
    pub estimate: Estimate,
    pub thickness: f64,
}

fn checked_box(model: &dyn HamiltonianModel, e: f64) -> Result<(crate::models::BoundingBox, f64)> {
    let bbox = model.bounding_box(e)?;
    let vol = bbox.volume();
    if !(vol > 0.0 && vol.is_finite()) {
        return Err(Error::DegenerateBox { e });
    }
    Ok((bbox, vol))
}

/// Run a rejection-sampling pass over the box, accumulating `width` sums.
/// `fill` sees each sampled point and adds its contributions; chunking and
/// the pairwise reduction keep the result worker-count independent.
fn mc_pass<FX>(
    model: &dyn HamiltonianModel,
    bbox: &crate::models::BoundingBox,
    n_samples: u64,
    seed: u64,
    stream: u64,
    width: usize,
    fill: FX,
) -> Vec<f64>
where
    FX: Fn(&[f64], &[f64], f64, &mut [f64]) + Sync,
{
    let n = model.dof();
    let draws = 2 * n as u64;
    chunked_map_reduce(
        n_samples,
        |start, len| {
            let mut rng = CounterRng::at(seed, stream, draws, start);
            let mut q = vec![0.0; n];
            let mut p = vec![0.0; n];
            let mut acc = vec![0.0; width];
            for _ in 0..len {
                for (i, qi) in q.iter_mut().enumerate() {
                    *qi = rng.uniform_in(bbox.lo[i], bbox.hi[i]);
                }
                for (i, pi) in p.iter_mut().enumerate() {
                    *pi = rng.uniform_in(bbox.lo[n + i], bbox.hi[n + i]);
                }
                let h = model.energy_raw(&q, &p);
                fill(&q, &p, h, &mut acc);
            }
            acc
        },
        reduce_sums,
    )
}

/// Monte Carlo estimate of `Vol(M_E)`: box volume times acceptance
/// fraction, with binomial standard error. Returns 0 exactly for
/// `E <= e_min`. Deterministic for a fixed seed.
pub fn vol_me_mc(model: &dyn HamiltonianModel, e: f64, cfg: &McConfig) -> Result<Estimate> {
    cfg.validate()?;
    if e <= model.e_min() {
        return Ok(Estimate::new(0.0, 0.0, Method::McVolume, 0).with_seed(cfg.seed));
    }
    let (bbox, box_vol) = checked_box(model, e)?;
    let sums = mc_pass(
        model,
        &bbox,
        cfg.n_samples,
        cfg.seed,
        STREAM_ME,
        1,
        |_q, _p, h, acc| {
            if h <= e {
                acc[0] += 1.0;
            }
        },
    );
    let n = cfg.n_samples as f64;
    let p_hat = sums[0] / n;
    let value = box_vol * p_hat;
    let se = box_vol * (p_hat * (1.0 - p_hat) / n).max(0.0).sqrt();
    Ok(Estimate::new(value, se, Method::McVolume, cfg.n_samples).with_seed(cfg.seed))
}

/// Deterministic `Vol(M_E)` for one-degree-of-freedom models:
/// `2 int p_+(q) dq` over the accessible range, covering both momentum
/// signs. Forbidden inside the guard band of a separatrix, where the
/// accessible region has a corner.
pub fn vol_me_quadrature_1dof(model: &dyn HamiltonianModel, e: f64) -> Result<Estimate> {
    let od = model.one_dof().ok_or_else(|| Error::NotOneDof {
        op: "vol_me_quadrature_1dof",
        model: model.name().to_string(),
        n: model.dof(),
    })?;
    if e <= model.e_min() {
        return Ok(Estimate::exact(0.0, 0));
    }
    if let Some(c) = model.guard_band_violation(e) {
        if c.kind == CriticalKind::Separatrix {
            return Err(Error::GuardBand {
                e,
                critical: c.energy,
            });
        }
    }
    if let Ok(qmax) = od.turning_point(e) {
        // Oscillation region; substitution q = qmax sin(theta) keeps the
        // integrand smooth at the turning points.
        let integrand =
            |theta: f64| od.momentum_branch(e, qmax * theta.sin()) * qmax * theta.cos();
        let r = adaptive_quad(
            &integrand,
            -std::f64::consts::FRAC_PI_2,
            std::f64::consts::FRAC_PI_2,
            VOL_TOL,
        );
        Ok(Estimate::exact(2.0 * r.value, r.n_evals))
    } else {
        // Above the separatrix the whole circle is accessible.
        let integrand = |q: f64| od.momentum_branch(e, q);
        let r = adaptive_quad(
            &integrand,
            -std::f64::consts::PI,
            std::f64::consts::PI,
            VOL_TOL,
        );
        Ok(Estimate::exact(2.0 * r.value, r.n_evals))
    }
}

fn check_fd_window(model: &dyn HamiltonianModel, e: f64, delta: f64) -> Result<()> {
    let (lo, hi) = (e - delta, e + delta);
    if lo <= model.e_min() {
        return Err(Error::FdWindowCrossesCritical {
            lo,
            hi,
            critical: model.e_min(),
        });
    }
    for c in model.critical_energies() {
        if lo < c.energy && c.energy < hi {
            return Err(Error::FdWindowCrossesCritical {
                lo,
                hi,
                critical: c.energy,
            });
        }
    }
    Ok(())
}

/// The correlated finite-difference pair behind [`vol_sigma_mc`]: both
/// volumes are estimated from one point set drawn in the outer box, so
/// their difference carries only boundary-shell binomial noise.
pub(crate) fn correlated_vol_pair(
    model: &dyn HamiltonianModel,
    e: f64,
    delta: f64,
    cfg: &McConfig,
) -> Result<(Estimate, Estimate)> {
    let (bbox, box_vol) = checked_box(model, e + delta)?;
    let (e_hi, e_lo) = (e + delta, e - delta);
    let sums = mc_pass(
        model,
        &bbox,
        cfg.n_samples,
        cfg.seed,
        STREAM_SIGMA,
        2,
        |_q, _p, h, acc| {
            if h <= e_hi {
                acc[0] += 1.0;
            }
            if h <= e_lo {
                acc[1] += 1.0;
            }
        },
    );
    let n = cfg.n_samples as f64;
    let make = |count: f64| {
        let p_hat = count / n;
        Estimate::new(
            box_vol * p_hat,
            box_vol * (p_hat * (1.0 - p_hat) / n).max(0.0).sqrt(),
            Method::McVolume,
            cfg.n_samples,
        )
        .with_seed(cfg.seed)
    };
    Ok((make(sums[0]), make(sums[1])))
}

/// Monte Carlo `Vol(Sigma_E)` as the central finite difference of the
/// correlated volume pair at `E +- delta`, `delta = fd_step * max(1, |E - e_min|)`.
pub fn vol_sigma_mc(model: &dyn HamiltonianModel, e: f64, cfg: &McConfig) -> Result<Estimate> {
    cfg.validate()?;
    let delta = cfg.fd_delta(model, e);
    check_fd_window(model, e, delta)?;
    let (hi, lo) = correlated_vol_pair(model, e, delta, cfg)?;
    let value = (hi.value - lo.value) / (2.0 * delta);
    // Shell membership is binomial on the shared point set.
    let n = cfg.n_samples as f64;
    let box_vol = checked_box(model, e + delta)?.1;
    let p_shell = ((hi.value - lo.value) / box_vol).max(0.0);
    let se = box_vol * (p_shell * (1.0 - p_shell) / n).max(0.0).sqrt() / (2.0 * delta);
    Ok(Estimate::new(value, se, Method::McVolume, cfg.n_samples).with_seed(cfg.seed))
}

/// `Vol(Sigma_E) = dVol(M_E)/dE`. One-degree-of-freedom models take the
/// quadrature path, where the level-set volume is the sum of the component
/// orbit periods; other models fall back to [`vol_sigma_mc`].
pub fn vol_sigma(model: &dyn HamiltonianModel, e: f64, cfg: &McConfig) -> Result<Estimate> {
    if model.one_dof().is_some() {
        let total = orbit_period_total(model, e)?;
        Ok(Estimate::exact(total, 0))
    } else {
        vol_sigma_mc(model, e, cfg)
    }
}

/// Gibbs temperature `kT = Vol(M_E) / Vol(Sigma_E)` with first-order error
/// propagation; deterministic for n = 1.
pub fn temperature_kt(model: &dyn HamiltonianModel, e: f64, cfg: &McConfig) -> Result<Estimate> {
    if model.one_dof().is_some() {
        let sigma = vol_sigma(model, e, cfg)?;
        let vol = vol_me_quadrature_1dof(model, e)?;
        if sigma.value <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "level-set volume vanishes at E={e}"
            )));
        }
        return Ok(Estimate::exact(
            vol.value / sigma.value,
            vol.n_samples + sigma.n_samples,
        ));
    }
    let vol = vol_me_mc(model, e, cfg)?;
    let sigma = vol_sigma_mc(model, e, cfg)?;
    if sigma.value <= 0.0 || vol.value <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "volume estimates degenerate at E={e} (vol={}, sigma={})",
            vol.value, sigma.value
        )));
    }
    let value = vol.value / sigma.value;
    let rel = (vol.std_error / vol.value).hypot(sigma.std_error / sigma.value);
    Ok(Estimate::new(value, value.abs() * rel, Method::McVolume, cfg.n_samples).with_seed(cfg.seed))
}

/// Statistics of a field's divergence over `M_E`, from the same sample
/// stream as [`vol_me_mc`].
#[derive(Debug, Clone)]
pub(crate) struct MeDivStats {
    pub vol: Estimate,
    #[allow(dead_code)]
    pub n_accept: u64,
    /// Mean divergence over accepted points.
    pub mean_div: f64,
    /// Standard error of `mean_div`.
    pub se_mean_div: f64,
    /// Standard error of the integral `vol * mean_div`.
    pub se_integral: f64,
}

pub(crate) fn me_div_stats(
    model: &dyn HamiltonianModel,
    field: &dyn VectorField,
    e: f64,
    cfg: &McConfig,
) -> Result<MeDivStats> {
    cfg.validate()?;
    if field.dim() != 2 * model.dof() {
        return Err(Error::InvalidArgument(format!(
            "field `{}` has dimension {}, model `{}` needs {}",
            field.name(),
            field.dim(),
            model.name(),
            2 * model.dof()
        )));
    }
    if e <= model.e_min() {
        return Ok(MeDivStats {
            vol: Estimate::new(0.0, 0.0, Method::McVolume, 0).with_seed(cfg.seed),
            n_accept: 0,
            mean_div: 0.0,
            se_mean_div: 0.0,
            se_integral: 0.0,
        });
    }
    let (bbox, box_vol) = checked_box(model, e)?;
    let sums = mc_pass(
        model,
        &bbox,
        cfg.n_samples,
        cfg.seed,
        STREAM_ME,
        3,
        |q, p, h, acc| {
            if h <= e {
                acc[0] += 1.0;
                let x = PhaseState::new(q.to_vec(), p.to_vec()).expect("sampled state is finite");
                let d = field.divergence(&x);
                acc[1] += d;
                acc[2] += d * d;
            }
        },
    );
    let n = cfg.n_samples as f64;
    let count = sums[0];
    let p_hat = count / n;
    let vol = Estimate::new(
        box_vol * p_hat,
        box_vol * (p_hat * (1.0 - p_hat) / n).max(0.0).sqrt(),
        Method::McVolume,
        cfg.n_samples,
    )
    .with_seed(cfg.seed);

    if count == 0.0 {
        return Ok(MeDivStats {
            vol,
            n_accept: 0,
            mean_div: 0.0,
            se_mean_div: 0.0,
            se_integral: 0.0,
        });
    }
    let mean_div = sums[1] / count;
    let se_mean_div = if count > 1.0 {
        let var = ((sums[2] - sums[1] * sums[1] / count) / (count - 1.0)).max(0.0);
        (var / count).sqrt()
    } else {
        0.0
    };
    // Error of the full-domain integral: variance of div times the
    // acceptance indicator, over all N samples.
    let mean_g = sums[1] / n;
    let var_g = (sums[2] / n - mean_g * mean_g).max(0.0);
    let se_integral = box_vol * (var_g / n).sqrt();
    Ok(MeDivStats {
        vol,
        n_accept: count as u64,
        mean_div,
        se_mean_div,
        se_integral,
    })
}

/// `int_{M_E} div(X) dmu` by rejection sampling, sharing the sample stream
/// of [`vol_me_mc`] for the same seed: for `div = 1` the two estimates are
/// bit-identical.
pub fn div_integral(
    model: &dyn HamiltonianModel,
    field: &dyn VectorField,
    e: f64,
    cfg: &McConfig,
) -> Result<Estimate> {
    let stats = me_div_stats(model, field, e, cfg)?;
    Ok(Estimate::new(
        stats.vol.value * stats.mean_div,
        stats.se_integral,
        Method::McVolume,
        cfg.n_samples,
    )
    .with_seed(cfg.seed))
}

/// Microcanonical average of `f` at energy `E` for n = 1, as the
/// time-weighted quadrature `(1/T) closed-int f dt` with weight `1/|p|`
/// along each branch. With `component = None`, multi-component level sets
/// are combined with period weights.
pub fn ensemble_average_1dof<F>(
    model: &dyn HamiltonianModel,
    f: F,
    e: f64,
    component: Option<Component>,
) -> Result<Estimate>
where
    F: Fn(&PhaseState) -> f64,
{
    let od = model.one_dof().ok_or_else(|| Error::NotOneDof {
        op: "ensemble_average_1dof",
        model: model.name().to_string(),
        n: model.dof(),
    })?;
    model.require_regular(e)?;
    if e <= model.e_min() {
        return Err(Error::BelowGroundState {
            e,
            e_min: model.e_min(),
        });
    }
    let components = match component {
        Some(c) => {
            model.initial_state_on_shell(e, c)?;
            vec![c]
        }
        None => model.list_components(e)?,
    };
    let mut num_total = 0.0;
    let mut den_total = 0.0;
    let mut evals = 0u64;
    for c in components {
        let (num, den, ne) = component_moments(od, e, c, &f)?;
        num_total += num;
        den_total += den;
        evals += ne;
    }
    Ok(Estimate::exact(num_total / den_total, evals))
}

/// Time-weighted moments of one component: `(closed-int f dt, T, evals)`.
/// The denominator runs through the identical integrand structure with `f`
/// replaced by 1, so normalization is exact.
fn component_moments<F>(
    od: &dyn OneDof,
    e: f64,
    component: Component,
    f: &F,
) -> Result<(f64, f64, u64)>
where
    F: Fn(&PhaseState) -> f64,
{
    let k = od.inertia();
    let scale = (k / 2.0).sqrt();
    match component {
        Component::Oscillation => {
            let qmax = od.turning_point(e)?;
            let branches = |theta: f64, f: &dyn Fn(&PhaseState) -> f64| {
                let q = qmax * theta.sin();
                let radicand = (e - od.potential(q)).max(0.0);
                let p_plus = (2.0 * k * radicand).sqrt();
                let weight = qmax * theta.cos() / radicand.sqrt();
                let up = f(&PhaseState::one_dof(q, p_plus));
                let down = f(&PhaseState::one_dof(q, -p_plus));
                weight * (up + down)
            };
            let half_pi = std::f64::consts::FRAC_PI_2;
            let num = adaptive_quad(&|t| branches(t, &|x| f(x)), -half_pi, half_pi, VOL_TOL);
            let den = adaptive_quad(&|t| branches(t, &|_| 1.0), -half_pi, half_pi, VOL_TOL);
            Ok((
                scale * num.value,
                scale * den.value,
                num.n_evals + den.n_evals,
            ))
        }
        Component::RotationPos | Component::RotationNeg => {
            let sign = if component == Component::RotationPos {
                1.0
            } else {
                -1.0
            };
            let branch = |q: f64, f: &dyn Fn(&PhaseState) -> f64| {
                let radicand = (e - od.potential(q)).max(0.0);
                let p = sign * (2.0 * k * radicand).sqrt();
                f(&PhaseState::one_dof(q, p)) / radicand.sqrt()
            };
            let pi = std::f64::consts::PI;
            let num = adaptive_quad(&|q| branch(q, &|x| f(x)), -pi, pi, VOL_TOL);
            let den = adaptive_quad(&|q| branch(q, &|_| 1.0), -pi, pi, VOL_TOL);
            Ok((
                scale * num.value,
                scale * den.value,
                num.n_evals + den.n_evals,
            ))
        }
    }
}

/// Microcanonical average of `f` over the shell `E <= H <= E + eps` by
/// rejection sampling; converges to the surface average as `eps -> 0` with
/// `O(eps)` bias.
pub fn ensemble_average_mc_shell<F>(
    model: &dyn HamiltonianModel,
    f: F,
    e: f64,
    cfg: &McConfig,
) -> Result<ShellAverage>
where
    F: Fn(&PhaseState) -> f64 + Sync,
{
    cfg.validate()?;
    let eps = cfg.effective_shell(model, e);
    let e_top = e + eps;
    if e_top <= model.e_min() {
        return Err(Error::EmptyShell { e, e_top });
    }
    let (bbox, _) = checked_box(model, e_top)?;
    let sums = mc_pass(
        model,
        &bbox,
        cfg.n_samples,
        cfg.seed,
        STREAM_SHELL,
        3,
        |q, p, h, acc| {
            if e <= h && h <= e_top {
                acc[0] += 1.0;
                let x = PhaseState::new(q.to_vec(), p.to_vec()).expect("sampled state is finite");
                let v = f(&x);
                acc[1] += v;
                acc[2] += v * v;
            }
        },
    );
    let count = sums[0];
    if count == 0.0 {
        return Err(Error::EmptyShell { e, e_top });
    }
    let mean = sums[1] / count;
    let se = if count > 1.0 {
        let var = ((sums[2] - sums[1] * sums[1] / count) / (count - 1.0)).max(0.0);
        (var / count).sqrt()
    } else {
        0.0
    };
    Ok(ShellAverage {
        estimate: Estimate::new(mean, se, Method::McShell, count as u64).with_seed(cfg.seed),
        thickness: eps,
    })
}

/// One row of a volume curve. Guard-band energies keep the Monte Carlo
/// volume but flag the derivative-based columns.
#[derive(Debug, Clone)]
pub struct VolumeRow {
    pub e: f64,
    pub vol_me: Estimate,
    pub vol_sigma: Option<Estimate>,
    pub kt: Option<Estimate>,
    pub warning: Option<String>,
}

/// Volume curve over an energy grid.
#[derive(Debug, Clone)]
pub struct VolumeCurve {
    pub rows: Vec<VolumeRow>,
}

/// Tabulate `Vol(M_E)` (Monte Carlo), `Vol(Sigma_E)` and `kT` over a grid.
/// Energies are processed independently and may run in parallel; the output
/// order always follows the input grid.
pub fn volume_curve(
    model: &dyn HamiltonianModel,
    energies: &[f64],
    cfg: &McConfig,
) -> Result<VolumeCurve> {
    use rayon::prelude::*;
    cfg.validate()?;
    if energies.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let rows: Vec<Result<VolumeRow>> = energies
        .par_iter()
        .map(|&e| -> Result<VolumeRow> {
            let vol_me = vol_me_mc(model, e, cfg)?;
            let (vol_sigma, kt, warning) =
                match (vol_sigma(model, e, cfg), temperature_kt(model, e, cfg)) {
                    (Ok(s), Ok(t)) => (Some(s), Some(t), None),
                    (s, t) => {
                        let err = s.err().or(t.err()).expect("one side failed");
                        (None, None, Some(err.to_string()))
                    }
                };
            Ok(VolumeRow {
                e,
                vol_me,
                vol_sigma,
                kt,
                warning,
            })
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(VolumeCurve { rows })
}

/// Whether `e` falls inside the guard band of any critical energy.
pub fn in_guard_band(model: &dyn HamiltonianModel, e: f64) -> bool {
    model.guard_band_violation(e).is_some()
}

/// Guard-band half width around a critical energy.
pub fn guard_half_width(critical: f64) -> f64 {
    GUARD_REL * critical.abs().max(1.0)
}
