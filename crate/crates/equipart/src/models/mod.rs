//! Hamiltonian models: energies, gradients, phase-space topology and the
//! registry that resolves them by name.
//!
//! Every model lives behind the [`HamiltonianModel`] trait so the rest of
//! the crate (and the CLI) can treat them interchangeably. One-degree-of-
//! freedom separable models additionally expose the [`OneDof`] capability,
//! which unlocks the deterministic quadrature paths.

mod harmonic;
mod pendulum;

pub use harmonic::HarmonicOscillator;
pub use pendulum::Pendulum;

use crate::error::{Error, Result};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

/// Relative half-width of the guard band around critical energies.
/// Orbit-based operations reject energies with
/// `|E - E_crit| < GUARD_REL * max(1, |E_crit|)`; the orbit period diverges
/// logarithmically at a separatrix. Monte Carlo volume operations still
/// accept such energies.
pub const GUARD_REL: f64 = 1e-3;

/// A point `(q, p)` in 2n-dimensional phase space.
///
/// Angular coordinates are kept wrapped to `(-pi, pi]`; states produced by
/// model operations and the integrator maintain that convention.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseState {
    q: Vec<f64>,
    p: Vec<f64>,
}

impl PhaseState {
    pub fn new(q: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        if q.len() != p.len() || q.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "q and p must have identical nonzero length, got {} and {}",
                q.len(),
                p.len()
            )));
        }
        if q.iter().chain(p.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState);
        }
        Ok(PhaseState { q, p })
    }

    /// Convenience constructor for one-degree-of-freedom states.
    pub fn one_dof(q: f64, p: f64) -> Self {
        PhaseState::new(vec![q], vec![p]).expect("finite scalars")
    }

    pub fn dof(&self) -> usize {
        self.q.len()
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub(crate) fn split_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        (&mut self.q, &mut self.p)
    }
}

/// Per-coordinate configuration-space topology.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    Line,
    Circle,
}

/// Connected component of an energy level set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    Oscillation,
    RotationPos,
    RotationNeg,
}

impl Component {
    pub fn as_str(self) -> &'static str {
        match self {
            Component::Oscillation => "oscillation",
            Component::RotationPos => "rotation_pos",
            Component::RotationNeg => "rotation_neg",
        }
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Component {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "oscillation" => Ok(Component::Oscillation),
            "rotation_pos" => Ok(Component::RotationPos),
            "rotation_neg" => Ok(Component::RotationNeg),
            other => Err(Error::UnknownComponent(other.to_string())),
        }
    }
}

/// Classification of a critical value of the Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriticalKind {
    Minimum,
    Separatrix,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalValue {
    pub energy: f64,
    pub kind: CriticalKind,
}

/// Axis-aligned box `[lo_i, hi_i]` over the coordinates `(q_1..q_n, p_1..p_n)`,
/// guaranteed to contain `M_E = {H <= E}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundingBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoundingBox {
    pub fn volume(&self) -> f64 {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(lo, hi)| hi - lo)
            .product()
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, q: &[f64], p: &[f64]) -> bool {
        let coords = q.iter().chain(p.iter());
        coords
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(&x, (&lo, &hi))| x >= lo && x <= hi)
    }
}

/// Wrap an angle to the representative in `(-pi, pi]`.
pub fn wrap_angle(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(2.0 * PI);
    if y == 0.0 {
        PI
    } else {
        y - PI
    }
}

/// An autonomous Hamiltonian system `H: T*Q -> R`.
///
/// The `*_raw` methods are the unchecked slice-level primitives used in hot
/// loops; the checked wrappers validate state dimensions first. Models are
/// immutable after construction and all methods are pure, so a model can be
/// shared freely across worker threads.
pub trait HamiltonianModel: Send + Sync {
    fn name(&self) -> &str;

    /// Degrees of freedom `n` (phase space has dimension `2n`).
    fn dof(&self) -> usize;

    /// Named parameters, in a fixed order, for reproducibility headers.
    fn params(&self) -> Vec<(&'static str, f64)>;

    /// Topology of each configuration coordinate.
    fn topology(&self) -> &[Topology];

    /// `H(q, p)` without dimension checks; `q.len() == p.len() == n`.
    fn energy_raw(&self, q: &[f64], p: &[f64]) -> f64;

    /// Analytic partial derivatives into caller buffers.
    fn grad_raw(&self, q: &[f64], p: &[f64], dq: &mut [f64], dp: &mut [f64]);

    /// Ground-state energy.
    fn e_min(&self) -> f64;

    /// A state attaining [`Self::e_min`].
    fn ground_state(&self) -> PhaseState;

    /// All critical values, including the minimum.
    fn critical_energies(&self) -> Vec<CriticalValue>;

    /// A rectangular region guaranteed to contain `M_E`.
    fn bounding_box(&self, e: f64) -> Result<BoundingBox>;

    /// Connected components of the level set at a regular energy.
    fn list_components(&self, e: f64) -> Result<Vec<Component>>;

    /// A state with `H = E` on the requested component.
    fn initial_state_on_shell(&self, e: f64, component: Component) -> Result<PhaseState>;

    /// Whether `H = T(p) + V(q)`; required by the leapfrog stepper.
    fn separable(&self) -> bool {
        true
    }

    /// Minimum of `H` on the seam `{q_coord = pi}` of an angular coordinate,
    /// if that coordinate is a circle. Used to decide whether a field
    /// discontinuous at the seam is smooth on `M_E`.
    fn seam_min_energy(&self, coord: usize) -> Option<f64>;

    /// One-degree-of-freedom capability, when `n = 1` and `H = p^2/2k + V(q)`.
    fn one_dof(&self) -> Option<&dyn OneDof>;

    /// Checked energy evaluation.
    fn energy(&self, x: &PhaseState) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.energy_raw(x.q(), x.p()))
    }

    /// Checked analytic gradient `(dH/dq, dH/dp)`.
    fn grad_energy(&self, x: &PhaseState) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check_dim(x)?;
        let mut dq = vec![0.0; self.dof()];
        let mut dp = vec![0.0; self.dof()];
        self.grad_raw(x.q(), x.p(), &mut dq, &mut dp);
        Ok((dq, dp))
    }

    fn check_dim(&self, x: &PhaseState) -> Result<()> {
        if x.dof() != self.dof() {
            return Err(Error::DimensionMismatch {
                model: self.name().to_string(),
                expected: self.dof(),
                actual: x.dof(),
            });
        }
        Ok(())
    }

    /// Wrap angular coordinates of `q` in place.
    fn wrap_q(&self, q: &mut [f64]) {
        for (qi, topo) in q.iter_mut().zip(self.topology()) {
            if *topo == Topology::Circle {
                *qi = wrap_angle(*qi);
            }
        }
    }

    /// The critical value whose guard band contains `e`, if any.
    fn guard_band_violation(&self, e: f64) -> Option<CriticalValue> {
        self.critical_energies()
            .into_iter()
            .find(|c| (e - c.energy).abs() < GUARD_REL * c.energy.abs().max(1.0))
    }

    /// Error unless `e` is a regular energy outside every guard band.
    fn require_regular(&self, e: f64) -> Result<()> {
        if let Some(c) = self.guard_band_violation(e) {
            return Err(Error::GuardBand {
                e,
                critical: c.energy,
            });
        }
        Ok(())
    }
}

/// Capability of separable one-degree-of-freedom models,
/// `H = p^2 / (2k) + V(q)` with an even potential minimized at `q = 0`.
pub trait OneDof: HamiltonianModel {
    /// Inertia `k` in `H = p^2/(2k) + V(q)`.
    fn inertia(&self) -> f64;

    /// Potential `V(q)`.
    fn potential(&self, q: f64) -> f64;

    /// `dV/dq`.
    fn dpotential(&self, q: f64) -> f64;

    /// Positive turning point of the oscillation component, `V(q_max) = E`.
    fn turning_point(&self, e: f64) -> Result<f64>;

    /// Positive momentum branch `p_+(q) = sqrt(2k (E - V(q)))`, clamped at 0.
    fn momentum_branch(&self, e: f64, q: f64) -> f64 {
        (2.0 * self.inertia() * (e - self.potential(q))).max(0.0).sqrt()
    }

    /// Whether the configuration coordinate is an angle.
    fn is_circle(&self) -> bool {
        self.topology()[0] == Topology::Circle
    }
}

type BuildFn = fn(&BTreeMap<String, f64>) -> Result<Arc<dyn HamiltonianModel>>;

/// Registry entry: a model family constructible by name.
pub struct ModelEntry {
    pub name: &'static str,
    pub summary: &'static str,
    build: BuildFn,
}

/// Built-in model families, selectable by name with parameter overrides.
pub fn registry() -> &'static [ModelEntry] {
    &[
        ModelEntry {
            name: "pendulum",
            summary: "planar pendulum on a cylinder (params: m, length, g)",
            build: |params| Ok(Arc::new(Pendulum::from_params(params)?)),
        },
        ModelEntry {
            name: "ho1d",
            summary: "1-D harmonic oscillator (param: omega)",
            build: |params| Ok(Arc::new(HarmonicOscillator::ho1d_from_params(params)?)),
        },
        ModelEntry {
            name: "ho2d",
            summary: "2-D harmonic oscillator (params: omega1, omega2)",
            build: |params| Ok(Arc::new(HarmonicOscillator::ho2d_from_params(params)?)),
        },
    ]
}

/// Names of all registered models.
pub fn available_models() -> Vec<&'static str> {
    registry().iter().map(|e| e.name).collect()
}

/// Build a model by registry name with parameter overrides.
pub fn build_model(
    name: &str,
    params: &BTreeMap<String, f64>,
) -> Result<Arc<dyn HamiltonianModel>> {
    for entry in registry() {
        if entry.name == name {
            return (entry.build)(params);
        }
    }
    Err(Error::UnknownModel {
        name: name.to_string(),
        available: available_models().join(", "),
    })
}

pub(crate) fn reject_unknown_params(model: &str, params: &BTreeMap<String, f64>) -> Result<()> {
    if let Some(key) = params.keys().next() {
        return Err(Error::UnknownParameter {
            model: model.to_string(),
            key: key.clone(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn wrap_angle_lands_in_half_open_interval() {
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
        assert!((wrap_angle(1.5 * PI) + 0.5 * PI).abs() < 1e-15);
        assert!((wrap_angle(-2.5 * PI) + 0.5 * PI).abs() < 1e-15);
        assert_eq!(wrap_angle(0.0), 0.0);
        for k in -7..=7 {
            let x = 0.9 + 2.0 * PI * k as f64;
            let w = wrap_angle(x);
            assert!(w > -PI && w <= PI);
            assert!((w - 0.9).abs() < 1e-12, "k={k} w={w}");
        }
    }

    #[test]
    fn phase_state_rejects_bad_input() {
        assert!(PhaseState::new(vec![0.0], vec![1.0, 2.0]).is_err());
        assert!(PhaseState::new(vec![], vec![]).is_err());
        assert!(PhaseState::new(vec![f64::NAN], vec![0.0]).is_err());
    }

    #[test]
    fn registry_resolves_all_names() {
        for entry in registry() {
            let model = build_model(entry.name, &BTreeMap::new()).unwrap();
            assert_eq!(model.name(), entry.name);
        }
        assert!(matches!(
            build_model("nope", &BTreeMap::new()),
            Err(Error::UnknownModel { .. })
        ));
    }

    #[test]
    fn unknown_parameter_is_rejected() {
        let mut params = BTreeMap::new();
        params.insert("gg".to_string(), 1.0);
        assert!(matches!(
            build_model("pendulum", &params),
            Err(Error::UnknownParameter { .. })
        ));
    }

    #[test]
    fn bounding_box_volume_and_membership() {
        let b = BoundingBox {
            lo: vec![-1.0, -2.0],
            hi: vec![1.0, 2.0],
        };
        assert!((b.volume() - 8.0).abs() < 1e-15);
        assert!(b.contains(&[0.5], &[-1.5]));
        assert!(!b.contains(&[1.5], &[0.0]));
    }

    #[test]
    fn ground_states_attain_the_minimum_energy() {
        for entry in registry() {
            let model = build_model(entry.name, &BTreeMap::new()).unwrap();
            let h = model.energy(&model.ground_state()).unwrap();
            assert_eq!(h, model.e_min(), "{}", entry.name);
        }
    }

    // No state with H <= E may fall outside bounding_box(E): rejection
    // sampling in a box twice as large must accept only contained points.
    #[test]
    fn bounding_boxes_cover_the_sublevel_sets() {
        let mut s = 0xD1B54A32D192ED03u64;
        let mut rng = move || {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64
        };
        for entry in registry() {
            let model = build_model(entry.name, &BTreeMap::new()).unwrap();
            for e in [1.0, 12.0] {
                let inner = model.bounding_box(e).unwrap();
                let n = model.dof();
                for _ in 0..5000 {
                    let mut sample: Vec<f64> = (0..2 * n)
                        .map(|i| {
                            let width = inner.hi[i] - inner.lo[i];
                            inner.lo[i] - 0.5 * width + 2.0 * width * rng()
                        })
                        .collect();
                    let (q, p) = sample.split_at_mut(n);
                    model.wrap_q(q);
                    if model.energy_raw(q, p) <= e {
                        assert!(
                            inner.contains(q, p),
                            "{} at E={e}: state {q:?} {p:?} escapes the box",
                            entry.name
                        );
                    }
                }
            }
        }
    }
}
