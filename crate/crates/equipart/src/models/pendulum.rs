//! Planar pendulum on a cylindrical phase space.

use super::{
    reject_unknown_params, BoundingBox, Component, CriticalKind, CriticalValue,
    HamiltonianModel, OneDof, PhaseState, Topology,
};
use crate::error::{Error, Result};
use std::collections::BTreeMap;

/// Pendulum with `H = p^2 / (2 m l^2) - m g l cos(q)`, `q in (-pi, pi]`.
///
/// At the defaults (`m = 1`, `length = 1`, `g = 9.81`) this is
/// `H = p^2/2 - g cos(q)` with energies in joules. The minimum is
/// `-m g l` at `(0, 0)`; the separatrix sits at `+m g l`.
#[derive(Debug, Clone)]
pub struct Pendulum {
    mass: f64,
    length: f64,
    gravity: f64,
    /// Inertia `k = m l^2`.
    inertia: f64,
    /// Potential amplitude `u = m g l`.
    amplitude: f64,
    topology: [Topology; 1],
}

impl Default for Pendulum {
    fn default() -> Self {
        Pendulum::new(1.0, 1.0, 9.81).expect("default parameters are valid")
    }
}

impl Pendulum {
    pub fn new(mass: f64, length: f64, gravity: f64) -> Result<Self> {
        for (key, value) in [("m", mass), ("length", length), ("g", gravity)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParameter {
                    model: "pendulum".to_string(),
                    key: key.to_string(),
                    value,
                    reason: "must be finite and positive".to_string(),
                });
            }
        }
        Ok(Pendulum {
            mass,
            length,
            gravity,
            inertia: mass * length * length,
            amplitude: mass * gravity * length,
            topology: [Topology::Circle],
        })
    }

    pub fn from_params(params: &BTreeMap<String, f64>) -> Result<Self> {
        let mut params = params.clone();
        let mass = params.remove("m").unwrap_or(1.0);
        let length = params.remove("length").unwrap_or(1.0);
        let gravity = params.remove("g").unwrap_or(9.81);
        reject_unknown_params("pendulum", &params)?;
        Pendulum::new(mass, length, gravity)
    }

    /// Separatrix energy `m g l`.
    pub fn separatrix_energy(&self) -> f64 {
        self.amplitude
    }

    /// Maximum momentum on `M_E`, attained at `q = 0`.
    fn p_max(&self, e: f64) -> f64 {
        (2.0 * self.inertia * (e + self.amplitude)).max(0.0).sqrt()
    }
}

impl HamiltonianModel for Pendulum {
    fn name(&self) -> &str {
        "pendulum"
    }

    fn dof(&self) -> usize {
        1
    }

    fn params(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("m", self.mass),
            ("length", self.length),
            ("g", self.gravity),
        ]
    }

    fn topology(&self) -> &[Topology] {
        &self.topology
    }

    fn energy_raw(&self, q: &[f64], p: &[f64]) -> f64 {
        p[0] * p[0] / (2.0 * self.inertia) - self.amplitude * q[0].cos()
    }

    fn grad_raw(&self, q: &[f64], p: &[f64], dq: &mut [f64], dp: &mut [f64]) {
        dq[0] = self.amplitude * q[0].sin();
        dp[0] = p[0] / self.inertia;
    }

    fn e_min(&self) -> f64 {
        -self.amplitude
    }

    fn ground_state(&self) -> PhaseState {
        PhaseState::one_dof(0.0, 0.0)
    }

    fn critical_energies(&self) -> Vec<CriticalValue> {
        vec![
            CriticalValue {
                energy: -self.amplitude,
                kind: CriticalKind::Minimum,
            },
            CriticalValue {
                energy: self.amplitude,
                kind: CriticalKind::Separatrix,
            },
        ]
    }

    fn bounding_box(&self, e: f64) -> Result<BoundingBox> {
        use std::f64::consts::PI;
        let p_max = self.p_max(e);
        Ok(BoundingBox {
            lo: vec![-PI, -p_max],
            hi: vec![PI, p_max],
        })
    }

    fn list_components(&self, e: f64) -> Result<Vec<Component>> {
        self.require_regular(e)?;
        if e < self.e_min() {
            return Err(Error::BelowGroundState {
                e,
                e_min: self.e_min(),
            });
        }
        if e < self.amplitude {
            Ok(vec![Component::Oscillation])
        } else {
            Ok(vec![Component::RotationPos, Component::RotationNeg])
        }
    }

    fn initial_state_on_shell(&self, e: f64, component: Component) -> Result<PhaseState> {
        if e < self.e_min() {
            return Err(Error::BelowGroundState {
                e,
                e_min: self.e_min(),
            });
        }
        let available = match component {
            Component::Oscillation => e < self.amplitude,
            Component::RotationPos | Component::RotationNeg => e >= self.amplitude,
        };
        if !available {
            return Err(Error::ComponentUnavailable {
                component: component.to_string(),
                e,
            });
        }
        // Reference point of every orbit: q = 0 at maximum momentum.
        let p = match component {
            Component::Oscillation | Component::RotationPos => self.p_max(e),
            Component::RotationNeg => -self.p_max(e),
        };
        Ok(PhaseState::one_dof(0.0, p))
    }

    fn seam_min_energy(&self, coord: usize) -> Option<f64> {
        // H(pi, p) is minimized at p = 0, where it equals the amplitude.
        (coord == 0).then_some(self.amplitude)
    }

    fn one_dof(&self) -> Option<&dyn OneDof> {
        Some(self)
    }
}

impl OneDof for Pendulum {
    fn inertia(&self) -> f64 {
        self.inertia
    }

    fn potential(&self, q: f64) -> f64 {
        -self.amplitude * q.cos()
    }

    fn dpotential(&self, q: f64) -> f64 {
        self.amplitude * q.sin()
    }

    fn turning_point(&self, e: f64) -> Result<f64> {
        if !(self.e_min() < e && e < self.amplitude) {
            return Err(Error::ComponentUnavailable {
                component: Component::Oscillation.to_string(),
                e,
            });
        }
        Ok((-e / self.amplitude).clamp(-1.0, 1.0).acos())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const G: f64 = 9.81;

    #[test]
    fn energy_at_reference_points() {
        let m = Pendulum::default();
        let bottom = m.energy(&PhaseState::one_dof(0.0, 0.0)).unwrap();
        assert_eq!(bottom, -G);
        let top = m.energy(&PhaseState::one_dof(PI, 0.0)).unwrap();
        assert_eq!(top, G);
    }

    #[test]
    fn gradient_closed_form() {
        let m = Pendulum::default();
        let (dq, dp) = m.grad_energy(&PhaseState::one_dof(0.0, 3.0)).unwrap();
        assert_eq!(dq[0], 0.0);
        assert_eq!(dp[0], 3.0);
        let (dq, dp) = m.grad_energy(&PhaseState::one_dof(PI / 2.0, 2.0)).unwrap();
        assert!((dq[0] - G).abs() < 1e-12);
        assert!((dp[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let m = Pendulum::default();
        let x = PhaseState::new(vec![0.0, 0.0], vec![0.0, 0.0]).unwrap();
        assert!(m.energy(&x).is_err());
        assert!(m.grad_energy(&x).is_err());
    }

    #[test]
    fn shell_states_hit_the_energy_exactly() {
        let m = Pendulum::default();
        // Ground state.
        let x = m
            .initial_state_on_shell(-G, Component::Oscillation)
            .unwrap();
        assert_eq!(x, PhaseState::one_dof(0.0, 0.0));
        // Rotation at the quoted reference value.
        let x = m.initial_state_on_shell(G, Component::RotationPos).unwrap();
        assert!((x.p()[0] - (4.0 * G).sqrt()).abs() < 1e-12);
        assert!((x.p()[0] - 6.2642).abs() < 1e-4);
        // On-shell accuracy across the energy range.
        for e in [-9.0, -5.0, 0.0, 5.0, 9.0] {
            let x = m.initial_state_on_shell(e, Component::Oscillation).unwrap();
            let h = m.energy(&x).unwrap();
            assert!((h - e).abs() <= 1e-12 * e.abs().max(1.0), "e={e} h={h}");
        }
        for e in [G, 10.5, 20.0, 200.0] {
            for c in [Component::RotationPos, Component::RotationNeg] {
                let x = m.initial_state_on_shell(e, c).unwrap();
                let h = m.energy(&x).unwrap();
                assert!((h - e).abs() <= 1e-12 * e.abs().max(1.0));
            }
        }
    }

    #[test]
    fn component_availability() {
        let m = Pendulum::default();
        assert_eq!(
            m.list_components(0.0).unwrap(),
            vec![Component::Oscillation]
        );
        assert_eq!(
            m.list_components(20.0).unwrap(),
            vec![Component::RotationPos, Component::RotationNeg]
        );
        assert!(matches!(
            m.list_components(G),
            Err(Error::GuardBand { .. })
        ));
        assert!(m.list_components(-10.0).is_err());
        assert!(m
            .initial_state_on_shell(20.0, Component::Oscillation)
            .is_err());
        assert!(m
            .initial_state_on_shell(0.0, Component::RotationPos)
            .is_err());
    }

    #[test]
    fn critical_values_are_the_two_expected() {
        let m = Pendulum::default();
        let crits = m.critical_energies();
        assert_eq!(crits.len(), 2);
        assert_eq!(crits[0].energy, -G);
        assert_eq!(crits[0].kind, CriticalKind::Minimum);
        assert_eq!(crits[1].energy, G);
        assert_eq!(crits[1].kind, CriticalKind::Separatrix);
    }

    #[test]
    fn bounding_box_momentum_limit_is_exact() {
        let m = Pendulum::default();
        let b = m.bounding_box(0.0).unwrap();
        assert_eq!(b.lo[0], -PI);
        assert_eq!(b.hi[0], PI);
        assert!((b.hi[1] - (2.0 * G).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn non_default_parameters_rescale_the_critical_energies() {
        let m = Pendulum::new(2.0, 0.5, 9.81).unwrap();
        let u = 2.0 * 9.81 * 0.5;
        assert_eq!(m.e_min(), -u);
        assert_eq!(m.separatrix_energy(), u);
        let k = 2.0 * 0.25;
        let x = PhaseState::one_dof(0.0, 1.0);
        assert!((m.energy(&x).unwrap() - (1.0 / (2.0 * k) - u)).abs() < 1e-12);
    }

    #[test]
    fn turning_point_matches_potential() {
        let m = Pendulum::default();
        for e in [-9.0, -5.0, 0.0, 5.0, 9.5] {
            let qmax = m.turning_point(e).unwrap();
            assert!((m.potential(qmax) - e).abs() < 1e-10);
        }
        assert!(m.turning_point(10.0).is_err());
        assert!(m.turning_point(-9.81).is_err());
    }
}
