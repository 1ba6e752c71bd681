//! Harmonic oscillators in one or more dimensions.

use super::{
    reject_unknown_params, BoundingBox, Component, CriticalKind, CriticalValue, HamiltonianModel,
    OneDof, PhaseState, Topology,
};
use crate::error::{Error, Result};
use std::collections::BTreeMap;

/// `H = sum_i (p_i^2 + omega_i^2 q_i^2) / 2` with unit masses.
#[derive(Debug, Clone)]
pub struct HarmonicOscillator {
    name: String,
    omegas: Vec<f64>,
    topology: Vec<Topology>,
}

impl HarmonicOscillator {
    pub fn new(name: impl Into<String>, omegas: Vec<f64>) -> Result<Self> {
        let name = name.into();
        if omegas.is_empty() {
            return Err(Error::InvalidArgument(
                "harmonic oscillator needs at least one frequency".to_string(),
            ));
        }
        for (i, &w) in omegas.iter().enumerate() {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidParameter {
                    model: name,
                    key: format!("omega{}", i + 1),
                    value: w,
                    reason: "must be finite and positive".to_string(),
                });
            }
        }
        let topology = vec![Topology::Line; omegas.len()];
        Ok(HarmonicOscillator {
            name,
            omegas,
            topology,
        })
    }

    pub fn ho1d(omega: f64) -> Result<Self> {
        HarmonicOscillator::new("ho1d", vec![omega])
    }

    pub fn ho2d(omega1: f64, omega2: f64) -> Result<Self> {
        HarmonicOscillator::new("ho2d", vec![omega1, omega2])
    }

    pub fn ho1d_from_params(params: &BTreeMap<String, f64>) -> Result<Self> {
        let mut params = params.clone();
        let omega = params.remove("omega").unwrap_or(1.0);
        reject_unknown_params("ho1d", &params)?;
        HarmonicOscillator::ho1d(omega)
    }

    pub fn ho2d_from_params(params: &BTreeMap<String, f64>) -> Result<Self> {
        let mut params = params.clone();
        let omega1 = params.remove("omega1").unwrap_or(1.0);
        let omega2 = params.remove("omega2").unwrap_or(1.0);
        reject_unknown_params("ho2d", &params)?;
        HarmonicOscillator::ho2d(omega1, omega2)
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }
}

impl HamiltonianModel for HarmonicOscillator {
    fn name(&self) -> &str {
        &self.name
    }

    fn dof(&self) -> usize {
        self.omegas.len()
    }

    fn params(&self) -> Vec<(&'static str, f64)> {
        match self.omegas.len() {
            1 => vec![("omega", self.omegas[0])],
            2 => vec![("omega1", self.omegas[0]), ("omega2", self.omegas[1])],
            _ => Vec::new(),
        }
    }

    fn topology(&self) -> &[Topology] {
        &self.topology
    }

    fn energy_raw(&self, q: &[f64], p: &[f64]) -> f64 {
        let mut h = 0.0;
        for i in 0..self.omegas.len() {
            let wq = self.omegas[i] * q[i];
            h += 0.5 * (p[i] * p[i] + wq * wq);
        }
        h
    }

    fn grad_raw(&self, q: &[f64], p: &[f64], dq: &mut [f64], dp: &mut [f64]) {
        for i in 0..self.omegas.len() {
            dq[i] = self.omegas[i] * self.omegas[i] * q[i];
            dp[i] = p[i];
        }
    }

    fn e_min(&self) -> f64 {
        0.0
    }

    fn ground_state(&self) -> PhaseState {
        let n = self.dof();
        PhaseState::new(vec![0.0; n], vec![0.0; n]).expect("zeros")
    }

    fn critical_energies(&self) -> Vec<CriticalValue> {
        vec![CriticalValue {
            energy: 0.0,
            kind: CriticalKind::Minimum,
        }]
    }

    fn bounding_box(&self, e: f64) -> Result<BoundingBox> {
        let e = e.max(0.0);
        let p_max = (2.0 * e).sqrt();
        let lo: Vec<f64> = self
            .omegas
            .iter()
            .map(|w| -p_max / w)
            .chain(self.omegas.iter().map(|_| -p_max))
            .collect();
        let hi: Vec<f64> = lo.iter().map(|v| -v).collect();
        Ok(BoundingBox { lo, hi })
    }

    fn list_components(&self, e: f64) -> Result<Vec<Component>> {
        self.require_regular(e)?;
        if e < 0.0 {
            return Err(Error::BelowGroundState { e, e_min: 0.0 });
        }
        Ok(vec![Component::Oscillation])
    }

    fn initial_state_on_shell(&self, e: f64, component: Component) -> Result<PhaseState> {
        if e < 0.0 {
            return Err(Error::BelowGroundState { e, e_min: 0.0 });
        }
        if component != Component::Oscillation {
            return Err(Error::ComponentUnavailable {
                component: component.to_string(),
                e,
            });
        }
        let n = self.dof();
        let mut p = vec![0.0; n];
        p[0] = (2.0 * e).sqrt();
        PhaseState::new(vec![0.0; n], p)
    }

    fn seam_min_energy(&self, _coord: usize) -> Option<f64> {
        None
    }

    fn one_dof(&self) -> Option<&dyn OneDof> {
        (self.dof() == 1).then_some(self as &dyn OneDof)
    }
}

impl OneDof for HarmonicOscillator {
    fn inertia(&self) -> f64 {
        1.0
    }

    fn potential(&self, q: f64) -> f64 {
        let wq = self.omegas[0] * q;
        0.5 * wq * wq
    }

    fn dpotential(&self, q: f64) -> f64 {
        self.omegas[0] * self.omegas[0] * q
    }

    fn turning_point(&self, e: f64) -> Result<f64> {
        if e <= 0.0 {
            return Err(Error::ComponentUnavailable {
                component: Component::Oscillation.to_string(),
                e,
            });
        }
        Ok((2.0 * e).sqrt() / self.omegas[0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kinetic_only_state() {
        let m = HarmonicOscillator::ho1d(1.0).unwrap();
        let h = m
            .energy(&PhaseState::one_dof(0.0, std::f64::consts::SQRT_2))
            .unwrap();
        assert!((h - 1.0).abs() < 1e-15);
    }

    #[test]
    fn shell_state_is_exact() {
        let m = HarmonicOscillator::ho1d(1.0).unwrap();
        let x = m
            .initial_state_on_shell(2.0, Component::Oscillation)
            .unwrap();
        assert_eq!(x.p()[0], 2.0);
        assert_eq!(m.energy(&x).unwrap(), 2.0);
    }

    #[test]
    fn single_component_at_positive_energy() {
        let m = HarmonicOscillator::ho1d(1.0).unwrap();
        assert_eq!(
            m.list_components(2.0).unwrap(),
            vec![Component::Oscillation]
        );
        assert!(m
            .initial_state_on_shell(2.0, Component::RotationPos)
            .is_err());
    }

    #[test]
    fn two_dof_energy_and_box() {
        let m = HarmonicOscillator::ho2d(1.0, 2.0).unwrap();
        let x = PhaseState::new(vec![1.0, 0.5], vec![0.0, 0.0]).unwrap();
        assert!((m.energy(&x).unwrap() - (0.5 + 0.5)).abs() < 1e-15);
        let b = m.bounding_box(2.0).unwrap();
        assert_eq!(b.dim(), 4);
        assert!((b.hi[0] - 2.0).abs() < 1e-15); // sqrt(2E)/omega1
        assert!((b.hi[1] - 1.0).abs() < 1e-15); // sqrt(2E)/omega2
        assert!((b.hi[2] - 2.0).abs() < 1e-15); // sqrt(2E)
        assert!(m.one_dof().is_none());
    }

    #[test]
    fn rejects_nonpositive_frequency() {
        assert!(HarmonicOscillator::ho2d(1.0, 0.0).is_err());
        assert!(HarmonicOscillator::ho1d(-1.0).is_err());
    }
}
