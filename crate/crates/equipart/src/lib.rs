//! Numerical verification of equipartition laws on Hamiltonian systems.
//!
//! The crate estimates microcanonical averages of phase-space functions in
//! three independent ways (time averages along symplectically integrated
//! orbits, deterministic quadrature for one-degree-of-freedom systems and
//! rejection-sampling Monte Carlo), computes Gibbs temperatures from
//! phase-space volumes, and compares the classical coordinate form of the
//! equipartition law against its coordinate-free formulation
//! `<X(H)> = kT / Vol(M_E) * integral of div(X) over M_E`.
//!
//! Models and fields are strategy objects resolved by name at run time;
//! see [`models::build_model`] and [`fields::field_by_token`].

pub mod dynamics;
pub mod equipartition;
pub mod error;
pub mod estimate;
pub mod fields;
pub mod microcanonical;
pub mod models;
pub mod quad;
pub mod sampling;

pub use error::{Error, Result};
pub use estimate::{Estimate, Method};
pub use models::{Component, HamiltonianModel, PhaseState};
