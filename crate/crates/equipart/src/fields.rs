//! Phase-space vector fields, their divergences and the derived
//! function `X(H)`.
//!
//! Fields share the [`VectorField`] trait and are addressable by CLI token
//! (`f11`, `f12`, `f21`, `f22`, `pcubed`). Components are ordered with the
//! `n` configuration directions first, then the `n` momentum directions.
//! A field multiplying a wrapped angle uses the representative in
//! `(-pi, pi]`, which is what makes the seam discontinuity observable.

use crate::error::{Error, Result};
use crate::models::{HamiltonianModel, PhaseState, Topology};

/// Where a field fails to be continuous.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiscontinuityLocus {
    None,
    /// The seam `q_coord = +-pi` of an angular coordinate.
    AngularSeam { coord: usize },
}

/// A vector field on the 2n-dimensional phase space.
pub trait VectorField: Send + Sync {
    fn name(&self) -> &str;

    /// Phase-space dimension `2n`.
    fn dim(&self) -> usize;

    /// Component functions `X^mu(x)`, configuration directions first.
    fn components(&self, x: &PhaseState) -> Vec<f64>;

    /// Analytic divergence `sum_mu dX^mu/dx^mu`.
    fn divergence(&self, x: &PhaseState) -> f64;

    /// The divergence when it is constant (coordinate fields).
    fn constant_divergence(&self) -> Option<f64> {
        None
    }

    fn discontinuity_locus(&self) -> DiscontinuityLocus {
        DiscontinuityLocus::None
    }

    /// `X(H) = sum_mu X^mu dH/dx^mu` at `x`.
    fn derive_along(&self, model: &dyn HamiltonianModel, x: &PhaseState) -> Result<f64> {
        let (dq, dp) = model.grad_energy(x)?;
        let comps = self.components(x);
        let n = model.dof();
        let mut sum = 0.0;
        for lambda in 0..n {
            sum += comps[lambda] * dq[lambda];
        }
        for lambda in 0..n {
            sum += comps[n + lambda] * dp[lambda];
        }
        Ok(sum)
    }
}

/// Derivative of `H` along `X`; the `f_ij` functions arise this way from
/// coordinate fields.
pub fn derive_along(
    field: &dyn VectorField,
    model: &dyn HamiltonianModel,
    x: &PhaseState,
) -> Result<f64> {
    field.derive_along(model, x)
}

/// Index pair of the field `x^i d/dx^j`, with `0 <= i, j < 2n` and
/// coordinates ordered `(q_1..q_n, p_1..p_n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoordinateFieldIndex {
    pub i: usize,
    pub j: usize,
}

/// The field `x^i d/dx^j` in canonical coordinates; divergence is the
/// Kronecker delta.
#[derive(Debug, Clone)]
pub struct CoordinateField {
    name: String,
    dim: usize,
    idx: CoordinateFieldIndex,
    locus: DiscontinuityLocus,
}

impl CoordinateField {
    pub fn index(&self) -> CoordinateFieldIndex {
        self.idx
    }
}

fn coordinate_value(x: &PhaseState, idx: usize) -> f64 {
    let n = x.dof();
    if idx < n {
        x.q()[idx]
    } else {
        x.p()[idx - n]
    }
}

/// Build `x^i d/dx^j` for a given model.
///
/// When the multiplier `x^i` is an angular coordinate the field carries an
/// `AngularSeam` locus: the wrapped representative jumps by `2 pi` across
/// `q_i = +-pi`, whatever the direction `j`. Momentum multipliers are
/// globally smooth.
pub fn coordinate_field(
    model: &dyn HamiltonianModel,
    idx: CoordinateFieldIndex,
) -> Result<CoordinateField> {
    let n = model.dof();
    let dim = 2 * n;
    for index in [idx.i, idx.j] {
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, dim });
        }
    }
    let locus = if idx.i < n && model.topology()[idx.i] == Topology::Circle {
        DiscontinuityLocus::AngularSeam { coord: idx.i }
    } else {
        DiscontinuityLocus::None
    };
    Ok(CoordinateField {
        name: format!("f{}{}", idx.i + 1, idx.j + 1),
        dim,
        idx,
        locus,
    })
}

impl VectorField for CoordinateField {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn components(&self, x: &PhaseState) -> Vec<f64> {
        let mut comps = vec![0.0; self.dim];
        comps[self.idx.j] = coordinate_value(x, self.idx.i);
        comps
    }

    fn divergence(&self, _x: &PhaseState) -> f64 {
        if self.idx.i == self.idx.j {
            1.0
        } else {
            0.0
        }
    }

    fn constant_divergence(&self) -> Option<f64> {
        Some(if self.idx.i == self.idx.j { 1.0 } else { 0.0 })
    }

    fn discontinuity_locus(&self) -> DiscontinuityLocus {
        self.locus
    }

    fn derive_along(&self, model: &dyn HamiltonianModel, x: &PhaseState) -> Result<f64> {
        let (dq, dp) = model.grad_energy(x)?;
        let n = model.dof();
        let grad_j = if self.idx.j < n {
            dq[self.idx.j]
        } else {
            dp[self.idx.j - n]
        };
        Ok(coordinate_value(x, self.idx.i) * grad_j)
    }
}

/// The cubic momentum field `X = (1/3) p^3 sin^2(q) d/dp` on a
/// one-degree-of-freedom phase space. Smooth on the cylinder; its
/// divergence `p^2 sin^2(q)` is nonconstant.
#[derive(Debug, Clone, Copy, Default)]
pub struct PCubedField;

/// Construct the cubic momentum test field.
pub fn custom_pendulum_field() -> PCubedField {
    PCubedField
}

impl VectorField for PCubedField {
    fn name(&self) -> &str {
        "pcubed"
    }

    fn dim(&self) -> usize {
        2
    }

    fn components(&self, x: &PhaseState) -> Vec<f64> {
        let q = x.q()[0];
        let p = x.p()[0];
        let s = q.sin();
        vec![0.0, p * p * p * s * s / 3.0]
    }

    fn divergence(&self, x: &PhaseState) -> f64 {
        let s = x.q()[0].sin();
        x.p()[0] * x.p()[0] * s * s
    }
}

/// A field built from caller-supplied component and divergence closures.
pub struct CustomField<C, D> {
    name: String,
    dim: usize,
    components: C,
    divergence: D,
    locus: DiscontinuityLocus,
}

impl<C, D> CustomField<C, D>
where
    C: Fn(&PhaseState) -> Vec<f64> + Send + Sync,
    D: Fn(&PhaseState) -> f64 + Send + Sync,
{
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        components: C,
        divergence: D,
        locus: DiscontinuityLocus,
    ) -> Self {
        CustomField {
            name: name.into(),
            dim,
            components,
            divergence,
            locus,
        }
    }
}

impl<C, D> VectorField for CustomField<C, D>
where
    C: Fn(&PhaseState) -> Vec<f64> + Send + Sync,
    D: Fn(&PhaseState) -> f64 + Send + Sync,
{
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn components(&self, x: &PhaseState) -> Vec<f64> {
        (self.components)(x)
    }

    fn divergence(&self, x: &PhaseState) -> f64 {
        (self.divergence)(x)
    }

    fn discontinuity_locus(&self) -> DiscontinuityLocus {
        self.locus
    }
}

/// CLI tokens of the built-in fields.
pub fn available_field_tokens() -> &'static [&'static str] {
    &["f11", "f12", "f21", "f22", "pcubed"]
}

/// Resolve a built-in field by token for a one-degree-of-freedom model.
pub fn field_by_token(model: &dyn HamiltonianModel, token: &str) -> Result<Box<dyn VectorField>> {
    let n = model.dof();
    let require_1dof = |token: &str| -> Result<()> {
        if n != 1 {
            return Err(Error::FieldNotApplicable {
                token: token.to_string(),
                model: model.name().to_string(),
                n,
            });
        }
        Ok(())
    };
    let coord = |i, j| -> Result<Box<dyn VectorField>> {
        Ok(Box::new(coordinate_field(
            model,
            CoordinateFieldIndex { i, j },
        )?))
    };
    match token {
        "f11" => {
            require_1dof(token)?;
            coord(0, 0)
        }
        "f12" => {
            require_1dof(token)?;
            coord(0, 1)
        }
        "f21" => {
            require_1dof(token)?;
            coord(1, 0)
        }
        "f22" => {
            require_1dof(token)?;
            coord(1, 1)
        }
        "pcubed" => {
            require_1dof(token)?;
            Ok(Box::new(PCubedField))
        }
        other => Err(Error::UnknownField {
            token: other.to_string(),
            available: available_field_tokens().join(", "),
        }),
    }
}

/// Whether the field is smooth on all of `M_E = {H <= E}`.
///
/// Exact: the seam of an angular coordinate enters `M_E` precisely when `E`
/// reaches the minimum of `H` on the seam, so no sampling is involved.
pub fn smooth_on_me(field: &dyn VectorField, model: &dyn HamiltonianModel, e: f64) -> bool {
    match field.discontinuity_locus() {
        DiscontinuityLocus::None => true,
        DiscontinuityLocus::AngularSeam { coord } => match model.seam_min_energy(coord) {
            Some(h_seam) => e < h_seam,
            None => true,
        },
    }
}
