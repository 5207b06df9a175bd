//! Pointwise geometry of a metric on its cone domain.
//!
//! Conventions, used everywhere in this crate:
//!
//! - `g_ij = ½ ∂²(F²)/∂yⁱ∂yʲ`, so a quadratic `F² = yᵀA y` gives `g = A`
//!   and `g(y, y) = F²`;
//! - `Gⁱ = ¼ gⁱˡ (∂²(F²)/∂yˡ∂xᵏ yᵏ − ∂(F²)/∂xˡ)` and `Nⁱⱼ = ∂Gⁱ/∂yʲ`;
//! - bundle vectors and matrices are written in the natural frame
//!   `(∂/∂x¹…∂/∂xⁿ, ∂/∂y¹…∂/∂yⁿ)`.

use alloc::vec::Vec;

use crate::dsl::MetricDef;
use crate::{Error, Result};

mod connection;
pub mod identities;
mod sasaki;
mod spray;
mod tensor;
pub mod validate;

pub use connection::{
    gamma_block, gamma_via_lie, horizontal_projector, lie_bracket, quasi_tangent, vertical_projector, GammaTensor,
};
pub use identities::{identity_suite, IdentityConfig};
pub use sasaki::{sasaki_from_projectors, sasaki_matrix, SasakiMatrix};
pub use spray::{liouville, spray_coefficients, spray_vector, SprayData};
pub use tensor::{fundamental_tensor, metric_index, FundamentalTensor};
pub use validate::{validate_metric, validate_metric_with, MetricValidation};

pub(crate) use spray::{geodesic_field, spray_jets, SprayJets};
pub(crate) use tensor::classify;

/// A point `(x, y)` of the tangent bundle in one chart.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct BundlePoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl BundlePoint {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        assert_eq!(x.len(), y.len(), "x and y must have the same dimension");
        BundlePoint { x, y }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// `(x, t·y)`.
    pub fn scaled(&self, t: f64) -> BundlePoint {
        BundlePoint {
            x: self.x.clone(),
            y: self.y.iter().map(|v| v * t).collect(),
        }
    }
}

/// Numerical thresholds for the pointwise operations.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Tolerances {
    /// Required lower bound on every cone expression.
    pub cone_margin: f64,
    /// `|det g|` at or below this is a degeneracy error.
    pub degeneracy: f64,
    /// Condition numbers above this are logged as warnings.
    pub condition_warning: f64,
    /// Eigenvalues with `|λ| <= zero_eigenvalue · max|λ|` count as zero.
    pub zero_eigenvalue: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            cone_margin: 1e-6,
            degeneracy: 1e-12,
            condition_warning: 1e12,
            zero_eigenvalue: 1e-8,
        }
    }
}

impl Tolerances {
    pub(crate) fn with_margin(self, cone_margin: f64) -> Self {
        Tolerances { cone_margin, ..self }
    }
}

pub(crate) fn require_cone(m: &MetricDef, p: &BundlePoint, margin: f64) -> Result<()> {
    if p.x.len() != m.dim || p.y.len() != m.dim {
        return Err(Error::InvalidArgument(alloc::format!(
            "point has dimension {} but the metric has dimension {}",
            p.x.len(),
            m.dim
        )));
    }
    if m.contains(&p.x, &p.y, margin) {
        Ok(())
    } else {
        Err(Error::OutsideCone {
            x: p.x.clone(),
            y: p.y.clone(),
            margin,
        })
    }
}

/// Max-norm of a vector.
pub(crate) fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, a| m.max(libm::fabs(*a)))
}

/// `‖a − b‖∞ / ‖b‖∞`, with `0/0 = 0`.
pub(crate) fn relative_diff(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).fold(0.0, |m: f64, (u, v)| m.max(libm::fabs(u - v)));
    relative(diff, max_abs(b))
}

pub(crate) fn relative(diff: f64, scale: f64) -> f64 {
    if diff == 0.0 {
        0.0
    } else {
        diff / scale
    }
}
