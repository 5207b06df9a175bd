//! Numerical pseudo-Finsler geometry on the slit tangent bundle.
//!
//! A pseudo-Finsler structure is given in a single chart by a positively
//! 1-homogeneous function `F(x, y)` defined on an open cone of tangent
//! vectors. From `F` this crate builds, at any bundle point `(x, y)`:
//!
//! - the fundamental tensor `g_ij = ½ ∂²(F²)/∂yⁱ∂yʲ` and its index,
//! - the geodesic spray `S = (y, -2G)` and the connection coefficients
//!   `N = ∂G/∂y`,
//! - the almost-product tensor `Γ = -L_S J` (two independent routes),
//! - the Sasaki metric on the bundle and its signature,
//!
//! together with geodesic integration, sampling-based isometry checks for
//! candidate maps (including their lift to the tangent bundle), and the
//! indicatrix-averaged Riemannian metric of a Finsler structure.
//!
//! Metrics and maps are written in a small expression language (see
//! [`dsl`]); every derivative is propagated exactly through that AST by
//! truncated Taylor arithmetic (see [`jet`]).
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
// `!(a > b)` is used on purpose so NaN lands on the rejecting side
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod averaging;
pub mod catalog;
pub mod dsl;
mod error;
pub mod geodesic;
pub mod geometry;
pub mod isometry;
pub mod jet;
pub mod linalg;
pub mod report;
pub mod scalar;

pub use error::{Error, Result};

pub use dsl::{parse_map, parse_metric, Expr, MapDef, MetricDef};
pub use geometry::{BundlePoint, Tolerances};
pub use jet::Jet;
pub use linalg::Matrix;
