//! The averaged Riemannian metric
//! `h_ij(x) = ∫_Σ g_u(x)_ij dΩ(u)` over the indicatrix `Σ = {F(x, ·) = 1}`,
//! with `dΩ` the volume of the metric induced on `Σ` by `g`.
//!
//! `Σ` is parametrized radially, `u(ω) = ω / F(x, ω)` for unit directions
//! `ω`. In the plane `ω = (cos θ, sin θ)` and the periodic trapezoid rule
//! is used; in dimension three `ω` is given by spherical angles with
//! Gauss–Legendre in the polar angle and the trapezoid rule in azimuth.
//! The tangent frame of `Σ` comes from jets of `u` in the angles.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::catalog::sampling::Region;
use crate::catalog::SampleConfig;
use crate::dsl::{MapDef, MetricDef, Var};
use crate::geometry::BundlePoint;
use crate::isometry::{lift_map, verify_finsler_isometry};
use crate::jet::{jet_eval, Jet};
use crate::linalg::{symmetric_eigenvalues, Matrix};
use crate::report::{Verdict, VerificationReport, FAIL_THRESHOLD};
use crate::scalar::Scalar;
use crate::{Error, Result};

pub mod quadrature;

use quadrature::{gauss_legendre, pairwise_sum};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct AveragingOptions {
    /// Azimuthal node count of the first pass (polar nodes are half of it).
    pub resolution: usize,
    /// Accept when the largest entry change after a doubling is at most this.
    pub tolerance: f64,
    pub max_doublings: usize,
    /// Rotates every azimuthal node by this angle.
    pub phase: f64,
    pub cone_margin: f64,
}

impl Default for AveragingOptions {
    fn default() -> Self {
        AveragingOptions {
            resolution: 32,
            tolerance: 1e-8,
            max_doublings: 4,
            phase: 0.0,
            cone_margin: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ConvergenceStep {
    pub resolution: usize,
    /// Largest entry change against the previous pass (absent on the first).
    pub max_change: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct AveragedMetric {
    pub h: Matrix,
    pub resolution: usize,
    pub trace: Vec<ConvergenceStep>,
}

/// One quadrature pass at a fixed resolution.
pub fn average_at_resolution(m: &MetricDef, x: &[f64], resolution: usize, phase: f64, margin: f64) -> Result<Matrix> {
    let n = m.dim;
    if x.len() != n {
        return Err(Error::InvalidArgument(alloc::format!(
            "x has dimension {} but the metric {}",
            x.len(),
            n
        )));
    }
    if resolution < 4 {
        return Err(Error::InvalidArgument("averaging resolution must be at least 4".into()));
    }
    let nodes = match n {
        2 => circle_nodes(resolution, phase),
        3 => sphere_nodes(resolution, phase),
        _ => {
            return Err(Error::InvalidArgument(alloc::format!(
                "averaging is implemented for dimensions 2 and 3, not {n}"
            )))
        }
    };
    // per-entry contributions, summed pairwise in node order
    let mut parts: Vec<Vec<f64>> = alloc::vec![Vec::with_capacity(nodes.len()); n * n];
    for (angles, weight) in &nodes {
        let (g, density) = node(m, x, angles, margin)?;
        for (k, part) in parts.iter_mut().enumerate() {
            part.push(weight * density * g[(k / n, k % n)]);
        }
    }
    let h = Matrix::from_fn(n, n, |i, j| pairwise_sum(&parts[i * n + j]));
    Ok(h.symmetrized())
}

type Node = (Vec<f64>, f64);

fn circle_nodes(count: usize, phase: f64) -> Vec<Node> {
    let w = 2.0 * PI / count as f64;
    (0..count).map(|j| (alloc::vec![phase + w * j as f64], w)).collect()
}

fn sphere_nodes(count: usize, phase: f64) -> Vec<Node> {
    let (t, wt) = gauss_legendre((count / 2).max(2));
    let wp = 2.0 * PI / count as f64;
    let mut out = Vec::with_capacity(t.len() * count);
    for (ti, wi) in t.iter().zip(&wt) {
        let polar = 0.5 * PI * (ti + 1.0);
        for j in 0..count {
            out.push((alloc::vec![polar, phase + wp * j as f64], 0.5 * PI * wi * wp));
        }
    }
    out
}

fn direction(angles: &[Jet]) -> Vec<Jet> {
    match angles {
        [t] => alloc::vec![t.cos(), t.sin()],
        [polar, az] => {
            let s = polar.sin();
            alloc::vec![&s * &az.cos(), &s * &az.sin(), polar.cos()]
        }
        _ => unreachable!("angle charts exist for the circle and the sphere"),
    }
}

/// `g` at the node direction and the induced volume density there.
fn node(m: &MetricDef, x: &[f64], angles: &[f64], margin: f64) -> Result<(Matrix, f64)> {
    let n = m.dim;
    let a = angles.len();
    let seeds: Vec<Jet> = angles
        .iter()
        .enumerate()
        .map(|(i, v)| Jet::variable(*v, i, a, 1))
        .collect();
    let omega = direction(&seeds);
    let w: Vec<f64> = omega.iter().map(Jet::value).collect();
    let not_finsler = |reason: alloc::string::String| Error::NotFinsler { x: x.to_vec(), reason };
    if !m.contains(x, &w, margin) {
        return Err(not_finsler(alloc::format!(
            "direction {w:?} is outside the cone; the indicatrix is not a full sphere"
        )));
    }
    let xs: Vec<Jet> = x.iter().map(|v| Jet::constant(*v, a, 1)).collect();
    let f = m.norm.eval(&xs, &omega)?;
    let u: Vec<Jet> = omega.iter().map(|c| c.divide(&f)).collect();
    let frame = Matrix::from_fn(n, a, |i, k| u[i].d1(k));

    let y_seeds: Vec<Var> = (0..n).map(Var::Y).collect();
    let uv: Vec<f64> = u.iter().map(Jet::value).collect();
    let fj = jet_eval(&m.norm, x, &uv, &y_seeds, 2)?;
    let f2 = &fj * &fj;
    let g = Matrix::from_fn(n, n, |i, j| 0.5 * f2.d2(i, j));
    if symmetric_eigenvalues(&g)[0] <= 0.0 {
        return Err(not_finsler(alloc::format!(
            "fundamental tensor is not positive definite at y={uv:?}; the indicatrix is not compact"
        )));
    }
    let gram = &(&frame.transpose() * &g) * &frame;
    let det = gram.determinant();
    if !(det > 0.0) {
        return Err(not_finsler(alloc::format!(
            "degenerate induced metric on the indicatrix at y={uv:?}"
        )));
    }
    Ok((g, libm::sqrt(det)))
}

/// `h` at `x`, doubling the resolution until the largest entry change is
/// within `opts.tolerance`.
pub fn average_metric(m: &MetricDef, x: &[f64], opts: &AveragingOptions) -> Result<AveragedMetric> {
    let mut res = opts.resolution;
    let mut h = average_at_resolution(m, x, res, opts.phase, opts.cone_margin)?;
    let mut trace = alloc::vec![ConvergenceStep {
        resolution: res,
        max_change: None,
    }];
    let mut change = f64::INFINITY;
    for _ in 0..opts.max_doublings {
        res *= 2;
        let finer = average_at_resolution(m, x, res, opts.phase, opts.cone_margin)?;
        change = finer.max_abs_diff(&h);
        trace.push(ConvergenceStep {
            resolution: res,
            max_change: Some(change),
        });
        h = finer;
        if change <= opts.tolerance {
            return Ok(AveragedMetric {
                h,
                resolution: res,
                trace,
            });
        }
    }
    Err(Error::NoConvergence {
        doublings: opts.max_doublings,
        last_change: change,
    })
}

pub const H_INVARIANCE_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct HInvariance {
    /// `‖Dfᵀ h(f(x)) Df − h(x)‖max / ‖h(x)‖max`.
    pub residual: f64,
    pub verdict: Verdict,
    pub h_at_x: Matrix,
    pub h_at_image: Matrix,
    /// The Finsler isometry check on the box `x ± 0.1`.
    pub precondition: VerificationReport,
    pub forced: bool,
}

/// Check that `f` carries `h` at `x` to `h` at `f(x)`. The map must first
/// pass the Finsler isometry check near `x`, unless `force` is set.
pub fn verify_h_invariance(
    m: &MetricDef,
    f: &MapDef,
    x: &[f64],
    opts: &AveragingOptions,
    sample: &SampleConfig,
    force: bool,
) -> Result<HInvariance> {
    let local = SampleConfig {
        x_box: Region::around(x, 0.1),
        ..sample.clone()
    };
    let precondition = verify_finsler_isometry(m, f, &local)?;
    if precondition.verdict() != Verdict::Pass && !force {
        return Err(Error::Precondition(alloc::format!(
            "{} is not a Finsler isometry near x={x:?}",
            f.name
        )));
    }
    let lifted = lift_map(f, &BundlePoint::new(x.to_vec(), alloc::vec![0.0; x.len()]))?;
    let here = average_metric(m, x, opts)?.h;
    let there = average_metric(m, &lifted.image.x, opts)?.h;
    let df = &lifted.jacobian;
    let pulled = &(&df.transpose() * &there) * df;
    let residual = pulled.max_abs_diff(&here) / here.max_abs();
    let verdict = if residual <= H_INVARIANCE_TOL {
        Verdict::Pass
    } else if residual > FAIL_THRESHOLD {
        Verdict::Fail
    } else {
        Verdict::Inconclusive
    };
    Ok(HInvariance {
        residual,
        verdict,
        h_at_x: here,
        h_at_image: there,
        precondition,
        forced: force,
    })
}
