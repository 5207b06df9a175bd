//! Test-side oracles. Nothing here calls the geometry code under test.
#![allow(dead_code)]

use finsler_core::catalog::SampleConfig;
use finsler_core::dsl::{Expr, MetricDef, Var};
use finsler_core::geometry::BundlePoint;
use finsler_core::jet::{all_vars, fd_partial, fd_step, jet_eval};
use nalgebra::{DMatrix, Matrix2};
use std::f64::consts::PI;

/// Closed-form fundamental tensor of `F = |y| + b y1` in the plane.
pub fn randers_tensor(b: f64, y: [f64; 2]) -> Matrix2<f64> {
    let a = (y[0] * y[0] + y[1] * y[1]).sqrt();
    let f = a + b * y[0];
    let l = [y[0] / a, y[1] / a];
    let lb = [l[0] + b, l[1]];
    Matrix2::from_fn(|i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        (f / a) * (delta - l[i] * l[j]) + lb[i] * lb[j]
    })
}

/// `∫ g dσ` over the Randers indicatrix `r(θ) = 1/(1 + b cos θ)`, by the
/// trapezoid rule on `nodes` equally spaced angles.
pub fn randers_average(b: f64, nodes: usize) -> Matrix2<f64> {
    let mut h = Matrix2::zeros();
    let w = 2.0 * PI / nodes as f64;
    for k in 0..nodes {
        let t = w * k as f64;
        let (c, s) = (t.cos(), t.sin());
        let r = 1.0 / (1.0 + b * c);
        let dr = b * s * r * r;
        let du = nalgebra::Vector2::new(dr * c - r * s, dr * s + r * c);
        let g = randers_tensor(b, [c, s]);
        let density = (du.transpose() * g * du)[(0, 0)].sqrt();
        h += g * (w * density);
    }
    h
}

/// Spray coefficients of `e^{2 x1} (dx1² + dx2²)`: with `φ = x1`,
/// `Γⁱⱼₖ = δⁱⱼ ∂ₖφ + δⁱₖ ∂ⱼφ − δⱼₖ ∂ⁱφ` and `Gⁱ = ½ Γⁱⱼₖ yʲ yᵏ`.
pub fn conformal_spray(y: &[f64]) -> [f64; 2] {
    let dphi = [1.0, 0.0];
    let mut g = [0.0; 2];
    for (i, gi) in g.iter_mut().enumerate() {
        for j in 0..2 {
            for k in 0..2 {
                let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
                let gamma = d(i, j) * dphi[k] + d(i, k) * dphi[j] - d(j, k) * dphi[i];
                *gi += 0.5 * gamma * y[j] * y[k];
            }
        }
    }
    g
}

/// Eigenvalue count below zero, by nalgebra.
pub fn negative_eigenvalues(rows: &[Vec<f64>]) -> usize {
    let n = rows.len();
    let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    m.symmetric_eigen().eigenvalues.iter().filter(|v| **v < 0.0).count()
}

/// Worst jet-vs-finite-difference disagreement of `e` at `p`, split into
/// orders 1-2 and order 3. Each error is relative to the largest jet
/// partial of the same order, or to `|value|` when that is larger (linear
/// maps have no second derivatives to compare against).
pub fn fd_disagreement(e: &Expr, p: &BundlePoint) -> (f64, f64) {
    let n = p.dim();
    let vars = all_vars(n);
    let jet = jet_eval(e, &p.x, &p.y, &vars, 3).expect("evaluable at a cone point");
    let scale = p.x.iter().chain(&p.y).fold(1.0f64, |m, v| m.max(v.abs()));
    let mut low: f64 = 0.0;
    let mut third: f64 = 0.0;
    for order in 1..=3usize {
        let size = jet
            .max_abs_of_order(order)
            .max(jet.value().abs())
            .max(f64::MIN_POSITIVE);
        let h = fd_step(order, scale);
        for idx in multi_indices(2 * n, order) {
            let vs: Vec<Var> = idx.iter().map(|&i| vars[i]).collect();
            let fd = fd_partial(e, &p.x, &p.y, &vs, &vec![h; order]).expect("stencil stays in the domain");
            let err = (jet.partial(&idx) - fd).abs() / size;
            if order == 3 {
                third = third.max(err);
            } else {
                low = low.max(err);
            }
        }
    }
    (low, third)
}

/// Non-decreasing index tuples of the given length.
pub fn multi_indices(slots: usize, order: usize) -> Vec<Vec<usize>> {
    fn go(slots: usize, order: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == order {
            out.push(cur.clone());
            return;
        }
        for i in start..slots {
            cur.push(i);
            go(slots, order, i, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(slots, order, 0, &mut Vec::new(), &mut out);
    out
}

/// Cone margin for the finite-difference sweep. Near a light cone the
/// third derivatives of `F` blow up and the fixed-step stencil, not the
/// jet, loses accuracy; at `y1² − y2² ≈ 0.018 |y|²` its order-3 error is
/// about 1e-2 while a Richardson estimate agrees with the jet.
pub const FD_MARGIN: f64 = 0.5;

pub fn fd_samples(seed: u64, count: usize) -> SampleConfig {
    SampleConfig {
        margin: FD_MARGIN,
        ..SampleConfig::with_seed(seed, count)
    }
}

pub fn metric_text(name: &str, dim: usize, f: &str, cone: &[&str]) -> MetricDef {
    let cone: Vec<String> = cone.iter().map(|c| format!("\"{c}\"")).collect();
    finsler_core::parse_metric(&format!(
        "name = \"{name}\"\ndim = {dim}\nF = \"{f}\"\ncone = [{}]\n",
        cone.join(", ")
    ))
    .expect("test metric parses")
}
