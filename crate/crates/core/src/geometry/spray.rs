use alloc::vec::Vec;

use super::{classify, require_cone, BundlePoint, FundamentalTensor, Tolerances};
use crate::dsl::MetricDef;
use crate::jet::{all_vars, jet_eval, Jet};
use crate::linalg::{solve_generic, Matrix};
use crate::scalar::Scalar;
use crate::{Error, Result};

/// Spray coefficients `G` and connection coefficients `N = ∂G/∂y` at a point.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SprayData {
    pub coefficients: Vec<f64>,
    /// `connection[(i, j)] = ∂Gⁱ/∂yʲ`.
    pub connection: Matrix,
}

/// `G` as first-order jets over the `2n` bundle coordinates (`x` in slots
/// `0..n`, `y` in `n..2n`), plus the fundamental tensor used to build it.
pub(crate) struct SprayJets {
    pub tensor: FundamentalTensor,
    pub coefficients: Vec<Jet>,
}

impl SprayJets {
    pub fn dim(&self) -> usize {
        self.coefficients.len()
    }

    pub fn values(&self) -> Vec<f64> {
        self.coefficients.iter().map(Jet::value).collect()
    }

    pub fn connection(&self) -> Matrix {
        let n = self.dim();
        Matrix::from_fn(n, n, |i, j| self.coefficients[i].d1(n + j))
    }

    /// The spray `S = (y, −2G)` as first-order jets over the bundle coordinates.
    pub fn field(&self, p: &BundlePoint) -> Vec<Jet> {
        let n = self.dim();
        let ys = (0..n).map(|k| Jet::variable(p.y[k], n + k, 2 * n, 1));
        ys.chain(self.coefficients.iter().map(|g| g.scale(-2.0))).collect()
    }
}

/// Propagate the whole spray formula through third-order jets of `F²`, so
/// that the result carries its own first derivatives in `x` and `y`.
///
/// `offset` is added to `G¹` (fault injection for the identity suite).
pub(crate) fn spray_jets(m: &MetricDef, p: &BundlePoint, tol: &Tolerances, offset: f64) -> Result<SprayJets> {
    require_cone(m, p, tol.cone_margin)?;
    let n = m.dim;
    let w = 2 * n;
    let f = jet_eval(&m.norm, &p.x, &p.y, &all_vars(n), 3)?;
    let f2 = &f * &f;
    let tensor = classify(Matrix::from_fn(n, n, |i, j| 0.5 * f2.d2(n + i, n + j)), p, tol)?;

    // second partials of F², lifted to first-order jets via the third partials
    let second =
        |a: usize, b: usize, c: f64| Jet::from_gradient(c * f2.d2(a, b), (0..w).map(|s| c * f2.d3(a, b, s)).collect());
    let g: Vec<Jet> = (0..n * n).map(|k| second(n + k / n, n + k % n, 0.5)).collect();
    let ys: Vec<Jet> = (0..n).map(|k| Jet::variable(p.y[k], n + k, w, 1)).collect();
    let rhs: Vec<Jet> = (0..n)
        .map(|l| {
            let dx = Jet::from_gradient(f2.d1(l), (0..w).map(|s| f2.d2(l, s)).collect());
            (0..n).fold(dx.negate(), |acc, k| &acc + &(&second(n + l, k, 1.0) * &ys[k]))
        })
        .collect();
    let z = solve_generic(&g, &rhs).ok_or_else(|| Error::Degenerate {
        x: p.x.clone(),
        y: p.y.clone(),
        det: 0.0,
    })?;
    let mut coefficients: Vec<Jet> = z.iter().map(|v| v.scale(0.25)).collect();
    if offset != 0.0 {
        coefficients[0] = &coefficients[0] + &Jet::constant(offset, w, 1);
    }
    Ok(SprayJets { tensor, coefficients })
}

/// `G(x, y)` only, from second-order jets and a plain LU solve. This is the
/// geodesic right-hand side; the caller is responsible for the cone check.
pub(crate) fn geodesic_field(m: &MetricDef, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    let n = m.dim;
    let f = jet_eval(&m.norm, x, y, &all_vars(n), 2)?;
    let f2 = &f * &f;
    let g = Matrix::from_fn(n, n, |i, j| 0.5 * f2.d2(n + i, n + j));
    let rhs: Vec<f64> = (0..n)
        .map(|l| (0..n).map(|k| f2.d2(n + l, k) * y[k]).sum::<f64>() - f2.d1(l))
        .collect();
    let lu = g.lu();
    let z = lu.solve(&rhs).ok_or_else(|| Error::Degenerate {
        x: x.to_vec(),
        y: y.to_vec(),
        det: lu.determinant(),
    })?;
    Ok(z.into_iter().map(|v| 0.25 * v).collect())
}

pub fn spray_coefficients(m: &MetricDef, p: &BundlePoint, tol: &Tolerances) -> Result<SprayData> {
    let s = spray_jets(m, p, tol, 0.0)?;
    Ok(SprayData {
        coefficients: s.values(),
        connection: s.connection(),
    })
}

/// `S = (y, −2G)`.
pub fn spray_vector(m: &MetricDef, p: &BundlePoint, tol: &Tolerances) -> Result<Vec<f64>> {
    let g = spray_jets(m, p, tol, 0.0)?.values();
    Ok(p.y.iter().copied().chain(g.iter().map(|v| -2.0 * v)).collect())
}

/// `C = (0, y)`.
pub fn liouville(p: &BundlePoint) -> Vec<f64> {
    core::iter::repeat_n(0.0, p.dim()).chain(p.y.iter().copied()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_metric;
    use alloc::vec;

    fn conformal() -> MetricDef {
        parse_metric("dim = 2\nF = \"exp(x1)*sqrt(y1^2+y2^2)\"").unwrap()
    }

    #[test]
    fn flat_metrics_have_zero_spray() {
        let tol = Tolerances::default();
        for f in ["sqrt(y1^2+y2^2)", "sqrt(y1^2+y2^2) + 0.3*y1"] {
            let m = parse_metric(&alloc::format!("dim = 2\nF = \"{f}\"")).unwrap();
            let s = spray_coefficients(&m, &BundlePoint::new(vec![0.4, -0.7], vec![1.0, 0.2]), &tol).unwrap();
            assert!(s.coefficients.iter().all(|v| v.abs() < 1e-15));
            assert!(s.connection.max_abs() < 1e-15);
        }
        let e = parse_metric("dim = 2\nF = \"sqrt(y1^2+y2^2)\"").unwrap();
        let v = spray_vector(&e, &BundlePoint::new(vec![0.0, 0.0], vec![1.0, 2.0]), &tol).unwrap();
        assert_eq!(v, vec![1.0, 2.0, 0.0, 0.0]);
    }

    #[test]
    fn conformal_spray_matches_christoffels() {
        let tol = Tolerances::default();
        let p = BundlePoint::new(vec![0.0, 0.0], vec![1.0, 1.0]);
        let s = spray_coefficients(&conformal(), &p, &tol).unwrap();
        assert!((s.coefficients[0] - 0.0).abs() < 1e-14);
        assert!((s.coefficients[1] - 1.0).abs() < 1e-14);
        // N = [[y1, -y2], [y2, y1]]
        let n = Matrix::from_rows(&[&[1.0, -1.0], &[1.0, 1.0]]);
        assert!(s.connection.max_abs_diff(&n) < 1e-14);
        let v = spray_vector(&conformal(), &p, &tol).unwrap();
        assert!(v.iter().zip([1.0, 1.0, 0.0, -2.0]).all(|(a, b)| (a - b).abs() < 1e-14));
    }

    #[test]
    fn cheap_field_agrees_with_jet_path() {
        let m = parse_metric("dim = 2\nF = \"exp(x1*x2)*sqrt(y1^2+y2^2) + 0.2*cos(x2)*y1\"").unwrap();
        let p = BundlePoint::new(vec![0.3, -0.5], vec![0.7, 1.1]);
        let a = spray_jets(&m, &p, &Tolerances::default(), 0.0).unwrap().values();
        let b = geodesic_field(&m, &p.x, &p.y).unwrap();
        for (u, v) in a.iter().zip(&b) {
            assert!((u - v).abs() < 1e-13 * (1.0 + u.abs()));
        }
    }

    #[test]
    fn liouville_field() {
        assert_eq!(
            liouville(&BundlePoint::new(vec![5.0, 6.0], vec![1.0, 2.0])),
            vec![0.0, 0.0, 1.0, 2.0]
        );
    }
}
