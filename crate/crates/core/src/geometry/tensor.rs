use alloc::vec::Vec;

use super::{require_cone, BundlePoint, Tolerances};
use crate::catalog::{draw_samples, SampleConfig};
use crate::dsl::{MetricDef, Var};
use crate::jet::jet_eval;
use crate::linalg::{signature_of, symmetric_eigenvalues, Matrix};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct FundamentalTensor {
    pub g: Matrix,
    /// Number of negative eigenvalues.
    pub index: usize,
    pub det: f64,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
}

/// `g_ij = ½ ∂²(F²)/∂yⁱ∂yʲ` at `p`.
pub fn fundamental_tensor(m: &MetricDef, p: &BundlePoint, tol: &Tolerances) -> Result<FundamentalTensor> {
    require_cone(m, p, tol.cone_margin)?;
    tensor_unchecked(m, p, tol)
}

pub(crate) fn tensor_unchecked(m: &MetricDef, p: &BundlePoint, tol: &Tolerances) -> Result<FundamentalTensor> {
    let n = m.dim;
    let seeds: Vec<Var> = (0..n).map(Var::Y).collect();
    let f = jet_eval(&m.norm, &p.x, &p.y, &seeds, 2)?;
    let f2 = &f * &f;
    classify(Matrix::from_fn(n, n, |i, j| 0.5 * f2.d2(i, j)), p, tol)
}

/// Eigen-analysis of a symmetric `g`; degenerate matrices are an error.
pub(crate) fn classify(g: Matrix, p: &BundlePoint, tol: &Tolerances) -> Result<FundamentalTensor> {
    let eigenvalues = symmetric_eigenvalues(&g);
    let det = g.determinant();
    let sig = signature_of(&eigenvalues, tol.zero_eigenvalue);
    if !(libm::fabs(det) > tol.degeneracy) || sig.zero > 0 {
        return Err(Error::Degenerate {
            x: p.x.clone(),
            y: p.y.clone(),
            det,
        });
    }
    let largest = eigenvalues.iter().fold(0.0, |m: f64, v| m.max(libm::fabs(*v)));
    let smallest = eigenvalues
        .iter()
        .fold(f64::INFINITY, |m: f64, v| m.min(libm::fabs(*v)));
    if largest / smallest > tol.condition_warning {
        log::warn!(
            "ill-conditioned fundamental tensor at x={:?}, y={:?}: condition {:e}",
            p.x,
            p.y,
            largest / smallest
        );
    }
    Ok(FundamentalTensor {
        g,
        index: sig.negative,
        det,
        eigenvalues,
    })
}

/// The common index of `g` over a sample; errors if it is not constant.
pub fn metric_index(m: &MetricDef, s: &SampleConfig, tol: &Tolerances) -> Result<usize> {
    if s.count < 2 {
        return Err(Error::InvalidArgument(
            "index constancy needs at least 2 samples".into(),
        ));
    }
    let mut first = None;
    for p in draw_samples(m, s)? {
        let k = fundamental_tensor(m, &p, tol)?.index;
        match first {
            None => first = Some(k),
            Some(k0) if k0 != k => {
                return Err(Error::InconsistentIndex {
                    first: k0,
                    found: k,
                    x: p.x,
                    y: p.y,
                })
            }
            _ => {}
        }
    }
    Ok(first.unwrap_or(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_metric;
    use alloc::vec;

    fn metric(f: &str, cone: &str) -> MetricDef {
        parse_metric(&alloc::format!("dim = 2\nF = \"{f}\"\ncone = [{cone}]")).unwrap()
    }

    #[test]
    fn euclidean_and_minkowski() {
        let tol = Tolerances::default();
        let e = metric("sqrt(y1^2+y2^2)", "\"y1^2+y2^2\"");
        let t = fundamental_tensor(&e, &BundlePoint::new(vec![0.3, -0.2], vec![0.6, 0.8]), &tol).unwrap();
        assert!(t.g.max_abs_diff(&Matrix::identity(2)) < 1e-14);
        assert_eq!(t.index, 0);

        let mk = metric("sqrt(y1^2-y2^2)", "\"y1\", \"y1^2-y2^2\"");
        let t = fundamental_tensor(&mk, &BundlePoint::new(vec![0.0, 0.0], vec![2.0, 1.0]), &tol).unwrap();
        assert!(t.g.max_abs_diff(&Matrix::diagonal(&[1.0, -1.0])) < 1e-14);
        assert_eq!(t.index, 1);
        assert!((t.det + 1.0).abs() < 1e-14);
    }

    #[test]
    fn outside_cone_and_degenerate() {
        let tol = Tolerances::default();
        let mk = metric("sqrt(y1^2-y2^2)", "\"y1\", \"y1^2-y2^2\"");
        let r = fundamental_tensor(&mk, &BundlePoint::new(vec![0.0, 0.0], vec![1.0, 2.0]), &tol);
        assert!(matches!(r, Err(Error::OutsideCone { .. })));

        let lin = metric("y1", "\"y1\"");
        let r = fundamental_tensor(&lin, &BundlePoint::new(vec![0.0, 0.0], vec![1.0, 2.0]), &tol);
        assert!(matches!(r, Err(Error::Degenerate { .. })));
    }

    #[test]
    fn index_needs_two_samples() {
        let e = metric("sqrt(y1^2+y2^2)", "");
        let s = SampleConfig::with_seed(1, 1);
        assert!(metric_index(&e, &s, &Tolerances::default()).is_err());
        assert_eq!(
            metric_index(&e, &SampleConfig::with_seed(1, 20), &Tolerances::default()).unwrap(),
            0
        );
    }

    #[test]
    fn sign_changing_index_is_reported() {
        // g = diag(1, sign(x1)) up to scale: index flips across x1 = 0
        let m = metric("sqrt(y1^2 + x1*y2^2)", "\"y1^2 + x1*y2^2\"");
        let r = metric_index(&m, &SampleConfig::with_seed(3, 50), &Tolerances::default());
        assert!(matches!(r, Err(Error::InconsistentIndex { .. })), "{r:?}");
    }
}
