use alloc::vec::Vec;

use super::{spray_jets, BundlePoint, Tolerances};
use crate::dsl::MetricDef;
use crate::jet::Jet;
use crate::linalg::Matrix;
use crate::Result;

/// The connection tensor `Γ = −L_S J` in the natural frame.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct GammaTensor {
    pub matrix: Matrix,
}

impl GammaTensor {
    pub fn dim(&self) -> usize {
        self.matrix.rows() / 2
    }
}

/// `J = [[0, 0], [I, 0]]`: the vertical lift of the projection.
pub fn quasi_tangent(n: usize) -> Matrix {
    Matrix::from_fn(2 * n, 2 * n, |i, j| if i >= n && i - n == j { 1.0 } else { 0.0 })
}

/// Jacobian of a vector field given as first-order jets.
pub(crate) fn field_jacobian(field: &[Jet]) -> Matrix {
    let m = field.len();
    Matrix::from_fn(m, m, |a, b| field[a].d1(b))
}

/// `[X, Y]ᵃ = Xᶜ ∂_c Yᵃ − Yᶜ ∂_c Xᵃ` for fields given as first-order jets.
pub fn lie_bracket(x: &[Jet], y: &[Jet]) -> Vec<f64> {
    (0..x.len())
        .map(|a| {
            (0..x.len())
                .map(|c| x[c].value() * y[a].d1(c) - y[c].value() * x[a].d1(c))
                .sum()
        })
        .collect()
}

/// `−L_S J` for constant `J` reduces to `DS·J − J·DS`.
pub(crate) fn gamma_from_jacobian(ds: &Matrix) -> GammaTensor {
    let j = quasi_tangent(ds.rows() / 2);
    GammaTensor {
        matrix: &(ds * &j) - &(&j * ds),
    }
}

/// `[[I, 0], [−2N, −I]]`.
pub(crate) fn gamma_from_connection(n_mat: &Matrix) -> GammaTensor {
    let n = n_mat.rows();
    let id = Matrix::identity(n);
    GammaTensor {
        matrix: Matrix::from_blocks(&id, &Matrix::zeros(n, n), &n_mat.scale(-2.0), &id.scale(-1.0)),
    }
}

/// `Γ` from the Lie derivative of `J` along the spray.
pub fn gamma_via_lie(m: &MetricDef, p: &BundlePoint, tol: &Tolerances) -> Result<GammaTensor> {
    let s = spray_jets(m, p, tol, 0.0)?;
    Ok(gamma_from_jacobian(&field_jacobian(&s.field(p))))
}

/// `Γ` from the closed block form in terms of `N`.
pub fn gamma_block(m: &MetricDef, p: &BundlePoint, tol: &Tolerances) -> Result<GammaTensor> {
    Ok(gamma_from_connection(&spray_jets(m, p, tol, 0.0)?.connection()))
}

/// `h = (I + Γ)/2`.
pub fn horizontal_projector(gamma: &GammaTensor) -> Matrix {
    (&Matrix::identity(gamma.matrix.rows()) + &gamma.matrix).scale(0.5)
}

/// `v = (I − Γ)/2`.
pub fn vertical_projector(gamma: &GammaTensor) -> Matrix {
    (&Matrix::identity(gamma.matrix.rows()) - &gamma.matrix).scale(0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_metric;
    use alloc::vec;

    #[test]
    fn quasi_tangent_squares_to_zero() {
        let j = quasi_tangent(3);
        assert_eq!((&j * &j).max_abs(), 0.0);
        assert_eq!(
            crate::linalg::singular_values(&j).iter().filter(|s| **s > 0.5).count(),
            3
        );
    }

    #[test]
    fn flat_gamma_is_diagonal() {
        let m = parse_metric("dim = 2\nF = \"sqrt(y1^2+y2^2) + 0.3*y1\"").unwrap();
        let p = BundlePoint::new(vec![0.1, 0.2], vec![1.0, -0.5]);
        let g = gamma_via_lie(&m, &p, &Tolerances::default()).unwrap();
        assert!(g.matrix.max_abs_diff(&Matrix::diagonal(&[1.0, 1.0, -1.0, -1.0])) < 1e-15);
        let h = horizontal_projector(&g);
        assert!(h.max_abs_diff(&Matrix::diagonal(&[1.0, 1.0, 0.0, 0.0])) < 1e-15);
        let sum = &h + &vertical_projector(&g);
        assert_eq!(sum, Matrix::identity(4));
    }

    #[test]
    fn routes_agree_on_conformal_metric() {
        let m = parse_metric("dim = 2\nF = \"exp(x1)*sqrt(y1^2+y2^2)\"").unwrap();
        let p = BundlePoint::new(vec![0.0, 0.0], vec![1.0, 1.0]);
        let tol = Tolerances::default();
        let a = gamma_via_lie(&m, &p, &tol).unwrap();
        let b = gamma_block(&m, &p, &tol).unwrap();
        assert!(a.matrix.max_abs_diff(&b.matrix) < 1e-10);
        assert!((&a.matrix * &a.matrix).max_abs_diff(&Matrix::identity(4)) < 1e-12);
    }
}
