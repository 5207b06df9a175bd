use alloc::vec::Vec;

use super::{horizontal_projector, vertical_projector};
use super::{spray_jets, BundlePoint, GammaTensor, Tolerances};
use crate::dsl::MetricDef;
use crate::linalg::{signature_of, symmetric_eigenvalues, Matrix, Signature};
use crate::{Error, Result};

/// The Sasaki metric on the bundle at one point.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SasakiMatrix {
    pub matrix: Matrix,
    pub index: usize,
    pub signature: Signature,
    pub det: f64,
}

pub(crate) fn sasaki_block(g: &Matrix, n_mat: &Matrix) -> Matrix {
    let gn = g * n_mat;
    let ntg = gn.transpose();
    let top_left = (g + &(&ntg * n_mat)).symmetrized();
    Matrix::from_blocks(&top_left, &ntg, &gn, g)
}

/// `GF(X, Y) = g(dπ hX, dπ hY) + g(vX, vY)`, assembled from the projectors.
pub fn sasaki_from_projectors(g: &Matrix, gamma: &GammaTensor) -> Matrix {
    let n = gamma.dim();
    let hor = horizontal_projector(gamma).block(0, 0, n, 2 * n);
    let ver = vertical_projector(gamma).block(n, 0, n, 2 * n);
    &(&(&hor.transpose() * g) * &hor) + &(&(&ver.transpose() * g) * &ver)
}

pub(crate) fn analyse(matrix: Matrix, p: &BundlePoint, tol: &Tolerances) -> Result<SasakiMatrix> {
    let eigen: Vec<f64> = symmetric_eigenvalues(&matrix);
    let signature = signature_of(&eigen, tol.zero_eigenvalue);
    let det = matrix.determinant();
    if !(libm::fabs(det) > tol.degeneracy) || signature.zero > 0 {
        return Err(Error::Degenerate {
            x: p.x.clone(),
            y: p.y.clone(),
            det,
        });
    }
    Ok(SasakiMatrix {
        matrix,
        index: signature.negative,
        signature,
        det,
    })
}

/// `[[g + NᵀgN, Nᵀg], [gN, g]]`.
pub fn sasaki_matrix(m: &MetricDef, p: &BundlePoint, tol: &Tolerances) -> Result<SasakiMatrix> {
    let s = spray_jets(m, p, tol, 0.0)?;
    analyse(sasaki_block(&s.tensor.g, &s.connection()), p, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_metric;
    use crate::geometry::gamma_via_lie;
    use alloc::vec;

    #[test]
    fn flat_examples() {
        let tol = Tolerances::default();
        let e = parse_metric("dim = 2\nF = \"sqrt(y1^2+y2^2)\"").unwrap();
        let s = sasaki_matrix(&e, &BundlePoint::new(vec![0.0, 0.0], vec![1.0, 2.0]), &tol).unwrap();
        assert!(s.matrix.max_abs_diff(&Matrix::identity(4)) < 1e-14);
        assert_eq!(s.index, 0);

        let mk = parse_metric("dim = 2\nF = \"sqrt(y1^2-y2^2)\"\ncone = [\"y1\", \"y1^2-y2^2\"]").unwrap();
        let s = sasaki_matrix(&mk, &BundlePoint::new(vec![0.0, 0.0], vec![2.0, 1.0]), &tol).unwrap();
        assert!(s.matrix.max_abs_diff(&Matrix::diagonal(&[1.0, -1.0, 1.0, -1.0])) < 1e-14);
        assert_eq!(s.index, 2);
    }

    #[test]
    fn block_and_projector_paths_agree() {
        let tol = Tolerances::default();
        let m = parse_metric("dim = 2\nF = \"exp(x1)*sqrt(y1^2+y2^2)\"").unwrap();
        let p = BundlePoint::new(vec![0.0, 0.0], vec![1.0, 1.0]);
        let block = sasaki_matrix(&m, &p, &tol).unwrap().matrix;
        let g = crate::geometry::fundamental_tensor(&m, &p, &tol).unwrap().g;
        let proj = sasaki_from_projectors(&g, &gamma_via_lie(&m, &p, &tol).unwrap());
        assert!(block.max_abs_diff(&proj) < 1e-10);
        assert!(block.is_symmetric());
    }
}
