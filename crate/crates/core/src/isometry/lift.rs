use alloc::vec::Vec;

use crate::dsl::{MapDef, Var};
use crate::geometry::BundlePoint;
use crate::jet::{jet_eval, Jet};
use crate::linalg::Matrix;
use crate::{Error, Result};

/// `|det Df|` at or below this counts as a singular Jacobian.
const SINGULAR_JACOBIAN: f64 = 1e-12;

/// A map lifted to the bundle at one point.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct LiftedPoint {
    /// `(f(x), Df(x) y)`; not checked against any cone.
    pub image: BundlePoint,
    pub jacobian: Matrix,
    /// `[[Df, 0], [D²f[y], Df]]` with `(D²f[y])ⁱⱼ = ∂²fⁱ/∂xʲ∂xᵏ yᵏ`.
    pub differential: Matrix,
}

pub fn lift_map(f: &MapDef, p: &BundlePoint) -> Result<LiftedPoint> {
    let n = f.dim;
    if p.dim() != n {
        return Err(Error::InvalidArgument(alloc::format!(
            "point has dimension {} but the map has dimension {}",
            p.dim(),
            n
        )));
    }
    let seeds: Vec<Var> = (0..n).map(Var::X).collect();
    let jets: Vec<Jet> = f
        .components
        .iter()
        .map(|c| jet_eval(c, &p.x, &[], &seeds, 2))
        .collect::<core::result::Result<_, _>>()?;
    let df = Matrix::from_fn(n, n, |i, j| jets[i].d1(j));
    let det = df.determinant();
    if !(libm::fabs(det) > SINGULAR_JACOBIAN) {
        return Err(Error::SingularJacobian { x: p.x.clone(), det });
    }
    let d2y = Matrix::from_fn(n, n, |i, j| (0..n).map(|k| jets[i].d2(j, k) * p.y[k]).sum());
    let image = BundlePoint {
        x: jets.iter().map(Jet::value).collect(),
        y: df.mul_vec(&p.y),
    };
    let differential = Matrix::from_blocks(&df, &Matrix::zeros(n, n), &d2y, &df);
    Ok(LiftedPoint {
        image,
        jacobian: df,
        differential,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_map;
    use alloc::vec;

    #[test]
    fn rotation_lift_is_block_diagonal() {
        let f = parse_map("dim = 2\nf = [\"x1*cos(0.5) - x2*sin(0.5)\", \"x1*sin(0.5) + x2*cos(0.5)\"]").unwrap();
        let p = BundlePoint::new(vec![1.0, 0.0], vec![0.0, 1.0]);
        let l = lift_map(&f, &p).unwrap();
        let (c, s) = (libm::cos(0.5), libm::sin(0.5));
        let r = Matrix::from_rows(&[&[c, -s], &[s, c]]);
        let expect = Matrix::from_blocks(&r, &Matrix::zeros(2, 2), &Matrix::zeros(2, 2), &r);
        assert!(l.differential.max_abs_diff(&expect) < 1e-15);
        assert!((l.image.x[0] - c).abs() < 1e-15 && (l.image.y[0] + s).abs() < 1e-15);
    }

    #[test]
    fn shear_second_derivative_block() {
        let f = parse_map("dim = 2\nf = [\"x1 + 0.1*x2^2\", \"x2\"]").unwrap();
        let at = |y: [f64; 2]| lift_map(&f, &BundlePoint::new(vec![0.0, 1.0], y.to_vec())).unwrap();
        assert_eq!(at([1.0, 0.0]).differential.block(2, 0, 2, 2), Matrix::zeros(2, 2));
        let b = at([0.0, 1.0]).differential.block(2, 0, 2, 2);
        assert!(b.max_abs_diff(&Matrix::from_rows(&[&[0.0, 0.2], &[0.0, 0.0]])) < 1e-15);
        assert!(
            at([1.0, 0.0])
                .jacobian
                .max_abs_diff(&Matrix::from_rows(&[&[1.0, 0.2], &[0.0, 1.0]]))
                < 1e-15
        );
    }

    #[test]
    fn projection_commutes() {
        let f = parse_map("dim = 2\nf = [\"sin(x1) + x2^3\", \"exp(x1 - x2)\"]").unwrap();
        let l = lift_map(&f, &BundlePoint::new(vec![0.2, 0.4], vec![1.0, -2.0])).unwrap();
        // dπ ∘ DΦ = Df ∘ dπ
        assert_eq!(l.differential.block(0, 0, 2, 2), l.jacobian);
        assert_eq!(l.differential.block(0, 2, 2, 2), Matrix::zeros(2, 2));
    }

    #[test]
    fn collapsing_map_is_singular() {
        let f = parse_map("dim = 2\nf = [\"x1 + x2\", \"2*x1 + 2*x2\"]").unwrap();
        let r = lift_map(&f, &BundlePoint::new(vec![0.0, 0.0], vec![1.0, 0.0]));
        assert!(matches!(r, Err(Error::SingularJacobian { .. })));
    }
}
