//! Sampling-based checks that a candidate map is an isometry, and of the
//! lifting machinery for its differential.
//!
//! A map `f` acts on the bundle by `Φ(x, y) = (f(x), Df(x) y)`, with
//! differential `DΦ = [[Df, 0], [D²f[y], Df]]`. Pass thresholds come from
//! [`CheckTolerances`]: the propagated one for `F` and `J`, the composed one
//! where an inverse or a pullback enters. Residuals between the pass
//! threshold and the FAIL threshold are INCONCLUSIVE.

use crate::catalog::sampling::draw_box_samples;
use crate::catalog::{draw_samples, SampleConfig};
use crate::dsl::{MapDef, MetricDef};
use crate::geometry::{quasi_tangent, relative, relative_diff, sasaki_matrix, spray_vector, BundlePoint, Tolerances};
use crate::report::{CheckResult, CheckTolerances, VerificationReport};
use crate::Result;

mod evidence;
mod lift;

pub use evidence::{second_jet_evidence, SecondJetEvidence, EVIDENCE_LABEL};
pub use lift::{lift_map, LiftedPoint};

pub const CONE_PRESERVED: &str = "cone preserved";
pub const NORM_PRESERVED: &str = "F o Phi = F";
pub const J_INVARIANT: &str = "DPhi^-1 J DPhi = J";
pub const SPRAY_EQUIVARIANT: &str = "DPhi S = S o Phi";
pub const SASAKI_PULLBACK: &str = "DPhi^T GF DPhi = GF";

fn image_inside(m: &MetricDef, q: &BundlePoint, margin: f64) -> bool {
    m.contains(&q.x, &q.y, margin)
}

fn finsler_checks(
    m: &MetricDef,
    f: &MapDef,
    points: &[BundlePoint],
    margin: f64,
    t: &CheckTolerances,
) -> Result<[CheckResult; 2]> {
    let mut cone = CheckResult::exact(CONE_PRESERVED, 0.0);
    let mut norm = CheckResult::graded(NORM_PRESERVED, t.propagated);
    for p in points {
        let lifted = lift_map(f, p)?;
        let q = &lifted.image;
        cone.record(if image_inside(m, q, margin) { 0.0 } else { 1.0 }, p);
        let f0 = m.norm_at(&p.x, &p.y)?;
        let r = match m.norm_at(&q.x, &q.y) {
            Ok(f1) => relative(libm::fabs(f1 - f0), f0),
            Err(_) => f64::INFINITY,
        };
        norm.record(r, p);
    }
    Ok([cone, norm])
}

/// Cone preservation and `F(Φ(p)) = F(p)` at seeded cone samples.
pub fn verify_finsler_isometry(m: &MetricDef, f: &MapDef, s: &SampleConfig) -> Result<VerificationReport> {
    finsler_isometry(m, f, s, &CheckTolerances::default())
}

fn finsler_isometry(m: &MetricDef, f: &MapDef, s: &SampleConfig, t: &CheckTolerances) -> Result<VerificationReport> {
    check_dims(m, f)?;
    let points = draw_samples(m, s)?;
    let mut report = VerificationReport::new(&subject(m, f), s.seed, points.len());
    report.checks.extend(finsler_checks(m, f, &points, s.margin, t)?);
    Ok(report)
}

/// `DΦ⁻¹ J DΦ = J` at points of the sample box. Holds for every local
/// diffeomorphism, isometric or not.
pub fn verify_j_invariance(f: &MapDef, s: &SampleConfig) -> Result<VerificationReport> {
    j_invariance(f, s, &CheckTolerances::default())
}

fn j_invariance(f: &MapDef, s: &SampleConfig, t: &CheckTolerances) -> Result<VerificationReport> {
    let points = draw_box_samples(f.dim, s)?;
    let j = quasi_tangent(f.dim);
    let mut check = CheckResult::graded(J_INVARIANT, t.propagated);
    for p in &points {
        let lifted = lift_map(f, p)?;
        let inv = lifted.differential.inverse().expect("Df is invertible, so DPhi is");
        let conj = &(&inv * &j) * &lifted.differential;
        check.record(conj.max_abs_diff(&j), p);
    }
    let mut report = VerificationReport::new(&f.name, s.seed, points.len());
    report.checks.push(check);
    Ok(report)
}

/// `DΦ · S(p) = S(Φ(p))`; an image outside the cone counts as infinitely bad.
pub fn verify_spray_equivariance(m: &MetricDef, f: &MapDef, s: &SampleConfig) -> Result<VerificationReport> {
    spray_equivariance(m, f, s, &CheckTolerances::default())
}

fn spray_equivariance(m: &MetricDef, f: &MapDef, s: &SampleConfig, t: &CheckTolerances) -> Result<VerificationReport> {
    check_dims(m, f)?;
    let tol = Tolerances::default().with_margin(s.margin);
    let points = draw_samples(m, s)?;
    let mut check = CheckResult::graded(SPRAY_EQUIVARIANT, t.composed);
    for p in &points {
        let lifted = lift_map(f, p)?;
        let pushed = lifted.differential.mul_vec(&spray_vector(m, p, &tol)?);
        let r = if image_inside(m, &lifted.image, s.margin) {
            spray_vector(m, &lifted.image, &tol)
                .map(|target| relative_diff(&pushed, &target))
                .unwrap_or(f64::INFINITY)
        } else {
            f64::INFINITY
        };
        check.record(r, p);
    }
    let mut report = VerificationReport::new(&subject(m, f), s.seed, points.len());
    report.checks.push(check);
    Ok(report)
}

/// `DΦᵀ · GF(Φ(p)) · DΦ = GF(p)`, reported together with the Finsler
/// checks at the same samples so both directions of the equivalence can
/// be read off one report.
pub fn verify_sasaki_isometry(m: &MetricDef, f: &MapDef, s: &SampleConfig) -> Result<VerificationReport> {
    sasaki_isometry(m, f, s, &CheckTolerances::default())
}

fn sasaki_isometry(m: &MetricDef, f: &MapDef, s: &SampleConfig, t: &CheckTolerances) -> Result<VerificationReport> {
    check_dims(m, f)?;
    let tol = Tolerances::default().with_margin(s.margin);
    let points = draw_samples(m, s)?;
    let mut check = CheckResult::graded(SASAKI_PULLBACK, t.composed);
    for p in &points {
        let lifted = lift_map(f, p)?;
        let here = sasaki_matrix(m, p, &tol)?.matrix;
        let r = if image_inside(m, &lifted.image, s.margin) {
            match sasaki_matrix(m, &lifted.image, &tol) {
                Ok(there) => {
                    let d = &lifted.differential;
                    let pulled = &(&d.transpose() * &there.matrix) * d;
                    relative(pulled.max_abs_diff(&here), here.max_abs())
                }
                Err(_) => f64::INFINITY,
            }
        } else {
            f64::INFINITY
        };
        check.record(r, p);
    }
    let mut report = VerificationReport::new(&subject(m, f), s.seed, points.len());
    report.checks.extend(finsler_checks(m, f, &points, s.margin, t)?);
    report.checks.push(check);
    Ok(report)
}

/// All four verifications in one report (the Finsler checks appear once).
pub fn verify_all(m: &MetricDef, f: &MapDef, s: &SampleConfig) -> Result<VerificationReport> {
    verify_all_with(m, f, s, &CheckTolerances::default())
}

pub fn verify_all_with(m: &MetricDef, f: &MapDef, s: &SampleConfig, t: &CheckTolerances) -> Result<VerificationReport> {
    let mut report = sasaki_isometry(m, f, s, t)?;
    report.extend(spray_equivariance(m, f, s, t)?);
    report.extend(j_invariance(f, s, t)?);
    let order = [
        CONE_PRESERVED,
        NORM_PRESERVED,
        J_INVARIANT,
        SPRAY_EQUIVARIANT,
        SASAKI_PULLBACK,
    ];
    report.checks.sort_by_key(|c| order.iter().position(|n| *n == c.name));
    Ok(report)
}

fn subject(m: &MetricDef, f: &MapDef) -> alloc::string::String {
    alloc::format!("{} / {}", m.name, f.name)
}

fn check_dims(m: &MetricDef, f: &MapDef) -> Result<()> {
    if m.dim == f.dim {
        Ok(())
    } else {
        Err(crate::Error::InvalidArgument(alloc::format!(
            "metric has dimension {} but the map has dimension {}",
            m.dim,
            f.dim
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{parse_map, parse_metric};
    use crate::report::Verdict;

    fn euclid() -> MetricDef {
        parse_metric("name = \"E2\"\ndim = 2\nF = \"sqrt(y1^2+y2^2)\"\ncone = [\"y1^2+y2^2\"]").unwrap()
    }

    fn map(src: &str) -> MapDef {
        parse_map(&alloc::format!("dim = 2\nf = [{src}]")).unwrap()
    }

    #[test]
    fn rotation_is_an_isometry() {
        let rot = map("\"x1*cos(0.5) - x2*sin(0.5)\", \"x1*sin(0.5) + x2*cos(0.5)\"");
        let s = SampleConfig::with_seed(5, 30);
        let r = verify_all(&euclid(), &rot, &s).unwrap();
        assert_eq!(r.verdict(), Verdict::Pass, "{r:?}");
        assert!(r.check(NORM_PRESERVED).unwrap().max_residual <= 1e-12);
        assert!(r.check(SASAKI_PULLBACK).unwrap().max_residual <= 1e-10);
    }

    #[test]
    fn dilation_fails_with_unit_residual() {
        let dil = map("\"2*x1\", \"2*x2\"");
        let r = verify_finsler_isometry(&euclid(), &dil, &SampleConfig::with_seed(5, 10)).unwrap();
        let c = r.check(NORM_PRESERVED).unwrap();
        assert_eq!(c.verdict, Verdict::Fail);
        assert!((c.max_residual - 1.0).abs() < 1e-12);
        assert!(c.witness.is_some());
    }

    #[test]
    fn shear_keeps_j_but_breaks_the_spray() {
        let shear = map("\"x1 + 0.1*x2^2\", \"x2\"");
        let s = SampleConfig::with_seed(9, 30);
        assert_eq!(verify_j_invariance(&shear, &s).unwrap().verdict(), Verdict::Pass);
        let r = verify_spray_equivariance(&euclid(), &shear, &s).unwrap();
        assert!(r.checks[0].max_residual > 1e-3);
    }

    #[test]
    fn identity_map_has_zero_j_residual() {
        let id = MapDef::identity(3);
        let r = verify_j_invariance(&id, &SampleConfig::with_seed(1, 10)).unwrap();
        assert_eq!(r.checks[0].max_residual, 0.0);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let r = verify_finsler_isometry(&euclid(), &MapDef::identity(3), &SampleConfig::default());
        assert!(r.is_err());
    }
}
