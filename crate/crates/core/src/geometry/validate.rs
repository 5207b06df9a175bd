//! Definition checks for a metric: positivity, homogeneity, nondegeneracy
//! and constant index, over a seeded sample of its cone.

use alloc::vec::Vec;

use super::tensor::tensor_unchecked;
use super::{relative, BundlePoint, Tolerances};
use crate::catalog::sampling::draw_where;
use crate::catalog::SampleConfig;
use crate::dsl::{MetricDef, Var};
use crate::jet::jet_eval;
use crate::report::{CheckResult, CheckTolerances, VerificationReport};
use crate::{Error, Result};

pub const POSITIVITY: &str = "F > 0";
pub const HOMOGENEITY: &str = "F(x, t y) = t F(x, y)";
pub const EULER: &str = "y . dF/dy = F";
pub const NONDEGENERACY: &str = "det g != 0";
pub const QUADRATIC_FORM: &str = "g(y, y) = F^2";
pub const INDEX_CONSTANCY: &str = "index constant";

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct MetricValidation {
    pub report: VerificationReport,
    /// The common index when `g` is nondegenerate with constant index.
    pub index: Option<usize>,
}

/// Sample the cone (without assuming `F > 0`) and check the definition.
pub fn validate_metric(m: &MetricDef, s: &SampleConfig, tol: &Tolerances) -> Result<MetricValidation> {
    validate_metric_with(m, s, tol, &CheckTolerances::default())
}

pub fn validate_metric_with(
    m: &MetricDef,
    s: &SampleConfig,
    tol: &Tolerances,
    checks: &CheckTolerances,
) -> Result<MetricValidation> {
    let in_cone =
        |p: &BundlePoint| matches!(m.cone_min(&p.x, &p.y), Ok(c) if c > s.margin) && m.norm_at(&p.x, &p.y).is_ok();
    let points = draw_where(m.dim, s, in_cone)?;
    let y_seeds: Vec<Var> = (0..m.dim).map(Var::Y).collect();

    let mut positive = CheckResult::exact(POSITIVITY, 0.0);
    let mut homogeneous = CheckResult::graded(HOMOGENEITY, checks.propagated);
    let mut euler = CheckResult::graded(EULER, checks.euler);
    let mut nondegenerate = CheckResult::exact(NONDEGENERACY, 0.0);
    let mut quadratic = CheckResult::graded(QUADRATIC_FORM, checks.propagated);
    let mut constant = CheckResult::exact(INDEX_CONSTANCY, 0.0);
    let mut first_index = None;
    let mut degenerate = false;

    for p in &points {
        let f = m.norm_at(&p.x, &p.y)?;
        positive.record(if f > 0.0 { 0.0 } else { 1.0 }, p);

        for t in [0.5, 2.0] {
            let q = p.scaled(t);
            let r = match m.norm_at(&q.x, &q.y) {
                Ok(ft) => relative(libm::fabs(ft - t * f), libm::fabs(t * f)),
                Err(_) => f64::INFINITY,
            };
            homogeneous.record(r, p);
        }

        let jet = jet_eval(&m.norm, &p.x, &p.y, &y_seeds, 1)?;
        let directional: f64 = (0..m.dim).map(|i| p.y[i] * jet.d1(i)).sum();
        euler.record(relative(libm::fabs(directional - f), libm::fabs(f)), p);

        match tensor_unchecked(m, p, tol) {
            Ok(t) => {
                nondegenerate.record(0.0, p);
                let gyy = t.g.bilinear(&p.y, &p.y);
                quadratic.record(relative(libm::fabs(gyy - f * f), f * f), p);
                let k0 = *first_index.get_or_insert(t.index);
                constant.record(libm::fabs(t.index as f64 - k0 as f64), p);
            }
            Err(Error::Degenerate { .. }) => {
                degenerate = true;
                nondegenerate.record(1.0, p);
            }
            Err(e) => return Err(e),
        }
    }

    let mut report = VerificationReport::new(&m.name, s.seed, points.len());
    report.checks = alloc::vec![positive, homogeneous, euler, nondegenerate, quadratic, constant];
    let index = if degenerate || !report.passed(INDEX_CONSTANCY) {
        None
    } else {
        first_index
    };
    if let Some(k) = index {
        report.notes.push(alloc::format!("index k = {k}"));
    }
    Ok(MetricValidation { report, index })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_metric;
    use crate::report::Verdict;

    fn run(text: &str) -> MetricValidation {
        let m = parse_metric(text).unwrap();
        validate_metric(&m, &SampleConfig::with_seed(11, 40), &Tolerances::default()).unwrap()
    }

    #[test]
    fn euclidean_and_minkowski_pass() {
        let v = run("dim = 2\nF = \"sqrt(y1^2+y2^2)\"\ncone = [\"y1^2+y2^2\"]");
        assert_eq!(v.report.verdict(), Verdict::Pass);
        assert_eq!(v.index, Some(0));
        let v = run("dim = 2\nF = \"sqrt(y1^2-y2^2)\"\ncone = [\"y1\", \"y1^2-y2^2\"]");
        assert_eq!(v.report.verdict(), Verdict::Pass);
        assert_eq!(v.index, Some(1));
    }

    #[test]
    fn linear_norm_is_degenerate() {
        let v = run("dim = 2\nF = \"y1\"");
        assert_eq!(v.report.check(NONDEGENERACY).unwrap().verdict, Verdict::Fail);
        assert_eq!(v.index, None);
    }

    #[test]
    fn non_homogeneous_and_non_positive_are_caught() {
        let v = run("dim = 2\nF = \"y1^2 + y2^2\"");
        assert_eq!(v.report.check(HOMOGENEITY).unwrap().verdict, Verdict::Fail);
        assert_eq!(v.report.check(EULER).unwrap().verdict, Verdict::Fail);
        let v = run("dim = 2\nF = \"-sqrt(y1^2+y2^2)\"");
        assert_eq!(v.report.check(POSITIVITY).unwrap().verdict, Verdict::Fail);
    }
}
