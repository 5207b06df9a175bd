//! The structural identities of the spray, the connection tensor and the
//! Sasaki metric, checked at sampled bundle points.

use alloc::vec::Vec;

use super::connection::{field_jacobian, gamma_from_connection, gamma_from_jacobian};
use super::sasaki::{analyse, sasaki_block};
use super::{
    horizontal_projector, lie_bracket, liouville, quasi_tangent, relative, relative_diff, sasaki_from_projectors,
    spray_jets, BundlePoint, SprayJets, Tolerances,
};
use crate::catalog::{draw_samples, SampleConfig};
use crate::dsl::MetricDef;
use crate::jet::Jet;
use crate::linalg::{singular_values, Matrix};
use crate::report::{CheckResult, CheckTolerances, VerificationReport};
use crate::Result;

pub const JS_EQUALS_C: &str = "J(S) = C";
pub const BRACKET_CS: &str = "[C,S] = S";
pub const GAMMA_SQUARED: &str = "Gamma^2 = Id";
pub const VERTICAL_KERNEL: &str = "(Gamma + I) vertical = 0";
pub const HORIZONTAL_RANK: &str = "dim Ker(Gamma - I) = n";
pub const DUAL_PATH: &str = "Gamma Lie = Gamma block";
pub const PROJECTOR: &str = "h^2 = h";
pub const SPRAY_HORIZONTAL: &str = "h S = S";
pub const SPRAY_HOMOGENEITY: &str = "G 2-homogeneous";
pub const CONNECTION_HOMOGENEITY: &str = "N 1-homogeneous";
pub const SASAKI_INDEX: &str = "index(GF) = 2k";
pub const SASAKI_PATHS: &str = "GF block = GF projector";

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct IdentityConfig {
    pub sample: SampleConfig,
    pub tolerances: Tolerances,
    pub checks: CheckTolerances,
    /// Added to `G¹` everywhere (fault injection); zero in normal use.
    pub spray_offset: f64,
    /// Expected index `k`; taken from the first sample when absent.
    pub expected_index: Option<usize>,
}

impl Default for IdentityConfig {
    fn default() -> Self {
        IdentityConfig {
            sample: SampleConfig::default(),
            tolerances: Tolerances::default(),
            checks: CheckTolerances::default(),
            spray_offset: 0.0,
            expected_index: None,
        }
    }
}

struct Checks {
    js: CheckResult,
    bracket: CheckResult,
    square: CheckResult,
    vertical: CheckResult,
    rank: CheckResult,
    dual: CheckResult,
    projector: CheckResult,
    horizontal: CheckResult,
    g_homog: CheckResult,
    n_homog: CheckResult,
    index: CheckResult,
    sasaki: CheckResult,
}

impl Checks {
    fn new(t: &CheckTolerances) -> Self {
        let tol = t.propagated;
        Checks {
            js: CheckResult::exact(JS_EQUALS_C, t.structural),
            bracket: CheckResult::graded(BRACKET_CS, tol),
            square: CheckResult::graded(GAMMA_SQUARED, tol),
            vertical: CheckResult::graded(VERTICAL_KERNEL, tol),
            rank: CheckResult::exact(HORIZONTAL_RANK, 0.0),
            dual: CheckResult::graded(DUAL_PATH, tol),
            projector: CheckResult::graded(PROJECTOR, tol),
            horizontal: CheckResult::graded(SPRAY_HORIZONTAL, tol),
            g_homog: CheckResult::graded(SPRAY_HOMOGENEITY, tol),
            n_homog: CheckResult::graded(CONNECTION_HOMOGENEITY, tol),
            index: CheckResult::exact(SASAKI_INDEX, 0.0),
            sasaki: CheckResult::graded(SASAKI_PATHS, tol),
        }
    }

    fn into_vec(self) -> Vec<CheckResult> {
        alloc::vec![
            self.js,
            self.bracket,
            self.square,
            self.vertical,
            self.rank,
            self.dual,
            self.projector,
            self.horizontal,
            self.g_homog,
            self.n_homog,
            self.index,
            self.sasaki,
        ]
    }
}

/// Run every identity at `cfg.sample.count` seeded points of `m`.
pub fn identity_suite(m: &MetricDef, cfg: &IdentityConfig) -> Result<VerificationReport> {
    let n = m.dim;
    let tol = &cfg.tolerances;
    let points = draw_samples(m, &cfg.sample)?;
    let mut c = Checks::new(&cfg.checks);
    let mut k = cfg.expected_index;
    let j = quasi_tangent(n);
    let id = Matrix::identity(2 * n);

    for p in &points {
        let sj = spray_jets(m, p, tol, cfg.spray_offset)?;
        let k = *k.get_or_insert(sj.tensor.index);
        let field = sj.field(p);
        let s: Vec<f64> = field.iter().map(Jet::value).collect();
        let cv = liouville(p);

        c.js.record(relative_diff(&j.mul_vec(&s), &cv), p);

        let cj = liouville_jets(p);
        c.bracket.record(relative_diff(&lie_bracket(&cj, &field), &s), p);

        let gamma = gamma_from_jacobian(&field_jacobian(&field));
        c.square.record((&gamma.matrix * &gamma.matrix).max_abs_diff(&id), p);
        let plus = &gamma.matrix + &id;
        let vertical = (n..2 * n).flat_map(|col| (0..2 * n).map(move |row| (row, col)));
        c.vertical
            .record(vertical.fold(0.0, |acc, rc| acc.max(libm::fabs(plus[rc]))), p);

        let sv = singular_values(&(&gamma.matrix - &id));
        let kernel = sv.iter().filter(|v| **v < 1e-8).count();
        c.rank.record(libm::fabs(kernel as f64 - n as f64), p);

        let connection = sj.connection();
        let block = gamma_from_connection(&connection);
        c.dual.record(gamma.matrix.max_abs_diff(&block.matrix), p);

        let h = horizontal_projector(&gamma);
        c.projector.record((&h * &h).max_abs_diff(&h), p);
        c.horizontal.record(relative_diff(&h.mul_vec(&s), &s), p);

        record_homogeneity(m, p, tol, cfg.spray_offset, &sj, &mut c);

        let gf_block = sasaki_block(&sj.tensor.g, &connection);
        let gf_proj = sasaki_from_projectors(&sj.tensor.g, &gamma);
        c.sasaki
            .record(relative(gf_block.max_abs_diff(&gf_proj), gf_block.max_abs()), p);
        let idx = analyse(gf_block, p, tol)
            .map(|s| s.index as f64)
            .unwrap_or(f64::INFINITY);
        c.index.record(libm::fabs(idx - 2.0 * k as f64), p);
    }

    let mut report = VerificationReport::new(&m.name, cfg.sample.seed, points.len());
    report.checks = c.into_vec();
    if let Some(k) = k {
        report.notes.push(alloc::format!("index k = {k}"));
    }
    if cfg.spray_offset != 0.0 {
        report
            .notes
            .push(alloc::format!("fault injection: G^1 += {:e}", cfg.spray_offset));
    }
    Ok(report)
}

fn liouville_jets(p: &BundlePoint) -> Vec<Jet> {
    let n = p.dim();
    (0..n)
        .map(|_| Jet::constant(0.0, 2 * n, 1))
        .chain((0..n).map(|k| Jet::variable(p.y[k], n + k, 2 * n, 1)))
        .collect()
}

fn record_homogeneity(m: &MetricDef, p: &BundlePoint, tol: &Tolerances, offset: f64, base: &SprayJets, c: &mut Checks) {
    let g0 = base.values();
    let n0 = base.connection();
    // scaling y shrinks homogeneous cone values, so the margin is not re-imposed here
    let loose = tol.with_margin(0.0);
    for t in [0.5, 2.0] {
        let q = p.scaled(t);
        let (g_res, n_res) = match spray_jets(m, &q, &loose, offset) {
            Ok(s) => {
                let expect_g: Vec<f64> = g0.iter().map(|v| t * t * v).collect();
                let expect_n = n0.scale(t);
                (
                    relative_diff(&s.values(), &expect_g),
                    relative(s.connection().max_abs_diff(&expect_n), expect_n.max_abs()),
                )
            }
            Err(_) => (f64::INFINITY, f64::INFINITY),
        };
        c.g_homog.record(g_res, p);
        c.n_homog.record(n_res, p);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_metric;
    use crate::report::Verdict;

    fn cfg(count: usize) -> IdentityConfig {
        IdentityConfig {
            sample: SampleConfig::with_seed(7, count),
            ..IdentityConfig::default()
        }
    }

    #[test]
    fn curved_randers_like_metric_passes() {
        let m = parse_metric("dim = 2\nF = \"exp(x2)*sqrt(y1^2+y2^2) + 0.2*sin(x1)*y1\"").unwrap();
        let r = identity_suite(&m, &cfg(20)).unwrap();
        for check in &r.checks {
            assert_eq!(check.verdict, Verdict::Pass, "{check:?}");
        }
    }

    #[test]
    fn injected_fault_is_caught() {
        let m = parse_metric("dim = 2\nF = \"sqrt(y1^2+y2^2)\"").unwrap();
        let mut c = cfg(10);
        c.spray_offset = 0.01;
        let r = identity_suite(&m, &c).unwrap();
        assert_eq!(r.verdict(), Verdict::Fail);
        assert!(!r.passed(BRACKET_CS));
        assert!(!r.passed(SPRAY_HOMOGENEITY));
        // a constant shift of G leaves DS, hence Γ, untouched
        assert!(r.passed(GAMMA_SQUARED));
    }

    #[test]
    fn wrong_expected_index_fails() {
        let m = parse_metric("dim = 2\nF = \"sqrt(y1^2+y2^2)\"").unwrap();
        let mut c = cfg(5);
        c.expected_index = Some(1);
        let r = identity_suite(&m, &c).unwrap();
        assert!(!r.passed(SASAKI_INDEX));
    }
}
