use finsler_core::catalog::{catalog_entries, find_entry, SampleConfig};
use finsler_core::dsl::{parse_map, MapDef};
use finsler_core::geometry::BundlePoint;
use finsler_core::isometry::{
    lift_map, verify_all, verify_finsler_isometry, verify_j_invariance, NORM_PRESERVED, SASAKI_PULLBACK,
};
use finsler_core::report::Verdict;
use proptest::prelude::*;

fn rotation(a: f64) -> MapDef {
    parse_map(&format!(
        "name = \"r\"\ndim = 2\nf = [\"x1*cos({a}) - x2*sin({a})\", \"x1*sin({a}) + x2*cos({a})\"]"
    ))
    .unwrap()
}

fn boost(a: f64) -> MapDef {
    parse_map(&format!(
        "name = \"b\"\ndim = 2\nf = [\"x1*cosh({a}) + x2*sinh({a})\", \"x1*sinh({a}) + x2*cosh({a})\"]"
    ))
    .unwrap()
}

#[test]
fn compositions_of_catalog_isometries_are_isometries() {
    let s = SampleConfig::with_seed(31, 40);
    for e in catalog_entries().unwrap() {
        for f in &e.isometries {
            for g in &e.isometries {
                let r = verify_all(&e.metric, &f.compose(g), &s).unwrap();
                assert_eq!(
                    r.verdict(),
                    Verdict::Pass,
                    "{} / {} o {}",
                    e.metric.name,
                    f.name,
                    g.name
                );
            }
        }
    }
}

#[test]
fn composing_with_a_non_isometry_fails() {
    let s = SampleConfig::with_seed(32, 40);
    for e in catalog_entries().unwrap() {
        let (Some(f), Some(bad)) = (e.isometries.first(), e.non_isometries.first()) else {
            continue;
        };
        let r = verify_all(&e.metric, &f.compose(bad), &s).unwrap();
        assert_eq!(
            r.check(NORM_PRESERVED).unwrap().verdict,
            Verdict::Fail,
            "{}",
            e.metric.name
        );
        assert_eq!(r.check(SASAKI_PULLBACK).unwrap().verdict, Verdict::Fail);
    }
}

#[test]
fn randers_rotation_reports_a_witness() {
    let e = find_entry("randers06").unwrap();
    let rot = e
        .non_isometries
        .iter()
        .find(|f| f.name.starts_with("rotation"))
        .unwrap();
    let r = verify_finsler_isometry(&e.metric, rot, &SampleConfig::with_seed(4, 50)).unwrap();
    let c = r.check(NORM_PRESERVED).unwrap();
    assert_eq!(c.verdict, Verdict::Fail);
    let w = c.witness.as_ref().unwrap();
    // recompute the residual at the witness by hand
    let img = lift_map(rot, w).unwrap().image;
    let (f0, f1) = (
        e.metric.norm_at(&w.x, &w.y).unwrap(),
        e.metric.norm_at(&img.x, &img.y).unwrap(),
    );
    assert!(((f1 - f0).abs() / f0 - c.max_residual).abs() <= 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn every_rotation_is_a_euclidean_isometry(a in -3.1f64..3.1, seed in 0u64..1000) {
        let m = find_entry("euclidean2").unwrap().metric;
        let r = verify_all(&m, &rotation(a), &SampleConfig::with_seed(seed, 20)).unwrap();
        prop_assert_eq!(r.verdict(), Verdict::Pass);
    }

    #[test]
    fn every_boost_is_a_minkowski_isometry(a in -1.5f64..1.5, seed in 0u64..1000) {
        let m = find_entry("minkowski2").unwrap().metric;
        let r = verify_all(&m, &boost(a), &SampleConfig::with_seed(seed, 20)).unwrap();
        prop_assert_eq!(r.verdict(), Verdict::Pass);
    }

    #[test]
    fn lift_respects_composition(a in -1.0f64..1.0, b in -1.0f64..1.0, y in prop::array::uniform2(-2.0f64..2.0)) {
        let f = parse_map("dim = 2\nf = [\"x1 + 0.3*sin(x2)\", \"x2 + 0.2*x1^2\"]").unwrap();
        let g = rotation(0.7).compose(&parse_map("dim = 2\nf = [\"x1 + 0.1*x2^3\", \"x2\"]").unwrap());
        let p = BundlePoint::new(vec![a, b], y.to_vec());
        let lg = lift_map(&g, &p).unwrap();
        let lf = lift_map(&f, &lg.image).unwrap();
        let lfg = lift_map(&f.compose(&g), &p).unwrap();
        let chained = &lf.differential * &lg.differential;
        prop_assert!(lfg.differential.max_abs_diff(&chained) <= 1e-12);
        prop_assert!(lfg.image.x.iter().zip(&lf.image.x).all(|(u, v)| (u - v).abs() <= 1e-14));
    }

    #[test]
    fn j_invariance_holds_for_arbitrary_diffeomorphisms(c in -0.3f64..0.3, seed in 0u64..1000) {
        let f = parse_map(&format!("dim = 2\nf = [\"x1 + {c}*sin(x2)\", \"x2 + {c}*x1^2\"]")).unwrap();
        let r = verify_j_invariance(&f, &SampleConfig::with_seed(seed, 20)).unwrap();
        prop_assert!(r.checks[0].max_residual <= 1e-9);
    }
}
