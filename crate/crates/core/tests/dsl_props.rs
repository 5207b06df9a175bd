mod common;

use finsler_core::catalog::{catalog_entries, draw_box_samples, draw_one, SampleConfig};
use finsler_core::dsl::{parse_expr, Expr, MapDef, Var};
use finsler_core::jet::{all_vars, jet_eval};
use finsler_core::MetricDef;
use proptest::prelude::*;

fn leaf() -> impl Strategy<Value = String> {
    prop_oneof![
        (1u32..1000, 0u32..4).prop_map(|(m, s)| format!("{}", m as f64 / 10f64.powi(s as i32))),
        (1usize..=2).prop_map(|i| format!("x{i}")),
        (1usize..=2).prop_map(|i| format!("y{i}")),
        Just("pi".to_string()),
        Just("e".to_string()),
    ]
}

fn expression() -> impl Strategy<Value = String> {
    leaf().prop_recursive(5, 48, 2, |inner| {
        prop_oneof![
            (
                inner.clone(),
                inner.clone(),
                prop::sample::select(vec!["+", "-", "*", "/"])
            )
                .prop_map(|(a, b, op)| format!("({a}) {op} ({b})")),
            inner.clone().prop_map(|a| format!("-({a})")),
            (
                inner.clone(),
                prop::sample::select(vec!["2", "3", "-1", "(1/2)", "(-3/2)"])
            )
                .prop_map(|(a, k)| format!("({a})^{k}")),
            (
                inner,
                prop::sample::select(vec!["sqrt", "exp", "log", "sin", "cos", "tan", "sinh", "cosh", "tanh"])
            )
                .prop_map(|(a, f)| format!("{f}({a})")),
        ]
    })
}

/// Every expression in the catalog, with its dimension and a point budget.
/// Generated compositions get fewer points than the bundled files.
fn catalog_expressions() -> Vec<(String, usize, Expr, usize)> {
    let mut out = Vec::new();
    let push_metric = |out: &mut Vec<_>, m: &MetricDef| {
        out.push((format!("{} F", m.name), m.dim, m.norm.clone(), 1000));
        for (i, c) in m.cone.iter().enumerate() {
            out.push((format!("{} cone {i}", m.name), m.dim, c.clone(), 1000));
        }
    };
    let push_map = |out: &mut Vec<_>, f: &MapDef, points: usize| {
        for (i, c) in f.components.iter().enumerate() {
            out.push((format!("{} f{i}", f.name), f.dim, c.clone(), points));
        }
    };
    for e in catalog_entries().unwrap() {
        push_metric(&mut out, &e.metric);
        for (f, _) in e.all_maps() {
            push_map(&mut out, f, 1000);
        }
        for f in e.linear_family() {
            push_map(&mut out, &f, 50);
        }
    }
    out
}

#[test]
fn plain_evaluation_matches_jet_value_bitwise() {
    for (label, n, e, points) in catalog_expressions() {
        let mut compared = 0;
        for p in draw_box_samples(n, &SampleConfig::with_seed(77, points)).unwrap() {
            let Ok(v) = e.eval(&p.x, &p.y) else { continue };
            for order in 1..=3u8 {
                let Ok(j) = jet_eval(&e, &p.x, &p.y, &all_vars(n), order) else {
                    continue;
                };
                assert_eq!(j.value().to_bits(), v.to_bits(), "{label} order {order} at {p:?}");
            }
            compared += 1;
        }
        assert!(compared > 0, "{label} never evaluated");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn printing_then_parsing_is_the_identity(src in expression()) {
        let e = parse_expr(&src, 2, true).unwrap();
        let printed = e.to_string();
        let again = parse_expr(&printed, 2, true).unwrap();
        prop_assert_eq!(&again, &e, "printed as {}", printed);
        prop_assert_eq!(again.to_string(), printed);
    }

    #[test]
    fn generated_expressions_agree_with_jets(src in expression(), x in prop::array::uniform2(-1.0f64..1.0), y in prop::array::uniform2(-2.0f64..2.0)) {
        let e = parse_expr(&src, 2, true).unwrap();
        if let (Ok(v), Ok(j)) = (e.eval(&x, &y), jet_eval(&e, &x, &y, &all_vars(2), 2)) {
            prop_assert_eq!(j.value().to_bits(), v.to_bits());
        }
    }

    #[test]
    fn chain_rule_through_composition(a in -1.0f64..1.0, b in -1.0f64..1.0, t in -3.0f64..3.0) {
        let outer = finsler_core::parse_map("dim = 2\nf = [\"sin(x1)*x2 + x1^3\", \"exp(x1 - 0.5*x2)\"]").unwrap();
        let inner = finsler_core::parse_map(&format!("dim = 2\nf = [\"x1*cos({t}) - x2^2\", \"x1*x2 + {t}\"]")).unwrap();
        let composed = outer.compose(&inner);
        let x = [a, b];
        let seeds = [Var::X(0), Var::X(1)];
        let jac = |f: &MapDef, at: &[f64]| -> Vec<[f64; 2]> {
            f.components.iter().map(|c| {
                let j = jet_eval(c, at, &[], &seeds, 1).unwrap();
                [j.d1(0), j.d1(1)]
            }).collect()
        };
        let fx = inner.apply(&x).unwrap();
        let (jo, ji, jc) = (jac(&outer, &fx), jac(&inner, &x), jac(&composed, &x));
        for i in 0..2 {
            for k in 0..2 {
                let expect = jo[i][0] * ji[0][k] + jo[i][1] * ji[1][k];
                prop_assert!((jc[i][k] - expect).abs() <= 1e-12 * (1.0 + expect.abs()));
            }
        }
    }

    #[test]
    fn catalog_norms_are_one_homogeneous(index in 0usize..10_000, t in 0.05f64..20.0) {
        for e in catalog_entries().unwrap() {
            let m = &e.metric;
            let p = draw_one(m, &SampleConfig::with_seed(3, 1), index).unwrap();
            let n = m.dim;
            let ys: Vec<Var> = (0..n).map(Var::Y).collect();
            let j = jet_eval(&m.norm, &p.x, &p.y, &ys, 2).unwrap();
            let f = j.value();
            // near a light cone F^2 = y1^2 - |y'|^2 cancels, losing |y|^2 / F^2 in accuracy
            let cond = (p.y.iter().map(|v| v * v).sum::<f64>() / (f * f)).max(1.0);
            let euler: f64 = (0..n).map(|i| p.y[i] * j.d1(i)).sum();
            prop_assert!((euler - f).abs() <= 1e-12 * cond * f.abs().max(1.0), "{}", m.name);
            // the Hessian of a 1-homogeneous function annihilates y
            let scale = (0..n).flat_map(|i| (0..n).map(move |k| (i, k))).fold(0.0f64, |s, (i, k)| s.max(j.d2(i, k).abs()));
            for i in 0..n {
                let hy: f64 = (0..n).map(|k| j.d2(i, k) * p.y[k]).sum();
                prop_assert!(hy.abs() <= 1e-12 * cond * scale.max(1.0), "{}", m.name);
            }
            let ft = m.norm_at(&p.x, &p.scaled(t).y).unwrap();
            prop_assert!((ft - t * f).abs() <= 1e-13 * cond * (t * f).abs(), "{}", m.name);
        }
    }
}

#[test]
fn metric_files_round_trip_through_text() {
    for e in catalog_entries().unwrap() {
        let again = finsler_core::parse_metric(&e.metric.to_text()).unwrap();
        assert_eq!(again, e.metric);
        for (f, _) in e.all_maps() {
            assert_eq!(&finsler_core::parse_map(&f.to_text()).unwrap(), f);
        }
    }
    let _ = common::FD_MARGIN;
}
