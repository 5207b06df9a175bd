//! Built-in metrics with known isometries and non-isometries, plus the
//! seeded sampler shared by every check.
//!
//! The metrics and maps are ordinary definition files under `catalog/`,
//! compiled in with `include_str!` and read by the same parser as files
//! given on the command line.

use alloc::string::String;
use alloc::vec::Vec;

use crate::dsl::{parse_map, parse_metric, MapDef, MetricDef};
use crate::geometry::{validate_metric, Tolerances};
use crate::linalg::Matrix;
use crate::report::Verdict;
use crate::{Error, Result};

pub mod sampling;
pub use sampling::{acceptance_rate, draw_box_samples, draw_one, draw_samples, Interval, Region, SampleConfig};

/// Metric definition files, by file name.
pub const METRIC_FILES: &[(&str, &str)] = &[
    (
        "euclidean2.metric",
        include_str!("../../catalog/metrics/euclidean2.metric"),
    ),
    (
        "euclidean3.metric",
        include_str!("../../catalog/metrics/euclidean3.metric"),
    ),
    (
        "minkowski2.metric",
        include_str!("../../catalog/metrics/minkowski2.metric"),
    ),
    (
        "minkowski3.metric",
        include_str!("../../catalog/metrics/minkowski3.metric"),
    ),
    (
        "randers03.metric",
        include_str!("../../catalog/metrics/randers03.metric"),
    ),
    (
        "randers06.metric",
        include_str!("../../catalog/metrics/randers06.metric"),
    ),
    (
        "conformal2.metric",
        include_str!("../../catalog/metrics/conformal2.metric"),
    ),
    (
        "lorentz_conformal2.metric",
        include_str!("../../catalog/metrics/lorentz_conformal2.metric"),
    ),
];

/// Map definition files, by file name.
pub const MAP_FILES: &[(&str, &str)] = &[
    (
        "plane_rotation.map",
        include_str!("../../catalog/maps/plane_rotation.map"),
    ),
    (
        "plane_translation.map",
        include_str!("../../catalog/maps/plane_translation.map"),
    ),
    (
        "plane_reflection.map",
        include_str!("../../catalog/maps/plane_reflection.map"),
    ),
    (
        "plane_dilation.map",
        include_str!("../../catalog/maps/plane_dilation.map"),
    ),
    ("plane_shear.map", include_str!("../../catalog/maps/plane_shear.map")),
    ("plane_boost.map", include_str!("../../catalog/maps/plane_boost.map")),
    (
        "plane_time_reversal.map",
        include_str!("../../catalog/maps/plane_time_reversal.map"),
    ),
    (
        "plane_shift_x1.map",
        include_str!("../../catalog/maps/plane_shift_x1.map"),
    ),
    (
        "plane_shift_x2.map",
        include_str!("../../catalog/maps/plane_shift_x2.map"),
    ),
    (
        "space_rotation12.map",
        include_str!("../../catalog/maps/space_rotation12.map"),
    ),
    (
        "space_rotation23.map",
        include_str!("../../catalog/maps/space_rotation23.map"),
    ),
    (
        "space_translation.map",
        include_str!("../../catalog/maps/space_translation.map"),
    ),
    (
        "space_dilation.map",
        include_str!("../../catalog/maps/space_dilation.map"),
    ),
    ("space_shear.map", include_str!("../../catalog/maps/space_shear.map")),
    (
        "space_boost12.map",
        include_str!("../../catalog/maps/space_boost12.map"),
    ),
    (
        "space_time_reversal.map",
        include_str!("../../catalog/maps/space_time_reversal.map"),
    ),
];

#[derive(Debug, Clone, PartialEq)]
pub struct CatalogEntry {
    pub metric: MetricDef,
    pub isometries: Vec<MapDef>,
    pub non_isometries: Vec<MapDef>,
    pub expected_index: usize,
    /// Linear isometries generating a finite family by composition; empty
    /// for metrics that depend on `x`.
    pub linear_generators: Vec<MapDef>,
}

impl CatalogEntry {
    /// Whether `F` depends on `y` only.
    pub fn is_x_independent(&self) -> bool {
        !self.linear_generators.is_empty()
    }

    /// Identity, every generator, and every ordered product of two
    /// generators. Distinct words often give the same map, which is what
    /// the second-jet comparison needs.
    pub fn linear_family(&self) -> Vec<MapDef> {
        let g = &self.linear_generators;
        if g.is_empty() {
            return Vec::new();
        }
        let mut family = alloc::vec![MapDef::identity(self.metric.dim)];
        family.extend(g.iter().cloned());
        for a in g {
            for b in g {
                family.push(a.compose(b));
            }
        }
        family
    }

    /// Every catalog map for this entry, isometries first.
    pub fn all_maps(&self) -> impl Iterator<Item = (&MapDef, bool)> {
        self.isometries
            .iter()
            .map(|m| (m, true))
            .chain(self.non_isometries.iter().map(|m| (m, false)))
    }
}

/// Text of a bundled metric or map file.
pub fn catalog_file(name: &str) -> Option<&'static str> {
    METRIC_FILES
        .iter()
        .chain(MAP_FILES)
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
}

fn metric(file: &str) -> Result<MetricDef> {
    let text = catalog_file(file).ok_or_else(|| Error::InvalidArgument(alloc::format!("no catalog file {file}")))?;
    Ok(parse_metric(text)?)
}

fn maps(files: &[&str]) -> Result<Vec<MapDef>> {
    files
        .iter()
        .map(|f| {
            let text = catalog_file(f).ok_or_else(|| Error::InvalidArgument(alloc::format!("no catalog file {f}")))?;
            Ok(parse_map(text)?)
        })
        .collect()
}

fn rotation(n: usize, i: usize, j: usize, angle: f64) -> MapDef {
    let (c, s) = (libm::cos(angle), libm::sin(angle));
    let mut a = Matrix::identity(n);
    a[(i, i)] = c;
    a[(i, j)] = -s;
    a[(j, i)] = s;
    a[(j, j)] = c;
    MapDef::affine(
        &alloc::format!("rotation {angle} in (x{}, x{})", i + 1, j + 1),
        &a,
        &alloc::vec![0.0; n],
    )
}

fn boost(n: usize, i: usize, j: usize, rapidity: f64) -> MapDef {
    let (c, s) = (libm::cosh(rapidity), libm::sinh(rapidity));
    let mut a = Matrix::identity(n);
    a[(i, i)] = c;
    a[(i, j)] = s;
    a[(j, i)] = s;
    a[(j, j)] = c;
    MapDef::affine(
        &alloc::format!("boost {rapidity} in (x{}, x{})", i + 1, j + 1),
        &a,
        &alloc::vec![0.0; n],
    )
}

fn reflection(n: usize, i: usize) -> MapDef {
    let mut a = Matrix::identity(n);
    a[(i, i)] = -1.0;
    MapDef::affine(&alloc::format!("reflection of x{}", i + 1), &a, &alloc::vec![0.0; n])
}

/// The built-in entries, without the self-check of [`builtin_catalog`].
pub fn catalog_entries() -> Result<Vec<CatalogEntry>> {
    let entry = |file: &str, iso: &[&str], non: &[&str], k: usize, gens: Vec<MapDef>| -> Result<CatalogEntry> {
        Ok(CatalogEntry {
            metric: metric(file)?,
            isometries: maps(iso)?,
            non_isometries: maps(non)?,
            expected_index: k,
            linear_generators: gens,
        })
    };
    let plane_euclid = || {
        alloc::vec![
            rotation(2, 0, 1, 0.2),
            rotation(2, 0, 1, 0.3),
            rotation(2, 0, 1, 0.5),
            reflection(2, 1)
        ]
    };
    let randers_gens = || alloc::vec![reflection(2, 1)];
    Ok(alloc::vec![
        entry(
            "euclidean2.metric",
            &["plane_rotation.map", "plane_translation.map", "plane_reflection.map"],
            &["plane_dilation.map", "plane_shear.map"],
            0,
            plane_euclid(),
        )?,
        entry(
            "euclidean3.metric",
            &["space_rotation12.map", "space_rotation23.map", "space_translation.map"],
            &["space_dilation.map", "space_shear.map"],
            0,
            alloc::vec![
                rotation(3, 0, 1, 0.2),
                rotation(3, 0, 1, 0.3),
                rotation(3, 0, 1, 0.5),
                rotation(3, 1, 2, 0.3)
            ],
        )?,
        entry(
            "minkowski2.metric",
            &["plane_boost.map", "plane_translation.map", "plane_reflection.map"],
            &["plane_dilation.map", "plane_time_reversal.map", "plane_shear.map"],
            1,
            alloc::vec![
                boost(2, 0, 1, 0.3),
                boost(2, 0, 1, 0.4),
                boost(2, 0, 1, 0.7),
                reflection(2, 1)
            ],
        )?,
        entry(
            "minkowski3.metric",
            &["space_boost12.map", "space_rotation23.map", "space_translation.map"],
            &["space_dilation.map", "space_time_reversal.map"],
            // g = diag(1, -1, -1) on the timelike cone
            2,
            alloc::vec![
                boost(3, 0, 1, 0.3),
                boost(3, 0, 1, 0.4),
                boost(3, 0, 1, 0.7),
                rotation(3, 1, 2, 0.3)
            ],
        )?,
        entry(
            "randers03.metric",
            &["plane_translation.map", "plane_reflection.map"],
            &["plane_rotation.map", "plane_dilation.map"],
            0,
            randers_gens(),
        )?,
        entry(
            "randers06.metric",
            &["plane_translation.map", "plane_reflection.map"],
            &["plane_rotation.map", "plane_dilation.map"],
            0,
            randers_gens(),
        )?,
        entry(
            "conformal2.metric",
            &["plane_shift_x2.map", "plane_reflection.map"],
            &["plane_shift_x1.map", "plane_rotation.map"],
            0,
            Vec::new(),
        )?,
        entry(
            "lorentz_conformal2.metric",
            &["plane_shift_x2.map", "plane_reflection.map"],
            &["plane_shift_x1.map", "plane_dilation.map"],
            1,
            Vec::new(),
        )?,
    ])
}

/// Samples used by the load-time self-check.
pub const SELF_CHECK_SAMPLES: usize = 40;

/// The built-in catalog. Each metric is validated on load (positivity,
/// homogeneity, nondegeneracy, constant index equal to the expected one).
pub fn builtin_catalog() -> Result<Vec<CatalogEntry>> {
    let entries = catalog_entries()?;
    let s = SampleConfig::with_seed(0x5EED, SELF_CHECK_SAMPLES);
    for e in &entries {
        let v = validate_metric(&e.metric, &s, &Tolerances::default())?;
        if v.report.verdict() != Verdict::Pass || v.index != Some(e.expected_index) {
            return Err(Error::Precondition(alloc::format!(
                "catalog metric {} failed its self-check (verdict {}, index {:?}, expected {})",
                e.metric.name,
                v.report.verdict(),
                v.index,
                e.expected_index
            )));
        }
    }
    Ok(entries)
}

/// Look up a built-in entry by metric name.
pub fn find_entry(name: &str) -> Result<CatalogEntry> {
    catalog_entries()?
        .into_iter()
        .find(|e| e.metric.name == name)
        .ok_or_else(|| {
            let names: Vec<String> = METRIC_FILES
                .iter()
                .map(|(f, _)| String::from(f.trim_end_matches(".metric")))
                .collect();
            Error::InvalidArgument(alloc::format!(
                "unknown catalog metric {name}; known: {}",
                names.join(", ")
            ))
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{fundamental_tensor, BundlePoint};
    use alloc::vec;

    #[test]
    fn catalog_self_validates() {
        let c = builtin_catalog().unwrap();
        assert_eq!(c.len(), 8);
        let names: Vec<&str> = c.iter().map(|e| e.metric.name.as_str()).collect();
        assert!(names.contains(&"minkowski3") && names.contains(&"lorentz_conformal2"));
    }

    #[test]
    fn file_names_match_metric_names() {
        for e in catalog_entries().unwrap() {
            assert!(catalog_file(&alloc::format!("{}.metric", e.metric.name)).is_some());
        }
    }

    #[test]
    fn randers_06_is_positive_definite() {
        let e = find_entry("randers06").unwrap();
        let t = fundamental_tensor(
            &e.metric,
            &BundlePoint::new(vec![0.0; 2], vec![-1.0, 0.2]),
            &Tolerances::default(),
        )
        .unwrap();
        assert_eq!(t.index, 0);
        assert!(t.eigenvalues[0] > 0.0);
    }

    #[test]
    fn maps_match_metric_dimension() {
        for e in catalog_entries().unwrap() {
            for (f, _) in e.all_maps() {
                assert_eq!(f.dim, e.metric.dim, "{} / {}", e.metric.name, f.name);
            }
            for f in e.linear_family() {
                assert_eq!(f.dim, e.metric.dim);
            }
        }
    }

    #[test]
    fn family_size() {
        let e = find_entry("euclidean2").unwrap();
        assert_eq!(e.linear_family().len(), 1 + 4 + 16);
        assert!(find_entry("conformal2").unwrap().linear_family().is_empty());
        assert!(find_entry("nope").is_err());
    }
}
