//! Second-jet evidence inside an explicit family of isometries.
//!
//! For each family member, its lift at one bundle point determines an
//! affine map (value and Jacobian at `x`). We rebuild that map from the
//! lift alone, check it is itself an isometry, and compare it with the
//! original on a grid; members whose lifts agree at the point are compared
//! with each other the same way. Agreement supports, but cannot prove,
//! that an isometry is fixed by its lift at a single point.

use alloc::vec::Vec;

use super::{lift_map, verify_finsler_isometry, LiftedPoint};
use crate::catalog::SampleConfig;
use crate::dsl::{MapDef, MetricDef};
use crate::geometry::BundlePoint;
use crate::report::Verdict;
use crate::{Error, Result};

pub const EVIDENCE_LABEL: &str = "supporting evidence only (one explicit family, not a uniqueness proof)";

/// Lifts agreeing to this (max-norm) are treated as equal at the point.
const LIFT_AGREEMENT: f64 = 1e-12;
/// Grid agreement required of maps with equal lifts.
pub const GRID_TOL: f64 = 1e-9;
const GRID: usize = 10;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SecondJetEvidence {
    pub label: &'static str,
    pub point: BundlePoint,
    pub members: usize,
    /// Pairs of maps with agreeing lifts that were compared on the grid.
    pub pairs: usize,
    pub max_grid_difference: f64,
    /// Every map rebuilt from a lift passed the Finsler isometry check.
    pub rebuilt_are_isometries: bool,
    pub verdict: Verdict,
}

fn lift_distance(a: &LiftedPoint, b: &LiftedPoint) -> f64 {
    let dx = a
        .image
        .x
        .iter()
        .zip(&b.image.x)
        .fold(0.0, |m: f64, (u, v)| m.max(libm::fabs(u - v)));
    let dy = a
        .image
        .y
        .iter()
        .zip(&b.image.y)
        .fold(0.0, |m: f64, (u, v)| m.max(libm::fabs(u - v)));
    dx.max(dy).max(a.differential.max_abs_diff(&b.differential))
}

/// Max-norm distance between `f` and `g` on a 10×10 grid of `(x1, x2)` in
/// `[−1, 1]²`, other coordinates fixed at `base`.
pub fn grid_distance(f: &MapDef, g: &MapDef, base: &[f64]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    let mut x = base.to_vec();
    for a in 0..GRID {
        for b in 0..GRID {
            x[0] = -1.0 + 2.0 * a as f64 / (GRID - 1) as f64;
            x[1] = -1.0 + 2.0 * b as f64 / (GRID - 1) as f64;
            let (u, v) = (f.apply(&x)?, g.apply(&x)?);
            worst = u.iter().zip(&v).fold(worst, |m, (p, q)| m.max(libm::fabs(p - q)));
        }
    }
    Ok(worst)
}

pub fn second_jet_evidence(
    m: &MetricDef,
    family: &[MapDef],
    p: &BundlePoint,
    s: &SampleConfig,
) -> Result<SecondJetEvidence> {
    if family.is_empty() {
        return Err(Error::InvalidArgument("empty map family".into()));
    }
    let lifts: Vec<LiftedPoint> = family.iter().map(|f| lift_map(f, p)).collect::<Result<_>>()?;
    let mut pairs = 0;
    let mut worst: f64 = 0.0;
    let mut rebuilt_ok = true;

    for (f, lift) in family.iter().zip(&lifts) {
        let df = &lift.jacobian;
        let offset: Vec<f64> = lift
            .image
            .x
            .iter()
            .zip(df.mul_vec(&p.x))
            .map(|(fx, ax)| fx - ax)
            .collect();
        let rebuilt = MapDef::affine(&alloc::format!("rebuilt {}", f.name), df, &offset);
        if lift_distance(&lift_map(&rebuilt, p)?, lift) <= LIFT_AGREEMENT {
            pairs += 1;
            worst = worst.max(grid_distance(f, &rebuilt, &p.x)?);
        }
        rebuilt_ok &= verify_finsler_isometry(m, &rebuilt, s)?.verdict() == Verdict::Pass;
    }
    for i in 0..family.len() {
        for j in i + 1..family.len() {
            if lift_distance(&lifts[i], &lifts[j]) <= LIFT_AGREEMENT {
                pairs += 1;
                worst = worst.max(grid_distance(&family[i], &family[j], &p.x)?);
            }
        }
    }
    let verdict = if pairs > 0 && worst <= GRID_TOL && rebuilt_ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(SecondJetEvidence {
        label: EVIDENCE_LABEL,
        point: p.clone(),
        members: family.len(),
        pairs,
        max_grid_difference: worst,
        rebuilt_are_isometries: rebuilt_ok,
        verdict,
    })
}
