//! Integral curves of the spray: `x' = y`, `y' = −2G(x, y)`.
//!
//! Dormand–Prince 5(4) with a PI step-size controller and the standard
//! fourth-order continuous extension for dense output. The integration
//! stops cleanly when an accepted step or an output sample leaves the cone.

use alloc::vec;
use alloc::vec::Vec;

use crate::dsl::MetricDef;
use crate::geometry::{geodesic_field, require_cone, BundlePoint};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Status {
    Completed,
    LeftCone,
    StepFailure,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct GeodesicSample {
    pub t: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct GeodesicPath {
    pub samples: Vec<GeodesicSample>,
    pub status: Status,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl GeodesicPath {
    pub fn last(&self) -> &GeodesicSample {
        self.samples.last().expect("a path always holds its initial sample")
    }
}

/// Which times are reported.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum SampleTimes {
    /// `count` equally spaced times from 0 to `t_max` inclusive.
    Uniform(usize),
    /// The end of every accepted step.
    Steps,
    /// Explicit, strictly increasing times in `[0, t_max]`.
    Times(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct GeodesicOptions {
    pub t_max: f64,
    /// Absolute and relative local error tolerance.
    pub tol: f64,
    pub output: SampleTimes,
    pub cone_margin: f64,
    pub initial_step: f64,
    pub min_step: f64,
    pub max_steps: usize,
}

impl GeodesicOptions {
    pub fn new(t_max: f64, tol: f64) -> Self {
        GeodesicOptions {
            t_max,
            tol,
            output: SampleTimes::Uniform(101),
            cone_margin: 1e-6,
            initial_step: 1e-3,
            min_step: 1e-12,
            max_steps: 1_000_000,
        }
    }
}

pub fn integrate_geodesic(m: &MetricDef, p0: &BundlePoint, t_max: f64, tol: f64) -> Result<GeodesicPath> {
    integrate_geodesic_with(m, p0, &GeodesicOptions::new(t_max, tol))
}

// Dormand–Prince tableau (autonomous system, so the nodes are not needed).
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// fifth-order solution minus embedded fourth-order solution
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
// continuous extension
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;

struct Field<'a> {
    m: &'a MetricDef,
    n: usize,
}

impl Field<'_> {
    fn eval(&self, z: &[f64]) -> Result<Vec<f64>> {
        let (x, y) = z.split_at(self.n);
        let g = geodesic_field(self.m, x, y)?;
        Ok(y.iter().copied().chain(g.iter().map(|v| -2.0 * v)).collect())
    }

    fn inside(&self, z: &[f64], margin: f64) -> bool {
        let (x, y) = z.split_at(self.n);
        self.m.contains(x, y, margin)
    }
}

struct Step {
    z_new: Vec<f64>,
    k: [Vec<f64>; 7],
    err: f64,
}

fn try_step(f: &Field, z: &[f64], k1: &[f64], h: f64, tol: f64) -> Result<Step> {
    let dim = z.len();
    let mut k: [Vec<f64>; 7] = Default::default();
    k[0] = k1.to_vec();
    for s in 1..7 {
        let stage: Vec<f64> = (0..dim)
            .map(|i| z[i] + h * (0..s).map(|j| A[s][j] * k[j][i]).sum::<f64>())
            .collect();
        k[s] = f.eval(&stage)?;
    }
    // stage 7 is evaluated at the new point (first-same-as-last)
    let z_new: Vec<f64> = (0..dim)
        .map(|i| z[i] + h * (0..6).map(|j| A[6][j] * k[j][i]).sum::<f64>())
        .collect();
    let mut sum = 0.0;
    for i in 0..dim {
        let e = h * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>();
        let sc = tol + tol * libm::fabs(z[i]).max(libm::fabs(z_new[i]));
        sum += (e / sc) * (e / sc);
    }
    Ok(Step {
        z_new,
        k,
        err: libm::sqrt(sum / dim as f64),
    })
}

fn interpolate(z: &[f64], step: &Step, h: f64, theta: f64) -> Vec<f64> {
    let t1 = 1.0 - theta;
    (0..z.len())
        .map(|i| {
            let diff = step.z_new[i] - z[i];
            let b = h * step.k[0][i] - diff;
            let c = diff - h * step.k[6][i] - b;
            let d = h * (0..7).map(|j| D[j] * step.k[j][i]).sum::<f64>();
            z[i] + theta * (diff + t1 * (b + theta * (c + t1 * d)))
        })
        .collect()
}

fn sample(t: f64, z: &[f64], n: usize) -> GeodesicSample {
    GeodesicSample {
        t,
        x: z[..n].to_vec(),
        y: z[n..].to_vec(),
    }
}

fn output_times(opts: &GeodesicOptions) -> Result<Option<Vec<f64>>> {
    match &opts.output {
        SampleTimes::Steps => Ok(None),
        SampleTimes::Uniform(count) => {
            if *count < 2 {
                return Err(Error::InvalidArgument("uniform output needs at least 2 samples".into()));
            }
            let last = (*count - 1) as f64;
            Ok(Some((0..*count).map(|i| opts.t_max * i as f64 / last).collect()))
        }
        SampleTimes::Times(ts) => {
            let ordered = ts.windows(2).all(|w| w[0] < w[1]);
            let in_range = ts.iter().all(|t| (0.0..=opts.t_max).contains(t));
            if !ordered || !in_range {
                return Err(Error::InvalidArgument(
                    "sample times must be strictly increasing and within [0, t_max]".into(),
                ));
            }
            Ok(Some(ts.clone()))
        }
    }
}

pub fn integrate_geodesic_with(m: &MetricDef, p0: &BundlePoint, opts: &GeodesicOptions) -> Result<GeodesicPath> {
    if !(opts.t_max > 0.0 && opts.t_max.is_finite()) {
        return Err(Error::InvalidArgument("t_max must be positive and finite".into()));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    require_cone(m, p0, opts.cone_margin)?;
    let wanted = output_times(opts)?;
    let n = m.dim;
    let field = Field { m, n };

    let mut z: Vec<f64> = p0.x.iter().chain(&p0.y).copied().collect();
    let mut k1 = field.eval(&z)?;
    let mut t = 0.0;
    let mut h = opts.initial_step.min(opts.t_max);
    let mut fac_old: f64 = 1e-4;
    let mut path = GeodesicPath {
        samples: Vec::new(),
        status: Status::Completed,
        accepted_steps: 0,
        rejected_steps: 0,
    };
    let mut next = 0;
    match &wanted {
        Some(ts) if ts.first() == Some(&0.0) => {
            path.samples.push(sample(0.0, &z, n));
            next = 1;
        }
        None => path.samples.push(sample(0.0, &z, n)),
        _ => {}
    }

    let expo = 0.2 - BETA * 0.75;
    let mut last_step = false;
    while t < opts.t_max {
        if path.accepted_steps + path.rejected_steps >= opts.max_steps || h < opts.min_step {
            path.status = Status::StepFailure;
            return Ok(path);
        }
        if t + h >= opts.t_max {
            h = opts.t_max - t;
            last_step = true;
        }
        let step = match try_step(&field, &z, &k1, h, opts.tol) {
            Ok(s) => s,
            Err(Error::Eval(_)) | Err(Error::Degenerate { .. }) => {
                // a stage left the domain of F: shrink and retry
                path.rejected_steps += 1;
                h *= 0.5;
                last_step = false;
                continue;
            }
            Err(e) => return Err(e),
        };
        let err = step.err;
        let fac11 = libm::pow(err, expo);
        if err <= 1.0 {
            // cone check at the output samples inside this step, then at its end
            if let Some(ts) = &wanted {
                let t_end = if last_step { opts.t_max } else { t + h };
                while next < ts.len() && ts[next] <= t_end {
                    let zt = if ts[next] == t_end {
                        step.z_new.clone()
                    } else {
                        interpolate(&z, &step, h, (ts[next] - t) / h)
                    };
                    if !field.inside(&zt, opts.cone_margin) {
                        path.status = Status::LeftCone;
                        return Ok(path);
                    }
                    path.samples.push(sample(ts[next], &zt, n));
                    next += 1;
                }
            }
            if !field.inside(&step.z_new, opts.cone_margin) {
                path.status = Status::LeftCone;
                return Ok(path);
            }
            path.accepted_steps += 1;
            t = if last_step { opts.t_max } else { t + h };
            z = step.z_new;
            k1 = step.k[6].clone();
            if wanted.is_none() {
                path.samples.push(sample(t, &z, n));
            }
            let fac = (fac11 / libm::pow(fac_old, BETA) / SAFETY).clamp(1.0 / MAX_FACTOR, 1.0 / MIN_FACTOR);
            fac_old = err.max(1e-4);
            h /= fac;
        } else {
            path.rejected_steps += 1;
            last_step = false;
            h /= (fac11 / SAFETY).min(1.0 / MIN_FACTOR);
        }
    }
    Ok(path)
}

/// `max |F(x(t), y(t)) − F₀| / F₀` over the samples of `path`.
pub fn conservation_report(m: &MetricDef, path: &GeodesicPath) -> Result<f64> {
    let first = path
        .samples
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty path".into()))?;
    let f0 = m.norm_at(&first.x, &first.y)?;
    let mut drift: f64 = 0.0;
    for s in &path.samples {
        drift = drift.max(libm::fabs(m.norm_at(&s.x, &s.y)? - f0) / f0);
    }
    Ok(drift)
}

/// The states of `path` as `[t, x.., y.., F]` rows.
pub fn path_rows(m: &MetricDef, path: &GeodesicPath) -> Result<Vec<Vec<f64>>> {
    path.samples
        .iter()
        .map(|s| {
            let mut row = vec![s.t];
            row.extend(&s.x);
            row.extend(&s.y);
            row.push(m.norm_at(&s.x, &s.y)?);
            Ok(row)
        })
        .collect()
}
