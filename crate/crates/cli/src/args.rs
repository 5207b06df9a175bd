use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "finsler",
    version,
    about = "Pseudo-Finsler geometry checks on metric and map files"
)]
pub struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check positivity, homogeneity, nondegeneracy and constant index.
    Validate {
        metric: PathBuf,
        #[command(flatten)]
        sampling: Sampling,
        #[command(flatten)]
        numeric: Numeric,
        #[command(flatten)]
        checks: Checks,
    },
    /// Run the spray / connection / Sasaki identity suite at sampled points.
    Identities {
        metric: PathBuf,
        #[command(flatten)]
        sampling: Sampling,
        #[command(flatten)]
        numeric: Numeric,
        #[command(flatten)]
        checks: Checks,
        /// Expected index k (taken from the first sample when omitted).
        #[arg(long)]
        index: Option<usize>,
        /// Add this constant to G^1 everywhere (fault injection).
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true, hide = true)]
        debug_spray_offset: f64,
    },
    /// Check whether a map is an isometry (Finsler, J, spray and Sasaki checks).
    Verify {
        metric: PathBuf,
        map: PathBuf,
        #[command(flatten)]
        sampling: Sampling,
        #[command(flatten)]
        checks: Checks,
    },
    /// Integrate a geodesic and write it as CSV.
    Geodesic {
        metric: PathBuf,
        #[command(flatten)]
        start: Start,
        #[command(flatten)]
        integration: Integration,
        /// CSV destination; the CSV goes to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Indicatrix-averaged Riemannian metric at a point (dimensions 2 and 3).
    Average {
        metric: PathBuf,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        x: Vec<f64>,
        #[command(flatten)]
        averaging: Averaging,
    },
    /// Sasaki metric on the tangent bundle at (x, y), with its signature.
    Sasaki {
        metric: PathBuf,
        #[command(flatten)]
        point: Point,
        #[command(flatten)]
        numeric: Numeric,
    },
    /// Fundamental tensor at (x, y), with eigenvalues and index.
    Tensor {
        metric: PathBuf,
        #[command(flatten)]
        point: Point,
        #[command(flatten)]
        numeric: Numeric,
    },
    /// Spray coefficients, connection coefficients and the spray vector.
    Spray {
        metric: PathBuf,
        #[command(flatten)]
        point: Point,
        #[command(flatten)]
        numeric: Numeric,
    },
    /// The almost-product tensor by both routes, and its projectors.
    Connection {
        metric: PathBuf,
        #[command(flatten)]
        point: Point,
        #[command(flatten)]
        numeric: Numeric,
    },
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Sampling {
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    /// Cone margin for accepted samples.
    #[arg(long, default_value_t = 1e-6)]
    pub margin: f64,
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    pub x_lo: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub x_hi: f64,
    #[arg(long, default_value_t = -2.0, allow_hyphen_values = true)]
    pub y_lo: f64,
    #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
    pub y_hi: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Numeric {
    /// |det g| at or below this is degenerate.
    #[arg(long, default_value_t = 1e-12)]
    pub degeneracy: f64,
    /// Relative threshold for zero eigenvalues.
    #[arg(long, default_value_t = 1e-8)]
    pub zero_eigenvalue: f64,
    /// Condition numbers above this are logged.
    #[arg(long, default_value_t = 1e12)]
    pub condition_warning: f64,
}

/// Pass thresholds of the residual checks.
#[derive(Debug, Clone, Args, Serialize)]
pub struct Checks {
    /// J(S) = C.
    #[arg(long, default_value_t = 1e-12)]
    pub tol_structural: f64,
    /// Quantities read directly off the jets.
    #[arg(long, default_value_t = 1e-9)]
    pub tol_propagated: f64,
    /// The Euler relation y . dF/dy = F.
    #[arg(long, default_value_t = 1e-10)]
    pub tol_euler: f64,
    /// Checks involving an inverse or a pullback.
    #[arg(long, default_value_t = 1e-8)]
    pub tol_composed: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Point {
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub x: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub y: Vec<f64>,
    /// Cone margin required at the point.
    #[arg(long, default_value_t = 1e-6)]
    pub margin: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Start {
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub x0: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub y0: Vec<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Integration {
    #[arg(long, default_value_t = 5.0)]
    pub tmax: f64,
    /// Local error tolerance (absolute and relative).
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Equally spaced output rows, both ends included.
    #[arg(long, default_value_t = 101, conflicts_with = "every_step")]
    pub rows: usize,
    /// Write one row per accepted step instead.
    #[arg(long)]
    pub every_step: bool,
    #[arg(long, default_value_t = 1e-6)]
    pub margin: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub initial_step: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub min_step: f64,
    #[arg(long, default_value_t = 1_000_000)]
    pub max_steps: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Averaging {
    /// Azimuthal nodes of the first pass.
    #[arg(long, default_value_t = 32)]
    pub resolution: usize,
    /// Convergence threshold on the largest entry change per doubling.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 4)]
    pub max_doublings: usize,
    /// Rotation of the azimuthal nodes.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub phase: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub margin: f64,
}
