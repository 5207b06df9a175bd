use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::{anyhow, Context};
use finsler_core::averaging::{average_metric, AveragingOptions};
use finsler_core::catalog::{Interval, Region, SampleConfig};
use finsler_core::geodesic::{
    conservation_report, integrate_geodesic_with, path_rows, GeodesicOptions, GeodesicPath, SampleTimes, Status,
};
use finsler_core::geometry::{
    fundamental_tensor, gamma_block, gamma_via_lie, horizontal_projector, identity_suite, sasaki_matrix,
    spray_coefficients, spray_vector, validate_metric_with, vertical_projector, BundlePoint, IdentityConfig,
    Tolerances,
};
use finsler_core::isometry::verify_all_with;
use finsler_core::report::CheckTolerances;
use finsler_core::MetricDef;

use crate::args::{self, Cli, Command};
use crate::input::{load_map, load_metric};
use crate::manifest::RunManifest;
use crate::output::{self, verdict_code, Document, Failure, EXIT_FAIL, EXIT_NUMERIC, EXIT_PASS, EXIT_USAGE};

type Outcome = Result<u8, Failure>;

pub fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Validate {
            metric,
            sampling,
            numeric,
            checks,
        } => validate(cli, metric, sampling, numeric, checks),
        Command::Identities {
            metric,
            sampling,
            numeric,
            checks,
            index,
            debug_spray_offset,
        } => identities(cli, metric, sampling, numeric, checks, *index, *debug_spray_offset),
        Command::Verify {
            metric,
            map,
            sampling,
            checks,
        } => verify(cli, metric, map, sampling, checks),
        Command::Geodesic {
            metric,
            start,
            integration,
            out,
        } => geodesic(cli, metric, start, integration, out.as_deref()),
        Command::Average { metric, x, averaging } => average(cli, metric, x, averaging),
        Command::Sasaki { metric, point, numeric } => pointwise(cli, "sasaki", metric, point, numeric, sasaki_body),
        Command::Tensor { metric, point, numeric } => pointwise(cli, "tensor", metric, point, numeric, tensor_body),
        Command::Spray { metric, point, numeric } => pointwise(cli, "spray", metric, point, numeric, spray_body),
        Command::Connection { metric, point, numeric } => {
            pointwise(cli, "connection", metric, point, numeric, connection_body)
        }
    }
}

fn emit(cli: &Cli, doc: &Document) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    out.write_all(doc.render(cli.format).as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| Failure::new(EXIT_USAGE, anyhow!("writing output: {e}")))
}

fn sample_config(s: &args::Sampling) -> SampleConfig {
    SampleConfig {
        seed: s.seed,
        count: s.samples,
        x_box: Region::Uniform(Interval::new(s.x_lo, s.x_hi)),
        y_box: Region::Uniform(Interval::new(s.y_lo, s.y_hi)),
        margin: s.margin,
    }
}

fn tolerances(n: &args::Numeric, margin: f64) -> Tolerances {
    Tolerances {
        cone_margin: margin,
        degeneracy: n.degeneracy,
        condition_warning: n.condition_warning,
        zero_eigenvalue: n.zero_eigenvalue,
    }
}

fn check_tolerances(c: &args::Checks) -> CheckTolerances {
    CheckTolerances {
        structural: c.tol_structural,
        propagated: c.tol_propagated,
        euler: c.tol_euler,
        composed: c.tol_composed,
    }
}

fn check_dim(m: &MetricDef, what: &str, v: &[f64]) -> Result<(), Failure> {
    if v.len() == m.dim {
        Ok(())
    } else {
        Err(Failure::new(
            EXIT_USAGE,
            anyhow!(
                "{what} has {} components but {} has dimension {}",
                v.len(),
                m.name,
                m.dim
            ),
        ))
    }
}

fn validate(
    cli: &Cli,
    path: &Path,
    sampling: &args::Sampling,
    numeric: &args::Numeric,
    checks: &args::Checks,
) -> Outcome {
    let m = load_metric(path)?;
    let v = validate_metric_with(
        &m,
        &sample_config(sampling),
        &tolerances(numeric, sampling.margin),
        &check_tolerances(checks),
    )?;
    let manifest = RunManifest::new("validate", &[path])
        .with(sampling)
        .with(numeric)
        .with(checks);
    let mut doc = Document::new(manifest);
    doc.field("verdict", v.report.verdict())
        .field("index", v.index)
        .field("report", &v.report);
    doc.line(output::report_table(&v.report));
    doc.line(match v.index {
        Some(k) => format!("index k = {k}"),
        None => "index k undefined".to_string(),
    });
    emit(cli, &doc)?;
    Ok(verdict_code(v.report.verdict()))
}

fn identities(
    cli: &Cli,
    path: &Path,
    sampling: &args::Sampling,
    numeric: &args::Numeric,
    checks: &args::Checks,
    index: Option<usize>,
    offset: f64,
) -> Outcome {
    let m = load_metric(path)?;
    let cfg = IdentityConfig {
        sample: sample_config(sampling),
        tolerances: tolerances(numeric, sampling.margin),
        checks: check_tolerances(checks),
        spray_offset: offset,
        expected_index: index,
    };
    let r = identity_suite(&m, &cfg)?;
    let manifest = RunManifest::new("identities", &[path])
        .with(sampling)
        .with(numeric)
        .with(checks)
        .knob("index", index)
        .knob("debug_spray_offset", offset);
    let mut doc = Document::new(manifest);
    doc.field("verdict", r.verdict()).field("report", &r);
    doc.line(output::report_table(&r));
    emit(cli, &doc)?;
    Ok(verdict_code(r.verdict()))
}

fn verify(cli: &Cli, metric: &Path, map: &Path, sampling: &args::Sampling, checks: &args::Checks) -> Outcome {
    let m = load_metric(metric)?;
    let f = load_map(map)?;
    let r = verify_all_with(&m, &f, &sample_config(sampling), &check_tolerances(checks))?;
    let manifest = RunManifest::new("verify", &[metric, map]).with(sampling).with(checks);
    let mut doc = Document::new(manifest);
    doc.field("verdict", r.verdict()).field("report", &r);
    doc.line(output::report_table(&r));
    emit(cli, &doc)?;
    Ok(verdict_code(r.verdict()))
}

fn write_csv(w: impl Write, manifest: &RunManifest, m: &MetricDef, path: &GeodesicPath) -> anyhow::Result<()> {
    let mut w = BufWriter::new(w);
    writeln!(w, "# manifest {}", manifest.to_json_line())?;
    let mut csv = csv::Writer::from_writer(w);
    let n = m.dim;
    let header: Vec<String> = std::iter::once("t".to_string())
        .chain((1..=n).map(|i| format!("x{i}")))
        .chain((1..=n).map(|i| format!("y{i}")))
        .chain(std::iter::once("F".to_string()))
        .collect();
    csv.write_record(&header)?;
    for row in path_rows(m, path)? {
        csv.write_record(row.iter().map(|v| format!("{v:.16e}")))?;
    }
    csv.flush()?;
    Ok(())
}

fn geodesic(
    cli: &Cli,
    path: &Path,
    start: &args::Start,
    integration: &args::Integration,
    out: Option<&Path>,
) -> Outcome {
    let m = load_metric(path)?;
    check_dim(&m, "--x0", &start.x0)?;
    check_dim(&m, "--y0", &start.y0)?;
    let opts = GeodesicOptions {
        t_max: integration.tmax,
        tol: integration.tol,
        output: if integration.every_step {
            SampleTimes::Steps
        } else {
            SampleTimes::Uniform(integration.rows)
        },
        cone_margin: integration.margin,
        initial_step: integration.initial_step,
        min_step: integration.min_step,
        max_steps: integration.max_steps,
    };
    let p0 = BundlePoint::new(start.x0.clone(), start.y0.clone());
    let geo = integrate_geodesic_with(&m, &p0, &opts)?;
    let drift = conservation_report(&m, &geo)?;

    let mut inputs = vec![path];
    if let Some(o) = out {
        inputs.push(o);
    }
    let manifest = RunManifest::new("geodesic", &inputs).with(start).with(integration);
    match out {
        Some(file) => {
            let f = File::create(file).with_context(|| format!("creating {}", file.display()));
            let f = f.map_err(|e| Failure::new(EXIT_USAGE, e))?;
            write_csv(f, &manifest, &m, &geo).map_err(|e| Failure::new(EXIT_USAGE, e))?;
        }
        None => write_csv(io::stdout().lock(), &manifest, &m, &geo).map_err(|e| Failure::new(EXIT_USAGE, e))?,
    }

    let last = geo.last();
    let mut doc = Document::new(manifest);
    doc.field("status", geo.status)
        .field("rows", geo.samples.len())
        .field("accepted_steps", geo.accepted_steps)
        .field("rejected_steps", geo.rejected_steps)
        .field("f_drift", drift)
        .field("final", last);
    doc.line(format!("status: {:?}", geo.status))
        .line(format!(
            "steps: {} accepted, {} rejected",
            geo.accepted_steps, geo.rejected_steps
        ))
        .line(format!("rows: {}", geo.samples.len()))
        .line(format!(
            "final t = {}  x = {}  y = {}",
            last.t,
            output::vector(&last.x),
            output::vector(&last.y)
        ))
        .line(format!("max relative F drift: {}", output::sci(drift)));
    let summary = doc.render(cli.format);
    // with the CSV on stdout the summary moves to stderr
    if out.is_some() {
        emit(cli, &doc)?;
    } else {
        eprint!("{summary}");
    }
    Ok(match geo.status {
        Status::Completed => EXIT_PASS,
        Status::LeftCone => EXIT_FAIL,
        Status::StepFailure => EXIT_NUMERIC,
    })
}

fn average(cli: &Cli, path: &Path, x: &[f64], a: &args::Averaging) -> Outcome {
    let m = load_metric(path)?;
    check_dim(&m, "--x", x)?;
    let opts = AveragingOptions {
        resolution: a.resolution,
        tolerance: a.tol,
        max_doublings: a.max_doublings,
        phase: a.phase,
        cone_margin: a.margin,
    };
    let h = average_metric(&m, x, &opts)?;
    let mut doc = Document::new(RunManifest::new("average", &[path]).knob("x", x.to_vec()).with(a));
    doc.field("h", &h.h)
        .field("resolution", h.resolution)
        .field("trace", &h.trace);
    doc.line(format!("h at x = {}:", output::vector(x)))
        .line(output::matrix(&h.h))
        .line(format!("converged at resolution {}", h.resolution));
    for step in &h.trace {
        let change = step.max_change.map(output::sci).unwrap_or_else(|| "-".into());
        doc.line(format!("  resolution {:>5}  max change {change}", step.resolution));
    }
    emit(cli, &doc)?;
    Ok(EXIT_PASS)
}

type Body = fn(&MetricDef, &BundlePoint, &Tolerances, &mut Document) -> Result<(), Failure>;

fn pointwise(
    cli: &Cli,
    name: &'static str,
    path: &Path,
    point: &args::Point,
    numeric: &args::Numeric,
    body: Body,
) -> Outcome {
    let m = load_metric(path)?;
    check_dim(&m, "--x", &point.x)?;
    check_dim(&m, "--y", &point.y)?;
    let p = BundlePoint::new(point.x.clone(), point.y.clone());
    let mut doc = Document::new(RunManifest::new(name, &[path]).with(point).with(numeric));
    doc.field("point", &p);
    doc.line(format!("at x = {}  y = {}", output::vector(&p.x), output::vector(&p.y)));
    body(&m, &p, &tolerances(numeric, point.margin), &mut doc)?;
    emit(cli, &doc)?;
    Ok(EXIT_PASS)
}

fn sasaki_body(m: &MetricDef, p: &BundlePoint, tol: &Tolerances, doc: &mut Document) -> Result<(), Failure> {
    let gf = sasaki_matrix(m, p, tol)?;
    doc.field("matrix", &gf.matrix)
        .field("signature", gf.signature)
        .field("index", gf.index)
        .field("det", gf.det);
    doc.line("Sasaki metric:")
        .line(output::matrix(&gf.matrix))
        .line(format!(
            "signature: {} positive, {} negative, {} zero; index {}",
            gf.signature.positive, gf.signature.negative, gf.signature.zero, gf.index
        ));
    Ok(())
}

fn tensor_body(m: &MetricDef, p: &BundlePoint, tol: &Tolerances, doc: &mut Document) -> Result<(), Failure> {
    let t = fundamental_tensor(m, p, tol)?;
    doc.field("g", &t.g)
        .field("index", t.index)
        .field("det", t.det)
        .field("eigenvalues", &t.eigenvalues);
    doc.line("fundamental tensor g:")
        .line(output::matrix(&t.g))
        .line(format!("eigenvalues: {}", output::vector(&t.eigenvalues)))
        .line(format!("det = {}  index = {}", output::sci(t.det), t.index));
    Ok(())
}

fn spray_body(m: &MetricDef, p: &BundlePoint, tol: &Tolerances, doc: &mut Document) -> Result<(), Failure> {
    let s = spray_coefficients(m, p, tol)?;
    let v = spray_vector(m, p, tol)?;
    doc.field("coefficients", &s.coefficients)
        .field("connection", &s.connection)
        .field("spray", &v);
    doc.line(format!("G = {}", output::vector(&s.coefficients)))
        .line("N = dG/dy:")
        .line(output::matrix(&s.connection))
        .line(format!("S = (y, -2G) = {}", output::vector(&v)));
    Ok(())
}

fn connection_body(m: &MetricDef, p: &BundlePoint, tol: &Tolerances, doc: &mut Document) -> Result<(), Failure> {
    let lie = gamma_via_lie(m, p, tol)?;
    let block = gamma_block(m, p, tol)?;
    let diff = lie.matrix.max_abs_diff(&block.matrix);
    let h = horizontal_projector(&lie);
    let v = vertical_projector(&lie);
    doc.field("gamma_lie", &lie.matrix)
        .field("gamma_block", &block.matrix)
        .field("max_difference", diff)
        .field("horizontal_projector", &h)
        .field("vertical_projector", &v);
    doc.line("Gamma (Lie derivative route):")
        .line(output::matrix(&lie.matrix))
        .line("Gamma (connection block route):")
        .line(output::matrix(&block.matrix))
        .line(format!("max |difference| = {}", output::sci(diff)))
        .line("horizontal projector:")
        .line(output::matrix(&h))
        .line("vertical projector:")
        .line(output::matrix(&v));
    Ok(())
}
