use std::fmt::Write as _;

use finsler_core::linalg::Matrix;
use finsler_core::report::{Verdict, VerificationReport};
use serde_json::{Map, Value};

use crate::args::Format;
use crate::manifest::RunManifest;

pub const EXIT_PASS: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_NUMERIC: u8 = 3;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn new(code: u8, error: anyhow::Error) -> Self {
        Failure { code, error }
    }
}

impl From<finsler_core::Error> for Failure {
    fn from(e: finsler_core::Error) -> Self {
        let code = if e.is_numeric_precondition() {
            EXIT_NUMERIC
        } else {
            EXIT_USAGE
        };
        Failure::new(code, e.into())
    }
}

pub fn verdict_code(v: Verdict) -> u8 {
    match v {
        Verdict::Pass => EXIT_PASS,
        Verdict::Inconclusive | Verdict::Fail => EXIT_FAIL,
    }
}

/// One output document: manifest, machine-readable body, text rendering.
pub struct Document {
    pub manifest: RunManifest,
    pub body: Map<String, Value>,
    pub text: String,
}

impl Document {
    pub fn new(manifest: RunManifest) -> Self {
        Document {
            manifest,
            body: Map::new(),
            text: String::new(),
        }
    }

    pub fn field(&mut self, key: &str, value: impl serde::Serialize) -> &mut Self {
        self.body
            .insert(key.to_string(), serde_json::to_value(value).expect("output serializes"));
        self
    }

    pub fn line(&mut self, s: impl AsRef<str>) -> &mut Self {
        self.text.push_str(s.as_ref());
        self.text.push('\n');
        self
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut doc = Map::new();
                doc.insert(
                    "manifest".into(),
                    serde_json::to_value(&self.manifest).expect("manifest serializes"),
                );
                doc.extend(self.body.clone());
                let mut s = serde_json::to_string_pretty(&Value::Object(doc)).expect("document serializes");
                s.push('\n');
                s
            }
            Format::Text => format!("# manifest {}\n{}", self.manifest.to_json_line(), self.text),
        }
    }
}

pub fn sci(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.3e}")
    } else {
        format!("{v}")
    }
}

pub fn vector(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:>13.6e}")).collect();
    format!("[{}]", parts.join(" "))
}

pub fn matrix(m: &Matrix) -> String {
    let mut s = String::new();
    for row in m.to_rows() {
        let _ = writeln!(s, "  {}", vector(&row));
    }
    s.pop();
    s
}

pub fn report_table(r: &VerificationReport) -> String {
    let width = r.checks.iter().map(|c| c.name.len()).max().unwrap_or(5).max(5);
    let mut s = String::new();
    let _ = writeln!(
        s,
        "subject: {}  (seed {}, {} samples)",
        r.subject, r.seed, r.sample_count
    );
    let _ = writeln!(
        s,
        "{:<width$}  {:<12}  {:>12}  {:>10}",
        "check", "verdict", "max residual", "tolerance"
    );
    for c in &r.checks {
        let _ = writeln!(
            s,
            "{:<width$}  {:<12}  {:>12}  {:>10}",
            c.name,
            c.verdict.to_string(),
            sci(c.max_residual),
            format!("{:e}", c.tolerance)
        );
        if c.verdict != Verdict::Pass {
            if let Some(w) = &c.witness {
                let _ = writeln!(s, "{:<width$}  witness x={:?} y={:?}", "", w.x, w.y);
            }
        }
        if let Some(n) = &c.note {
            let _ = writeln!(s, "{:<width$}  note: {n}", "");
        }
    }
    for n in &r.notes {
        let _ = writeln!(s, "{n}");
    }
    let _ = write!(s, "verdict: {}", r.verdict());
    s
}
