//! Per-check residual bookkeeping shared by validation, the identity suite
//! and the isometry checks.
//!
//! A check passes when its largest residual is within `tolerance`, fails
//! when it exceeds `fail_threshold`, and is inconclusive in between.
//! Sampling can refute an identity but never prove it.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::geometry::BundlePoint;

/// Residuals above this are a clear failure for the tolerance-based checks.
pub const FAIL_THRESHOLD: f64 = 1e-3;

/// Pass thresholds of the tolerance-based checks.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CheckTolerances {
    /// `J(S) = C`, a pure relabelling of components.
    pub structural: f64,
    /// Quantities read directly off the jets.
    pub propagated: f64,
    /// The Euler relation `y . dF/dy = F`.
    pub euler: f64,
    /// Quantities that involve an inverse or a composition of maps.
    pub composed: f64,
}

impl Default for CheckTolerances {
    fn default() -> Self {
        CheckTolerances {
            structural: 1e-12,
            propagated: 1e-9,
            euler: 1e-10,
            composed: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "SCREAMING_SNAKE_CASE"))]
pub enum Verdict {
    Pass,
    Inconclusive,
    Fail,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Inconclusive => "INCONCLUSIVE",
            Verdict::Fail => "FAIL",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CheckResult {
    pub name: String,
    pub tolerance: f64,
    pub fail_threshold: f64,
    pub max_residual: f64,
    /// Where the largest residual was first attained.
    pub witness: Option<BundlePoint>,
    pub samples: usize,
    pub verdict: Verdict,
    #[cfg_attr(feature = "serde", serde(skip_serializing_if = "Option::is_none"))]
    pub note: Option<String>,
}

impl CheckResult {
    /// A graded check: PASS ≤ `tolerance`, FAIL > [`FAIL_THRESHOLD`].
    pub fn graded(name: &str, tolerance: f64) -> Self {
        Self::new(name, tolerance, FAIL_THRESHOLD.max(tolerance))
    }

    /// A yes/no check: anything above `tolerance` fails.
    pub fn exact(name: &str, tolerance: f64) -> Self {
        Self::new(name, tolerance, tolerance)
    }

    fn new(name: &str, tolerance: f64, fail_threshold: f64) -> Self {
        CheckResult {
            name: name.to_string(),
            tolerance,
            fail_threshold,
            max_residual: 0.0,
            witness: None,
            samples: 0,
            verdict: Verdict::Pass,
            note: None,
        }
    }

    /// Record one residual; NaN counts as infinitely bad.
    pub fn record(&mut self, residual: f64, at: &BundlePoint) {
        let r = if residual.is_nan() { f64::INFINITY } else { residual };
        self.samples += 1;
        if self.witness.is_none() || r > self.max_residual {
            self.max_residual = self.max_residual.max(r);
            self.witness = Some(at.clone());
        }
        self.verdict = self.grade(self.max_residual);
    }

    pub fn with_note(mut self, note: &str) -> Self {
        self.note = Some(note.to_string());
        self
    }

    fn grade(&self, r: f64) -> Verdict {
        if r <= self.tolerance {
            Verdict::Pass
        } else if r > self.fail_threshold {
            Verdict::Fail
        } else {
            Verdict::Inconclusive
        }
    }

    /// Associative merge: max residual, witness of the larger side (left on ties).
    pub fn merge(mut self, other: &CheckResult) -> CheckResult {
        if other.max_residual > self.max_residual {
            self.max_residual = other.max_residual;
            self.witness = other.witness.clone();
        } else if self.witness.is_none() {
            self.witness = other.witness.clone();
        }
        self.samples += other.samples;
        self.verdict = self.grade(self.max_residual);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct VerificationReport {
    pub subject: String,
    pub seed: u64,
    pub sample_count: usize,
    pub checks: Vec<CheckResult>,
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn new(subject: &str, seed: u64, sample_count: usize) -> Self {
        VerificationReport {
            subject: subject.to_string(),
            seed,
            sample_count,
            checks: Vec::new(),
            notes: Vec::new(),
        }
    }

    /// The worst verdict over all checks (PASS when there are none).
    pub fn verdict(&self) -> Verdict {
        self.checks.iter().map(|c| c.verdict).max().unwrap_or(Verdict::Pass)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn passed(&self, name: &str) -> bool {
        self.check(name).is_some_and(|c| c.verdict == Verdict::Pass)
    }

    pub fn extend(&mut self, other: VerificationReport) {
        self.checks.extend(other.checks);
        self.notes.extend(other.notes);
    }
}
