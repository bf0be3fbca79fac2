//! Named property suites. Each suite evaluates one family of estimates on seeded
//! data and records every comparison as a [`Case`] in a deterministic
//! [`SuiteReport`].

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

mod harmonic;
mod kernel_suites;
mod linear;
pub mod quadrature;
mod scaling_suite;
mod solver;

pub use harmonic::{orthogonality, product};
pub use kernel_suites::{kernel_oracle, pointwise};
pub use linear::linear;
pub use quadrature::time_integral;
pub use scaling_suite::scaling;
pub use solver::{fixed_point, large_data};

/// Whether a case asserts an estimate or demonstrates that a violating input is caught.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseKind {
    Check,
    NegativeControl,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

/// One comparison of a measured quantity against its bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Case {
    pub name: String,
    pub kind: CaseKind,
    pub inputs: BTreeMap<String, Value>,
    pub measured: Option<f64>,
    pub bound: Option<f64>,
    pub ratio: Option<f64>,
    /// Whether the asserted inequality held (or, for rejections, whether the input was accepted).
    pub holds: bool,
    pub pass: bool,
    pub note: String,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

impl Case {
    fn new(name: &str, measured: Option<f64>, bound: Option<f64>, holds: bool) -> Self {
        let ratio = match (measured, bound) {
            (Some(m), Some(b)) if b != 0.0 => finite(m / b),
            (Some(m), Some(_)) if m == 0.0 => Some(0.0),
            _ => None,
        };
        Case {
            name: name.to_string(),
            kind: CaseKind::Check,
            inputs: BTreeMap::new(),
            measured,
            bound,
            ratio,
            holds,
            pass: holds,
            note: String::new(),
        }
    }

    /// `measured <= bound`; a NaN measurement fails.
    pub fn at_most(name: &str, measured: f64, bound: f64) -> Self {
        Self::new(name, finite(measured), finite(bound), measured <= bound)
    }

    /// `measured >= bound`.
    pub fn at_least(name: &str, measured: f64, bound: f64) -> Self {
        Self::new(name, finite(measured), finite(bound), measured >= bound)
    }

    /// A boolean property, recorded as 1 (true) against the bound 1.
    pub fn flag(name: &str, value: bool) -> Self {
        Self::new(name, Some(if value { 1.0 } else { 0.0 }), Some(1.0), value)
    }

    /// An operation that was expected to succeed; errors fail the case.
    pub fn from_result<T>(name: &str, r: &Result<T>) -> Self {
        match r {
            Ok(_) => Self::flag(name, true),
            Err(e) => Self::flag(name, false).note(&e.to_string()),
        }
    }

    /// Negative control expecting the operation to be refused.
    pub fn rejection<T>(name: &str, r: Result<T>) -> Self {
        let mut c = Self::new(name, None, None, r.is_ok());
        c.kind = CaseKind::NegativeControl;
        c.pass = !c.holds;
        c.note = match r {
            Ok(_) => "input was accepted".to_string(),
            Err(e) => format!("rejected: {e}"),
        };
        c
    }

    /// Turn a check into a negative control: it passes when the inequality is violated.
    pub fn negative(mut self) -> Self {
        self.kind = CaseKind::NegativeControl;
        self.pass = !self.holds;
        self
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.inputs.insert(key.to_string(), value.into());
        self
    }

    pub fn note(mut self, text: &str) -> Self {
        self.note = text.to_string();
        self
    }
}

/// Outcome of one suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite_name: String,
    /// The estimate family the suite certifies.
    pub anchor: String,
    pub seed: u64,
    pub verdict: Verdict,
    pub fitted_constants: BTreeMap<String, f64>,
    pub cases: Vec<Case>,
}

impl SuiteReport {
    pub fn new(name: &str, anchor: &str, seed: u64) -> Self {
        SuiteReport {
            suite_name: name.to_string(),
            anchor: anchor.to_string(),
            seed,
            verdict: Verdict::Pass,
            fitted_constants: BTreeMap::new(),
            cases: Vec::new(),
        }
    }

    pub fn push(&mut self, case: Case) {
        self.cases.push(case);
    }

    pub fn constant(&mut self, key: &str, value: f64) {
        self.fitted_constants.insert(key.to_string(), value);
    }

    /// Settle the verdict from the cases; an empty suite fails.
    pub fn finish(mut self) -> Self {
        let ok = !self.cases.is_empty() && self.cases.iter().all(|c| c.pass);
        self.verdict = if ok { Verdict::Pass } else { Verdict::Fail };
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Case> {
        self.cases.iter().filter(|c| !c.pass)
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    match x {
        Some(v) => format!("{v:.4e}"),
        None => "-".to_string(),
    }
}

/// Fixed-width table with one row per case.
pub fn summary_table(reports: &[SuiteReport]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<14} {:<52} {:<8} {:>12} {:>12} {:>12}  {}",
        "suite", "case", "kind", "measured", "bound", "ratio", "status"
    );
    for r in reports {
        for c in &r.cases {
            let kind = match c.kind {
                CaseKind::Check => "check",
                CaseKind::NegativeControl => "control",
            };
            let _ = writeln!(
                out,
                "{:<14} {:<52} {:<8} {:>12} {:>12} {:>12}  {}",
                r.suite_name,
                c.name,
                kind,
                fmt_opt(c.measured),
                fmt_opt(c.bound),
                fmt_opt(c.ratio),
                if c.pass { "PASS" } else { "FAIL" }
            );
        }
        let _ = writeln!(
            out,
            "{:<14} {:<52} verdict: {}",
            r.suite_name,
            format!("({} cases)", r.cases.len()),
            if r.passed() { "PASS" } else { "FAIL" }
        );
    }
    out
}

type SuiteFn = fn(u64) -> Result<SuiteReport>;

/// Registered suites in execution order.
pub const SUITES: &[(&str, SuiteFn)] = &[
    ("kernel_oracle", kernel_oracle),
    ("pointwise", pointwise),
    ("linear", linear),
    ("time_integral", time_integral),
    ("product", product),
    ("orthogonality", orthogonality),
    ("scaling", scaling),
    ("fixed_point", fixed_point),
    ("large_data", large_data),
];

pub fn suite_names() -> Vec<&'static str> {
    SUITES.iter().map(|(n, _)| *n).collect()
}

/// Run one named suite. A suite that aborts with an error yields a failing report
/// holding that error.
pub fn run_suite(name: &str, seed: u64) -> Result<SuiteReport> {
    let (_, f) = SUITES
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::Config(format!("unknown suite '{name}' (known: {}, all)", suite_names().join(", "))))?;
    Ok(match f(seed) {
        Ok(r) => r,
        Err(e) => {
            let mut r = SuiteReport::new(name, "aborted", seed);
            r.push(Case::flag("suite completed", false).note(&e.to_string()));
            r.finish()
        }
    })
}

/// Expand `all` into every suite name; other names pass through after validation.
pub fn resolve_suites(name: &str) -> Result<Vec<&'static str>> {
    if name == "all" {
        return Ok(suite_names());
    }
    SUITES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(n, _)| vec![*n])
        .ok_or_else(|| Error::Config(format!("unknown suite '{name}' (known: {}, all)", suite_names().join(", "))))
}

/// Seeded generator for one suite; every suite draws from its own stream.
pub(crate) fn suite_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `max/min − 1` over the values.
pub(crate) fn drift(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        max / min - 1.0
    } else {
        f64::INFINITY
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_requires_every_case() {
        let mut r = SuiteReport::new("t", "a", 1);
        r.push(Case::at_most("ok", 1.0, 2.0));
        r.push(Case::at_most("bad", 3.0, 2.0).negative());
        assert!(r.clone().finish().passed());
        r.push(Case::at_least("low", 1.0, 2.0));
        assert!(!r.finish().passed());
        assert!(!SuiteReport::new("empty", "a", 0).finish().passed());
    }

    #[test]
    fn nan_measurement_fails() {
        let c = Case::at_most("nan", f64::NAN, 1.0);
        assert!(!c.pass);
        assert_eq!(c.measured, None);
    }

    #[test]
    fn rejection_control_passes_on_error() {
        let c = Case::rejection::<()>("r", Err(Error::Domain("x".into())));
        assert!(c.pass && !c.holds);
        assert!(!Case::rejection("r", Ok(())).pass);
    }

    #[test]
    fn unknown_suite_is_config_error() {
        assert!(matches!(run_suite("nope", 0), Err(Error::Config(_))));
        assert!(matches!(resolve_suites("nope"), Err(Error::Config(_))));
        assert_eq!(resolve_suites("all").unwrap().len(), SUITES.len());
    }

    #[test]
    fn drift_of_constant_values_is_zero() {
        assert_eq!(drift(&[2.0, 2.0]), 0.0);
        assert!((drift(&[1.0, 1.1]) - 0.1).abs() < 1e-12);
    }
}
