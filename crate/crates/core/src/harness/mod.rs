//! Seeded suite runner and report emitter behind the `holoform` CLI.
//!
//! Every check draws from its own [`SampleRng`] stream keyed by
//! `(seed, check name)`. This keeps results independent of thread scheduling
//! and of which other checks run in the same invocation.

mod report;
mod suites;

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SampleRng;

pub use report::{emit_report, parse_report, write_report, ReportFormat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    LieIdentities,
    PslCurvature,
    GSpace,
    Quadrics,
    RotpiCover,
    SymmetricScaling,
    SymmetricCurvature,
    All,
}

impl Suite {
    pub const CONCRETE: [Suite; 7] = [
        Suite::LieIdentities,
        Suite::PslCurvature,
        Suite::GSpace,
        Suite::Quadrics,
        Suite::RotpiCover,
        Suite::SymmetricScaling,
        Suite::SymmetricCurvature,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::LieIdentities => "lie-identities",
            Suite::PslCurvature => "psl-curvature",
            Suite::GSpace => "g-space",
            Suite::Quadrics => "quadrics",
            Suite::RotpiCover => "rotpi-cover",
            Suite::SymmetricScaling => "symmetric-scaling",
            Suite::SymmetricCurvature => "symmetric-curvature",
            Suite::All => "all",
        }
    }

    /// Names of the checks this suite runs, in report order.
    pub fn check_names(self) -> Vec<&'static str> {
        suites::checks_for(self).into_iter().map(|c| c.name).collect()
    }

    /// Default tolerance of a named check, if it belongs to this suite.
    pub fn default_tolerance(self, check: &str) -> Option<f64> {
        suites::checks_for(self).into_iter().find(|c| c.name == check).map(|c| c.tolerance)
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::CONCRETE
            .into_iter()
            .chain([Suite::All])
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::UnknownSuite(s.to_owned()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub suite: Suite,
    pub seed: u64,
    pub samples: usize,
    pub tolerance_overrides: BTreeMap<String, f64>,
    pub output_path: Option<PathBuf>,
    pub timing: bool,
}

impl SuiteConfig {
    pub fn new(suite: Suite, seed: u64, samples: usize) -> Self {
        Self { suite, seed, samples, tolerance_overrides: BTreeMap::new(), output_path: None, timing: false }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::InvalidArgument("samples must be at least 1"));
        }
        let names = self.suite.check_names();
        for (name, tol) in &self.tolerance_overrides {
            if !names.contains(&name.as_str()) {
                return Err(Error::UnknownCheck(name.clone()));
            }
            if !(tol.is_finite() && *tol > 0.0) {
                return Err(Error::InvalidArgument("tolerance overrides must be positive"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub suite: Suite,
    pub name: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub samples: usize,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
    pub checks: Vec<CheckOutcome>,
}

impl SuiteReport {
    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

fn run_check(spec: &suites::CheckSpec, cfg: &SuiteConfig) -> CheckOutcome {
    let tolerance = cfg.tolerance_overrides.get(spec.name).copied().unwrap_or(spec.tolerance);
    let mut rng = SampleRng::for_stream(cfg.seed, spec.name);
    let (max_residual, error) = match (spec.run)(&mut rng, cfg.samples) {
        Ok(r) if r.is_finite() => (r, None),
        Ok(_) => (f64::MAX, Some(Error::NonFinite("residual").to_string())),
        Err(e) => (f64::MAX, Some(e.to_string())),
    };
    CheckOutcome {
        suite: spec.suite,
        name: spec.name.to_owned(),
        max_residual,
        tolerance,
        pass: error.is_none() && max_residual < tolerance,
        error,
    }
}

pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    cfg.validate()?;
    let start = Instant::now();
    let checks: Vec<CheckOutcome> = suites::checks_for(cfg.suite).par_iter().map(|spec| run_check(spec, cfg)).collect();
    let wall_time_ms = cfg.timing.then(|| start.elapsed().as_secs_f64() * 1e3);
    Ok(SuiteReport {
        suite: cfg.suite,
        seed: cfg.seed,
        samples: cfg.samples,
        pass: checks.iter().all(|c| c.pass),
        wall_time_ms,
        checks,
    })
}
