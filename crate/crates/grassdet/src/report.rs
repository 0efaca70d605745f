//! Run configuration, per-check results and the JSON report.

use grassdet_core::{CMat, Field, Subspace, Tolerance};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::failure::{usage, Failure};

pub const SCHEMA_VERSION: u64 = 1;
pub const MIN_DIMS: usize = 2;
pub const MAX_DIMS: usize = 64;

/// Seed, trial count, ambient cap, tolerances and field for a suite run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub trials: usize,
    pub dims: usize,
    pub tol: Tolerance,
    /// `None` alternates real and complex instances by trial parity.
    pub field: Option<Field>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            trials: 20,
            dims: 8,
            tol: Tolerance::default(),
            field: None,
        }
    }
}

impl RunConfig {
    pub fn new(seed: u64, trials: usize, dims: usize, tol: Tolerance, field: Option<Field>) -> Result<Self, Failure> {
        if trials < 1 {
            return Err(usage("--trials must be at least 1"));
        }
        if !(MIN_DIMS..=MAX_DIMS).contains(&dims) {
            return Err(usage(format!("--dims must lie in [{MIN_DIMS}, {MAX_DIMS}], got {dims}")));
        }
        Ok(RunConfig { seed, trials, dims, tol, field })
    }

    pub fn field_for(&self, trial: u64) -> Field {
        match self.field {
            Some(f) => f,
            None if trial % 2 == 0 => Field::Real,
            None => Field::Complex,
        }
    }

    /// Upper end of an ambient range `lo..=hi` after applying the cap.
    pub fn cap(&self, lo: usize, hi: usize) -> usize {
        hi.min(self.dims).max(lo)
    }

    fn to_json(&self) -> Value {
        json!({
            "seed": self.seed,
            "trials": self.trials,
            "dims": self.dims,
            "rank_rel_tol": self.tol.rank_rel_tol,
            "convergence_tol": self.tol.convergence_tol,
            "field": self.field.map(Field::name).unwrap_or("mixed"),
        })
    }
}

/// Fingerprint of the inputs of one case.
#[derive(Default)]
pub struct InputDigest(Sha256);

impl InputDigest {
    pub fn matrix(mut self, m: &CMat) -> Self {
        self.0.update((m.nrows() as u64).to_le_bytes());
        self.0.update((m.ncols() as u64).to_le_bytes());
        for z in m.iter() {
            self.0.update(z.re.to_le_bytes());
            self.0.update(z.im.to_le_bytes());
        }
        self
    }

    pub fn subspace(self, s: &Subspace) -> Self {
        self.matrix(s.basis())
    }

    pub fn number(mut self, x: f64) -> Self {
        self.0.update(x.to_le_bytes());
        self
    }

    pub fn int(mut self, k: u64) -> Self {
        self.0.update(k.to_le_bytes());
        self
    }

    pub fn finish(self) -> String {
        self.0.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// One evaluated instance.
#[derive(Clone, Debug, PartialEq)]
pub struct Case {
    pub trial: u64,
    pub inputs: String,
    pub values: Map<String, Value>,
    pub residual: f64,
}

/// All instances of one named property.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub threshold: f64,
    pub cases: Vec<Case>,
    /// Generated instances outside the property's hypotheses.
    pub skipped: usize,
    /// Unexpected errors on admissible instances, by trial.
    pub errors: Vec<(u64, String)>,
}

impl CheckResult {
    pub fn new(name: impl Into<String>, threshold: f64) -> Self {
        CheckResult {
            name: name.into(),
            threshold,
            cases: Vec::new(),
            skipped: 0,
            errors: Vec::new(),
        }
    }

    fn case_passes(&self, c: &Case) -> bool {
        c.residual.is_finite() && c.residual < self.threshold
    }

    pub fn failures(&self) -> usize {
        self.cases.iter().filter(|c| !self.case_passes(c)).count() + self.errors.len()
    }

    pub fn max_residual(&self) -> f64 {
        self.cases.iter().map(|c| c.residual).fold(0.0, f64::max)
    }

    pub fn pass(&self) -> bool {
        self.failures() == 0
    }

    fn to_json(&self) -> Value {
        let records: Vec<Value> = self
            .cases
            .iter()
            .map(|c| {
                json!({
                    "trial": c.trial,
                    "inputs": c.inputs,
                    "values": c.values,
                    "residual": finite_or_null(c.residual),
                    "pass": self.case_passes(c),
                })
            })
            .collect();
        let errors: Vec<Value> = self.errors.iter().map(|(t, m)| json!({"trial": t, "error": m})).collect();
        json!({
            "name": self.name,
            "threshold": self.threshold,
            "cases": self.cases.len(),
            "skipped": self.skipped,
            "failures": self.failures(),
            "max_residual": finite_or_null(self.max_residual()),
            "pass": self.pass(),
            "errors": errors,
            "records": records,
        })
    }
}

fn finite_or_null(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

/// The output of one command.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub suite: String,
    pub config: Option<RunConfig>,
    pub checks: Vec<CheckResult>,
    pub wall_time: f64,
}

impl Report {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(CheckResult::pass)
    }

    pub fn max_residual(&self) -> f64 {
        self.checks.iter().map(CheckResult::max_residual).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema": SCHEMA_VERSION,
            "suite": self.suite,
            "config": self.config.as_ref().map(RunConfig::to_json),
            "pass": self.pass(),
            "max_residual": finite_or_null(self.max_residual()),
            "checks": self.checks.iter().map(CheckResult::to_json).collect::<Vec<_>>(),
            "wall_time_s": self.wall_time,
        })
    }

    /// Pretty JSON with sorted keys; `wall_time_s` sits on its own line.
    pub fn render(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json()).expect("report serializes");
        s.push('\n');
        s
    }
}
