use super::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::mc::Estimate;
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

pub const SCHEMA_VERSION: u32 = 1;

/// CSV header shared by every subcommand.
pub const CSV_COLUMNS: [&str; 8] = ["quantity", "R", "t", "s", "n", "estimate", "std_error", "bound"];

/// Standard error of a row; exact values are marked deterministic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum StdError {
    Value(f64),
    #[serde(serialize_with = "deterministic")]
    Deterministic,
}

fn deterministic<S: serde::Serializer>(s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str("deterministic")
}

/// One numeric result.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub quantity: String,
    pub radius: Option<f64>,
    pub t: Option<f64>,
    pub s: Option<f64>,
    pub n: Option<usize>,
    pub estimate: f64,
    pub std_error: StdError,
    pub bound: Option<f64>,
}

impl Row {
    pub fn exact(quantity: &str, estimate: f64) -> Self {
        Self { quantity: quantity.into(), radius: None, t: None, s: None, n: None, estimate, std_error: StdError::Deterministic, bound: None }
    }

    pub fn mc(quantity: &str, e: Estimate) -> Self {
        let std_error = if e.std_error == 0.0 { StdError::Deterministic } else { StdError::Value(e.std_error) };
        Self { std_error, ..Self::exact(quantity, e.value) }
    }

    pub fn at(mut self, radius: Option<f64>, t: Option<f64>, s: Option<f64>, n: Option<usize>) -> Self {
        (self.radius, self.t, self.s, self.n) = (radius, t, s, n);
        self
    }

    pub fn radius(mut self, r: f64) -> Self {
        self.radius = Some(r);
        self
    }

    pub fn times(mut self, t: f64, s: f64) -> Self {
        (self.t, self.s) = (Some(t), Some(s));
        self
    }

    pub fn order(mut self, n: usize) -> Self {
        self.n = Some(n);
        self
    }

    pub fn bound(mut self, b: f64) -> Self {
        self.bound = Some(b);
        self
    }

    fn csv_fields(&self) -> [String; 8] {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:?}")).unwrap_or_default();
        [
            self.quantity.clone(),
            opt(self.radius),
            opt(self.t),
            opt(self.s),
            self.n.map(|n| n.to_string()).unwrap_or_default(),
            format!("{:?}", self.estimate),
            match self.std_error {
                StdError::Value(v) => format!("{v:?}"),
                StdError::Deterministic => "deterministic".into(),
            },
            opt(self.bound),
        ]
    }
}

/// An asserted check; the exit status is 0 iff all pass.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, pass: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), pass, detail: detail.into() }
    }
}

/// JSON summary of a run.
#[derive(Debug, Clone, Serialize)]
pub struct ResultRecord {
    pub schema_version: u32,
    pub experiment_id: String,
    pub subcommand: String,
    pub version: String,
    pub seed: u64,
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub values: BTreeMap<String, f64>,
    pub rows: Vec<Row>,
    pub checks: Vec<Check>,
    pub findings: BTreeMap<String, serde_json::Value>,
    pub extra: BTreeMap<String, serde_json::Value>,
}

/// Version string in `git describe` style.
pub fn version_string() -> String {
    option_env!("HAM_CLT_GIT_DESCRIBE").map(str::to_string).unwrap_or_else(|| format!("v{}", env!("CARGO_PKG_VERSION")))
}

impl ResultRecord {
    pub fn new(subcommand: &str, config: &ExperimentConfig) -> Self {
        let hash = config.hash();
        Self {
            schema_version: SCHEMA_VERSION,
            experiment_id: format!("{subcommand}-{}", &hash[..12]),
            subcommand: subcommand.into(),
            version: version_string(),
            seed: config.seed(),
            config_hash: hash,
            config: config.clone(),
            values: BTreeMap::new(),
            rows: Vec::new(),
            checks: Vec::new(),
            findings: BTreeMap::new(),
            extra: BTreeMap::new(),
        }
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn csv_path(&self, dir: &Path) -> PathBuf {
        dir.join(format!("{}.csv", self.subcommand))
    }

    pub fn json_path(&self, dir: &Path) -> PathBuf {
        dir.join(format!("{}.json", self.subcommand))
    }

    /// Writes `<subcommand>.csv` and `<subcommand>.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        let io = |e: std::io::Error| Error::Numerical(format!("writing outputs: {e}"));
        std::fs::create_dir_all(dir).map_err(io)?;
        let mut w = csv::Writer::from_path(self.csv_path(dir)).map_err(|e| Error::Numerical(e.to_string()))?;
        w.write_record(CSV_COLUMNS).map_err(|e| Error::Numerical(e.to_string()))?;
        for r in &self.rows {
            w.write_record(r.csv_fields()).map_err(|e| Error::Numerical(e.to_string()))?;
        }
        w.flush().map_err(io)?;
        let json = serde_json::to_string_pretty(self).map_err(|e| Error::Numerical(e.to_string()))?;
        std::fs::write(self.json_path(dir), json).map_err(io)
    }
}
