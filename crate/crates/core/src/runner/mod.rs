//! Config-driven experiment orchestration with CSV and JSON outputs.
//!
//! Exit status: 0 when every asserted check passes, 1 when a check fails,
//! 2 for an invalid configuration and 3 for a numerical failure.

mod commands;
pub mod config;
pub mod report;

pub use commands::Failure;
pub use config::{ConfigError, ExperimentConfig, Overrides};
pub use report::{Check, ResultRecord, Row, StdError, CSV_COLUMNS, SCHEMA_VERSION};

use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Constants,
    Variance,
    Bounds,
    Simulate,
    Clt,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Constants => "constants",
            Subcommand::Variance => "variance",
            Subcommand::Bounds => "bounds",
            Subcommand::Simulate => "simulate",
            Subcommand::Clt => "clt",
        }
    }
}

/// Result of a run: exit status, a one-line message and the written files.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub exit_code: i32,
    pub message: String,
    pub outputs: Vec<PathBuf>,
    pub record: Option<ResultRecord>,
}

impl Outcome {
    fn fail(code: i32, message: String) -> Self {
        Self { exit_code: code, message, outputs: Vec::new(), record: None }
    }
}

/// Runs a subcommand on config text (`source` names the file in messages).
pub fn run_text(sub: Subcommand, text: &str, source: &str, overrides: &Overrides) -> Outcome {
    let cfg = match ExperimentConfig::parse(text, overrides) {
        Ok(c) => c,
        Err(e) => {
            let at = e.line.map(|l| format!(":{l}")).unwrap_or_default();
            return Outcome::fail(EXIT_CONFIG, format!("{source}{at}: {}", e.message));
        }
    };
    let dir = PathBuf::from(&cfg.output.dir);
    let result = match sub {
        Subcommand::Constants => commands::constants(&cfg),
        Subcommand::Variance => commands::variance(&cfg),
        Subcommand::Bounds => commands::bounds(&cfg),
        Subcommand::Clt => commands::clt(&cfg),
        Subcommand::Simulate => commands::simulate(&cfg).and_then(|(rec, labels, values)| {
            write_samples(&dir, &labels, &values).map_err(|error| Failure { quantity: "samples_csv".into(), error })?;
            Ok(rec)
        }),
    };
    let rec = match result {
        Ok(r) => r,
        Err(f) => return Outcome::fail(EXIT_NUMERICAL, format!("numerical failure in {}: {}", f.quantity, f.error)),
    };
    if let Err(e) = rec.write(&dir) {
        return Outcome::fail(EXIT_NUMERICAL, format!("numerical failure in outputs: {e}"));
    }
    let mut outputs = vec![rec.csv_path(&dir), rec.json_path(&dir)];
    if sub == Subcommand::Simulate {
        outputs.push(dir.join("simulate_samples.csv"));
    }
    let failed: Vec<&str> = rec.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
    let (exit_code, message) = if failed.is_empty() {
        (EXIT_OK, format!("{}: {} checks passed", sub.name(), rec.checks.len()))
    } else {
        (EXIT_CHECK_FAILED, format!("{}: failed checks: {}", sub.name(), failed.join(", ")))
    };
    Outcome { exit_code, message, outputs, record: Some(rec) }
}

/// Reads the config file and runs a subcommand.
pub fn run(sub: Subcommand, config: &Path, overrides: &Overrides) -> Outcome {
    match std::fs::read_to_string(config) {
        Ok(text) => run_text(sub, &text, &config.display().to_string(), overrides),
        Err(e) => Outcome::fail(EXIT_CONFIG, format!("{}: {e}", config.display())),
    }
}

fn write_samples(dir: &Path, labels: &[String], values: &[Vec<f64>]) -> crate::Result<()> {
    let err = |e: &dyn std::fmt::Display| crate::Error::Numerical(format!("writing samples: {e}"));
    std::fs::create_dir_all(dir).map_err(|e| err(&e))?;
    let mut w = csv::Writer::from_path(dir.join("simulate_samples.csv")).map_err(|e| err(&e))?;
    let mut header = vec!["sample".to_string()];
    header.extend(labels.iter().cloned());
    w.write_record(&header).map_err(|e| err(&e))?;
    let n = values.first().map_or(0, Vec::len);
    for i in 0..n {
        let mut row = vec![i.to_string()];
        row.extend(values.iter().map(|v| format!("{:?}", v[i])));
        w.write_record(&row).map_err(|e| err(&e))?;
    }
    w.flush().map_err(|e| err(&e))
}
