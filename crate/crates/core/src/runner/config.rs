use crate::covariance::{CovarianceModel, Kernel};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Configuration error anchored to a line of the config file.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    /// heat | poisson | riesz | bessel | fractional | white
    pub kernel: String,
    #[serde(default = "one")]
    pub dimension: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hurst: Option<Vec<f64>>,
    /// Integrability exponent ℓ (d = 2 embedding exponent).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ell: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    /// Half-width L of the noise domain [−L, L].
    pub half_width: f64,
    pub cells: usize,
    /// Gauss–Legendre points per cell and axis for kernel projection.
    pub points: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { half_width: 66.0, cells: 528, points: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChaosSection {
    /// Truncation order N of series estimators.
    pub order: usize,
    /// Chaos orders kept in simulation.
    pub n_sim: usize,
    /// Solution samples drawn by `simulate` and `clt`.
    pub samples: usize,
    /// Samples per Monte Carlo integral estimate.
    pub mc_samples: usize,
    pub seed: Option<u64>,
    /// Relative standard error accepted for the Stein integrals.
    pub stein_tolerance: f64,
}

impl Default for ChaosSection {
    fn default() -> Self {
        Self { order: 4, n_sim: 3, samples: 10_000, mc_samples: 20_000, seed: None, stein_tolerance: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSection {
    pub radii: Vec<f64>,
    pub times: Vec<f64>,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self { radii: vec![4.0, 8.0, 16.0, 32.0, 64.0], times: vec![1.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: String,
    /// Directory for cached Gram factors; caching is off when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cache: Option<String>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: "ham-clt-out".into(), cache: None }
    }
}

fn one() -> usize {
    1
}

/// A parsed experiment configuration with defaults filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub chaos: ChaosSection,
    #[serde(default)]
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub output: OutputSection,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub radii: Option<Vec<f64>>,
    pub out: Option<String>,
    pub samples: Option<usize>,
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Line of `key` inside `[section]`, or of the section header.
fn line_of_key(text: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    let mut header = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.starts_with('[') {
            current = line.trim_matches(|c| c == '[' || c == ']').trim().to_string();
            if current == section {
                header = Some(i + 1);
            }
            continue;
        }
        if current == section && line.split('=').next().map(str::trim) == Some(key) {
            return Some(i + 1);
        }
    }
    header
}

impl ExperimentConfig {
    /// Parses and validates config text, applying `overrides`.
    pub fn parse(text: &str, overrides: &Overrides) -> Result<Self, ConfigError> {
        let mut cfg: ExperimentConfig = toml::from_str(text).map_err(|e| ConfigError {
            line: e.span().map(|s| line_of_offset(text, s.start)),
            message: e.message().trim().to_string(),
        })?;
        if let Some(s) = overrides.seed {
            cfg.chaos.seed = Some(s);
        }
        if let Some(r) = &overrides.radii {
            cfg.experiment.radii = r.clone();
        }
        if let Some(o) = &overrides.out {
            cfg.output.dir = o.clone();
        }
        if let Some(n) = overrides.samples {
            cfg.chaos.samples = n;
        }
        cfg.validate(text)?;
        Ok(cfg)
    }

    fn validate(&self, text: &str) -> Result<(), ConfigError> {
        let err = |section: &str, key: &str, message: String| ConfigError { line: line_of_key(text, section, key), message };
        if self.chaos.seed.is_none() {
            return Err(err("chaos", "seed", "missing `seed` in [chaos] (or pass --seed)".into()));
        }
        self.model().map_err(|e| err("model", "kernel", e))?;
        let e = &self.experiment;
        if e.times.is_empty() || e.times.len() > 4 || e.times.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(err("experiment", "times", "`times` must hold 1 to 4 positive values".into()));
        }
        if e.radii.is_empty() || e.radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return Err(err("experiment", "radii", "`radii` must hold positive values".into()));
        }
        if let Some(r) = e.radii.iter().find(|r| **r > self.grid.half_width) {
            return Err(err("experiment", "radii", format!("radius {r} exceeds the grid half-width {}", self.grid.half_width)));
        }
        let g = &self.grid;
        if g.cells < 2 || !(g.half_width > 0.0) || g.points == 0 {
            return Err(err("grid", "cells", "the grid needs half_width > 0, cells ≥ 2 and points ≥ 1".into()));
        }
        let c = &self.chaos;
        if c.order == 0 || c.order > crate::chaos::N_MAX {
            return Err(err("chaos", "order", format!("`order` must lie in 1..={}", crate::chaos::N_MAX)));
        }
        if c.n_sim == 0 || c.n_sim > 4 {
            return Err(err("chaos", "n_sim", "`n_sim` must lie in 1..=4".into()));
        }
        if c.samples < 100 || c.mc_samples == 0 {
            return Err(err("chaos", "samples", "`samples` must be at least 100 and `mc_samples` positive".into()));
        }
        if !(c.stein_tolerance > 0.0) {
            return Err(err("chaos", "stein_tolerance", "`stein_tolerance` must be positive".into()));
        }
        Ok(())
    }

    pub fn seed(&self) -> u64 {
        self.chaos.seed.unwrap_or_default()
    }

    /// The covariance model described by the [model] section.
    pub fn model(&self) -> Result<CovarianceModel, String> {
        let m = &self.model;
        let need = |v: Option<f64>, name: &str| v.ok_or_else(|| format!("kernel `{}` needs `{name}`", m.kernel));
        let kernel = match m.kernel.as_str() {
            "heat" => Kernel::Heat { a: need(m.a, "a")? },
            "poisson" => Kernel::Poisson { a: need(m.a, "a")? },
            "riesz" => Kernel::Riesz { beta: need(m.beta, "beta")? },
            "bessel" => Kernel::Bessel { alpha: need(m.alpha, "alpha")? },
            "fractional" => Kernel::Fractional { hurst: m.hurst.clone().ok_or("kernel `fractional` needs `hurst`")? },
            "white" => Kernel::WhiteNoise,
            other => return Err(format!("unknown kernel `{other}`")),
        };
        let model = CovarianceModel::new(kernel, m.dimension).map_err(|e| e.to_string())?;
        Ok(match m.ell {
            Some(l) => model.with_ell(l),
            None => model,
        })
    }

    /// Canonical JSON text of the resolved configuration.
    pub fn canonical(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical text.
    pub fn hash(&self) -> String {
        crate::cache::content_hash(&self.canonical())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const RIESZ: &str = "[model]\nkernel = \"riesz\"\nbeta = 0.5\n\n[chaos]\nseed = 7\n";

    #[test]
    fn defaults_are_filled() {
        let c = ExperimentConfig::parse(RIESZ, &Overrides::default()).unwrap();
        assert_eq!(c.grid, GridSection::default());
        assert_eq!(c.experiment.radii, vec![4.0, 8.0, 16.0, 32.0, 64.0]);
        assert_eq!(c.seed(), 7);
        assert_eq!(c.model().unwrap(), CovarianceModel::riesz(0.5, 1).unwrap());
    }

    #[test]
    fn missing_kernel_is_line_anchored() {
        let e = ExperimentConfig::parse("[model]\nbeta = 0.5\n[chaos]\nseed = 1\n", &Overrides::default()).unwrap_err();
        assert!(e.message.contains("kernel"), "{e}");
        assert_eq!(e.line, Some(1));
    }

    #[test]
    fn invalid_values_point_at_their_line() {
        let text = "[model]\nkernel = \"riesz\"\nbeta = 1.5\n[chaos]\nseed = 1\n";
        let e = ExperimentConfig::parse(text, &Overrides::default()).unwrap_err();
        assert_eq!(e.line, Some(2));
        let text = "[model]\nkernel = \"heat\"\na = 1.0\n[chaos]\nseed = 1\n[experiment]\nradii = [4.0, 100.0]\n";
        let e = ExperimentConfig::parse(text, &Overrides::default()).unwrap_err();
        assert_eq!(e.line, Some(7));
        let e = ExperimentConfig::parse("[model]\nkernel = \"white\"\nbogus = 1\n", &Overrides::default()).unwrap_err();
        assert_eq!(e.line, Some(3));
    }

    #[test]
    fn overrides_apply_and_change_the_hash() {
        let a = ExperimentConfig::parse(RIESZ, &Overrides::default()).unwrap();
        let o = Overrides { seed: Some(9), radii: Some(vec![2.0, 4.0]), out: Some("x".into()), samples: None };
        let b = ExperimentConfig::parse(RIESZ, &o).unwrap();
        assert_eq!(b.seed(), 9);
        assert_eq!(b.experiment.radii, vec![2.0, 4.0]);
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash(), ExperimentConfig::parse(RIESZ, &Overrides::default()).unwrap().hash());
    }

    #[test]
    fn seed_is_required() {
        let e = ExperimentConfig::parse("[model]\nkernel = \"white\"\n", &Overrides::default()).unwrap_err();
        assert!(e.message.contains("seed"));
    }
}
