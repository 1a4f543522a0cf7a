//! Empirical normality diagnostics: Kolmogorov–Smirnov and Wasserstein-1
//! distances to N(0, 1), moments, multi-time covariances and rate tables.

use crate::asymptotics::{exponent_fit, RateFit};
use crate::error::{Error, Result};
use crate::mc::stream;
use rand::Rng;
use serde::Serialize;
use std::f64::consts::{PI, SQRT_2};

/// Φ(x) = erfc(−x/√2)/2.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Φ⁻¹(p) for p ∈ (0, 1): Acklam's rational approximation followed by one
/// Halley step on Φ.
pub fn normal_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    const A: [f64; 6] = [-3.969683028665376e1, 2.209460984245205e2, -2.759285104469687e2, 1.383577518672690e2, -3.066479806614716e1, 2.506628277459239];
    const B: [f64; 5] = [-5.447609879822406e1, 1.615858368580409e2, -1.556989798598866e2, 6.680131188771972e1, -1.328068155288572e1];
    const C: [f64; 6] = [-7.784894002430293e-3, -3.223964580411365e-1, -2.400758277161838, -2.549732539343734, 4.374664141464968, 2.938163982698783];
    const D: [f64; 4] = [7.784695709041462e-3, 3.224671290700398e-1, 2.445134137142996, 3.754408661907416];
    let p_low = 0.02425;
    let tail = |q: f64| {
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5]) / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let x = if p < p_low {
        tail((-2.0 * p.ln()).sqrt())
    } else if p > 1.0 - p_low {
        -tail((-2.0 * (1.0 - p).ln()).sqrt())
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    let e = normal_cdf(x) - p;
    let u = e * (2.0 * PI).sqrt() * (x * x / 2.0).exp();
    x - u / (1.0 + x * u / 2.0)
}

/// P(K > λ) for the Kolmogorov distribution.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 0.2 {
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        s += if k % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// Sample moment with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moment {
    pub value: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub mean: Moment,
    pub variance: Moment,
    pub skewness: Moment,
    pub excess_kurtosis: Moment,
}

/// Distances of a sample to N(0, 1).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalityReport {
    pub sample_count: usize,
    pub ks_stat: f64,
    /// Asymptotic Kolmogorov p-value with Stephens' finite-n correction.
    pub ks_pvalue: f64,
    /// Mean |X_(i) − Φ⁻¹((i − ½)/n)|.
    pub w1: f64,
    pub moments: Moments,
}

fn moments(x: &[f64]) -> Moments {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let c = |p: i32| x.iter().map(|v| (v - mean).powi(p)).sum::<f64>() / n;
    let (m2, m3, m4) = (c(2), c(3), c(4));
    let var = m2 * n / (n - 1.0);
    Moments {
        mean: Moment { value: mean, std_error: (var / n).sqrt() },
        variance: Moment { value: var, std_error: ((m4 - m2 * m2).max(0.0) / n).sqrt() },
        skewness: Moment { value: m3 / m2.powf(1.5), std_error: (6.0 / n).sqrt() },
        excess_kurtosis: Moment { value: m4 / (m2 * m2) - 3.0, std_error: (24.0 / n).sqrt() },
    }
}

/// KS statistic sup|F_n − Φ| for sorted data.
fn ks_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let f = normal_cdf(*x);
            ((i + 1) as f64 / n - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

/// Compares a sample to the standard normal law. Needs at least 100 finite
/// values with positive variance.
pub fn normality_report(samples: &[f64]) -> Result<NormalityReport> {
    if samples.len() < 100 {
        return Err(Error::InvalidInput(format!("normality report needs at least 100 samples, got {}", samples.len())));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("samples must be finite".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted[0] == sorted[sorted.len() - 1] {
        return Err(Error::InvalidInput("degenerate sample (zero variance)".into()));
    }
    let n = sorted.len();
    let ks_stat = ks_sorted(&sorted);
    let rn = (n as f64).sqrt();
    let ks_pvalue = kolmogorov_survival((rn + 0.12 + 0.11 / rn) * ks_stat);
    let w1 = sorted.iter().enumerate().map(|(i, x)| (x - normal_quantile((i as f64 + 0.5) / n as f64)).abs()).sum::<f64>() / n as f64;
    Ok(NormalityReport { sample_count: n, ks_stat, ks_pvalue, w1, moments: moments(samples) })
}

/// Divides by the sample standard deviation (the mean is kept).
pub fn standardize(samples: &[f64]) -> Vec<f64> {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let sd = (samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    samples.iter().map(|v| v / sd).collect()
}

/// One entry of the empirical covariance of normalized coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CovarianceCheck {
    pub i: usize,
    pub j: usize,
    pub empirical: f64,
    pub std_error: f64,
    pub reference: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Normality of a linear combination a·X₁ + b·X₂.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectionCheck {
    pub coefficients: Vec<f64>,
    pub report: NormalityReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiTimeReport {
    /// Normality of each coordinate after standardization.
    pub marginals: Vec<NormalityReport>,
    pub covariance: Vec<CovarianceCheck>,
    pub projections: Vec<ProjectionCheck>,
}

impl MultiTimeReport {
    pub fn covariance_passes(&self) -> bool {
        self.covariance.iter().all(|c| c.pass)
    }
}

/// Finite-dimensional Gaussianity of (F_R(t_1), …, F_R(t_m)).
///
/// `columns[i]` holds the samples of coordinate i. The empirical covariance
/// divided by `scale` (e.g. R^{1.5}) is compared to `reference[i][j]` within
/// 3 standard errors plus `extra_tolerance[i][j]`. Three random unit
/// directions (seeded) are checked for normality when m ≥ 2.
pub fn multi_time_gaussianity(
    columns: &[Vec<f64>],
    scale: f64,
    reference: &[Vec<f64>],
    extra_tolerance: &[Vec<f64>],
    seed: u64,
) -> Result<MultiTimeReport> {
    let m = columns.len();
    if m == 0 || m > 4 {
        return Err(Error::InvalidInput(format!("between 1 and 4 coordinates are supported, got {m}")));
    }
    let n = columns[0].len();
    if columns.iter().any(|c| c.len() != n) {
        return Err(Error::InvalidInput("coordinates have different sample counts".into()));
    }
    if reference.len() != m || extra_tolerance.len() != m || reference.iter().chain(extra_tolerance).any(|r| r.len() != m) {
        return Err(Error::InvalidInput("reference and tolerance must be m × m".into()));
    }
    let marginals = columns.iter().map(|c| normality_report(&standardize(c))).collect::<Result<Vec<_>>>()?;
    let means: Vec<f64> = columns.iter().map(|c| c.iter().sum::<f64>() / n as f64).collect();
    let mut covariance = Vec::new();
    for i in 0..m {
        for j in i..m {
            let prods: Vec<f64> = (0..n).map(|k| (columns[i][k] - means[i]) * (columns[j][k] - means[j]) / scale).collect();
            let mean = prods.iter().sum::<f64>() / n as f64;
            let var = prods.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
            let empirical = mean * n as f64 / (n as f64 - 1.0);
            let std_error = (var / n as f64).sqrt();
            let tolerance = 3.0 * std_error + extra_tolerance[i][j];
            let reference = reference[i][j];
            covariance.push(CovarianceCheck { i, j, empirical, std_error, reference, tolerance, pass: (empirical - reference).abs() <= tolerance });
        }
    }
    let mut projections = Vec::new();
    if m >= 2 {
        let mut rng = stream(seed, 0);
        for _ in 0..3 {
            let coefficients: Vec<f64> = (0..m).map(|_| 2.0 * rng.random::<f64>() - 1.0).collect();
            let combo: Vec<f64> = (0..n).map(|k| (0..m).map(|i| coefficients[i] * columns[i][k]).sum()).collect();
            projections.push(ProjectionCheck { report: normality_report(&standardize(&combo))?, coefficients });
        }
    }
    Ok(MultiTimeReport { marginals, covariance, projections })
}

/// Log-log fits of the distances against R.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateTable {
    pub radii: Vec<f64>,
    pub w1: Vec<f64>,
    pub ks: Vec<f64>,
    pub w1_fit: RateFit,
    pub ks_fit: RateFit,
    pub negative_slope: bool,
    /// Whether the W1 slope lies within two half-widths of `reference_slope`.
    pub consistent_with_reference: bool,
    pub reference_slope: f64,
}

/// Fits log W1 and log KS against log R; needs four radii over a decade.
/// `reference_slope` (e.g. −β/2) is compared for information only.
pub fn distance_rate_table(reports: &[(f64, NormalityReport)], reference_slope: f64) -> Result<RateTable> {
    let radii: Vec<f64> = reports.iter().map(|(r, _)| *r).collect();
    let w1: Vec<f64> = reports.iter().map(|(_, rep)| rep.w1).collect();
    let ks: Vec<f64> = reports.iter().map(|(_, rep)| rep.ks_stat).collect();
    let w1_fit = exponent_fit(&radii.iter().copied().zip(w1.iter().copied()).collect::<Vec<_>>())?;
    let ks_fit = exponent_fit(&radii.iter().copied().zip(ks.iter().copied()).collect::<Vec<_>>())?;
    Ok(RateTable {
        negative_slope: w1_fit.slope < 0.0,
        consistent_with_reference: (w1_fit.slope - reference_slope).abs() <= 2.0 * w1_fit.half_width,
        reference_slope,
        radii,
        w1,
        ks,
        w1_fit,
        ks_fit,
    })
}
