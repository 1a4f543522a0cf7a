use crate::error::{Error, Result};
use serde::Serialize;

/// Least-squares fit of log y against log R.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope.
    pub half_width: f64,
}

/// Fits log y = intercept + slope·log R. Needs at least four positive points
/// spanning a decade in R.
pub fn exponent_fit(pairs: &[(f64, f64)]) -> Result<RateFit> {
    if pairs.len() < 4 {
        return Err(Error::InvalidInput(format!("exponent fit needs at least 4 points, got {}", pairs.len())));
    }
    if pairs.iter().any(|(r, y)| *r <= 0.0 || *y <= 0.0 || !y.is_finite()) {
        return Err(Error::InvalidInput("exponent fit needs positive finite data".into()));
    }
    let (lo, hi) = pairs.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), (r, _)| (lo.min(*r), hi.max(*r)));
    if hi / lo < 10.0 - 1e-9 {
        return Err(Error::InvalidInput("radii must span at least one decade".into()));
    }
    let n = pairs.len() as f64;
    let xs: Vec<f64> = pairs.iter().map(|(r, _)| r.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|(_, y)| y.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let half_width = (ssr / (n - 2.0) / sxx).sqrt();
    Ok(RateFit { slope, intercept, half_width })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let pairs: Vec<_> = [4.0, 8.0, 16.0, 32.0, 64.0].iter().map(|r: &f64| (*r, 3.0 * r.powf(1.5))).collect();
        let f = exponent_fit(&pairs).unwrap();
        assert!((f.slope - 1.5).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
        assert!(f.half_width < 1e-12);
    }

    #[test]
    fn rejects_short_or_narrow_data() {
        assert!(exponent_fit(&[(1.0, 1.0), (2.0, 2.0), (4.0, 4.0)]).is_err());
        assert!(exponent_fit(&[(1.0, 1.0), (2.0, 2.0), (3.0, 4.0), (4.0, 5.0)]).is_err());
    }
}
