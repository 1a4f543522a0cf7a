//! Fundamental solution of the wave equation in d = 1, 2.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// G_t(x). Zero for t ≤ 0 and outside the open light cone |x| < t.
pub fn green(d: usize, t: f64, x: &[f64]) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let r2: f64 = x.iter().map(|v| v * v).sum();
    if r2 >= t * t {
        return 0.0;
    }
    match d {
        1 => 0.5,
        2 => 1.0 / (2.0 * PI * (t * t - r2).sqrt()),
        _ => panic!("green: dimension must be 1 or 2"),
    }
}

/// G_t at radius r.
pub fn green_radial(d: usize, t: f64, r: f64) -> f64 {
    green(d, t, &[r])
}

/// ℱG_t(ξ) = sin(t|ξ|)/|ξ| as a function of r = |ξ|.
pub fn green_fourier_radial(t: f64, r: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let x = t * r;
    if x.abs() < 1e-6 {
        t * (1.0 - x * x / 6.0)
    } else {
        (x).sin() / r
    }
}

/// ℱG_t(ξ).
pub fn green_fourier(t: f64, xi: &[f64]) -> f64 {
    green_fourier_radial(t, xi.iter().map(|v| v * v).sum::<f64>().sqrt())
}

/// D_t = 2(t² ∨ 1).
pub fn d_const(t: f64) -> f64 {
    2.0 * (t * t).max(1.0)
}

/// ‖G_t‖_{L^p(ℝ²)}^p = (2π)^{1−p} t^{2−p}/(2−p), for 0 < p < 2.
pub fn green_lp_norm(t: f64, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 2.0) {
        return Err(Error::Domain(format!("p must lie in (0, 2), got {p}")));
    }
    if t <= 0.0 {
        return Err(Error::Domain("t must be positive".into()));
    }
    Ok((2.0 * PI).powf(1.0 - p) * t.powf(2.0 - p) / (2.0 - p))
}

/// Draws a displacement v with density G_τ(v)/τ; the importance weight is τ.
pub fn sample_green<R: rand::Rng + ?Sized>(rng: &mut R, d: usize, tau: f64, out: &mut [f64]) {
    match d {
        1 => out[0] = tau * (2.0 * rng.random::<f64>() - 1.0),
        _ => {
            // Radial CDF of G_τ/τ is 1 − √(1 − ρ²/τ²).
            let u: f64 = rng.random();
            let rho = tau * (1.0 - (1.0 - u) * (1.0 - u)).sqrt();
            let th = 2.0 * PI * rng.random::<f64>();
            out[0] = rho * th.cos();
            out[1] = rho * th.sin();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate, QuadSettings};

    #[test]
    fn examples() {
        assert_eq!(green(1, 2.0, &[1.0]), 0.5);
        assert!((green(2, 2.0, &[0.0, 0.0]) - 1.0 / (4.0 * PI)).abs() < 1e-16);
        assert_eq!(green(1, -1.0, &[0.0]), 0.0);
        assert_eq!(green(2, 1.0, &[1.0, 0.0]), 0.0);
        assert_eq!(green_fourier(2.0, &[0.0]), 2.0);
        assert!(green_fourier(1.0, &[PI]).abs() < 1e-16);
        assert!((green_fourier(3.0, &[1.0]) - 3f64.sin()).abs() < 1e-16);
        assert!((green_lp_norm(3.0, 1.0).unwrap() - 3.0).abs() < 1e-14);
        assert!((green_lp_norm(1.0, 1.5).unwrap() - (2.0 * PI).powf(-0.5) / 0.5).abs() < 1e-14);
        assert!(green_lp_norm(1.0, 2.0).is_err());
    }

    #[test]
    fn fourier_matches_direct_transform() {
        // ∫ e^{-iξx} G_3(x) dx with ξ = 1 by quadrature.
        let q = QuadSettings::default();
        let v = integrate(|x: f64| 0.5 * x.cos(), -3.0, 3.0, &q).unwrap().value;
        assert!((v - green_fourier(3.0, &[1.0])).abs() < 1e-10);
    }

    #[test]
    fn series_branch_continuous() {
        let t = 1.5;
        let r = 1e-6 / t;
        let a = green_fourier_radial(t, r * 0.999_999);
        let b = (t * r * 1.000_001).sin() / (r * 1.000_001);
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn sampler_radius_in_cone() {
        let mut rng = crate::mc::stream(1, 0);
        let mut v = [0.0; 2];
        for _ in 0..1000 {
            sample_green(&mut rng, 2, 0.7, &mut v);
            assert!(v[0].hypot(v[1]) < 0.7);
        }
    }
}
