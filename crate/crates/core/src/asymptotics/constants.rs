use crate::chaos::spatial::{bilinear, ChainFn};
use crate::chaos::{factorial, N_MAX};
use crate::covariance::{sphere_area, unit_ball_volume, CovarianceModel};
use crate::error::{Error, Result};
use crate::mc::{self, Estimate, McSettings};
use crate::quad::{self, QuadSettings};
use crate::wave::d_const;
use rand::Rng;
use serde::Serialize;
use std::f64::consts::PI;

/// K(t, s) with its truncation data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KValue {
    pub t: f64,
    pub s: f64,
    pub value: f64,
    pub std_error: f64,
    /// Upper bound on the omitted orders n > truncation.
    pub tail_bound: f64,
    pub truncation: usize,
    /// ω_d ∫ α_n(z; t, s) dz / n! for n = 1..=truncation.
    pub per_chaos: Vec<Estimate>,
}

/// Limit constants of the variance asymptotics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitConstants {
    pub k: Option<KValue>,
    pub k_prime: Option<f64>,
    pub kappa: Option<f64>,
    pub omega_d: f64,
}

/// Area (d = 2) or length (d = 1) of B_1 ∩ (B_1 + u) with |u| = r.
fn lens(d: usize, r: f64) -> f64 {
    if r >= 2.0 {
        return 0.0;
    }
    match d {
        1 => 2.0 - r,
        _ => 2.0 * (r / 2.0).acos() - (r / 2.0) * (4.0 - r * r).sqrt(),
    }
}

fn check_kappa(beta: f64, d: usize) -> Result<()> {
    if !(1..=2).contains(&d) {
        return Err(Error::InvalidInput("dimension must be 1 or 2".into()));
    }
    if !(beta > 0.0) {
        return Err(Error::InvalidInput("beta must be positive".into()));
    }
    if beta >= d as f64 {
        return Err(Error::Domain(format!("κ diverges for β = {beta} ≥ d = {d}")));
    }
    Ok(())
}

/// κ_{β,d} = ∫_{B_1²} |x − x'|^{-β} dx dx'.
///
/// Closed form in d = 1; radial quadrature of |u|^{-β}·Leb(B_1 ∩ (B_1 + u)) in d = 2.
pub fn kappa(beta: f64, d: usize, q: &QuadSettings) -> Result<f64> {
    check_kappa(beta, d)?;
    if d == 1 {
        return Ok(2f64.powf(3.0 - beta) / ((1.0 - beta) * (2.0 - beta)));
    }
    let r = quad::integrate_singular_left(|r| 2.0 * PI * r.powf(1.0 - beta) * lens(2, r), 0.0, 2.0, 2.0 - beta, q)?;
    Ok(r.value)
}

/// Z_L = ∫_{B_L} |u|^{-β} du.
pub(crate) fn power_mass(d: usize, beta: f64, l: f64) -> f64 {
    sphere_area(d) * l.powf(d as f64 - beta) / (d as f64 - beta)
}

/// Draws u with density ∝ |u|^{-β} on B_L.
pub(crate) fn sample_power_ball<R: Rng + ?Sized>(rng: &mut R, d: usize, beta: f64, l: f64, out: &mut [f64]) {
    let r = l * rng.random::<f64>().powf(1.0 / (d as f64 - beta));
    if d == 1 {
        out[0] = if rng.random::<bool>() { r } else { -r };
    } else {
        let th = 2.0 * PI * rng.random::<f64>();
        out[0] = r * th.cos();
        out[1] = r * th.sin();
    }
}

/// Monte Carlo κ over pairs (x, x') ∈ B_1²: x uniform, x − x' with density ∝ |·|^{-β}.
pub fn kappa_mc(beta: f64, d: usize, mcs: &McSettings) -> Result<Estimate> {
    check_kappa(beta, d)?;
    let weight = unit_ball_volume(d) * power_mass(d, beta, 2.0);
    Ok(mc::mean(mcs, |rng| {
        let mut x = [0.0; 2];
        let mut u = [0.0; 2];
        loop {
            for v in x.iter_mut().take(d) {
                *v = 2.0 * rng.random::<f64>() - 1.0;
            }
            if x[..d].iter().map(|v| v * v).sum::<f64>() < 1.0 {
                break;
            }
        }
        sample_power_ball(rng, d, beta, 2.0, &mut u[..d]);
        let r2: f64 = (0..d).map(|k| (x[k] - u[k]).powi(2)).sum();
        if r2 < 1.0 { weight } else { 0.0 }
    }))
}

/// Stratified Monte Carlo κ: the radius of x − x' is stratified and the
/// position integrated out exactly. The error comes from paired strata.
pub fn kappa_mc_stratified(beta: f64, d: usize, strata: usize, seed: u64) -> Result<Estimate> {
    check_kappa(beta, d)?;
    let pairs = (strata / 2).max(1);
    let m = 2 * pairs;
    let z = power_mass(d, beta, 2.0);
    let mut rng = mc::stream(seed, 0);
    let (mut sum, mut var) = (0.0, 0.0);
    for k in 0..pairs {
        let mut f = [0.0; 2];
        for (i, v) in f.iter_mut().enumerate() {
            let u = ((2 * k + i) as f64 + rng.random::<f64>()) / m as f64;
            let r = 2.0 * u.powf(1.0 / (d as f64 - beta));
            *v = z * lens(d, r);
        }
        sum += f[0] + f[1];
        var += (f[0] - f[1]).powi(2) / 4.0;
    }
    let mean = sum / m as f64;
    Ok(Estimate { value: mean, std_error: var.sqrt() / pairs as f64 })
}

/// K′(t, s) = (t²s²/4)·κ_{β,d}.
pub fn limit_constant_kprime(t: f64, s: f64, beta: f64, d: usize, q: &QuadSettings) -> Result<LimitConstants> {
    if !(beta > 0.0 && beta < (d as f64).min(2.0)) {
        return Err(Error::Domain(format!("κ diverges for β = {beta}, d = {d}")));
    }
    let k = kappa(beta, d, q)?;
    Ok(LimitConstants { k: None, k_prime: Some(t * t * s * s / 4.0 * k), kappa: Some(k), omega_d: unit_ball_volume(d) })
}

/// α_1(z; t, s) = ∫∫ f_1(x, z; t) f_1(y, 0; s) γ(x − y) dx dy in d = 1,
/// by nested adaptive quadrature.
pub fn alpha_1_quadrature(z: f64, t: f64, s: f64, model: &CovarianceModel, q: &QuadSettings) -> Result<f64> {
    if model.dimension != 1 {
        return Err(Error::Unsupported("lag quadrature is implemented for d = 1".into()));
    }
    if !(model.is_integrable() || model.is_white()) {
        return Err(Error::NotApplicable("lag quadrature needs an integrable kernel".into()));
    }
    let f1 = |x: f64, anchor: f64, tt: f64| 0.5 * (tt - (x - anchor).abs()).max(0.0);
    let inner_q = QuadSettings { rel_tol: q.rel_tol * 0.1, abs_tol: q.abs_tol * 0.1, ..*q };
    let outer = |x: f64| -> f64 {
        let fx = f1(x, z, t);
        if fx == 0.0 {
            return 0.0;
        }
        if model.is_white() {
            return fx * f1(x, 0.0, s);
        }
        let g = |y: f64| f1(y, 0.0, s) * model.gamma(&[x - y]).unwrap_or(0.0);
        let a = quad::integrate(g, -s, 0.0, &inner_q).map(|v| v.value).unwrap_or(f64::NAN);
        let b = quad::integrate(g, 0.0, s, &inner_q).map(|v| v.value).unwrap_or(f64::NAN);
        fx * (a + b)
    };
    let mut total = 0.0;
    // Kinks of the integrand in x.
    let mut cuts = vec![z - t, z, z + t];
    if model.is_white() {
        cuts.extend([-s, 0.0, s]);
    }
    cuts.retain(|c| *c >= z - t && *c <= z + t);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    for w in cuts.windows(2) {
        total += quad::integrate(outer, w[0], w[1], q)?.value;
    }
    if !total.is_finite() {
        return Err(Error::Numerical("inner quadrature failed".into()));
    }
    Ok(total)
}

/// ∫_ℝ α_1(z; t, s) dz by brute-force triple quadrature (d = 1).
pub fn lag_integral_first_chaos(t: f64, s: f64, model: &CovarianceModel, q: &QuadSettings) -> Result<f64> {
    let f = |z: f64| alpha_1_quadrature(z, t, s, model, q).unwrap_or(f64::NAN);
    let c = t + s;
    let near = quad::integrate(f, 0.0, c, q)?.value;
    let far = if model.is_white() { 0.0 } else { quad::integrate_to_infinity(f, c, q)?.value };
    let v = 2.0 * (near + far);
    if !v.is_finite() {
        return Err(Error::Numerical("lag quadrature failed".into()));
    }
    Ok(v)
}

/// Majorant of ω_d Σ_{n>N} ∫α_n dz/n!, from ∫α_n dz ≤ t^{4+n}‖γ‖(D_t C_μ)^{n−1} (t ≥ s).
fn k_tail_bound(t: f64, s: f64, model: &CovarianceModel, big_n: usize) -> Result<f64> {
    let tm = t.max(s);
    let x = d_const(tm) * model.dalang_constant()?;
    let mass = model.gamma_mass()?;
    let mut sum = 0.0;
    let mut n = big_n + 1;
    loop {
        let term = tm.powi(4 + n as i32) * mass * x.powi(n as i32 - 1) / factorial(n);
        sum += term;
        if term < 1e-17 * sum || n > big_n + 400 {
            break;
        }
        n += 1;
    }
    Ok(unit_ball_volume(model.dimension) * sum)
}

/// K(t, s) = ω_d ∫ ρ_{t,s}(z) dz truncated at order N.
///
/// The first order uses brute-force quadrature in d = 1 and ∫G = t in d = 2;
/// orders 2..=N use the spatial Monte Carlo estimator of ∫α_n dz (d = 1).
pub fn limit_constant_k(t: f64, s: f64, model: &CovarianceModel, big_n: usize, mcs: &McSettings) -> Result<LimitConstants> {
    if !model.dalang_holds() {
        return Err(Error::DalangViolated);
    }
    if !(model.is_integrable() || (model.is_white() && model.dimension == 1)) {
        return Err(Error::NotApplicable("γ not integrable, use limit_constant_kprime".into()));
    }
    if big_n == 0 || big_n > N_MAX {
        return Err(Error::OrderTooLarge { n: big_n, max: N_MAX });
    }
    let d = model.dimension;
    let omega = unit_ball_volume(d);
    let mut per = Vec::with_capacity(big_n);
    let first = if d == 1 {
        lag_integral_first_chaos(t, s, model, &QuadSettings::default().with_rel_tol(1e-8))?
    } else {
        model.gamma_mass()? * t * t * s * s / 4.0
    };
    per.push(Estimate::exact(omega * first));
    let mut tail_from = 1;
    if d == 1 {
        for n in 2..=big_n {
            let e = bilinear(model, &ChainFn::Line { n, t }, &ChainFn::Point { n, t: s, anchor: 0.0 }, &mcs.labelled(&format!("k-{n}")))?;
            per.push(e.scale(omega));
        }
        tail_from = big_n;
    }
    let total = per.iter().fold(Estimate::exact(0.0), |a, b| a.add(*b));
    let k = KValue {
        t,
        s,
        value: total.value,
        std_error: total.std_error,
        tail_bound: k_tail_bound(t, s, model, tail_from)?,
        truncation: tail_from,
        per_chaos: per,
    };
    Ok(LimitConstants { k: Some(k), k_prime: None, kappa: None, omega_d: omega })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kappa_closed_form_and_radial() {
        let q = QuadSettings::default().with_rel_tol(1e-10);
        assert!((kappa(0.5, 1, &q).unwrap() - 7.542_472_332_656_507).abs() < 1e-12);
        // d = 1 through the same radial route as d = 2.
        let r = quad::integrate_singular_left(|r| 2.0 * r.powf(-0.5) * lens(1, r), 0.0, 2.0, 0.5, &q).unwrap().value;
        assert!((r - kappa(0.5, 1, &q).unwrap()).abs() < 1e-9);
        assert!(kappa(1.0, 1, &q).is_err());
    }

    #[test]
    fn lens_area_extremes() {
        assert!((lens(2, 0.0) - PI).abs() < 1e-15);
        assert_eq!(lens(2, 2.0), 0.0);
    }

    #[test]
    fn stratified_kappa_is_sharp() {
        let e = kappa_mc_stratified(0.5, 1, 200_000, 3).unwrap();
        let k = kappa(0.5, 1, &QuadSettings::default()).unwrap();
        assert!((e.value - k).abs() < 5e-5 * k, "{e:?}");
        assert!(e.within(k, 4.0, 1e-9));
    }

    #[test]
    fn kprime_examples() {
        let c = limit_constant_kprime(1.0, 1.0, 0.5, 1, &QuadSettings::default()).unwrap();
        assert!((c.k_prime.unwrap() - 1.885_618_083_164_127).abs() < 1e-12);
        assert_eq!(limit_constant_kprime(0.0, 1.0, 0.5, 1, &QuadSettings::default()).unwrap().k_prime, Some(0.0));
    }

    #[test]
    fn white_noise_alpha_1_at_zero() {
        let m = CovarianceModel::white_noise(1).unwrap();
        let v = alpha_1_quadrature(0.0, 1.0, 1.0, &m, &QuadSettings::default()).unwrap();
        assert!((v - 1.0 / 6.0).abs() < 1e-12);
        assert_eq!(alpha_1_quadrature(2.5, 1.0, 1.0, &m, &QuadSettings::default()).unwrap(), 0.0);
    }

    #[test]
    fn riesz_k_is_rejected() {
        let m = CovarianceModel::riesz(0.5, 1).unwrap();
        let e = limit_constant_k(1.0, 1.0, &m, 2, &McSettings::new(10, 1)).unwrap_err();
        assert!(matches!(e, Error::NotApplicable(_)));
    }
}
