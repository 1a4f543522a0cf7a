use super::constants::kappa;
use crate::chaos::fourier::phi;
use crate::chaos::spatial::{bilinear, ChainFn};
use crate::chaos::{exp_remainder, factorial, N_MAX};
use crate::covariance::{unit_ball_volume, CovarianceModel};
use crate::error::{Error, Result};
use crate::mc::{Estimate, McSettings};
use crate::quad::{self, gauss_legendre_on, QuadSettings, QuadValue};
use crate::wave::d_const;
use serde::Serialize;
use std::f64::consts::PI;

/// Chaos decomposition of E[F_R(t)F_R(s)].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceEstimate {
    pub radius: f64,
    pub times: (f64, f64),
    /// E[J_{n,R}(t)J_{n,R}(s)] for n = 1..=N.
    pub per_chaos: Vec<Estimate>,
    pub total: Estimate,
    pub tail_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HigherChaosRow {
    pub radius: f64,
    pub order: usize,
    pub value: Estimate,
    /// value / R^{2d−β}.
    pub ratio: Estimate,
}

/// ‖F_R(t) − F_R(s)‖₂ with the analytic majorant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IncrementNorm {
    pub radius: f64,
    pub times: (f64, f64),
    pub value: f64,
    pub std_error: f64,
    pub per_chaos: Vec<Estimate>,
    pub bound: f64,
}

/// g_{1,R}(x; t) = ∫_{−R}^{R} f_1(x, y; t) dy.
fn g1(x: f64, t: f64, radius: f64) -> f64 {
    ChainFn::Ball { n: 1, t, radius }.eval(&[x])
}

fn kinks(t: f64, radius: f64) -> [f64; 6] {
    [-radius - t, -radius, -radius + t, radius - t, radius, radius + t]
}

/// Geometric refinement of [0, top] towards the origin.
fn geometric_cuts(top: f64) -> impl Iterator<Item = f64> {
    (1..48).map(move |k| top * 0.5f64.powi(k))
}

/// A(u) = ∫ g_{1,R}(x; t) g_{1,R}(x + u; s) dx, exact on polynomial pieces.
fn overlap(u: f64, t: f64, s: f64, radius: f64) -> f64 {
    let mut cuts: Vec<f64> = kinks(t, radius).into_iter().chain(kinks(s, radius).into_iter().map(|c| c - u)).collect();
    cuts.sort_by(f64::total_cmp);
    let (lo, hi) = ((-radius - t).max(-radius - s - u), (radius + t).min(radius + s - u));
    if lo >= hi {
        return 0.0;
    }
    let mut total = 0.0;
    let mut prev = lo;
    for c in cuts.into_iter().filter(|c| *c > lo && *c < hi).chain(std::iter::once(hi)) {
        if c > prev {
            let (xs, ws) = gauss_legendre_on(4, prev, c);
            total += xs.iter().zip(&ws).map(|(x, w)| w * g1(*x, t, radius) * g1(x + u, s, radius)).sum::<f64>();
        }
        prev = c;
    }
    total
}

fn check_times(radius: f64, t: f64, s: f64) -> Result<()> {
    if !(radius >= 0.0 && t >= 0.0 && s >= 0.0) || !(radius + t + s).is_finite() {
        return Err(Error::InvalidInput("radius and times must be finite and nonnegative".into()));
    }
    Ok(())
}

/// E[J_{1,R}(t)J_{1,R}(s)].
///
/// In d = 1 this is ∫γ(u)A(u)du with A computed exactly; in d = 2 the
/// Fourier route is used.
pub fn first_chaos_covariance(radius: f64, t: f64, s: f64, model: &CovarianceModel, q: &QuadSettings) -> Result<QuadValue> {
    check_times(radius, t, s)?;
    if !model.dalang_holds() {
        return Err(Error::DalangViolated);
    }
    if radius == 0.0 || t == 0.0 || s == 0.0 {
        return Ok(QuadValue { value: 0.0, error: 0.0 });
    }
    if model.dimension != 1 {
        return first_chaos_covariance_fourier(radius, t, s, model, q);
    }
    if model.is_white() {
        return Ok(QuadValue { value: overlap(0.0, t, s, radius), error: 0.0 });
    }
    let f = |u: f64| model.gamma(&[u]).unwrap_or(0.0) * (overlap(u, t, s, radius) + overlap(-u, t, s, radius));
    let top = 2.0 * radius + t + s;
    let mut cuts = vec![0.0, top];
    if model.power_law().is_none() {
        cuts.extend(geometric_cuts(top));
    }
    for p in kinks(t, radius) {
        for c in kinks(s, radius) {
            let u = (c - p).abs();
            if u > 0.0 && u < top {
                cuts.push(u);
            }
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * top);
    let mut value = 0.0;
    let mut error = 0.0;
    for (i, w) in cuts.windows(2).enumerate() {
        let piece = match model.power_law() {
            Some((_, beta)) if i == 0 => quad::integrate_singular_left(f, w[0], w[1], 1.0 - beta, q)?,
            _ => quad::integrate(f, w[0], w[1], q)?,
        };
        value += piece.value;
        error += piece.error;
    }
    Ok(QuadValue { value, error })
}

/// E[J_{1,R}(t)J_{1,R}(s)] = ∫ |ℱ1_{B_R}|² Φ_1(t)Φ_1(s) μ(dξ) for isotropic models.
pub fn first_chaos_covariance_fourier(radius: f64, t: f64, s: f64, model: &CovarianceModel, q: &QuadSettings) -> Result<QuadValue> {
    check_times(radius, t, s)?;
    if !model.dalang_holds() {
        return Err(Error::DalangViolated);
    }
    if radius == 0.0 || t == 0.0 || s == 0.0 {
        return Ok(QuadValue { value: 0.0, error: 0.0 });
    }
    let d = model.dimension;
    if model.radial_spectral(1.0).is_nan() {
        return Err(Error::Unsupported("the Fourier route needs an isotropic spectral density".into()));
    }
    let ball = |r: f64| -> f64 {
        let x = radius * r;
        if d == 1 {
            if x.abs() < 1e-8 { 2.0 * radius } else { 2.0 * x.sin() / r }
        } else if x.abs() < 1e-8 {
            PI * radius * radius
        } else {
            2.0 * PI * radius * libm::j1(x) / r
        }
    };
    let shell = if d == 1 { 2.0 } else { 2.0 * PI };
    let f = |r: f64| {
        let b = ball(r);
        shell * r.powi(d as i32 - 1) * model.radial_spectral(r) * b * b * phi(t, &[r]) * phi(s, &[r])
    };
    // Singular order of the integrand at the origin.
    let near = model.power_law().map_or(d as f64, |(_, beta)| beta);
    let width = 2.0 * PI / radius;
    let mut value = 0.0;
    let mut error = 0.0;
    let mut quiet = 0;
    let floor = 8.0 * PI / t.min(s).min(1.0);
    for k in 0..2_000_000usize {
        let (a, b) = (k as f64 * width, (k + 1) as f64 * width);
        let piece = if k == 0 { quad::integrate_singular_left(f, a, b, near, q)? } else { quad::integrate(f, a, b, q)? };
        value += piece.value;
        error += piece.error;
        if piece.value.abs() < 1e-11 * value.abs() {
            quiet += 1;
        } else {
            quiet = 0;
        }
        if quiet >= 8 && b > floor {
            return Ok(QuadValue { value, error });
        }
    }
    Err(Error::Quadrature { achieved: error, requested: q.rel_tol * value.abs() })
}

/// ∫∫_{B_R²} γ(x − y) dx dy = ∫ |ℱ1_{B_R}|² μ(dξ).
pub fn ball_energy(radius: f64, model: &CovarianceModel, q: &QuadSettings) -> Result<f64> {
    let d = model.dimension;
    if radius <= 0.0 {
        return Ok(0.0);
    }
    if model.is_white() {
        return Ok(unit_ball_volume(d) * radius.powi(d as i32));
    }
    if let Some((scale, beta)) = model.power_law() {
        return Ok(scale * radius.powf(2.0 * d as f64 - beta) * kappa(beta, d, q)?);
    }
    if !model.is_integrable() {
        return Err(Error::Unsupported(format!("ball energy of the {} kernel in d = {d}", model.kernel.name())));
    }
    let f = |r: f64| -> f64 {
        if d == 1 {
            2.0 * (2.0 * radius - r) * model.gamma(&[r]).unwrap_or(0.0)
        } else {
            let v = r / radius;
            let lens = 2.0 * (v / 2.0).acos() - (v / 2.0) * (4.0 - v * v).sqrt();
            2.0 * PI * r * radius * radius * lens * model.gamma(&[r, 0.0]).unwrap_or(0.0)
        }
    };
    let mut cuts: Vec<f64> = geometric_cuts(2.0 * radius).collect();
    cuts.extend([0.0, 2.0 * radius]);
    cuts.sort_by(f64::total_cmp);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        total += quad::integrate(f, w[0], w[1], q)?.value;
    }
    Ok(total)
}

/// Majorant of Σ_{n>N} |E[J_{n,R}(t)J_{n,R}(s)]|.
fn variance_tail(radius: f64, t: f64, s: f64, model: &CovarianceModel, big_n: usize) -> Result<f64> {
    let x = t * s * (d_const(t) * d_const(s)).sqrt() * model.dalang_constant()?;
    if x == 0.0 {
        return Ok(0.0);
    }
    let eb = ball_energy(radius, model, &QuadSettings::default())?;
    Ok((t * s).powi(2) * eb * exp_remainder(x, big_n) / x)
}

fn higher_order(radius: f64, t: f64, s: f64, n: usize, model: &CovarianceModel, mcs: &McSettings) -> Result<Estimate> {
    let a = ChainFn::Ball { n, t, radius };
    let b = ChainFn::Ball { n, t: s, radius };
    bilinear(model, &a, &b, &mcs.labelled(&format!("var-{n}-{radius}")))
}

/// Chaos decomposition of Cov(F_R(t), F_R(s)) truncated at order N.
///
/// Orders n ≥ 2 are available in d = 1 only; in d = 2 the first chaos is
/// returned and the tail bound covers the rest.
pub fn variance_estimate(radius: f64, t: f64, s: f64, model: &CovarianceModel, big_n: usize, mcs: &McSettings) -> Result<VarianceEstimate> {
    check_times(radius, t, s)?;
    if big_n == 0 || big_n > N_MAX {
        return Err(Error::OrderTooLarge { n: big_n, max: N_MAX });
    }
    let q = QuadSettings::default().with_rel_tol(1e-8);
    let first = first_chaos_covariance(radius, t, s, model, &q)?;
    let mut per = vec![Estimate { value: first.value, std_error: first.error }];
    let top = if model.dimension == 1 { big_n } else { 1 };
    for n in 2..=top {
        per.push(if radius == 0.0 || t == 0.0 || s == 0.0 { Estimate::exact(0.0) } else { higher_order(radius, t, s, n, model, mcs)? });
    }
    let total = per.iter().fold(Estimate::exact(0.0), |a, b| a.add(*b));
    Ok(VarianceEstimate { radius, times: (t, s), per_chaos: per, total, tail_bound: variance_tail(radius, t, s, model, top)? })
}

/// σ_R²(t) over a list of radii.
pub fn variance_table(radii: &[f64], t: f64, model: &CovarianceModel, big_n: usize, mcs: &McSettings) -> Result<Vec<VarianceEstimate>> {
    radii.iter().map(|r| variance_estimate(*r, t, t, model, big_n, mcs)).collect()
}

/// E[J²_{n,R}(t)] and its ratio to R^{2d−β} for a power-law model.
pub fn higher_chaos_decay(radii: &[f64], t: f64, model: &CovarianceModel, n: usize, mcs: &McSettings) -> Result<Vec<HigherChaosRow>> {
    let (_, beta) = model.power_law().ok_or_else(|| Error::NotApplicable("higher-chaos decay is tabulated for power-law kernels".into()))?;
    if !(2..=N_MAX).contains(&n) {
        return Err(Error::OrderTooLarge { n, max: N_MAX });
    }
    let d = model.dimension as f64;
    radii
        .iter()
        .map(|&r| {
            let value = if t == 0.0 || r == 0.0 { Estimate::exact(0.0) } else { higher_order(r, t, t, n, model, mcs)? };
            Ok(HigherChaosRow { radius: r, order: n, value, ratio: value.scale(r.powf(-(2.0 * d - beta))) })
        })
        .collect()
}

/// ‖F_R(t) − F_R(s)‖₂ truncated at order N, with the analytic majorant
/// Σ_n (t − s)tⁿ(D_t C_μ)^{(n−1)/2}/√n! · (∫|ℱ1_{B_R}|²μ)^{1/2} summed over all n.
pub fn increment_norm(radius: f64, t: f64, s: f64, model: &CovarianceModel, big_n: usize, mcs: &McSettings) -> Result<IncrementNorm> {
    check_times(radius, t, s)?;
    if s > t {
        return Err(Error::InvalidInput("increment needs s ≤ t".into()));
    }
    if big_n == 0 || big_n > N_MAX {
        return Err(Error::OrderTooLarge { n: big_n, max: N_MAX });
    }
    let eb = ball_energy(radius, model, &QuadSettings::default())?;
    let c = d_const(t) * model.dalang_constant()?;
    let mut bound = 0.0;
    for n in 1..400 {
        let term = (t - s) * t.powi(n) * c.powf((n - 1) as f64 / 2.0) / factorial(n as usize).sqrt();
        bound += term;
        if term < 1e-17 * bound {
            break;
        }
    }
    bound *= eb.sqrt();
    if s == t {
        return Ok(IncrementNorm { radius, times: (t, s), value: 0.0, std_error: 0.0, per_chaos: vec![Estimate::exact(0.0); big_n], bound });
    }
    let q = QuadSettings::default().with_rel_tol(1e-10);
    let ctt = first_chaos_covariance(radius, t, t, model, &q)?;
    let css = first_chaos_covariance(radius, s, s, model, &q)?;
    let cts = first_chaos_covariance(radius, t, s, model, &q)?;
    let mut per = vec![Estimate { value: ctt.value + css.value - 2.0 * cts.value, std_error: ctt.error + css.error + 2.0 * cts.error }];
    let top = if model.dimension == 1 { big_n } else { 1 };
    for n in 2..=top {
        let g = ChainFn::BallIncrement { n, t, s, radius };
        per.push(bilinear(model, &g, &g, &mcs.labelled(&format!("inc-{n}-{radius}")))?);
    }
    let sq = per.iter().fold(Estimate::exact(0.0), |a, b| a.add(*b));
    let value = sq.value.max(0.0).sqrt();
    let std_error = if value > 0.0 { sq.std_error / (2.0 * value) } else { sq.std_error.sqrt() };
    Ok(IncrementNorm { radius, times: (t, s), value, std_error, per_chaos: per, bound })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overlap_matches_direct_quadrature() {
        let q = QuadSettings::default().with_rel_tol(1e-11);
        for (u, t, s, r) in [(0.0, 1.0, 1.0, 2.0), (0.7, 1.0, 0.5, 1.5), (-2.2, 2.0, 1.0, 0.8)] {
            let direct = quad::integrate(|x| g1(x, t, r) * g1(x + u, s, r), -r - t - 1.0, r + t + 1.0, &q).unwrap().value;
            assert!((overlap(u, t, s, r) - direct).abs() < 1e-8, "{u}");
        }
    }

    #[test]
    fn white_noise_first_chaos() {
        let m = CovarianceModel::white_noise(1).unwrap();
        let q = QuadSettings::default();
        assert_eq!(first_chaos_covariance(0.0, 1.0, 1.0, &m, &q).unwrap().value, 0.0);
        let a = first_chaos_covariance(3.0, 1.0, 1.0, &m, &q).unwrap().value;
        let b = first_chaos_covariance_fourier(3.0, 1.0, 1.0, &m, &q).unwrap().value;
        assert!((a - b).abs() < 1e-5 * a, "{a} vs {b}");
    }

    #[test]
    fn spatial_and_fourier_routes_agree() {
        let q = QuadSettings::default().with_rel_tol(1e-9);
        for m in [CovarianceModel::heat(1.0, 1).unwrap(), CovarianceModel::riesz(0.5, 1).unwrap()] {
            let a = first_chaos_covariance(4.0, 1.0, 0.5, &m, &q).unwrap().value;
            let b = first_chaos_covariance_fourier(4.0, 1.0, 0.5, &m, &q).unwrap().value;
            assert!((a - b).abs() < 1e-5 * a, "{}: {a} vs {b}", m.kernel.name());
        }
    }

    #[test]
    fn ball_energy_white_and_heat() {
        let q = QuadSettings::default();
        assert_eq!(ball_energy(2.0, &CovarianceModel::white_noise(2).unwrap(), &q).unwrap(), 4.0 * PI);
        // Heat with tiny a approaches white noise.
        let e = ball_energy(3.0, &CovarianceModel::heat(1e-6, 1).unwrap(), &q).unwrap();
        assert!((e - 6.0).abs() < 1e-2);
    }

    #[test]
    fn increment_norm_zero_and_bound() {
        let m = CovarianceModel::heat(1.0, 1).unwrap();
        let mcs = McSettings::new(2000, 5);
        let z = increment_norm(4.0, 1.0, 1.0, &m, 2, &mcs).unwrap();
        assert_eq!(z.value, 0.0);
        let v = increment_norm(4.0, 1.0, 0.5, &m, 1, &mcs).unwrap();
        assert!(v.value > 0.0 && v.value <= v.bound);
    }
}
