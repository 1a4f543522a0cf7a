//! Spatial-domain estimators in d = 1.
//!
//! For chain functions h₁, h₂ on ℝⁿ the bilinear form
//!
//! B(h₁, h₂) = Σ_{ρ∈Sₙ} ∫∫ h₁(x) h₂(y_ρ) Π_i γ(x_i − y_i) dx dy = n!⟨h̃₁, h̃₂⟩
//!
//! is estimated by sampling the chain x (anchor uniform on a window, consecutive
//! gaps uniform on the light-cone reach) and then y given x:
//! * white noise: y = x;
//! * integrable γ: y_i = x_i + u_i with u_i ~ γ/‖γ‖;
//! * power-law γ: y is drawn as a chain whose points follow a defensive mixture
//!   of the uniform law and |y_j − x_{π(j)}|^{-β}, averaged over π ∈ Sₙ, which
//!   keeps the importance weights bounded.

use super::{factorial, permutations, N_MAX};
use crate::covariance::CovarianceModel;
use crate::error::{Error, Result};
use crate::mc::{self, Estimate, McSettings};
use rand::Rng;

/// Kernels in chain form, all with x_{n+1} the spatial argument of u.
#[derive(Debug, Clone, PartialEq)]
pub enum ChainFn {
    /// f_n(·, anchor; t).
    Point { n: usize, t: f64, anchor: f64 },
    /// g_{n,R}(·; t) = ∫_{−R}^{R} f_n(·, x; t) dx.
    Ball { n: usize, t: f64, radius: f64 },
    /// ∫_ℝ f_n(·, x; t) dx.
    Line { n: usize, t: f64 },
    /// g_{n,R}(·; t) − g_{n,R}(·; s).
    BallIncrement { n: usize, t: f64, s: f64, radius: f64 },
}

fn chain_length(points: &[f64]) -> f64 {
    points.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}

fn norm_const(n: usize) -> f64 {
    1.0 / (2f64.powi(n as i32) * factorial(n))
}

/// ∫_{−R}^{R} (T − |x − c|)_+^n dx.
fn window_power_integral(n: usize, rem: f64, c: f64, radius: f64) -> f64 {
    if rem <= 0.0 {
        return 0.0;
    }
    let k = (n + 1) as i32;
    let top = rem.powi(k);
    let q = |v: f64| {
        let a = v.abs().min(rem);
        v.signum() * (top - (rem - a).powi(k)) / k as f64
    };
    q(radius - c) - q(-radius - c)
}

fn ball_value(n: usize, t: f64, radius: f64, points: &[f64]) -> f64 {
    let rem = t - chain_length(points);
    norm_const(n) * window_power_integral(n, rem, points[n - 1], radius)
}

impl ChainFn {
    pub fn order(&self) -> usize {
        match *self {
            ChainFn::Point { n, .. } | ChainFn::Ball { n, .. } | ChainFn::Line { n, .. } | ChainFn::BallIncrement { n, .. } => n,
        }
    }

    /// Maximal distance between consecutive points (and to the anchor).
    pub fn reach(&self) -> f64 {
        match *self {
            ChainFn::Point { t, .. } | ChainFn::Ball { t, .. } | ChainFn::Line { t, .. } => t,
            ChainFn::BallIncrement { t, s, .. } => t.max(s),
        }
    }

    /// Interval containing x_n on the support, if bounded.
    pub fn window(&self) -> Option<(f64, f64)> {
        match *self {
            ChainFn::Point { t, anchor, .. } => Some((anchor - t, anchor + t)),
            ChainFn::Ball { t, radius, .. } => Some((-radius - t, radius + t)),
            ChainFn::BallIncrement { t, s, radius, .. } => Some((-radius - t.max(s), radius + t.max(s))),
            ChainFn::Line { .. } => None,
        }
    }

    pub fn eval(&self, points: &[f64]) -> f64 {
        match *self {
            ChainFn::Point { n, t, anchor } => {
                let rem = t - chain_length(points) - (anchor - points[n - 1]).abs();
                if rem <= 0.0 { 0.0 } else { norm_const(n) * rem.powi(n as i32) }
            }
            ChainFn::Ball { n, t, radius } => ball_value(n, t, radius, points),
            ChainFn::Line { n, t } => {
                let rem = t - chain_length(points);
                if rem <= 0.0 { 0.0 } else { norm_const(n) * 2.0 * rem.powi(n as i32 + 1) / (n + 1) as f64 }
            }
            ChainFn::BallIncrement { n, t, s, radius } => ball_value(n, t, radius, points) - ball_value(n, s, radius, points),
        }
    }
}

/// Density |y − c|^{-β} restricted to [lo, hi].
struct PowerSegment {
    beta: f64,
}

impl PowerSegment {
    fn antiderivative(&self, u: f64) -> f64 {
        u.signum() * u.abs().powf(1.0 - self.beta) / (1.0 - self.beta)
    }

    fn mass(&self, c: f64, lo: f64, hi: f64) -> f64 {
        self.antiderivative(hi - c) - self.antiderivative(lo - c)
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R, c: f64, lo: f64, hi: f64) -> f64 {
        let (a, b) = (self.antiderivative(lo - c), self.antiderivative(hi - c));
        let v = a + (b - a) * rng.random::<f64>();
        let u = v.signum() * (v.abs() * (1.0 - self.beta)).powf(1.0 / (1.0 - self.beta));
        (c + u).clamp(lo, hi)
    }

    /// Defensive mixture ½·uniform + ½·power law on [lo, hi].
    fn mixture_pdf(&self, y: f64, c: f64, lo: f64, hi: f64) -> f64 {
        0.5 / (hi - lo) + 0.5 * (y - c).abs().powf(-self.beta) / self.mass(c, lo, hi)
    }

    fn mixture_sample<R: Rng + ?Sized>(&self, rng: &mut R, c: f64, lo: f64, hi: f64) -> f64 {
        if rng.random::<bool>() {
            lo + (hi - lo) * rng.random::<f64>()
        } else {
            self.sample(rng, c, lo, hi)
        }
    }
}

fn sample_chain<R: Rng + ?Sized>(rng: &mut R, window: (f64, f64), reach: f64, out: &mut [f64]) -> f64 {
    let n = out.len();
    out[n - 1] = window.0 + (window.1 - window.0) * rng.random::<f64>();
    for j in (0..n - 1).rev() {
        out[j] = out[j + 1] + reach * (2.0 * rng.random::<f64>() - 1.0);
    }
    (window.1 - window.0) * (2.0 * reach).powi(n as i32 - 1)
}

/// Estimates B(a, b) = n!⟨ã, b̃⟩ in d = 1.
pub fn bilinear(model: &CovarianceModel, a: &ChainFn, b: &ChainFn, mc: &McSettings) -> Result<Estimate> {
    bilinear_many(model, a, std::slice::from_ref(b), mc).map(|v| v[0])
}

/// B(a, b_k) for several partners sharing the sampled chains.
///
/// For power-law kernels all partners must share one window and reach.
pub fn bilinear_many(model: &CovarianceModel, a: &ChainFn, bs: &[ChainFn], mc: &McSettings) -> Result<Vec<Estimate>> {
    if model.dimension != 1 {
        return Err(Error::Unsupported("spatial estimators are implemented for d = 1".into()));
    }
    let n = a.order();
    if bs.iter().any(|b| b.order() != n) {
        return Err(Error::InvalidInput("bilinear form needs kernels of equal order".into()));
    }
    if n > N_MAX {
        return Err(Error::OrderTooLarge { n, max: N_MAX });
    }
    if n == 0 {
        return Err(Error::InvalidInput("order must be at least 1".into()));
    }
    let perms = permutations(n);
    let k = bs.len();
    if let Some((scale, beta)) = model.power_law() {
        let window = a.window().ok_or_else(|| Error::NotApplicable("power-law kernels need bounded support".into()))?;
        let bwin = bs[0].window().ok_or_else(|| Error::NotApplicable("power-law kernels need bounded support".into()))?;
        let breach = bs[0].reach();
        if bs.iter().any(|b| b.window() != Some(bwin) || b.reach() != breach) {
            return Err(Error::InvalidInput("partners must share window and reach".into()));
        }
        let seg = PowerSegment { beta };
        let reach = a.reach();
        return Ok(mc::mean_vec(mc, k, |rng, out| {
            let mut x = vec![0.0; n];
            let mut y = vec![0.0; n];
            let wx = sample_chain(rng, window, reach, &mut x);
            let ha = a.eval(&x);
            if ha == 0.0 {
                return;
            }
            let pick = &perms[rng.random_range(0..perms.len())];
            y[n - 1] = seg.mixture_sample(rng, x[pick[n - 1]], bwin.0, bwin.1);
            for j in (0..n - 1).rev() {
                y[j] = seg.mixture_sample(rng, x[pick[j]], y[j + 1] - breach, y[j + 1] + breach);
            }
            let mut num = 0.0;
            let mut den = 0.0;
            for p in &perms {
                let mut term = 1.0;
                let mut q = seg.mixture_pdf(y[n - 1], x[p[n - 1]], bwin.0, bwin.1);
                for j in 0..n {
                    term *= scale * (x[p[j]] - y[j]).abs().powf(-beta);
                    if j + 1 < n {
                        q *= seg.mixture_pdf(y[j], x[p[j]], y[j + 1] - breach, y[j + 1] + breach);
                    }
                }
                num += term;
                den += q;
            }
            let w = wx * ha * num / (den / perms.len() as f64);
            // A draw landing exactly on a singular centre (null event, rounding) gives inf/inf.
            if !w.is_finite() {
                return;
            }
            for (o, b) in out.iter_mut().zip(bs) {
                *o = w * b.eval(&y);
            }
        }));
    }
    let white = model.is_white();
    let mass = model.gamma_mass()?;
    // Sample the chain with bounded support; the form is symmetric in (a, b).
    let (window, reach) = match a.window() {
        Some(w) => (w, a.reach()),
        None if k == 1 && bs[0].window().is_some() => return bilinear_many(model, &bs[0], std::slice::from_ref(a), mc),
        None => return Err(Error::InvalidInput("the sampled kernel must have bounded support".into())),
    };
    let weight_y = mass.powi(n as i32);
    Ok(mc::mean_vec(mc, k, |rng, out| {
        let mut x = vec![0.0; n];
        let mut y = vec![0.0; n];
        let mut yp = vec![0.0; n];
        let mut u = [0.0];
        let wx = sample_chain(rng, window, reach, &mut x);
        let ha = a.eval(&x);
        if ha == 0.0 {
            return;
        }
        if white {
            y.copy_from_slice(&x);
        } else {
            for j in 0..n {
                model.sample_gamma(rng, &mut u).expect("integrable kernel");
                y[j] = x[j] + u[0];
            }
        }
        for (o, b) in out.iter_mut().zip(bs) {
            let mut s = 0.0;
            for p in &perms {
                for j in 0..n {
                    yp[j] = y[p[j]];
                }
                s += b.eval(&yp);
            }
            *o = wx * weight_y * ha * s;
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate, QuadSettings};

    #[test]
    fn power_law_weight_survives_centre_collision() {
        // This stream draws a point exactly on a singular centre.
        let m = CovarianceModel::riesz(0.5, 1).unwrap();
        let a = ChainFn::Ball { n: 3, t: 1.0, radius: 8.0 };
        let e = bilinear(&m, &a, &a, &McSettings::new(20_000, 3).labelled("var-3-8")).unwrap();
        assert!(e.value.is_finite() && e.value > 0.0, "{e:?}");
    }

    #[test]
    fn ball_closed_form_matches_quadrature() {
        let q = QuadSettings::default().with_rel_tol(1e-10);
        for (n, pts, r) in [(1, vec![0.3], 2.0), (2, vec![1.9, 2.2], 2.0), (3, vec![0.0, 0.2, -0.1], 0.5)] {
            let t = 1.0;
            let ball = ChainFn::Ball { n, t, radius: r }.eval(&pts);
            let quad = integrate(|x| ChainFn::Point { n, t, anchor: x }.eval(&pts), -r, r, &q).unwrap().value;
            assert!((ball - quad).abs() < 1e-9, "{n}: {ball} vs {quad}");
            let line = ChainFn::Line { n, t }.eval(&pts);
            let quad = integrate(|x| ChainFn::Point { n, t, anchor: x }.eval(&pts), -10.0, 10.0, &q).unwrap().value;
            assert!((line - quad).abs() < 1e-9);
        }
    }

    #[test]
    fn power_segment_sampler_in_range() {
        let seg = PowerSegment { beta: 0.5 };
        let mut rng = crate::mc::stream(9, 0);
        for _ in 0..1000 {
            let y = seg.mixture_sample(&mut rng, 0.3, -1.0, 2.0);
            assert!((-1.0..=2.0).contains(&y));
        }
        let q = QuadSettings::default();
        let m = integrate(|y| seg.mixture_pdf(y, 0.3, -1.0, 2.0), -1.0, 0.3, &q).unwrap().value
            + integrate(|y| seg.mixture_pdf(y, 0.3, -1.0, 2.0), 0.3, 2.0, &q).unwrap().value;
        assert!((m - 1.0).abs() < 1e-5);
    }

    #[test]
    fn white_noise_first_order_point() {
        let m = CovarianceModel::white_noise(1).unwrap();
        let f = ChainFn::Point { n: 1, t: 1.0, anchor: 0.0 };
        let e = bilinear(&m, &f, &f, &McSettings::new(20_000, 1)).unwrap();
        assert!(e.within(1.0 / 6.0, 3.5, 0.0), "{e:?}");
    }
}
