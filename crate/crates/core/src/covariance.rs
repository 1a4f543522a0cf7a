//! Spatial covariance kernels γ, their spectral densities g (with
//! γ(x) = ∫ e^{-iξ·x} g(ξ) dξ) and the derived constants.

use crate::error::{Error, Result};
use crate::quad::{self, QuadSettings};
use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};
use libm::{lgamma as ln_gamma, tgamma as gamma_fn};
use std::f64::consts::PI;
use std::sync::OnceLock;

/// The six covariance families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kernel", rename_all = "snake_case")]
pub enum Kernel {
    Heat { a: f64 },
    Poisson { a: f64 },
    Riesz { beta: f64 },
    Bessel { alpha: f64 },
    Fractional { hurst: Vec<f64> },
    WhiteNoise,
}

impl Kernel {
    pub fn name(&self) -> &'static str {
        match self {
            Kernel::Heat { .. } => "heat",
            Kernel::Poisson { .. } => "poisson",
            Kernel::Riesz { .. } => "riesz",
            Kernel::Bessel { .. } => "bessel",
            Kernel::Fractional { .. } => "fractional",
            Kernel::WhiteNoise => "white_noise",
        }
    }

    /// Whether ∫(1+|ξ|²)^{-1} g(ξ) dξ is finite in dimension `d`.
    ///
    /// Evaluated on the spectral formula alone, so it is meaningful even for
    /// parameters outside the range where γ is a valid kernel.
    pub fn dalang_holds(&self, d: usize) -> bool {
        match self {
            Kernel::Heat { .. } | Kernel::Poisson { .. } => true,
            Kernel::Riesz { beta } => *beta > 0.0 && *beta < 2.0,
            Kernel::Bessel { alpha } => (d as f64) - alpha < 2.0,
            Kernel::Fractional { hurst } => {
                let s: f64 = hurst.iter().map(|h| 2.0 * h - 1.0).sum();
                hurst.iter().all(|h| *h < 1.0) && s > d as f64 - 2.0
            }
            Kernel::WhiteNoise => d == 1,
        }
    }
}

/// Lebesgue measure of the unit ball, ω_d.
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        1 => 2.0,
        2 => PI,
        _ => PI.powf(d as f64 / 2.0) / gamma_fn(d as f64 / 2.0 + 1.0),
    }
}

/// Surface measure of the unit sphere S^{d−1}.
pub fn sphere_area(d: usize) -> f64 {
    d as f64 * unit_ball_volume(d)
}

/// Riesz constant C_{d,β} making C|ξ|^{β−d} the spectral density of |x|^{-β}.
pub fn riesz_constant(d: usize, beta: f64) -> f64 {
    let d = d as f64;
    PI.powf(-d / 2.0) * 2f64.powf(-beta) * gamma_fn((d - beta) / 2.0) / gamma_fn(beta / 2.0)
}

/// Poisson constant c_d = Γ((d+1)/2) π^{-(d+1)/2}.
pub fn poisson_constant(d: usize) -> f64 {
    let e = (d as f64 + 1.0) / 2.0;
    gamma_fn(e) / PI.powf(e)
}

/// Spectral constant of the fractional kernel in one coordinate.
pub fn fractional_constant(h: f64) -> f64 {
    gamma_fn(2.0 * h + 1.0) * (PI * h).sin() / (2.0 * PI)
}

/// Covariance of one fractional-noise coordinate, H(2H−1)|x|^{2H−2}.
pub fn fractional_weight(h: f64) -> f64 {
    h * (2.0 * h - 1.0)
}

/// A noise specification.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CovarianceModel {
    #[serde(flatten)]
    pub kernel: Kernel,
    pub dimension: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ell: Option<f64>,
    #[serde(skip)]
    dalang: OnceLock<f64>,
}

impl PartialEq for CovarianceModel {
    fn eq(&self, other: &Self) -> bool {
        self.kernel == other.kernel && self.dimension == other.dimension && self.ell == other.ell
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

impl CovarianceModel {
    pub fn new(kernel: Kernel, dimension: usize) -> Result<Self> {
        if !(1..=2).contains(&dimension) {
            return Err(Error::InvalidInput(format!("dimension must be 1 or 2, got {dimension}")));
        }
        let d = dimension as f64;
        let ok = |c: bool, msg: &str| if c { Ok(()) } else { Err(Error::InvalidInput(msg.to_string())) };
        match &kernel {
            Kernel::Heat { a } | Kernel::Poisson { a } => ok(*a > 0.0 && a.is_finite(), "parameter a must be positive")?,
            Kernel::Riesz { beta } => ok(*beta > 0.0 && *beta < d, "Riesz beta must lie in (0, d)")?,
            Kernel::Bessel { alpha } => ok(*alpha > 0.0 && alpha.is_finite(), "Bessel alpha must be positive")?,
            Kernel::Fractional { hurst } => {
                ok(hurst.len() == dimension, "one Hurst index per coordinate is required")?;
                ok(hurst.iter().all(|h| *h > 0.5 && *h < 1.0), "Hurst indices must lie in (1/2, 1)")?;
            }
            Kernel::WhiteNoise => {}
        }
        Ok(Self { kernel, dimension, ell: None, dalang: OnceLock::new() })
    }

    pub fn heat(a: f64, d: usize) -> Result<Self> {
        Self::new(Kernel::Heat { a }, d)
    }
    pub fn poisson(a: f64, d: usize) -> Result<Self> {
        Self::new(Kernel::Poisson { a }, d)
    }
    pub fn riesz(beta: f64, d: usize) -> Result<Self> {
        Self::new(Kernel::Riesz { beta }, d)
    }
    pub fn bessel(alpha: f64, d: usize) -> Result<Self> {
        Self::new(Kernel::Bessel { alpha }, d)
    }
    pub fn fractional(hurst: Vec<f64>) -> Result<Self> {
        let d = hurst.len();
        Self::new(Kernel::Fractional { hurst }, d)
    }
    pub fn white_noise(d: usize) -> Result<Self> {
        Self::new(Kernel::WhiteNoise, d)
    }

    /// Attaches the integrability exponent ℓ with γ ∈ L^ℓ.
    pub fn with_ell(mut self, ell: f64) -> Self {
        self.ell = Some(ell);
        self
    }

    pub fn is_white(&self) -> bool {
        matches!(self.kernel, Kernel::WhiteNoise)
    }

    /// Whether γ is an integrable function.
    pub fn is_integrable(&self) -> bool {
        matches!(self.kernel, Kernel::Heat { .. } | Kernel::Poisson { .. } | Kernel::Bessel { .. })
    }

    /// γ(x). Infinite at the origin for the singular kernels.
    pub fn gamma(&self, x: &[f64]) -> Result<f64> {
        let d = self.dimension as f64;
        let r2: f64 = x.iter().map(|v| v * v).sum();
        Ok(match &self.kernel {
            Kernel::Heat { a } => (2.0 * PI * a).powf(-d / 2.0) * (-r2 / (2.0 * a)).exp(),
            Kernel::Poisson { a } => poisson_constant(self.dimension) * a * (a * a + r2).powf(-(d + 1.0) / 2.0),
            Kernel::Riesz { beta } => {
                if r2 == 0.0 { f64::INFINITY } else { r2.powf(-beta / 2.0) }
            }
            Kernel::Bessel { alpha } => bessel_kernel(*alpha, self.dimension, r2.sqrt()),
            Kernel::Fractional { hurst } => hurst
                .iter()
                .zip(x)
                .map(|(h, xi)| if *xi == 0.0 { f64::INFINITY } else { fractional_weight(*h) * xi.abs().powf(2.0 * h - 2.0) })
                .product(),
            Kernel::WhiteNoise => return Err(Error::NoPointwiseKernel),
        })
    }

    /// Spectral density g(ξ).
    pub fn spectral_density(&self, xi: &[f64]) -> Result<f64> {
        let d = self.dimension as f64;
        let r = norm(xi);
        let twopi_d = (2.0 * PI).powf(-d);
        Ok(match &self.kernel {
            Kernel::Heat { a } => twopi_d * (-a * r * r / 2.0).exp(),
            Kernel::Poisson { a } => twopi_d * (-a * r).exp(),
            Kernel::Riesz { beta } => {
                if r == 0.0 {
                    return Err(Error::Domain("Riesz spectral density is singular at 0".into()));
                }
                riesz_constant(self.dimension, *beta) * r.powf(beta - d)
            }
            Kernel::Bessel { alpha } => twopi_d * (1.0 + r * r).powf(-alpha / 2.0),
            Kernel::Fractional { hurst } => {
                let mut g = 1.0;
                for (h, x) in hurst.iter().zip(xi) {
                    if *x == 0.0 {
                        return Err(Error::Domain("fractional spectral density is singular on the axes".into()));
                    }
                    g *= fractional_constant(*h) * x.abs().powf(1.0 - 2.0 * h);
                }
                g
            }
            Kernel::WhiteNoise => twopi_d,
        })
    }

    /// ‖γ‖_{L¹}: `None` for white noise, `+∞` for the non-integrable kernels.
    pub fn gamma_l1_norm(&self) -> Option<f64> {
        match self.kernel {
            Kernel::WhiteNoise => None,
            Kernel::Riesz { .. } | Kernel::Fractional { .. } => Some(f64::INFINITY),
            _ => Some(1.0),
        }
    }

    /// Total mass of γ, with white noise counted as the unit point mass.
    pub fn gamma_mass(&self) -> Result<f64> {
        match self.gamma_l1_norm() {
            None => Ok(1.0),
            Some(m) if m.is_finite() => Ok(m),
            _ => Err(Error::NotApplicable(format!("{} kernel is not integrable", self.kernel.name()))),
        }
    }

    pub fn dalang_holds(&self) -> bool {
        self.kernel.dalang_holds(self.dimension)
    }

    /// (scale, β) when γ(x) = scale·|x|^{-β} in d = 1.
    pub fn power_law(&self) -> Option<(f64, f64)> {
        match (&self.kernel, self.dimension) {
            (Kernel::Riesz { beta }, _) => Some((1.0, *beta)),
            (Kernel::Fractional { hurst }, 1) => Some((fractional_weight(hurst[0]), 2.0 - 2.0 * hurst[0])),
            _ => None,
        }
    }

    /// Dalang constant with default tolerances, computed once.
    pub fn dalang_constant(&self) -> Result<f64> {
        if let Some(v) = self.dalang.get() {
            return Ok(*v);
        }
        let q = if self.dimension == 1 { QuadSettings::default() } else { QuadSettings::planar() };
        let v = self.dalang_constant_with(&q)?;
        Ok(*self.dalang.get_or_init(|| v))
    }

    /// C_μ = ∫(1+|ξ|²)^{-1} g(ξ) dξ.
    pub fn dalang_constant_with(&self, q: &QuadSettings) -> Result<f64> {
        if !self.dalang_holds() {
            return Err(Error::DalangViolated);
        }
        let d = self.dimension;
        let half_pi_over_sin = |p: f64| PI / (2.0 * (PI * p / 2.0).sin());
        match &self.kernel {
            Kernel::WhiteNoise => Ok((2.0 * PI).powi(-(d as i32)) * PI),
            Kernel::Riesz { beta } => Ok(riesz_constant(d, *beta) * sphere_area(d) * half_pi_over_sin(*beta)),
            Kernel::Fractional { hurst } => {
                let c: f64 = hurst.iter().map(|h| fractional_constant(*h)).product();
                if d == 1 {
                    Ok(2.0 * c * half_pi_over_sin(2.0 - 2.0 * hurst[0]))
                } else {
                    let p = 4.0 - 2.0 * hurst[0] - 2.0 * hurst[1];
                    let (a, b) = (1.0 - hurst[0], 1.0 - hurst[1]);
                    let angular = 2.0 * (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)).exp();
                    Ok(c * angular * half_pi_over_sin(p))
                }
            }
            _ => {
                let s = sphere_area(d);
                let r = quad::integrate_radial(
                    |r| s * r.powi(d as i32 - 1) * self.radial_spectral(r) / (1.0 + r * r),
                    d as f64,
                    q,
                )?;
                if r.error > q.rel_tol * r.value.abs() + q.abs_tol {
                    return Err(Error::Quadrature { achieved: r.error, requested: q.rel_tol * r.value.abs() });
                }
                Ok(r.value)
            }
        }
    }

    /// g at radius r for the isotropic families.
    pub fn radial_spectral(&self, r: f64) -> f64 {
        let d = self.dimension as f64;
        let twopi_d = (2.0 * PI).powf(-d);
        match &self.kernel {
            Kernel::Heat { a } => twopi_d * (-a * r * r / 2.0).exp(),
            Kernel::Poisson { a } => twopi_d * (-a * r).exp(),
            Kernel::Riesz { beta } => riesz_constant(self.dimension, *beta) * r.powf(beta - d),
            Kernel::Bessel { alpha } => twopi_d * (1.0 + r * r).powf(-alpha / 2.0),
            Kernel::WhiteNoise => twopi_d,
            Kernel::Fractional { hurst } if hurst.len() == 1 => fractional_constant(hurst[0]) * r.powf(1.0 - 2.0 * hurst[0]),
            Kernel::Fractional { .. } => f64::NAN,
        }
    }

    /// Embedding exponent q for d = 2.
    pub fn embed_exponent(&self) -> Result<f64> {
        if self.dimension != 2 {
            return Err(Error::NotApplicable("the embedding exponent is defined for d = 2".into()));
        }
        if let Kernel::Riesz { beta } = self.kernel {
            return Ok(2.0 / (4.0 - beta));
        }
        if self.is_white() {
            return Err(Error::NotApplicable("white noise has no L^ℓ kernel".into()));
        }
        match self.ell {
            Some(l) if l > 1.0 && l.is_finite() => Ok(l / (2.0 * l - 1.0)),
            Some(l) => Err(Error::Domain(format!("ℓ must lie in (1, ∞), got {l}"))),
            None => Err(Error::InvalidInput("an integrability exponent ℓ is required".into())),
        }
    }

    /// Proposal used by [`spectral_importance_sampler`] for this family.
    pub fn default_proposal(&self) -> Proposal {
        let d = self.dimension as f64;
        match &self.kernel {
            // g ∝ N(0, I/a): constant weights.
            Kernel::Heat { a } => Proposal::Gaussian { scale: 1.0 / a.sqrt() },
            // g ∝ e^{-a|ξ|}: radial Gamma(d, a), constant weights.
            Kernel::Poisson { a } => Proposal::RadialGamma { rate: *a },
            // Power law r^{β−1} at the origin, Cauchy-type r^{-2} tail.
            Kernel::Riesz { beta } => Proposal::RadialBetaPrime { near: *beta, tail: 1.0 },
            // Flat near the origin, tail no lighter than the Dalang integrand.
            Kernel::Bessel { alpha } => Proposal::RadialBetaPrime { near: d, tail: ((alpha + 2.0 - d) / 2.0).min(1.0) },
            Kernel::Fractional { hurst } => Proposal::ProductBetaPrime { near: hurst.iter().map(|h| 2.0 - 2.0 * h).collect(), tail: 1.0 },
            Kernel::WhiteNoise => Proposal::Cauchy,
        }
    }

    /// Draws u from the normalized kernel γ/‖γ‖ (integrable families only).
    pub fn sample_gamma<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) -> Result<()> {
        match &self.kernel {
            Kernel::Heat { a } => {
                let s = a.sqrt();
                out.iter_mut().for_each(|v| *v = s * rng.sample::<f64, _>(StandardNormal));
            }
            Kernel::Poisson { a } => {
                // Multivariate Cauchy: a·Z/|Z₀|.
                let z0: f64 = rng.sample::<f64, _>(StandardNormal);
                let s = a / z0.abs();
                out.iter_mut().for_each(|v| *v = s * rng.sample::<f64, _>(StandardNormal));
            }
            Kernel::Bessel { alpha } => {
                // Gamma(α/2, 1) mixture of heat kernels with variance 2U.
                let u: f64 = Gamma::new(alpha / 2.0, 1.0).expect("valid shape").sample(rng);
                let s = (2.0 * u).sqrt();
                out.iter_mut().for_each(|v| *v = s * rng.sample::<f64, _>(StandardNormal));
            }
            _ => return Err(Error::NotApplicable(format!("{} kernel cannot be sampled", self.kernel.name()))),
        }
        Ok(())
    }
}

/// Bessel kernel γ(x) = Γ(α/2)^{-1} ∫₀^∞ w^{α/2−1} (4πw)^{-d/2} e^{-w-|x|²/4w} dw.
fn bessel_kernel(alpha: f64, d: usize, r: f64) -> f64 {
    let d = d as f64;
    if r == 0.0 && alpha <= d {
        return f64::INFINITY;
    }
    let q = QuadSettings { rel_tol: 1e-10, abs_tol: 0.0, max_intervals: 4000 };
    let lg = ln_gamma(alpha / 2.0);
    let f = |v: f64| {
        let w = v.exp();
        let e = (alpha / 2.0) * v - (d / 2.0) * (4.0 * PI * w).ln() - w - r * r / (4.0 * w) - lg;
        e.exp()
    };
    let lo = if r > 0.0 { (r * r / 4.0).ln() - 8.0 } else { -60.0 };
    quad::integrate(f, lo.min(-1.0) - 40.0, 5.0f64.max(lo + 10.0), &q).map(|v| v.value).unwrap_or(f64::NAN)
}

/// Proposal densities on ℝ^d for spectral importance sampling.
#[derive(Debug, Clone, PartialEq)]
pub enum Proposal {
    /// N(0, scale²·I).
    Gaussian { scale: f64 },
    /// Cauchy(0, 1), d = 1.
    Cauchy,
    /// Isotropic, |ξ| ~ Gamma(d, rate).
    RadialGamma { rate: f64 },
    /// Isotropic, |ξ| beta-prime: density ∝ r^{near−1}(1+r)^{−near−tail}.
    RadialBetaPrime { near: f64, tail: f64 },
    /// Independent symmetric beta-prime coordinates.
    ProductBetaPrime { near: Vec<f64>, tail: f64 },
}

fn beta_prime_pdf(r: f64, k: f64, l: f64) -> f64 {
    let lb = ln_gamma(k) + ln_gamma(l) - ln_gamma(k + l);
    ((k - 1.0) * r.ln() - (k + l) * (1.0 + r).ln() - lb).exp()
}

fn beta_prime_sample<R: Rng + ?Sized>(rng: &mut R, k: f64, l: f64) -> f64 {
    let x: f64 = Beta::new(k, l).expect("positive parameters").sample(rng);
    let x = x.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON);
    x / (1.0 - x)
}

fn unit_direction<R: Rng + ?Sized>(rng: &mut R, d: usize, out: &mut [f64]) {
    match d {
        1 => out[0] = if rng.random::<bool>() { 1.0 } else { -1.0 },
        _ => {
            let th = 2.0 * PI * rng.random::<f64>();
            out[0] = th.cos();
            out[1] = th.sin();
        }
    }
}

impl Proposal {
    /// Fills `out` (length d) with a draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let d = out.len();
        match self {
            Proposal::Gaussian { scale } => out.iter_mut().for_each(|v| *v = scale * rng.sample::<f64, _>(StandardNormal)),
            Proposal::Cauchy => {
                let u: f64 = rng.random();
                out[0] = (PI * (u - 0.5)).tan();
            }
            Proposal::RadialGamma { rate } => {
                let r: f64 = Gamma::new(d as f64, 1.0 / rate).expect("valid").sample(rng);
                unit_direction(rng, d, out);
                out.iter_mut().for_each(|v| *v *= r);
            }
            Proposal::RadialBetaPrime { near, tail } => {
                let r = beta_prime_sample(rng, *near, *tail);
                unit_direction(rng, d, out);
                out.iter_mut().for_each(|v| *v *= r);
            }
            Proposal::ProductBetaPrime { near, tail } => {
                for (v, k) in out.iter_mut().zip(near) {
                    let r = beta_prime_sample(rng, *k, *tail);
                    *v = if rng.random::<bool>() { r } else { -r };
                }
            }
        }
    }

    /// Density at ξ.
    pub fn pdf(&self, xi: &[f64]) -> f64 {
        let d = xi.len();
        let r = norm(xi);
        let radial = |pr: f64| if r == 0.0 { 0.0 } else { pr / (sphere_area(d) * r.powi(d as i32 - 1)) };
        match self {
            Proposal::Gaussian { scale } => {
                let s2 = scale * scale;
                (2.0 * PI * s2).powf(-(d as f64) / 2.0) * (-r * r / (2.0 * s2)).exp()
            }
            Proposal::Cauchy => 1.0 / (PI * (1.0 + xi[0] * xi[0])),
            Proposal::RadialGamma { rate } => {
                let k = d as f64;
                let pr = (k * rate.ln() + (k - 1.0) * r.ln() - rate * r - ln_gamma(k)).exp();
                if d == 1 { 0.5 * rate * (-rate * r).exp() } else { radial(pr) }
            }
            Proposal::RadialBetaPrime { near, tail } => radial(beta_prime_pdf(r, *near, *tail)),
            Proposal::ProductBetaPrime { near, tail } => xi
                .iter()
                .zip(near)
                .map(|(x, k)| if *x == 0.0 { 0.0 } else { 0.5 * beta_prime_pdf(x.abs(), *k, *tail) })
                .product(),
        }
    }
}

/// Draws `count` i.i.d. points from the family's proposal with weights g/p.
pub fn spectral_importance_sampler<R: Rng + ?Sized>(model: &CovarianceModel, rng: &mut R, count: usize) -> Result<Vec<(Vec<f64>, f64)>> {
    spectral_importance_sampler_with(model, &model.default_proposal(), rng, count)
}

/// As [`spectral_importance_sampler`] with an explicit proposal.
pub fn spectral_importance_sampler_with<R: Rng + ?Sized>(
    model: &CovarianceModel,
    proposal: &Proposal,
    rng: &mut R,
    count: usize,
) -> Result<Vec<(Vec<f64>, f64)>> {
    if !model.dalang_holds() {
        return Err(Error::DalangViolated);
    }
    let mut out = Vec::with_capacity(count);
    let mut xi = vec![0.0; model.dimension];
    while out.len() < count {
        proposal.sample(rng, &mut xi);
        let p = proposal.pdf(&xi);
        if p <= 0.0 || !p.is_finite() {
            continue;
        }
        let Ok(g) = model.spectral_density(&xi) else { continue };
        out.push((xi.clone(), g / p));
    }
    Ok(out)
}
