use super::fourier::phi;
use super::spatial::{bilinear, ChainFn};
use super::{factorial, permutations, ChaosKernel, N_MAX};
use crate::covariance::{CovarianceModel, Proposal};
use crate::error::{Error, Result};
use crate::mc::{self, Estimate, McSettings};
use crate::wave::d_const;
use rand::Rng;

/// One term α_n(z; t, s) of the covariance series.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceSeriesTerm {
    pub order: usize,
    pub times: (f64, f64),
    pub lag: Vec<f64>,
    pub value: f64,
    pub mc_std_error: f64,
}

impl CovarianceSeriesTerm {
    pub fn estimate(&self) -> Estimate {
        Estimate { value: self.value, std_error: self.mc_std_error }
    }
}

/// Sequential sampler for η_j = ξ_1 + … + ξ_j.
///
/// η_j is drawn from ½p(η) + ½p(η − η_{j−1}) where p is the family proposal;
/// the weight accumulates g(η_j − η_{j−1}) over the mixture density.
struct ChainSampler<'a> {
    model: &'a CovarianceModel,
    proposal: Proposal,
}

impl<'a> ChainSampler<'a> {
    fn new(model: &'a CovarianceModel) -> Self {
        Self { model, proposal: model.default_proposal() }
    }

    /// Fills `eta` (n·d) and returns the importance weight.
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R, eta: &mut [f64]) -> f64 {
        let d = self.model.dimension;
        let n = eta.len() / d;
        let mut w = 1.0;
        let mut xi = [0.0; 2];
        let mut prev = [0.0; 2];
        for j in 0..n {
            let cur = &mut xi[..d];
            self.proposal.sample(rng, cur);
            let shifted = j > 0 && rng.random::<bool>();
            for k in 0..d {
                eta[j * d + k] = if shifted { cur[k] + prev[k] } else { cur[k] };
            }
            let mut inc = [0.0; 2];
            for k in 0..d {
                inc[k] = eta[j * d + k] - prev[k];
            }
            let dens = if j == 0 {
                self.proposal.pdf(&eta[..d])
            } else {
                0.5 * self.proposal.pdf(&eta[j * d..(j + 1) * d]) + 0.5 * self.proposal.pdf(&inc[..d])
            };
            let g = self.model.spectral_density(&inc[..d]).unwrap_or(0.0);
            if dens <= 0.0 || g == 0.0 || !g.is_finite() {
                return 0.0;
            }
            w *= g / dens;
            prev[..d].copy_from_slice(&eta[j * d..(j + 1) * d]);
        }
        w
    }
}

fn radii(eta: &[f64], d: usize) -> Vec<f64> {
    eta.chunks(d).map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt()).collect()
}

/// η-chain of the permuted increments ξ_ρ.
fn permuted_eta(eta: &[f64], d: usize, perm: &[usize], out: &mut [f64]) {
    let n = perm.len();
    let mut acc = [0.0; 2];
    for j in 0..n {
        let i = perm[j];
        for k in 0..d {
            let prev = if i == 0 { 0.0 } else { eta[(i - 1) * d + k] };
            acc[k] += eta[i * d + k] - prev;
            out[j * d + k] = acc[k];
        }
    }
}

fn check_order(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidInput("order must be at least 1".into()));
    }
    if n > N_MAX {
        return Err(Error::OrderTooLarge { n, max: N_MAX });
    }
    Ok(())
}

/// ‖f_n(·, x; t)‖² in the noise Hilbert space, via the Fourier representation.
pub fn kernel_norm_sq(kernel: &ChaosKernel, model: &CovarianceModel, mcs: &McSettings) -> Result<Estimate> {
    if !model.dalang_holds() {
        return Err(Error::DalangViolated);
    }
    check_order(kernel.order)?;
    if kernel.dimension() != model.dimension {
        return Err(Error::InvalidInput("kernel and model dimensions differ".into()));
    }
    let (n, d, t) = (kernel.order, model.dimension, kernel.horizon);
    if t <= 0.0 {
        return Ok(Estimate::exact(0.0));
    }
    let sampler = ChainSampler::new(model);
    Ok(mc::mean(mcs, |rng| {
        let mut eta = vec![0.0; n * d];
        let w = sampler.draw(rng, &mut eta);
        if w == 0.0 {
            return 0.0;
        }
        let p = phi(t, &radii(&eta, d));
        w * p * p
    }))
}

/// α_n(z; t, s) by the Fourier representation (any admissible model).
pub fn alpha_n_fourier(n: usize, z: &[f64], t: f64, s: f64, model: &CovarianceModel, mcs: &McSettings) -> Result<CovarianceSeriesTerm> {
    if !model.dalang_holds() {
        return Err(Error::DalangViolated);
    }
    check_order(n)?;
    let d = model.dimension;
    if z.len() != d {
        return Err(Error::InvalidInput("lag dimension differs from the model".into()));
    }
    let sampler = ChainSampler::new(model);
    let perms = permutations(n);
    let nf = factorial(n);
    let est = mc::mean(mcs, |rng| {
        let mut eta = vec![0.0; n * d];
        let mut eta_p = vec![0.0; n * d];
        let w = sampler.draw(rng, &mut eta);
        if w == 0.0 {
            return 0.0;
        }
        let phase: f64 = (0..d).map(|k| z[k] * eta[(n - 1) * d + k]).sum::<f64>().cos();
        let pt = phi(t, &radii(&eta, d));
        let mut acc = 0.0;
        for p in &perms {
            permuted_eta(&eta, d, p, &mut eta_p);
            acc += phi(s, &radii(&eta_p, d));
        }
        nf * w * phase * pt * acc
    });
    Ok(CovarianceSeriesTerm { order: n, times: (t, s), lag: z.to_vec(), value: est.value, mc_std_error: est.std_error })
}

/// α_n(z; t, s) by the spatial representation (d = 1, integrable or white γ,
/// and the power-law kernels).
pub fn alpha_n_spatial(n: usize, z: f64, t: f64, s: f64, model: &CovarianceModel, mcs: &McSettings) -> Result<CovarianceSeriesTerm> {
    check_order(n)?;
    if !model.dalang_holds() {
        return Err(Error::DalangViolated);
    }
    let a = ChainFn::Point { n, t, anchor: z };
    let b = ChainFn::Point { n, t: s, anchor: 0.0 };
    let e = bilinear(model, &a, &b, mcs)?.scale(factorial(n));
    Ok(CovarianceSeriesTerm { order: n, times: (t, s), lag: vec![z], value: e.value, mc_std_error: e.std_error })
}

/// α_n(z; t, s): spatial route for integrable or white γ in d = 1, Fourier otherwise.
pub fn alpha_n(n: usize, z: &[f64], t: f64, s: f64, model: &CovarianceModel, mcs: &McSettings) -> Result<CovarianceSeriesTerm> {
    check_order(n)?;
    let spatial = model.dimension == 1 && (model.is_integrable() || model.is_white());
    // Disjoint light cones.
    let zn = z.iter().map(|v| v * v).sum::<f64>().sqrt();
    if model.is_white() && zn >= t + s {
        return Ok(CovarianceSeriesTerm { order: n, times: (t, s), lag: z.to_vec(), value: 0.0, mc_std_error: 0.0 });
    }
    if spatial {
        alpha_n_spatial(n, z[0], t, s, model, mcs)
    } else {
        alpha_n_fourier(n, z, t, s, model, mcs)
    }
}

/// Σ_{n>N} xⁿ/n! for x ≥ 0.
pub(crate) fn exp_remainder(x: f64, big_n: usize) -> f64 {
    let mut term = x.powi(big_n as i32 + 1) / factorial(big_n + 1);
    let mut sum: f64 = 0.0;
    let mut k = big_n + 1;
    while term > 1e-18 * sum.max(1e-300) || k < big_n + 3 {
        sum += term;
        k += 1;
        term *= x / k as f64;
        if k > big_n + 2000 {
            break;
        }
    }
    sum
}

/// Majorant of Σ_{n>N} |α_n(z; t, s)|/n!.
///
/// |α_n|/n! ≤ n!‖f_n(t)‖‖f_n(s)‖ ≤ (ts·√(D_t D_s)·C_μ)ⁿ/n!, summed in closed form.
pub fn rho_tail_bound(t: f64, s: f64, model: &CovarianceModel, big_n: usize) -> Result<f64> {
    let c = model.dalang_constant()?;
    let x = t * s * (d_const(t) * d_const(s)).sqrt() * c;
    Ok(exp_remainder(x, big_n))
}

/// Truncated covariance series with its tail bound.
#[derive(Debug, Clone, PartialEq)]
pub struct RhoValue {
    pub value: f64,
    pub std_error: f64,
    pub tail_bound: f64,
    pub terms: Vec<CovarianceSeriesTerm>,
}

/// ρ_{t,s}(z) ≈ Σ_{n≤N} α_n(z; t, s)/n!.
pub fn rho(t: f64, s: f64, z: &[f64], model: &CovarianceModel, big_n: usize, mcs: &McSettings) -> Result<RhoValue> {
    check_order(big_n)?;
    let mut est = Estimate::exact(0.0);
    let mut terms = Vec::with_capacity(big_n);
    for n in 1..=big_n {
        let a = alpha_n(n, z, t, s, model, &mcs.labelled(&format!("rho-{n}")))?;
        est = est.add(a.estimate().scale(1.0 / factorial(n)));
        terms.push(a);
    }
    Ok(RhoValue { value: est.value, std_error: est.std_error, tail_bound: rho_tail_bound(t, s, model, big_n)?, terms })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permuted_eta_identity_and_swap() {
        let eta = [1.0, 3.0, 6.0];
        let mut out = [0.0; 3];
        permuted_eta(&eta, 1, &[0, 1, 2], &mut out);
        assert_eq!(out, eta);
        // ξ = (1, 2, 3); ρ = (2, 0, 1) gives (3, 1, 2) → η = (3, 4, 6)
        permuted_eta(&eta, 1, &[2, 0, 1], &mut out);
        assert_eq!(out, [3.0, 4.0, 6.0]);
    }

    #[test]
    fn remainder_matches_exponential() {
        let x: f64 = 1.7;
        let direct = x.exp() - (1.0 + x + x * x / 2.0);
        assert!((exp_remainder(x, 2) - direct).abs() < 1e-14);
    }

    #[test]
    fn white_noise_norm_first_order() {
        let m = CovarianceModel::white_noise(1).unwrap();
        let k = ChaosKernel::new(1, 1.0, vec![0.0]);
        let e = kernel_norm_sq(&k, &m, &McSettings::new(20_000, 3)).unwrap();
        assert!(e.within(1.0 / 6.0, 3.0, 0.0), "{e:?}");
    }

    #[test]
    fn order_limit() {
        let m = CovarianceModel::white_noise(1).unwrap();
        assert!(matches!(alpha_n(5, &[0.0], 1.0, 1.0, &m, &McSettings::new(10, 1)), Err(Error::OrderTooLarge { .. })));
    }
}
