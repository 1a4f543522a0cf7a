use super::constants::{power_mass, sample_power_ball};
use super::variance::first_chaos_covariance;
use crate::covariance::{unit_ball_volume, CovarianceModel};
use crate::error::{Error, Result};
use crate::mc::{self, Estimate, McSettings};
use crate::quad::QuadSettings;
use crate::wave::sample_green;
use rand::Rng;
use serde::Serialize;

/// Monte Carlo values of the four Stein-bound integrals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteinBoundEstimate {
    pub radius: f64,
    pub time: f64,
    pub terms: [Estimate; 4],
    pub total: Estimate,
    /// First-chaos part of σ_R²(t), used in the d_TV bound.
    pub variance: f64,
    /// 4√𝒜/σ_R²(t).
    pub dtv_bound: f64,
}

fn uniform_ball<R: Rng + ?Sized>(rng: &mut R, radius: f64, out: &mut [f64]) {
    loop {
        for v in out.iter_mut() {
            *v = radius * (2.0 * rng.random::<f64>() - 1.0);
        }
        if out.iter().map(|v| v * v).sum::<f64>() < radius * radius {
            return;
        }
    }
}

fn inside(p: &[f64], radius: f64) -> bool {
    p.iter().map(|v| v * v).sum::<f64>() < radius * radius
}

/// Estimates 𝒜₁..𝒜₄ on the Green/kernel majorant chain.
///
/// One tree sample serves all four terms: w is uniform on B_{R+2t}, z and y
/// hang off w and w′ by Green displacements, the primed points by kernel
/// displacements, and each x by a Green displacement from its anchor
/// (x₁ at z or w, x₁′ at y or w′) restricted to B_R. Returns
/// `McTolerance` when the relative standard error of the total exceeds `rel_tol`.
pub fn stein_bound_a(radius: f64, t: f64, model: &CovarianceModel, mcs: &McSettings, rel_tol: f64) -> Result<SteinBoundEstimate> {
    if !(radius > 0.0 && t > 0.0) {
        return Err(Error::InvalidInput("radius and time must be positive".into()));
    }
    if !model.dalang_holds() {
        return Err(Error::DalangViolated);
    }
    if model.is_white() {
        return Err(Error::NotApplicable("the Stein bound integrals need a pointwise kernel".into()));
    }
    let d = model.dimension;
    // Kernel edge: normalized sampler and its weight.
    let reach = 2.0 * radius + 4.0 * t;
    let power = model.power_law();
    if power.is_none() && !model.is_integrable() {
        return Err(Error::Unsupported(format!("Stein integrals for the {} kernel in d = {d}", model.kernel.name())));
    }
    let edge_weight = match power {
        Some((scale, beta)) => scale * power_mass(d, beta, reach),
        None => model.gamma_mass()?,
    };
    let root = radius + 2.0 * t;
    let weight = unit_ball_volume(d) * root.powi(d as i32) * t.powi(2) * (t * t / 2.0).powi(2) * edge_weight.powi(3);
    let edge = |rng: &mut rand_chacha::ChaCha8Rng, from: &[f64], out: &mut [f64]| {
        let mut u = [0.0; 2];
        match power {
            Some((_, beta)) => sample_power_ball(rng, d, beta, reach, &mut u[..d]),
            None => model.sample_gamma(rng, &mut u[..d]).expect("integrable kernel"),
        }
        for k in 0..d {
            out[k] = from[k] + u[k];
        }
    };
    let est = mc::mean_vec(mcs, 5, |rng, out| {
        let mut buf = [[0.0f64; 2]; 12];
        let [w, wp, z, y, zp, yp, dz, dy, dx1, dx1p, dx2, dx2p] = &mut buf;
        let (w, wp, z, y, zp, yp) = (&mut w[..d], &mut wp[..d], &mut z[..d], &mut y[..d], &mut zp[..d], &mut yp[..d]);
        // Ordered time pairs a > b, a′ > b′ and the free times s, s′.
        let (a, b) = {
            let (u, v) = (t * rng.random::<f64>(), t * rng.random::<f64>());
            (u.max(v), u.min(v))
        };
        let (ap, bp) = {
            let (u, v) = (t * rng.random::<f64>(), t * rng.random::<f64>());
            (u.max(v), u.min(v))
        };
        let (s, sp) = (t * rng.random::<f64>(), t * rng.random::<f64>());
        uniform_ball(rng, root, w);
        edge(rng, w, wp);
        sample_green(rng, d, a - b, &mut dz[..d]);
        sample_green(rng, d, ap - bp, &mut dy[..d]);
        for k in 0..d {
            z[k] = w[k] + dz[k];
            y[k] = wp[k] + dy[k];
        }
        edge(rng, z, zp);
        edge(rng, y, yp);
        sample_green(rng, d, t - a, &mut dx1[..d]);
        sample_green(rng, d, t - ap, &mut dx1p[..d]);
        sample_green(rng, d, t - s, &mut dx2[..d]);
        sample_green(rng, d, t - sp, &mut dx2p[..d]);
        let shifted = |base: &[f64], del: &[f64; 2]| -> bool {
            let p: Vec<f64> = (0..d).map(|k| base[k] + del[k]).collect();
            inside(&p, radius)
        };
        // x₂ and x₂′ are common to all terms.
        if !shifted(zp, dx2) || !shifted(yp, dx2p) {
            return;
        }
        let g = weight * (a - b) * (ap - bp) * (t - a) * (t - ap) * (t - s) * (t - sp);
        let x1 = [shifted(z, dx1), shifted(w, dx1)];
        let x1p = [shifted(y, dx1p), shifted(wp, dx1p)];
        let mut total = 0.0;
        for (j, o) in out.iter_mut().take(4).enumerate() {
            if x1[j / 2] && x1p[j % 2] {
                *o = g;
                total += g;
            }
        }
        out[4] = total;
    });
    let terms = [est[0], est[1], est[2], est[3]];
    let total = est[4];
    if total.value > 0.0 && total.std_error > rel_tol * total.value {
        return Err(Error::McTolerance { achieved: total.std_error / total.value, requested: rel_tol });
    }
    let variance = first_chaos_covariance(radius, t, t, model, &QuadSettings::default().with_rel_tol(1e-8))?.value;
    let dtv_bound = if variance > 0.0 { 4.0 * total.value.max(0.0).sqrt() / variance } else { f64::INFINITY };
    Ok(SteinBoundEstimate { radius, time: t, terms, total, variance, dtv_bound })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn terms_respect_crude_majorant() {
        // 𝒜_j ≤ t^{12}‖γ‖³ω_d R^d.
        let m = CovarianceModel::heat(1.0, 1).unwrap();
        let e = stein_bound_a(4.0, 1.0, &m, &McSettings::new(40_000, 3), 0.2).unwrap();
        for term in e.terms {
            assert!(term.value >= 0.0);
            assert!(term.value - 3.0 * term.std_error <= 2.0 * 4.0);
        }
        let sum: f64 = e.terms.iter().map(|x| x.value).sum();
        assert!((sum - e.total.value).abs() < 1e-9 * sum.max(1.0));
        assert!(e.dtv_bound > 0.0);
    }

    #[test]
    fn white_noise_is_rejected() {
        let m = CovarianceModel::white_noise(1).unwrap();
        assert!(stein_bound_a(4.0, 1.0, &m, &McSettings::new(10, 1), 1.0).is_err());
    }
}
