//! Variance asymptotics, limit constants, Stein-bound integrals and tightness
//! increments for the spatial integrals F_R(t) = ∫_{B_R} (u(t,x) − 1) dx.

mod constants;
mod fit;
mod stein;
mod variance;

pub use constants::{
    alpha_1_quadrature, kappa, kappa_mc, kappa_mc_stratified, lag_integral_first_chaos, limit_constant_k, limit_constant_kprime,
    KValue, LimitConstants,
};
pub use fit::{exponent_fit, RateFit};
pub use stein::{stein_bound_a, SteinBoundEstimate};
pub use variance::{
    ball_energy, first_chaos_covariance, first_chaos_covariance_fourier, higher_chaos_decay, increment_norm, variance_estimate,
    variance_table, HigherChaosRow, IncrementNorm, VarianceEstimate,
};
