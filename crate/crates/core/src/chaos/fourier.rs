//! Fourier-side chain kernel
//!
//! Φ_n(t; r) = ∫_{T_n(t)} Π_j sin(r_j (t_{j+1} − t_j)) / r_j dt,  t_{n+1} = t,
//!
//! so that |ℱf_n(·, x; t)(ξ)| = |Φ_n(t; |η_1|, …, |η_n|)| with η_j = ξ_1 + … + ξ_j.
//!
//! Φ_n is the terminal value of the forced oscillator chain
//! Ψ_0 = 1, Ψ_j'' + r_j² Ψ_j = Ψ_{j−1}, Ψ_j(0) = Ψ_j'(0) = 0,
//! which is integrated exactly with a matrix exponential.

use super::SimplexRule;
use crate::error::Result;
use crate::wave::green_fourier_radial;
use nalgebra::DMatrix;

fn generator(radii: &[f64]) -> DMatrix<f64> {
    let n = radii.len();
    let dim = 2 * n + 1;
    let mut a = DMatrix::zeros(dim, dim);
    for (j, &r) in radii.iter().enumerate() {
        // State (Ψ_j, P_j) with Ψ_j' = s P_j and s = max(r, 1) keeping entries O(r).
        let s = r.max(1.0);
        let (p, v) = (2 * j + 1, 2 * j + 2);
        let prev = if j == 0 { 0 } else { 2 * j - 1 };
        a[(p, v)] = s;
        a[(v, p)] = -r * r / s;
        a[(v, prev)] = 1.0 / s;
    }
    a
}

/// Φ_n(t; r_1, …, r_n).
pub fn phi(t: f64, radii: &[f64]) -> f64 {
    if t <= 0.0 || radii.is_empty() {
        return if radii.is_empty() { 1.0 } else { 0.0 };
    }
    if radii.len() == 1 {
        // (1 − cos(r t)) / r² with its small-r limit.
        let r = radii[0];
        let x = r * t;
        if x.abs() < 1e-4 {
            return t * t / 2.0 * (1.0 - x * x / 12.0);
        }
        return 2.0 * (x / 2.0).sin().powi(2) / (r * r);
    }
    let e = (generator(radii) * t).exp();
    e[(2 * radii.len() - 1, 0)]
}

/// Φ_n by direct simplex quadrature, used to cross-check [`phi`].
pub fn phi_quadrature(t: f64, radii: &[f64], rule: &SimplexRule) -> Result<f64> {
    let n = radii.len();
    rule.integrate(n, t, |times| {
        let mut v = 1.0;
        for j in 0..n {
            let next = if j + 1 < n { times[j + 1] } else { t };
            v *= green_fourier_radial(next - times[j], radii[j]);
        }
        v
    })
    .map(|q| q.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_order_closed_form() {
        for r in [0.0f64, 1e-6, 0.3, 2.0, 40.0] {
            let t: f64 = 1.7;
            let exact = if r == 0.0 { t * t / 2.0 } else { 2.0 * (r * t / 2.0).sin().powi(2) / (r * r) };
            assert!((phi(t, &[r]) - exact).abs() < 1e-12 * (1.0 + exact.abs()));
        }
    }

    #[test]
    fn zero_frequencies_give_simplex_moments() {
        // All r = 0: Φ_n = t^{2n}/(2n)!.
        for n in 2..=4 {
            let t: f64 = 1.3;
            let expect = t.powi(2 * n as i32) / super::super::factorial(2 * n);
            let v = phi(t, &vec![0.0; n]);
            assert!((v - expect).abs() < 1e-12 * expect, "n={n}: {v} vs {expect}");
        }
    }

    #[test]
    fn matches_simplex_quadrature() {
        let rule = SimplexRule::GaussLegendre { points: 24, tol: 1e-6 };
        for radii in [vec![0.5, 2.0], vec![3.0, 0.1, 1.2], vec![1.0, 1.0, 1.0, 1.0]] {
            let a = phi(2.0, &radii);
            let b = phi_quadrature(2.0, &radii, &rule).unwrap();
            assert!((a - b).abs() < 1e-8 * (1.0 + b.abs()), "{radii:?}: {a} vs {b}");
        }
    }

    #[test]
    fn large_frequencies_stay_accurate() {
        let radii = [150.0, 3.0];
        let a = phi(1.0, &radii);
        let b = phi_quadrature(1.0, &radii, &SimplexRule::GaussLegendre { points: 400, tol: 1e-4 }).unwrap();
        assert!((a - b).abs() < 1e-7, "{a} vs {b}");
    }
}
