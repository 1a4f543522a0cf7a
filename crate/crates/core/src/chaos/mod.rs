//! Chaos kernels f_n of the solution, their norms, the covariance terms α_n
//! and the covariance series ρ_{t,s}.

mod estimators;
pub mod fourier;
pub mod spatial;
mod symmetrization;

pub(crate) use estimators::exp_remainder;
pub use estimators::{alpha_n, CovarianceSeriesTerm, alpha_n_fourier, alpha_n_spatial, kernel_norm_sq, rho, rho_tail_bound, RhoValue};
pub use symmetrization::{check_symmetrization_bound, DiscreteMeasure, SymmetrizationCheck};

use crate::error::{Error, Result};
use crate::mc::stream;
use crate::quad::{simplex_rule, QuadValue};
use crate::wave::green;
use rand::Rng;

/// Largest order for which permutation sums are evaluated.
pub const N_MAX: usize = 4;

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        out.push(p.clone());
        let Some(i) = (1..n).rev().find(|&i| p[i - 1] < p[i]) else { break };
        let j = (i..n).rev().find(|&j| p[j] > p[i - 1]).expect("successor exists");
        p.swap(i - 1, j);
        p[i..].reverse();
    }
    out
}

/// The kernel f_n(·, x; t).
#[derive(Debug, Clone, PartialEq)]
pub struct ChaosKernel {
    pub order: usize,
    pub horizon: f64,
    pub anchor: Vec<f64>,
}

/// Time-simplex quadrature for kernel evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SimplexRule {
    /// Closed form (d = 1 only).
    Exact,
    /// Collapsed Gauss–Legendre tensor rule; the error estimate compares
    /// `points` against `2·points` nodes per axis.
    GaussLegendre { points: usize, tol: f64 },
    /// Sorted uniform order statistics.
    MonteCarlo { samples: usize, seed: u64 },
}

impl SimplexRule {
    /// ∫_{T_n(t)} f(t_1, …, t_n) dt.
    pub fn integrate<F: Fn(&[f64]) -> f64>(&self, n: usize, t: f64, f: F) -> Result<QuadValue> {
        if t <= 0.0 {
            return Ok(QuadValue { value: 0.0, error: 0.0 });
        }
        match *self {
            SimplexRule::Exact => Err(Error::Unsupported("closed-form simplex rule needs a closed-form integrand".into())),
            SimplexRule::GaussLegendre { points, tol } => {
                let q = |m: usize| simplex_rule(n, t, m).iter().map(|(x, w)| w * f(x)).sum::<f64>();
                let coarse = q(points);
                let fine = q(2 * points);
                let error = (fine - coarse).abs();
                if error > tol * fine.abs().max(1e-300) && error > 1e-300 {
                    return Err(Error::Quadrature { achieved: error, requested: tol * fine.abs() });
                }
                Ok(QuadValue { value: fine, error })
            }
            SimplexRule::MonteCarlo { samples, seed } => {
                let mut rng = stream(seed, 0);
                let vol = t.powi(n as i32) / factorial(n);
                let mut times = vec![0.0; n];
                let (mut s, mut s2) = (0.0, 0.0);
                for _ in 0..samples {
                    times.iter_mut().for_each(|v| *v = t * rng.random::<f64>());
                    times.sort_by(f64::total_cmp);
                    let v = f(&times);
                    s += v;
                    s2 += v * v;
                }
                let m = samples as f64;
                let mean = s / m;
                let var = (s2 / m - mean * mean).max(0.0) / (m - 1.0).max(1.0);
                Ok(QuadValue { value: vol * mean, error: vol * var.sqrt() })
            }
        }
    }
}

impl ChaosKernel {
    pub fn new(order: usize, horizon: f64, anchor: Vec<f64>) -> Self {
        Self { order, horizon, anchor }
    }

    pub fn dimension(&self) -> usize {
        self.anchor.len()
    }

    /// f_n at `points` (n blocks of d coordinates).
    pub fn eval(&self, points: &[f64], rule: &SimplexRule) -> Result<QuadValue> {
        let (n, d, t) = (self.order, self.dimension(), self.horizon);
        if n == 0 {
            return Err(Error::InvalidInput("chaos order must be at least 1".into()));
        }
        if points.len() != n * d || points.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("points must be n finite vectors in ℝ^d".into()));
        }
        // Empty light cone chain.
        let mut reach = 0.0;
        for j in 0..n {
            let next = if j + 1 < n { &points[(j + 1) * d..(j + 2) * d] } else { &self.anchor[..] };
            reach += dist(&points[j * d..(j + 1) * d], next);
        }
        if reach >= t {
            return Ok(QuadValue { value: 0.0, error: 0.0 });
        }
        match rule {
            SimplexRule::Exact => match d {
                1 => Ok(QuadValue { value: f_n_line(points, self.anchor[0], t), error: 0.0 }),
                _ if n == 1 => Ok(QuadValue { value: f_1_plane(dist(points, &self.anchor), t), error: 0.0 }),
                _ => Err(Error::Unsupported("no closed form for planar kernels of order ≥ 2".into())),
            },
            _ => rule.integrate(n, t, |times| {
                let mut v = 1.0;
                let mut diff = [0.0; 2];
                for j in 0..n {
                    let (next, tn) = if j + 1 < n { (&points[(j + 1) * d..(j + 2) * d], times[j + 1]) } else { (&self.anchor[..], t) };
                    for k in 0..d {
                        diff[k] = next[k] - points[j * d + k];
                    }
                    v *= green(d, tn - times[j], &diff[..d]);
                    if v == 0.0 {
                        break;
                    }
                }
                v
            }),
        }
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Closed form in d = 1: 2^{-n} (t − Σ|x_{j+1} − x_j|)_+^n / n!, with x_{n+1} = x.
pub fn f_n_line(points: &[f64], x: f64, t: f64) -> f64 {
    let n = points.len();
    let mut s = (x - points[n - 1]).abs();
    for j in 0..n - 1 {
        s += (points[j + 1] - points[j]).abs();
    }
    let rem = t - s;
    if rem <= 0.0 {
        0.0
    } else {
        rem.powi(n as i32) / (2f64.powi(n as i32) * factorial(n))
    }
}

/// Closed form f_1 in d = 2: (2π)^{-1} arccosh(t/r).
pub fn f_1_plane(r: f64, t: f64) -> f64 {
    if r >= t || t <= 0.0 {
        return 0.0;
    }
    if r == 0.0 {
        return f64::INFINITY;
    }
    (t / r).acosh() / (2.0 * std::f64::consts::PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutation_count_and_order() {
        for n in 1..=4 {
            let p = permutations(n);
            assert_eq!(p.len() as f64, factorial(n));
            assert_eq!(p[0], (0..n).collect::<Vec<_>>());
        }
    }

    #[test]
    fn closed_form_examples() {
        let k = ChaosKernel::new(1, 2.0, vec![0.0]);
        assert_eq!(k.eval(&[0.0], &SimplexRule::Exact).unwrap().value, 1.0);
        let k = ChaosKernel::new(2, 2.0, vec![0.0]);
        assert_eq!(k.eval(&[0.0, 0.0], &SimplexRule::Exact).unwrap().value, 0.5);
        let k = ChaosKernel::new(3, 1.0, vec![0.0]);
        assert_eq!(k.eval(&[0.0, 0.0, 1.0], &SimplexRule::Exact).unwrap().value, 0.0);
    }

    #[test]
    fn gauss_legendre_matches_closed_form_line() {
        let rule = SimplexRule::GaussLegendre { points: 64, tol: 5e-2 };
        for (n, pts) in [(1, vec![0.3]), (2, vec![-0.2, 0.1]), (2, vec![0.0, 0.0])] {
            let k = ChaosKernel::new(n, 1.5, vec![0.1]);
            let exact = k.eval(&pts, &SimplexRule::Exact).unwrap().value;
            let q = k.eval(&pts, &rule).unwrap();
            assert!((q.value - exact).abs() < 1e-2 * exact, "{n}: {} vs {exact}", q.value);
        }
    }

    #[test]
    fn monte_carlo_matches_closed_form_line() {
        let rule = SimplexRule::MonteCarlo { samples: 40_000, seed: 2 };
        let k = ChaosKernel::new(2, 2.0, vec![0.0]);
        let exact = k.eval(&[0.4, -0.3], &SimplexRule::Exact).unwrap().value;
        let q = k.eval(&[0.4, -0.3], &rule).unwrap();
        assert!((q.value - exact).abs() < 4.0 * q.error, "{} ± {} vs {exact}", q.value, q.error);
    }

    #[test]
    fn planar_first_order_quadrature() {
        let k = ChaosKernel::new(1, 2.0, vec![0.0, 0.0]);
        let exact = k.eval(&[0.5, 0.5], &SimplexRule::Exact).unwrap().value;
        let q = k.eval(&[0.5, 0.5], &SimplexRule::GaussLegendre { points: 200, tol: 5e-2 }).unwrap();
        // The light-cone edge is a jump with an inverse square-root singularity,
        // so tensor Gauss–Legendre converges slowly here.
        assert!((q.value - exact).abs() < 3e-2 * exact, "{} vs {exact}", q.value);
    }

    #[test]
    fn nonconvergence_is_reported() {
        let k = ChaosKernel::new(2, 1.0, vec![0.0]);
        let e = k.eval(&[0.1, 0.2], &SimplexRule::GaussLegendre { points: 2, tol: 1e-12 }).unwrap_err();
        assert!(matches!(e, Error::Quadrature { .. }));
    }
}
