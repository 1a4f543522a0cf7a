//! Deterministic quadrature: adaptive Gauss–Kronrod on intervals, Gauss–Legendre
//! rules, and the collapsed tensor rule for ordered time simplices.

use crate::error::{Error, Result};
use std::collections::BinaryHeap;

/// Tolerances for adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct QuadSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadSettings {
    fn default() -> Self {
        Self { rel_tol: 1e-6, abs_tol: 1e-12, max_intervals: 4000 }
    }
}

impl QuadSettings {
    /// Default tolerances for two-dimensional integrals.
    pub fn planar() -> Self {
        Self { rel_tol: 1e-4, abs_tol: 1e-10, max_intervals: 2000 }
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

/// Value with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadValue {
    pub value: f64,
    pub error: f64,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive Gauss–Kronrod (7/15) quadrature of `f` over `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, q: &QuadSettings) -> Result<QuadValue> {
    if a == b {
        return Ok(QuadValue { value: 0.0, error: 0.0 });
    }
    if b < a {
        let r = integrate(f, b, a, q)?;
        return Ok(QuadValue { value: -r.value, error: r.error });
    }
    let (v, e) = gk15(&mut f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Piece { a, b, value: v, error: e });
    let (mut total, mut err) = (v, e);
    while err > q.target(total) {
        if heap.len() >= q.max_intervals {
            return Err(Error::Quadrature { achieved: err, requested: q.target(total) });
        }
        let p = heap.pop().expect("heap is never empty");
        let m = 0.5 * (p.a + p.b);
        if m <= p.a || m >= p.b {
            return Err(Error::Quadrature { achieved: err, requested: q.target(total) });
        }
        let (v1, e1) = gk15(&mut f, p.a, m);
        let (v2, e2) = gk15(&mut f, m, p.b);
        total += v1 + v2 - p.value;
        err += e1 + e2 - p.error;
        heap.push(Piece { a: p.a, b: m, value: v1, error: e1 });
        heap.push(Piece { a: m, b: p.b, value: v2, error: e2 });
        if !total.is_finite() {
            return Err(Error::Numerical("non-finite integrand".into()));
        }
    }
    // Re-sum to shed drift from the running updates.
    let (total, err) = heap.iter().fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
    Ok(QuadValue { value: total, error: err })
}

/// Integral over `[a, ∞)`.
///
/// Sums pieces over [a + 2^k − 1, a + 2^{k+1} − 1] and closes with the
/// geometric extrapolation of the last two pieces, which is exact in the
/// limit for algebraic tails.
pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(mut f: F, a: f64, q: &QuadSettings) -> Result<QuadValue> {
    let mut g = |x: f64| {
        let v = f(x);
        if v.is_finite() { v } else { 0.0 }
    };
    let piece_q = QuadSettings { rel_tol: q.rel_tol * 0.1, ..*q };
    let (mut value, mut error) = (0.0, 0.0);
    let mut prev = f64::NAN;
    for k in 0..1000 {
        let lo = a + 2f64.powi(k) - 1.0;
        let hi = a + 2f64.powi(k + 1) - 1.0;
        let p = integrate(&mut g, lo, hi, &piece_q)?;
        value += p.value;
        error += p.error;
        if k >= 4 {
            let rho = p.value / prev;
            let tail = if p.value == 0.0 {
                0.0
            } else if (0.0..0.99).contains(&rho) {
                p.value * rho / (1.0 - rho)
            } else if p.value.abs() < 1e-3 * q.target(value) {
                p.value
            } else {
                f64::INFINITY
            };
            if tail.abs() <= q.target(value) {
                return Ok(QuadValue { value: value + tail, error: error + 0.1 * tail.abs() });
            }
        }
        prev = p.value;
    }
    Err(Error::Quadrature { achieved: f64::INFINITY, requested: q.target(value) })
}

/// Integral over `(0, ∞)` of an integrand behaving like `r^{p−1}` at the origin
/// (`p > 0`). The substitution r = u^{1/p} on `(0,1]` removes the singularity.
pub fn integrate_radial<F: FnMut(f64) -> f64>(mut f: F, p: f64, q: &QuadSettings) -> Result<QuadValue> {
    let inner = integrate(
        |u| {
            if u <= 0.0 {
                return 0.0;
            }
            let r = u.powf(1.0 / p);
            f(r) * r / (p * u)
        },
        0.0,
        1.0,
        q,
    )?;
    let outer = integrate_to_infinity(&mut f, 1.0, q)?;
    Ok(QuadValue { value: inner.value + outer.value, error: inner.error + outer.error })
}

/// Integral over `(a, b)` with integrable endpoint singularity `|x−a|^{p−1}` at `a`.
pub fn integrate_singular_left<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, p: f64, q: &QuadSettings) -> Result<QuadValue> {
    let len = b - a;
    integrate(
        |u| {
            if u <= 0.0 {
                return 0.0;
            }
            let x = a + len * u.powf(1.0 / p);
            f(x) * len * u.powf(1.0 / p - 1.0) / p
        },
        0.0,
        1.0,
        q,
    )
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    (x.iter().map(|xi| c + h * xi).collect(), w.iter().map(|wi| h * wi).collect())
}

/// Tensor Gauss–Legendre rule on the ordered simplex `0 < t_1 < … < t_n < t`.
///
/// Collapsed coordinates: t_n = t v_n, t_k = t_{k+1} v_k, with Jacobian
/// tⁿ Π_k v_k^{k−1}. Returns node vectors (ascending times) and weights.
pub fn simplex_rule(n: usize, t: f64, points: usize) -> Vec<(Vec<f64>, f64)> {
    let (x, w) = gauss_legendre_on(points, 0.0, 1.0);
    let total = points.pow(n as u32);
    let mut out = Vec::with_capacity(total);
    let mut idx = vec![0usize; n];
    for _ in 0..total {
        let mut times = vec![0.0; n];
        let mut weight = t.powi(n as i32);
        let mut upper = t;
        for k in (0..n).rev() {
            let v = x[idx[k]];
            upper *= v;
            times[k] = upper;
            weight *= w[idx[k]] * v.powi(k as i32);
        }
        out.push((times, weight));
        for d in 0..n {
            idx[d] += 1;
            if idx[d] < points {
                break;
            }
            idx[d] = 0;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gk_polynomial_and_smooth() {
        let q = QuadSettings::default();
        let r = integrate(|x| x * x * x - x, 0.0, 2.0, &q).unwrap();
        assert!((r.value - 2.0).abs() < 1e-13);
        let r = integrate(|x| x.sin(), 0.0, std::f64::consts::PI, &q).unwrap();
        assert!((r.value - 2.0).abs() < 1e-12);
        let r = integrate(|x| (x - 0.3).abs(), -1.0, 1.0, &q.with_rel_tol(1e-12)).unwrap();
        assert!((r.value - 1.09).abs() < 1e-9);
    }

    #[test]
    fn reversed_interval_flips_sign() {
        let q = QuadSettings::default();
        let r = integrate(|x| x.exp(), 1.0, 0.0, &q).unwrap();
        assert!((r.value + (1f64.exp() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn infinite_and_radial() {
        let q = QuadSettings::default();
        let r = integrate_to_infinity(|x| (-x).exp(), 0.0, &q).unwrap();
        assert!((r.value - 1.0).abs() < 1e-9);
        // ∫_0^∞ r^{-1/2}/(1+r²) dr = π/(2 sin(π/4))
        let r = integrate_radial(|r| r.powf(-0.5) / (1.0 + r * r), 0.5, &q).unwrap();
        let exact = std::f64::consts::PI / (2.0 * (std::f64::consts::PI / 4.0).sin());
        assert!((r.value - exact).abs() < 1e-7 * exact, "{}", r.value);
    }

    #[test]
    fn singular_left_endpoint() {
        let q = QuadSettings::default();
        let r = integrate_singular_left(|x| x.powf(-0.5), 0.0, 4.0, 0.5, &q).unwrap();
        assert!((r.value - 4.0).abs() < 1e-10);
    }

    #[test]
    fn nonconvergence_reports_error() {
        let q = QuadSettings { rel_tol: 1e-14, abs_tol: 0.0, max_intervals: 10 };
        let e = integrate(|x: f64| (1.0 / x).sin(), 1e-6, 1.0, &q).unwrap_err();
        assert!(matches!(e, Error::Quadrature { .. }));
    }

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        for n in 1..12 {
            let (x, w) = gauss_legendre(n);
            let deg = 2 * n - 1;
            let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32 - 1)).sum();
            let exact = if (deg - 1) % 2 == 0 { 2.0 / deg as f64 } else { 0.0 };
            assert!((s - exact).abs() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn simplex_volume_and_moment() {
        for n in 1..=4 {
            let rule = simplex_rule(n, 2.0, 5);
            let vol: f64 = rule.iter().map(|(_, w)| w).sum();
            let exact = 2f64.powi(n as i32) / (1..=n).product::<usize>() as f64;
            assert!((vol - exact).abs() < 1e-12 * exact);
            assert!(rule.iter().all(|(t, _)| t.windows(2).all(|p| p[0] <= p[1])));
        }
        // ∫_{0<a<b<1} a dadb = 1/6
        let m: f64 = simplex_rule(2, 1.0, 4).iter().map(|(t, w)| w * t[0]).sum();
        assert!((m - 1.0 / 6.0).abs() < 1e-14);
    }
}
