//! Acceptance suite: ten criteria, one PASS/FAIL line each.
//!
//! One test per criterion. Run with `cargo test --test acceptance -- --nocapture`
//! to see the detail lines.

use ham_clt::asymptotics::{
    exponent_fit, kappa, kappa_mc, limit_constant_k, limit_constant_kprime, stein_bound_a, variance_table,
};
use ham_clt::chaos::spatial::ChainFn;
use ham_clt::chaos::{kernel_norm_sq, ChaosKernel};
use ham_clt::covariance::CovarianceModel;
use ham_clt::mc::{stream, McSettings};
use ham_clt::quad::{self, QuadSettings};
use ham_clt::runner::{self, Overrides, Subcommand};
use ham_clt::stats::{multi_time_gaussianity, normality_report, standardize};
use ham_clt::wave::{d_const, green, green_lp_norm};
use ham_clt::wick::tensor::dense_inner;
use ham_clt::wick::{malliavin, simulate, solution_sum, spatial_integral_sum, ChaosSum, NoiseGrid, SymTensor};
use rand::Rng;
use std::collections::BTreeMap;
use std::f64::consts::PI;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn c1_constants() -> Outcome {
    let q = QuadSettings::default().with_rel_tol(1e-12);
    let c_mu = CovarianceModel::white_noise(1).unwrap().dalang_constant().unwrap();
    let k = kappa(0.5, 1, &q).unwrap();
    let closed = 2f64.powf(2.5) / 0.75;
    let mc = kappa_mc(0.5, 1, &McSettings::new(200_000, 101)).unwrap();
    let q_ell = CovarianceModel::heat(1.0, 2).unwrap().with_ell(2.0).embed_exponent().unwrap();
    let q_beta = CovarianceModel::riesz(1.0, 2).unwrap().embed_exponent().unwrap();
    let pass = (c_mu - 0.5).abs() < 1e-10
        && (k - closed).abs() < 1e-6
        && mc.within(k, 3.0, 0.0)
        && (q_ell - 2.0 / 3.0).abs() < 1e-15
        && (q_beta - 2.0 / 3.0).abs() < 1e-15;
    outcome(pass, format!("C_mu = {c_mu}, kappa = {k} (MC {:.5} ± {:.5}), q = {q_ell}, {q_beta}", mc.value, mc.std_error))
}

fn c2_green() -> Outcome {
    let q = QuadSettings::default().with_rel_tol(1e-12);
    let mut worst_mass: f64 = 0.0;
    for t in [0.5, 1.0, 2.0] {
        let one = quad::integrate(|x| green(1, t, &[x]), -t, t, &q).unwrap().value;
        // Polar form with the endpoint singularity (t − r)^{-1/2} at r = t.
        let two = quad::integrate_singular_left(|u| 2.0 * PI * (t - u) * green(2, t, &[t - u, 0.0]), 0.0, t, 0.5, &q).unwrap().value;
        worst_mass = worst_mass.max((one - t).abs()).max((two - t).abs());
    }
    let mut worst_lp: f64 = 0.0;
    let q = QuadSettings::default().with_rel_tol(1e-8);
    for t in [0.5, 1.0, 2.0] {
        for p in [0.25, 0.5, 1.0, 1.25] {
            let polar = quad::integrate_singular_left(
                |u| 2.0 * PI * (t - u) * green(2, t, &[t - u, 0.0]).powf(p),
                0.0,
                t,
                1.0 - p / 2.0,
                &q,
            )
            .unwrap()
            .value;
            let exact = green_lp_norm(t, p).unwrap();
            worst_lp = worst_lp.max((polar / exact - 1.0).abs());
        }
    }
    let mut rng = stream(2, 0);
    let mut violations = 0;
    for _ in 0..1000 {
        let t = 0.1 + 3.0 * rng.random::<f64>();
        let x = [2.0 * t * (2.0 * rng.random::<f64>() - 1.0), 2.0 * t * (2.0 * rng.random::<f64>() - 1.0)];
        let p = 1.9 * rng.random::<f64>() + 0.05;
        let qq = p + (2.0 - p) * rng.random::<f64>() * 0.99;
        let g = green(2, t, &x);
        if g.powf(p) > (2.0 * PI * t).powf(qq - p) * g.powf(qq) * (1.0 + 1e-12) {
            violations += 1;
        }
        let inside = if x[0] * x[0] + x[1] * x[1] < t * t { 1.0 } else { 0.0 };
        if inside > 2.0 * PI * t * g * (1.0 + 1e-12) {
            violations += 1;
        }
    }
    let pass = worst_mass < 1e-6 && worst_lp < 1e-4 && violations == 0;
    outcome(pass, format!("max |∫G − t| = {worst_mass:.2e}, max L^p rel. error = {worst_lp:.2e}, violations = {violations}"))
}

fn dalang_models() -> Vec<CovarianceModel> {
    vec![
        CovarianceModel::heat(1.0, 1).unwrap(),
        CovarianceModel::poisson(1.0, 1).unwrap(),
        CovarianceModel::riesz(0.5, 1).unwrap(),
        CovarianceModel::bessel(0.5, 1).unwrap(),
        CovarianceModel::fractional(vec![0.7]).unwrap(),
        CovarianceModel::white_noise(1).unwrap(),
        CovarianceModel::heat(1.0, 2).unwrap(),
        CovarianceModel::poisson(1.0, 2).unwrap(),
        CovarianceModel::riesz(1.0, 2).unwrap(),
        CovarianceModel::bessel(1.5, 2).unwrap(),
        CovarianceModel::fractional(vec![0.7, 0.8]).unwrap(),
    ]
}

fn c3_chaos_norms() -> Outcome {
    let mut failures = Vec::new();
    let mut count = 0;
    for (i, m) in dalang_models().iter().enumerate() {
        let c = m.dalang_constant().unwrap();
        for n in 1..=4 {
            for t in [0.5, 1.0, 2.0] {
                let k = ChaosKernel::new(n, t, vec![0.0; m.dimension]);
                let e = kernel_norm_sq(&k, m, &McSettings::new(4000, (100 * i + 10 * n) as u64 + t as u64)).unwrap();
                let nf: f64 = (1..=n).map(|j| j as f64).product();
                let bound = (t.powi(n as i32) / nf).powi(2) * (d_const(t) * c).powi(n as i32);
                count += 1;
                if e.value > bound + 3.0 * e.std_error {
                    failures.push(format!("{} d={} n={n} t={t}", m.kernel.name(), m.dimension));
                }
            }
        }
    }
    let white = CovarianceModel::white_noise(1).unwrap();
    let mc = kernel_norm_sq(&ChaosKernel::new(1, 1.0, vec![0.0]), &white, &McSettings::new(100_000, 7)).unwrap();
    let q = QuadSettings::default().with_rel_tol(1e-12);
    let f1 = |z: f64| ChainFn::Point { n: 1, t: 1.0, anchor: 0.0 }.eval(&[z]).powi(2);
    let det = quad::integrate(f1, -1.0, 0.0, &q).unwrap().value + quad::integrate(f1, 0.0, 1.0, &q).unwrap().value;
    let pass = failures.is_empty() && mc.within(1.0 / 6.0, 3.0, 0.0) && (det - 1.0 / 6.0).abs() < 1e-8;
    outcome(
        pass,
        format!("{count} bound checks, violations {failures:?}; white n=1: MC {:.5} ± {:.5}, quadrature {det:.12}", mc.value, mc.std_error),
    )
}

/// I_n(S) as a polynomial in ξ on the Hermite basis Π_k H_{m_k}(ξ_k), keyed
/// by the sorted index multiset. Built from W = Aξ without contractions.
fn hermite_expansion(s: &SymTensor, a: &nalgebra::DMatrix<f64>) -> BTreeMap<Vec<u32>, f64> {
    let (n, m) = (s.order, s.dim);
    let mut out = BTreeMap::new();
    let total = m.pow(n as u32);
    for flat_i in 0..total {
        let mut i = vec![0u32; n];
        let mut r = flat_i;
        for slot in (0..n).rev() {
            i[slot] = (r % m) as u32;
            r /= m;
        }
        let v = s.get(&i);
        if v == 0.0 {
            continue;
        }
        for flat_k in 0..total {
            let mut k = vec![0u32; n];
            let mut r = flat_k;
            let mut w = v;
            for slot in (0..n).rev() {
                k[slot] = (r % m) as u32;
                r /= m;
                w *= a[(i[slot] as usize, k[slot] as usize)];
            }
            k.sort_unstable();
            *out.entry(k).or_insert(0.0) += w;
        }
    }
    out
}

fn multiset_factorial(k: &[u32]) -> f64 {
    let mut f = 1.0;
    let mut run = 1.0;
    for i in 1..k.len() {
        if k[i] == k[i - 1] {
            run += 1.0;
            f *= run;
        } else {
            run = 1.0;
        }
    }
    f
}

fn hermite(n: usize, x: f64) -> f64 {
    let (mut a, mut b) = (1.0, x);
    if n == 0 {
        return 1.0;
    }
    for k in 1..n {
        (a, b) = (b, x * b - k as f64 * a);
    }
    b
}

fn eval_expansion(e: &BTreeMap<Vec<u32>, f64>, xi: &[f64]) -> f64 {
    e.iter()
        .map(|(k, c)| {
            let mut v = *c;
            let mut i = 0;
            while i < k.len() {
                let j = (i..k.len()).find(|&j| k[j] != k[i]).unwrap_or(k.len());
                v *= hermite(j - i, xi[k[i] as usize]);
                i = j;
            }
            v
        })
        .sum()
}

fn random_tensor(order: usize, dim: usize, rng: &mut impl Rng, density: f64) -> SymTensor {
    let total = dim.pow(order as u32);
    let dense: Vec<f64> = (0..total).map(|_| if rng.random::<f64>() < density { 2.0 * rng.random::<f64>() - 1.0 } else { 0.0 }).collect();
    SymTensor::from_dense(order, dim, &dense)
}

fn c4_isometry() -> Outcome {
    let mut rng = stream(4, 0);
    let mut worst_exact: f64 = 0.0;
    let mut worst_form: f64 = 0.0;
    for (dim, density) in [(4usize, 1.0), (8, 0.5), (16, 0.02)] {
        let grid = NoiseGrid::build(1.0, dim, &CovarianceModel::riesz(0.5, 1).unwrap()).unwrap();
        let tensors: Vec<SymTensor> = (1..=3).flat_map(|n| [random_tensor(n, dim, &mut rng, density), random_tensor(n, dim, &mut rng, density)]).collect();
        let expansions: Vec<_> = tensors.iter().map(|t| hermite_expansion(t, grid.factor())).collect();
        for (a, ea) in tensors.iter().zip(&expansions) {
            for (b, eb) in tensors.iter().zip(&expansions) {
                let exact: f64 = ea.iter().filter_map(|(k, c)| eb.get(k).map(|d| c * d * multiset_factorial(k))).sum();
                let nf: f64 = (1..=a.order).map(|j| j as f64).product();
                let expected = if a.order == b.order { nf * a.inner(b, grid.gram()) } else { 0.0 };
                let scale = (nf * a.inner(a, grid.gram())).max(1e-300).sqrt() * (nf * b.inner(b, grid.gram())).max(1e-300).sqrt();
                worst_exact = worst_exact.max((exact - expected).abs() / scale.max(1e-12));
            }
            let form = a.wick_form(grid.gram());
            for _ in 0..5 {
                let xi: Vec<f64> = (0..dim).map(|_| rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng)).collect();
                let w: Vec<f64> = (0..dim).map(|r| (0..dim).map(|c| grid.factor()[(r, c)] * xi[c]).sum()).collect();
                let direct = eval_expansion(ea, &xi);
                worst_form = worst_form.max((form.eval(&w) - direct).abs() / (1.0 + direct.abs()));
            }
        }
    }
    // Monte Carlo with 10^5 samples on a correlated grid.
    let grid = NoiseGrid::build(1.0, 6, &CovarianceModel::heat(0.3, 1).unwrap()).unwrap();
    let ts: Vec<SymTensor> = (1..=3).map(|n| random_tensor(n, 6, &mut rng, 1.0)).collect();
    let sums: Vec<ChaosSum> = ts.iter().enumerate().map(|(i, t)| ChaosSum::new(format!("I{}", i + 1), vec![t.clone()], &grid)).collect();
    let s = simulate(&grid, &sums, &McSettings::new(100_000, 44)).unwrap();
    let mut mc_ok = true;
    let mut mc_detail = Vec::new();
    for i in 0..3 {
        for j in i..3 {
            let prods: Vec<f64> = (0..100_000).map(|k| s.values[i][k] * s.values[j][k]).collect();
            let mean = prods.iter().sum::<f64>() / 1e5;
            let se = (prods.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (1e5 - 1.0) / 1e5).sqrt();
            let expected = if i == j { sums[i].exact_second_moment(&grid) } else { 0.0 };
            mc_ok &= (mean - expected).abs() <= 3.0 * se;
            mc_detail.push(format!("{:.2}σ", (mean - expected).abs() / se));
        }
    }
    let mut violations = 0;
    for k in 0..1000 {
        let order = 2 + k % 2;
        let dim = 2 + k % 3;
        let grid = NoiseGrid::build(1.0, dim, &CovarianceModel::poisson(0.2 + rng.random::<f64>(), 1).unwrap()).unwrap();
        let dense: Vec<f64> = (0..dim.pow(order as u32)).map(|_| 2.0 * rng.random::<f64>() - 1.0).collect();
        let sym = SymTensor::from_dense(order, dim, &dense).inner(&SymTensor::from_dense(order, dim, &dense), grid.gram());
        let full = dense_inner(order, dim, &dense, &dense, grid.gram());
        if sym > full * (1.0 + 1e-12) {
            violations += 1;
        }
    }
    let pass = worst_exact < 1e-10 && worst_form < 1e-10 && mc_ok && violations == 0;
    outcome(
        pass,
        format!("exact isometry rel. error {worst_exact:.1e}, Wick form vs Hermite {worst_form:.1e}, MC deviations [{}], contraction violations {violations}", mc_detail.join(", ")),
    )
}

const RADII: [f64; 5] = [4.0, 8.0, 16.0, 32.0, 64.0];

fn c5_variance() -> Outcome {
    let riesz = CovarianceModel::riesz(0.5, 1).unwrap();
    let heat = CovarianceModel::heat(1.0, 1).unwrap();
    let mcs = McSettings::new(20_000, 5);
    let tr = variance_table(&RADII, 1.0, &riesz, 4, &mcs).unwrap();
    let th = variance_table(&RADII, 1.0, &heat, 4, &mcs).unwrap();
    let sr = exponent_fit(&tr.iter().map(|v| (v.radius, v.total.value)).collect::<Vec<_>>()).unwrap().slope;
    let sh = exponent_fit(&th.iter().map(|v| (v.radius, v.total.value)).collect::<Vec<_>>()).unwrap().slope;
    let kp = limit_constant_kprime(1.0, 1.0, 0.5, 1, &QuadSettings::default()).unwrap().k_prime.unwrap();
    let ratio = tr[4].total.value / 64f64.powf(1.5);
    let pass = (sr - 1.5).abs() <= 0.05 && (ratio / kp - 1.0).abs() <= 0.10 && (sh - 1.0).abs() <= 0.05;
    outcome(pass, format!("Riesz slope {sr:.4}, σ²/R^1.5 at 64 = {ratio:.4} vs K′ = {kp:.5}; heat slope {sh:.4}"))
}

fn c6_dominance() -> Outcome {
    let riesz = CovarianceModel::riesz(0.5, 1).unwrap();
    let t = variance_table(&RADII, 1.0, &riesz, 4, &McSettings::new(20_000, 6)).unwrap();
    let higher = |i: usize| t[i].per_chaos[1..].iter().map(|p| p.value).sum::<f64>() / t[i].radius.powf(1.5);
    let first = t[4].per_chaos[0].value / 64f64.powf(1.5);
    let (h4, h64) = (higher(0), higher(4));
    let pass = h64 < 0.1 * first && h4 >= 2.0 * h64;
    outcome(pass, format!("Σ_(n=2..4)/R^1.5: {h4:.5} at R=4, {h64:.5} at R=64 (first chaos {first:.4})"))
}

fn c7_stein() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for (m, a_exp, dtv_exp) in
        [(CovarianceModel::heat(1.0, 1).unwrap(), 1.0, -0.5), (CovarianceModel::riesz(0.5, 1).unwrap(), 4.0 - 1.5, -0.25)]
    {
        let e: Vec<_> = RADII.iter().map(|r| stein_bound_a(*r, 1.0, &m, &McSettings::new(20_000, 7 + *r as u64), 0.1).unwrap()).collect();
        let a = exponent_fit(&e.iter().map(|x| (x.radius, x.total.value)).collect::<Vec<_>>()).unwrap().slope;
        let b = exponent_fit(&e.iter().map(|x| (x.radius, x.dtv_bound)).collect::<Vec<_>>()).unwrap().slope;
        pass &= (a - a_exp).abs() <= 0.15 && (b - dtv_exp).abs() <= 0.15;
        parts.push(format!("{}: A slope {a:.3} (target {a_exp}), dtv slope {b:.3} (target {dtv_exp})", m.kernel.name()));
    }
    outcome(pass, parts.join("; "))
}

fn c8_malliavin() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    let t = 1.0;
    let zs: Vec<f64> = (0..9).map(|k| -0.5 + k as f64 / 8.0 + 1e-9).collect();
    let f1 = |z: f64| ChainFn::Point { n: 1, t, anchor: 0.0 }.eval(&[z]);
    for m in [CovarianceModel::white_noise(1).unwrap(), CovarianceModel::heat(1.0, 1).unwrap(), CovarianceModel::riesz(0.5, 1).unwrap()] {
        let mut sups = Vec::new();
        for cells in [16, 32, 64] {
            let grid = NoiseGrid::build(2.0, cells, &m).unwrap();
            let (u, _) = solution_sum(&grid, t, 0.0, 3, 4).unwrap();
            sups.push(malliavin::derivative_domination(&u, &grid, &zs, f1).unwrap().max_ratio);
        }
        let spread = sups.iter().cloned().fold(0.0, f64::max) / sups.iter().cloned().fold(f64::INFINITY, f64::min);
        let grid = NoiseGrid::build(2.0, 32, &m).unwrap();
        let (u2, _) = solution_sum(&grid, t, 0.0, 2, 4).unwrap();
        let mut dev: f64 = 0.0;
        for &w in &zs {
            for &z in &zs {
                let v = malliavin::pair_value(&u2.tensors[1], &grid, w, z).unwrap();
                if v != 0.0 {
                    let d2 = malliavin::second_derivative(&u2, &grid, w, z).unwrap();
                    dev = dev.max((malliavin::constant_term(&d2) / v - 2.0).abs());
                }
            }
        }
        pass &= sups.iter().all(|s| s.is_finite()) && spread < 2.0 && dev < 1e-10;
        parts.push(format!("{}: sup ratios {:?} spread {spread:.3}, |D² ratio − 2| ≤ {dev:.1e}", m.kernel.name(), sups.iter().map(|s| (s * 1e4).round() / 1e4).collect::<Vec<_>>()));
    }
    outcome(pass, parts.join("; "))
}

struct CltRun {
    ks_p: f64,
    w1: Vec<f64>,
    cov_pass: bool,
    skew: f64,
}

fn clt_run(m: &CovarianceModel, seed: u64) -> CltRun {
    let grid = NoiseGrid::build(66.0, 528, m).unwrap();
    let radii = [8.0, 16.0, 32.0, 64.0];
    let times = [1.0, 0.5];
    let mut sums = Vec::new();
    for r in radii {
        for t in times {
            sums.push(spatial_integral_sum(&grid, r, t, 3, 4).unwrap().0);
        }
    }
    let s = simulate(&grid, &sums, &McSettings::new(10_000, seed)).unwrap();
    let reps: Vec<_> = (0..radii.len()).map(|i| normality_report(&standardize(&s.values[2 * i])).unwrap()).collect();
    let last = radii.len() - 1;
    let (scale, limit): (f64, Box<dyn Fn(f64, f64) -> f64>) = match m.power_law() {
        Some((_, beta)) => (64f64.powf(2.0 - beta), Box::new(move |a, b| limit_constant_kprime(a, b, beta, 1, &QuadSettings::default()).unwrap().k_prime.unwrap())),
        None => (64.0, Box::new(|a, b| limit_constant_k(a, b, m, 4, &McSettings::new(20_000, 9)).unwrap().k.unwrap().value)),
    };
    let mut reference = vec![vec![0.0; 2]; 2];
    let mut extra = vec![vec![0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let (a, b) = (2 * last + i, 2 * last + j);
            let lim = limit(times[i], times[j]);
            let disc = sums[a].tensors[0].inner(&sums[b].tensors[0], grid.gram()) / scale;
            let cont = ham_clt::asymptotics::variance_estimate(64.0, times[i], times[j], m, 3, &McSettings::new(20_000, 10)).unwrap();
            let higher: f64 = cont.per_chaos[1..].iter().map(|p| p.value.abs() + 3.0 * p.std_error).sum::<f64>() / scale;
            reference[i][j] = lim;
            extra[i][j] = (disc - lim).abs() + higher;
        }
    }
    let cols = vec![s.values[2 * last].clone(), s.values[2 * last + 1].clone()];
    let mt = multi_time_gaussianity(&cols, scale, &reference, &extra, seed).unwrap();
    CltRun { ks_p: reps[last].ks_pvalue, w1: reps.iter().map(|r| r.w1).collect(), cov_pass: mt.covariance_passes(), skew: reps[last].moments.skewness.value }
}

fn c9_clt() -> Outcome {
    let heat = clt_run(&CovarianceModel::heat(1.0, 1).unwrap(), 91);
    let riesz = clt_run(&CovarianceModel::riesz(0.5, 1).unwrap(), 92);
    let w1_down = |r: &CltRun| r.w1[r.w1.len() - 1] < r.w1[0];
    let pass = heat.ks_p > 0.01 && w1_down(&heat) && w1_down(&riesz) && heat.cov_pass && riesz.cov_pass;
    outcome(
        pass,
        format!(
            "heat: KS p = {:.3}, W1 {:.4} → {:.4}, K covariance {}; riesz: W1 {:.4} → {:.4}, K′ covariance {}, KS p = {:.1e} (skewness {:.3}, decays like R^(-β/2); informational)",
            heat.ks_p,
            heat.w1[0],
            heat.w1[3],
            heat.cov_pass,
            riesz.w1[0],
            riesz.w1[3],
            riesz.cov_pass,
            riesz.ks_p,
            riesz.skew
        ),
    )
}

fn c10_findings() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("[model]\nkernel = \"heat\"\na = 1.0\n[chaos]\nseed = 3\n[experiment]\ntimes = [1.0, 0.5]\n[output]\ndir = {:?}\n", dir.path().display().to_string());
    let o = runner::run_text(Subcommand::Constants, &text, "acceptance.toml", &Overrides::default());
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("constants.json")).unwrap()).unwrap();
    let lag = &json["findings"]["lag_integral_first_chaos"];
    let ball = &json["findings"]["ball_energy_exponent"];
    let brute = lag["brute_force"].as_f64().unwrap_or(f64::NAN);
    let slope = ball["fitted_exponent"].as_f64().unwrap_or(f64::NAN);
    let pass = o.exit_code == 0
        && (brute - 0.0625).abs() < 1e-6
        && lag["matches_display"] == false
        && (slope - 1.0).abs() < 0.05
        && ball["matches_display"] == false;
    outcome(pass, format!("∫α_1 = {brute} vs t²s²/4 = 0.0625 and (t²+s²)/2 = 0.625; ball energy exponent {slope:.3} vs d = 1 and d/2 = 0.5"))
}

fn report(number: usize, name: &str, o: Outcome) {
    println!("criterion {number:>2} {name:<26} {}  {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    assert!(o.pass, "criterion {number} ({name}) failed: {}", o.detail);
}

#[test]
fn criterion_01_constants() {
    report(1, "constants", c1_constants());
}

#[test]
fn criterion_02_green() {
    report(2, "green", c2_green());
}

#[test]
fn criterion_03_chaos_norm_bounds() {
    report(3, "chaos-norm bounds", c3_chaos_norms());
}

#[test]
fn criterion_04_discrete_wiener_isometry() {
    report(4, "discrete Wiener isometry", c4_isometry());
}

#[test]
fn criterion_05_variance_scaling() {
    report(5, "variance scaling", c5_variance());
}

#[test]
fn criterion_06_first_chaos_dominance() {
    report(6, "first-chaos dominance", c6_dominance());
}

#[test]
fn criterion_07_stein_bound_scaling() {
    report(7, "Stein-bound scaling", c7_stein());
}

#[test]
fn criterion_08_malliavin_domination() {
    report(8, "Malliavin domination", c8_malliavin());
}

#[test]
fn criterion_09_clt_normality() {
    report(9, "CLT normality", c9_clt());
}

#[test]
fn criterion_10_discrepancy_report() {
    report(10, "discrepancy report", c10_findings());
}
