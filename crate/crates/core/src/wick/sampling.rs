use super::grid::NoiseGrid;
use super::tensor::{project_kernel, SymTensor, WickForm};
use crate::chaos::spatial::ChainFn;
use crate::error::{Error, Result};
use crate::mc::{stream, with_pool, McSettings};
use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

const BATCH: usize = 256;

/// A truncated chaos sum Σ_{n=1}^{N} I_n(S_n) (the centered part of u_N or F_R).
#[derive(Debug, Clone)]
pub struct ChaosSum {
    pub label: String,
    pub tensors: Vec<SymTensor>,
    forms: Vec<WickForm>,
}

impl ChaosSum {
    pub fn new(label: impl Into<String>, tensors: Vec<SymTensor>, grid: &NoiseGrid) -> Self {
        let forms = tensors.iter().map(|t| t.wick_form(grid.gram())).collect();
        Self { label: label.into(), tensors, forms }
    }

    pub fn eval(&self, w: &[f64]) -> f64 {
        self.forms.iter().map(|f| f.eval(w)).sum()
    }

    /// Per-order values I_n(S_n).
    pub fn eval_orders(&self, w: &[f64]) -> Vec<f64> {
        self.forms.iter().map(|f| f.eval(w)).collect()
    }

    /// Leading skewness 3E[I_1(a)²I_2(b)]/σ³ = 6⟨a⊗a, b⟩/σ³, with σ² taken
    /// from orders 1 and 2. `None` without both orders.
    pub fn leading_skewness(&self, grid: &NoiseGrid) -> Option<f64> {
        let a = self.tensors.iter().find(|t| t.order == 1)?;
        let b = self.tensors.iter().find(|t| t.order == 2)?;
        let dense: Vec<f64> = (0..grid.cells as u32).map(|k| a.get(&[k])).collect();
        let ca = grid.gram() * nalgebra::DVector::from_vec(dense);
        let s2 = a.inner(a, grid.gram()) + 2.0 * b.inner(b, grid.gram());
        Some(6.0 * b.evaluate(ca.as_slice()) / s2.powf(1.5))
    }

    /// E[X²] = Σ_n n!‖S_n‖², exact on the discrete structure.
    pub fn exact_second_moment(&self, grid: &NoiseGrid) -> f64 {
        self.tensors.iter().map(|t| crate::chaos::factorial(t.order) * t.inner(t, grid.gram())).sum()
    }
}

/// Samples of several chaos sums driven by the same noise draws.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionSamples {
    pub labels: Vec<String>,
    /// values[q][i]: quantity q at sample i.
    pub values: Vec<Vec<f64>>,
}

impl SolutionSamples {
    pub fn column(&self, label: &str) -> Option<&[f64]> {
        self.labels.iter().position(|l| l == label).map(|i| self.values[i].as_slice())
    }
}

/// Draws `mcs.samples` noise vectors W = A·ξ and evaluates every sum.
///
/// Batch b uses stream (seed, b), so the output is independent of the thread count.
pub fn simulate(grid: &NoiseGrid, sums: &[ChaosSum], mcs: &McSettings) -> Result<SolutionSamples> {
    if sums.iter().flat_map(|s| &s.tensors).any(|t| t.dim != grid.cells) {
        return Err(Error::InvalidInput("tensor dimension differs from the grid".into()));
    }
    let m = grid.cells;
    let batches = mcs.samples.div_ceil(BATCH);
    let a = grid.factor();
    let parts: Vec<Vec<Vec<f64>>> = with_pool(|| {
        (0..batches)
            .into_par_iter()
            .map(|b| {
                let count = BATCH.min(mcs.samples - b * BATCH);
                let mut rng = stream(mcs.seed, b as u64);
                let xi = DMatrix::from_fn(m, count, |_, _| StandardNormal.sample(&mut rng));
                let w = a * xi;
                let mut out = vec![Vec::with_capacity(count); sums.len()];
                for c in 0..count {
                    let col = w.column(c);
                    let col = col.as_slice();
                    for (q, s) in sums.iter().enumerate() {
                        out[q].push(s.eval(col));
                    }
                }
                out
            })
            .collect()
    });
    let mut values = vec![Vec::with_capacity(mcs.samples); sums.len()];
    for part in parts {
        for (q, v) in part.into_iter().enumerate() {
            values[q].extend(v);
        }
    }
    Ok(SolutionSamples { labels: sums.iter().map(|s| s.label.clone()).collect(), values })
}

/// Projects one kernel per chaos order and collects them into a sum.
///
/// Returns the sum and the total L² reconstruction error of the projections.
pub fn project_sum(grid: &NoiseGrid, label: &str, kernels: &[ChainFn], points: usize, max_order: usize) -> Result<(ChaosSum, f64)> {
    let mut tensors = Vec::with_capacity(kernels.len());
    let mut err = 0.0;
    for k in kernels {
        let p = project_kernel(grid, k, points, max_order)?;
        err += p.reconstruction_error;
        tensors.push(p.tensor);
    }
    Ok((ChaosSum::new(label, tensors, grid), err))
}

/// u_N(t, x) − 1 = Σ_{n≤N} I_n(f_n(·, x; t)).
pub fn solution_sum(grid: &NoiseGrid, t: f64, x: f64, n_sim: usize, points: usize) -> Result<(ChaosSum, f64)> {
    let kernels: Vec<ChainFn> = (1..=n_sim).map(|n| ChainFn::Point { n, t, anchor: x }).collect();
    project_sum(grid, &format!("u({t},{x})"), &kernels, points, n_sim)
}

/// F_R(t) = ∫_{−R}^{R} (u_N(t, x) − 1) dx, integrated at the level of the kernels.
pub fn spatial_integral_sum(grid: &NoiseGrid, radius: f64, t: f64, n_sim: usize, points: usize) -> Result<(ChaosSum, f64)> {
    if radius > grid.half_width {
        return Err(Error::Domain(format!("R = {radius} exceeds the grid half-width {}", grid.half_width)));
    }
    let kernels: Vec<ChainFn> = (1..=n_sim).map(|n| ChainFn::Ball { n, t, radius }).collect();
    project_sum(grid, &format!("F({radius},{t})"), &kernels, points, n_sim)
}

/// The cell integrals W used by [`simulate`], sample by sample.
pub fn noise_draws(grid: &NoiseGrid, mcs: &McSettings) -> Vec<Vec<f64>> {
    let m = grid.cells;
    let mut out = Vec::with_capacity(mcs.samples);
    for b in 0..mcs.samples.div_ceil(BATCH) {
        let count = BATCH.min(mcs.samples - b * BATCH);
        let mut rng = stream(mcs.seed, b as u64);
        let xi = DMatrix::from_fn(m, count, |_, _| StandardNormal.sample(&mut rng));
        let w = grid.factor() * xi;
        for c in 0..count {
            out.push(w.column(c).iter().copied().collect());
        }
    }
    out
}
