use super::grid::NoiseGrid;
use super::sampling::ChaosSum;
use super::tensor::SymTensor;
use crate::error::{Error, Result};
use serde::Serialize;

fn cell(grid: &NoiseGrid, z: f64) -> Result<u32> {
    grid.cell_of(z).map(|k| k as u32).ok_or_else(|| Error::Domain(format!("z = {z} lies outside the noise grid")))
}

/// D_z of Σ_n I_n(S_n): the chaos sum Σ_n n·I_{n−1}(S_n(k_z, ·)).
///
/// Coefficients are cell values of the kernel, so the slice at z's cell is
/// already the kernel evaluated at z.
pub fn derivative(sum: &ChaosSum, grid: &NoiseGrid, z: f64) -> Result<ChaosSum> {
    let k = cell(grid, z)?;
    let tensors = sum.tensors.iter().filter(|t| t.order >= 1).map(|t| t.slice(k).scaled(t.order as f64)).collect();
    Ok(ChaosSum::new(format!("D[{}]({z})", sum.label), tensors, grid))
}

/// D²_{w,z} of Σ_n I_n(S_n): Σ_n n(n−1)·I_{n−2}(S_n(k_w, k_z, ·)).
pub fn second_derivative(sum: &ChaosSum, grid: &NoiseGrid, w: f64, z: f64) -> Result<ChaosSum> {
    let (kw, kz) = (cell(grid, w)?, cell(grid, z)?);
    let tensors = sum
        .tensors
        .iter()
        .filter(|t| t.order >= 2)
        .map(|t| t.slice(kw).slice(kz).scaled((t.order * (t.order - 1)) as f64))
        .collect();
    Ok(ChaosSum::new(format!("D2[{}]({w},{z})", sum.label), tensors, grid))
}

/// Deterministic part of a chaos sum (its order-0 tensor, if any).
pub fn constant_term(sum: &ChaosSum) -> f64 {
    sum.tensors.iter().filter(|t| t.order == 0).map(|t| t.get(&[])).sum()
}

/// Ratios ‖D‖₂ / reference over a grid of points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominationReport {
    pub points: Vec<f64>,
    pub norms: Vec<f64>,
    pub reference: Vec<f64>,
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
    pub min_ratio: f64,
}

impl DominationReport {
    /// Points with a zero reference are skipped; a nonzero norm there gives an infinite ratio.
    pub fn new(points: Vec<f64>, norms: Vec<f64>, reference: Vec<f64>) -> Self {
        let ratios: Vec<f64> = norms
            .iter()
            .zip(&reference)
            .filter_map(|(n, r)| match (*n, *r) {
                (_, r) if r > 0.0 => Some(n / r),
                (n, _) if n.abs() > 1e-14 => Some(f64::INFINITY),
                _ => None,
            })
            .collect();
        let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
        let min_ratio = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        Self { points, norms, reference, ratios, max_ratio, min_ratio }
    }
}

/// Exact ‖D_z u_N‖₂ = (Σ_n n!‖S'_n‖²)^{1/2} at each z, including the mean.
pub fn derivative_norms(sum: &ChaosSum, grid: &NoiseGrid, zs: &[f64]) -> Result<Vec<f64>> {
    zs.iter().map(|&z| Ok(derivative(sum, grid, z)?.exact_second_moment(grid).sqrt())).collect()
}

/// ‖D_z u_N‖₂ / reference(z) over `zs`.
pub fn derivative_domination<F: Fn(f64) -> f64>(sum: &ChaosSum, grid: &NoiseGrid, zs: &[f64], reference: F) -> Result<DominationReport> {
    let norms = derivative_norms(sum, grid, zs)?;
    Ok(DominationReport::new(zs.to_vec(), norms, zs.iter().map(|z| reference(*z)).collect()))
}

/// ‖D²_{w,z} u_N‖₂ / reference(w, z) over the product grid `ws × zs`.
pub fn second_derivative_domination<F: Fn(f64, f64) -> f64>(
    sum: &ChaosSum,
    grid: &NoiseGrid,
    ws: &[f64],
    zs: &[f64],
    reference: F,
) -> Result<DominationReport> {
    if sum.tensors.iter().all(|t| t.order < 2) {
        return Err(Error::InvalidInput("second derivatives need chaos order ≥ 2".into()));
    }
    let mut points = Vec::new();
    let mut norms = Vec::new();
    let mut refs = Vec::new();
    for &w in ws {
        for &z in zs {
            points.push(w);
            norms.push(second_derivative(sum, grid, w, z)?.exact_second_moment(grid).sqrt());
            refs.push(reference(w, z));
        }
    }
    Ok(DominationReport::new(points, norms, refs))
}

/// Symmetrized kernel value S_n(k_w, k_z, ·) for an order-2 tensor.
pub fn pair_value(tensor: &SymTensor, grid: &NoiseGrid, w: f64, z: f64) -> Result<f64> {
    Ok(tensor.get(&[cell(grid, w)?, cell(grid, z)?]))
}
