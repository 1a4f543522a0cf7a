use crate::covariance::{CovarianceModel, Kernel};
use crate::error::{Error, Result};
use crate::quad::{self, QuadSettings};
use nalgebra::{DMatrix, SymmetricEigen};
use libm::erf;
use std::f64::consts::{PI, SQRT_2};

/// Cell discretization of the noise on [−L, L] (d = 1).
///
/// `gram[j][k] = ⟨1_{cell_j}, 1_{cell_k}⟩` and `factor` is its symmetric
/// square root, so W = factor·ξ has the law of the cell integrals.
#[derive(Debug, Clone)]
pub struct NoiseGrid {
    pub half_width: f64,
    pub cells: usize,
    pub model: CovarianceModel,
    gram: DMatrix<f64>,
    factor: DMatrix<f64>,
    /// Eigenvalues set to zero by the clamping floor.
    pub clamped: usize,
    /// ‖factor·factorᵀ − gram‖_F / ‖gram‖_F.
    pub factor_error: f64,
}

/// Second antiderivative K of γ, even, with K'' = γ.
fn second_antiderivative(model: &CovarianceModel, u: f64) -> Option<f64> {
    let au = u.abs();
    if let Some((scale, beta)) = model.power_law() {
        return Some(scale * au.powf(2.0 - beta) / ((1.0 - beta) * (2.0 - beta)));
    }
    match model.kernel {
        Kernel::Heat { a } => {
            let s = a.sqrt();
            let cdf_minus_half = 0.5 * erf(au / (s * SQRT_2));
            let pdf = (-au * au / (2.0 * a)).exp() / (s * (2.0 * PI).sqrt());
            Some(au * cdf_minus_half + a * pdf)
        }
        Kernel::Poisson { a } => Some((au * (au / a).atan() - 0.5 * a * (a * a + au * au).ln()) / PI),
        _ => None,
    }
}

/// ∫_{cell}∫_{cell + D} γ(x − y) dx dy for cells of width h.
fn cell_pair(model: &CovarianceModel, h: f64, dist: f64) -> Result<f64> {
    if let Some(k) = second_antiderivative(model, 0.0) {
        let k = |u: f64| second_antiderivative(model, u).unwrap_or(k);
        return Ok(k(dist + h) + k(dist - h) - 2.0 * k(dist));
    }
    // ∫_{−h}^{h} (h − |v|) γ(D + v) dv, split where D + v = 0.
    let q = QuadSettings::default().with_rel_tol(1e-10);
    let f = |v: f64| (h - v.abs()) * model.gamma(&[dist + v]).unwrap_or(0.0);
    let zero = -dist;
    if zero > -h && zero < h {
        let p = match model.kernel {
            Kernel::Bessel { alpha } if alpha < 1.0 => alpha,
            _ => 0.5,
        };
        let left = quad::integrate_singular_left(|s| f(zero - s), 0.0, zero + h, p, &q)?.value;
        let right = quad::integrate_singular_left(f, zero, h, p, &q)?.value;
        Ok(left + right)
    } else {
        Ok(quad::integrate(f, -h, h, &q)?.value)
    }
}

impl NoiseGrid {
    /// Builds the Gram matrix and its square root. Eigenvalues below
    /// 10⁻¹²·trace are clamped to zero; below −10⁻⁸·trace the build fails.
    pub fn build(half_width: f64, cells: usize, model: &CovarianceModel) -> Result<Self> {
        if model.dimension != 1 {
            return Err(Error::Unsupported("the cell discretization is implemented for d = 1".into()));
        }
        if cells < 2 {
            return Err(Error::InvalidInput("at least two cells are required".into()));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidInput("half-width must be positive".into()));
        }
        let h = 2.0 * half_width / cells as f64;
        let mut row = vec![0.0; cells];
        if model.is_white() {
            row[0] = h;
        } else {
            for (k, v) in row.iter_mut().enumerate() {
                *v = cell_pair(model, h, k as f64 * h)?;
            }
        }
        let gram = DMatrix::from_fn(cells, cells, |i, j| row[i.abs_diff(j)]);
        let trace = gram.trace();
        let eig = SymmetricEigen::new(gram.clone());
        let lmin = eig.eigenvalues.min();
        if lmin < -1e-8 * trace {
            return Err(Error::Numerical(format!("Gram matrix is indefinite (λ_min = {lmin:e})")));
        }
        let mut clamped = 0;
        let roots = eig.eigenvalues.map(|l| {
            if l < 1e-12 * trace {
                clamped += 1;
                0.0
            } else {
                l.sqrt()
            }
        });
        let v = &eig.eigenvectors;
        let factor = v * DMatrix::from_diagonal(&roots) * v.transpose();
        let factor_error = (&factor * factor.transpose() - &gram).norm() / gram.norm();
        Ok(Self { half_width, cells, model: model.clone(), gram, factor, clamped, factor_error })
    }

    pub fn cell_width(&self) -> f64 {
        2.0 * self.half_width / self.cells as f64
    }

    pub fn cell_left(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.cell_width()
    }

    pub fn cell_center(&self, j: usize) -> f64 {
        self.cell_left(j) + 0.5 * self.cell_width()
    }

    /// Cell containing x.
    pub fn cell_of(&self, x: f64) -> Option<usize> {
        if !(x >= -self.half_width && x <= self.half_width) {
            return None;
        }
        Some((((x + self.half_width) / self.cell_width()) as usize).min(self.cells - 1))
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn factor(&self) -> &DMatrix<f64> {
        &self.factor
    }

    /// Reassembles a grid from cached matrices.
    pub(crate) fn from_parts(half_width: f64, model: &CovarianceModel, gram: DMatrix<f64>, factor: DMatrix<f64>, clamped: usize) -> Self {
        let factor_error = (&factor * factor.transpose() - &gram).norm() / gram.norm();
        Self { half_width, cells: gram.nrows(), model: model.clone(), gram, factor, clamped, factor_error }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn white_noise_gram_is_diagonal() {
        let g = NoiseGrid::build(1.0, 4, &CovarianceModel::white_noise(1).unwrap()).unwrap();
        assert_eq!(g.gram(), &DMatrix::from_diagonal_element(4, 4, 0.5));
        assert!(g.factor_error < 1e-14);
    }

    #[test]
    fn riesz_diagonal_closed_form() {
        let m = CovarianceModel::riesz(0.5, 1).unwrap();
        let g = NoiseGrid::build(2.0, 8, &m).unwrap();
        let h: f64 = 0.5;
        let expect = 2.0 * h.powf(1.5) / (0.5 * 1.5);
        assert!((g.gram()[(0, 0)] - expect).abs() < 1e-13);
        assert!(g.factor_error < 1e-8);
    }

    #[test]
    fn heat_and_poisson_match_quadrature() {
        let q = QuadSettings::default().with_rel_tol(1e-11);
        for m in [CovarianceModel::heat(0.7, 1).unwrap(), CovarianceModel::poisson(0.4, 1).unwrap()] {
            for dist in [0.0, 0.3, 1.7] {
                let h = 0.3;
                let closed = cell_pair(&m, h, dist).unwrap();
                let direct = quad::integrate(|v| (h - v.abs()) * m.gamma(&[dist + v]).unwrap(), -h, h, &q).unwrap().value;
                assert!((closed - direct).abs() < 1e-10, "{}: {closed} vs {direct}", m.kernel.name());
            }
        }
    }

    #[test]
    fn heat_row_sums_match_direct_quadrature() {
        let m = CovarianceModel::heat(1.0, 1).unwrap();
        let g = NoiseGrid::build(2.0, 8, &m).unwrap();
        let q = QuadSettings::default().with_rel_tol(1e-10);
        // Row 3 sums to ∫_{cell 3}∫_{[−L, L]} γ.
        let (a, b) = (g.cell_left(3), g.cell_left(4));
        let inner = |x: f64| 0.5 * (erf((2.0 - x) / SQRT_2) - erf((-2.0 - x) / SQRT_2));
        let direct = quad::integrate(inner, a, b, &q).unwrap().value;
        let sum: f64 = g.gram().row(3).iter().sum();
        assert!((sum - direct).abs() < 1e-10);
    }

    #[test]
    fn bessel_falls_back_to_quadrature() {
        let m = CovarianceModel::bessel(1.5, 1).unwrap();
        let g = NoiseGrid::build(1.0, 4, &m).unwrap();
        assert!(g.gram()[(0, 0)] > g.gram()[(0, 1)]);
        assert!(g.factor_error < 1e-8);
    }
}
