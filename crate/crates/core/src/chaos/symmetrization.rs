use super::{factorial, permutations, N_MAX};
use crate::error::{Error, Result};
use crate::quad::simplex_rule;

/// Weighted point set on (ℝ^d)ⁿ.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    pub order: usize,
    pub dimension: usize,
    /// Atoms as n blocks of d coordinates, with nonnegative weights.
    pub atoms: Vec<(Vec<f64>, f64)>,
}

fn permute(atom: &[f64], d: usize, perm: &[usize]) -> Vec<f64> {
    perm.iter().flat_map(|&i| atom[i * d..(i + 1) * d].iter().copied()).collect()
}

impl DiscreteMeasure {
    /// Symmetrizes `atoms` by spreading each weight over all coordinate permutations.
    pub fn symmetrized(order: usize, dimension: usize, atoms: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        if order == 0 || order > N_MAX {
            return Err(Error::OrderTooLarge { n: order, max: N_MAX });
        }
        if atoms.iter().any(|(a, w)| a.len() != order * dimension || *w < 0.0) {
            return Err(Error::InvalidInput("atoms must have n·d coordinates and nonnegative weight".into()));
        }
        let perms = permutations(order);
        let nf = factorial(order);
        let mut out = Vec::with_capacity(atoms.len() * perms.len());
        for (a, w) in &atoms {
            for p in &perms {
                out.push((permute(a, dimension, p), w / nf));
            }
        }
        Ok(Self { order, dimension, atoms: out })
    }

    /// Whether the measure is invariant under coordinate permutations.
    pub fn is_symmetric(&self) -> bool {
        let d = self.dimension;
        let mass_at = |pt: &[f64]| -> f64 { self.atoms.iter().filter(|(a, _)| a.as_slice() == pt).map(|(_, w)| *w).sum() };
        permutations(self.order).iter().all(|p| {
            self.atoms.iter().all(|(a, _)| {
                let m0 = mass_at(a);
                let m1 = mass_at(&permute(a, d, p));
                (m0 - m1).abs() <= 1e-12 * m0.abs().max(1e-300)
            })
        })
    }
}

/// Both sides of the symmetrization inequality and their difference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetrizationCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub holds: bool,
}

/// Compares Σ_ρ ∫_{T_n(t)}∫_{T_n(s)}∫ h(t⃗, ξ) h(s⃗, ξ_ρ) μ(dξ) with
/// (sⁿ + tⁿ)/2 ∫_{T_n(t)}∫ h² μ(dξ), for a symmetric discrete μ and 0 < s ≤ t.
///
/// `h(times, ξ)` must be nonnegative; time integrals use a collapsed
/// Gauss–Legendre rule with `points` nodes per axis.
pub fn check_symmetrization_bound<H>(measure: &DiscreteMeasure, h: H, t: f64, s: f64, points: usize) -> Result<SymmetrizationCheck>
where
    H: Fn(&[f64], &[f64]) -> f64,
{
    let n = measure.order;
    if n == 0 || n > N_MAX {
        return Err(Error::OrderTooLarge { n, max: N_MAX });
    }
    if !(s > 0.0 && s <= t) {
        return Err(Error::InvalidInput("times must satisfy 0 < s ≤ t".into()));
    }
    if !measure.is_symmetric() {
        return Err(Error::InvalidInput("measure is not symmetric under coordinate permutations".into()));
    }
    let d = measure.dimension;
    let rule_t = simplex_rule(n, t, points);
    let rule_s = simplex_rule(n, s, points);
    let perms = permutations(n);
    let mut lhs = 0.0;
    let mut diag = 0.0;
    for (atom, w) in &measure.atoms {
        let mut ht = 0.0;
        let mut h2 = 0.0;
        for (times, wt) in &rule_t {
            let v = h(times, atom);
            if v < 0.0 {
                return Err(Error::InvalidInput("h must be nonnegative".into()));
            }
            ht += wt * v;
            h2 += wt * v * v;
        }
        let mut hs = 0.0;
        for p in &perms {
            let pa = permute(atom, d, p);
            hs += rule_s.iter().map(|(times, ws)| ws * h(times, &pa)).sum::<f64>();
        }
        lhs += w * ht * hs;
        diag += w * h2;
    }
    let rhs = (s.powi(n as i32) + t.powi(n as i32)) / 2.0 * diag;
    let slack = rhs - lhs;
    Ok(SymmetrizationCheck { lhs, rhs, slack, holds: slack >= -1e-12 * rhs.abs().max(1e-300) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_atom_constant_is_equality() {
        let m = DiscreteMeasure::symmetrized(1, 1, vec![(vec![0.5], 2.0)]).unwrap();
        let r = check_symmetrization_bound(&m, |_, _| 3.0, 1.5, 1.5, 4).unwrap();
        assert!(r.holds);
        assert!(r.slack.abs() < 1e-12 * r.rhs);
        assert!((r.lhs - 2.0 * 9.0 * 1.5 * 1.5).abs() < 1e-10);
    }

    #[test]
    fn asymmetric_measure_rejected() {
        let m = DiscreteMeasure { order: 2, dimension: 1, atoms: vec![(vec![0.0, 1.0], 1.0)] };
        assert!(check_symmetrization_bound(&m, |_, _| 1.0, 1.0, 1.0, 4).is_err());
    }
}
