use super::grid::NoiseGrid;
use crate::chaos::factorial;
use crate::chaos::spatial::ChainFn;
use crate::error::{Error, Result};
use crate::quad::gauss_legendre_on;
use nalgebra::DMatrix;
use std::collections::BTreeMap;

/// Symmetric tensor over cell indices, stored on nondecreasing multi-indices.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTensor {
    pub order: usize,
    pub dim: usize,
    idx: Vec<u32>,
    val: Vec<f64>,
}

/// Π_k (multiplicity of k)! for a sorted multi-index.
pub fn stabilizer(a: &[u32]) -> f64 {
    let mut s = 1.0;
    let mut run = 1;
    for i in 1..a.len() {
        if a[i] == a[i - 1] {
            run += 1;
            s *= run as f64;
        } else {
            run = 1;
        }
    }
    s
}

/// Distinct orderings of a sorted multi-index.
fn orderings(a: &[u32]) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut p = a.to_vec();
    loop {
        out.push(p.clone());
        let n = p.len();
        let Some(i) = (1..n).rev().find(|&i| p[i - 1] < p[i]) else { break };
        let j = (i..n).rev().find(|&j| p[j] > p[i - 1]).expect("successor exists");
        p.swap(i - 1, j);
        p[i..].reverse();
    }
    out
}

/// Permanent of a small square matrix given row-major.
fn permanent(m: &[f64], n: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    crate::chaos::permutations(n).iter().map(|p| (0..n).map(|i| m[i * n + p[i]]).product::<f64>()).sum()
}

impl SymTensor {
    pub fn zero(order: usize, dim: usize) -> Self {
        Self { order, dim, idx: Vec::new(), val: Vec::new() }
    }

    /// Order-0 tensor holding a constant.
    pub fn scalar(value: f64, dim: usize) -> Self {
        Self { order: 0, dim, idx: Vec::new(), val: vec![value] }
    }

    fn from_map(order: usize, dim: usize, map: BTreeMap<Vec<u32>, f64>) -> Self {
        let mut idx = Vec::with_capacity(map.len() * order);
        let mut val = Vec::with_capacity(map.len());
        for (k, v) in map {
            if v != 0.0 {
                idx.extend_from_slice(&k);
                val.push(v);
            }
        }
        if order == 0 && val.is_empty() {
            val.push(0.0);
        }
        Self { order, dim, idx, val }
    }

    /// Symmetrization of a tensor given on ordered index tuples.
    pub fn symmetrize<I: IntoIterator<Item = (Vec<u32>, f64)>>(order: usize, dim: usize, ordered: I) -> Self {
        let mut map: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
        let nf = factorial(order);
        for (mut k, v) in ordered {
            k.sort_unstable();
            let w = stabilizer(&k) / nf;
            *map.entry(k).or_insert(0.0) += v * w;
        }
        Self::from_map(order, dim, map)
    }

    /// Symmetrization of a dense row-major tensor of shape dimⁿ.
    pub fn from_dense(order: usize, dim: usize, dense: &[f64]) -> Self {
        let entries = (0..dense.len()).map(|flat| {
            let mut k = vec![0u32; order];
            let mut r = flat;
            for slot in (0..order).rev() {
                k[slot] = (r % dim) as u32;
                r /= dim;
            }
            (k, dense[flat])
        });
        Self::symmetrize(order, dim, entries)
    }

    pub(crate) fn from_raw(order: usize, dim: usize, idx: Vec<u32>, val: Vec<f64>) -> Result<Self> {
        let ok = val.len() * order == idx.len() && (order > 0 || val.len() == 1) && idx.iter().all(|k| (*k as usize) < dim);
        let sorted = idx.chunks(order.max(1)).all(|a| a.windows(2).all(|w| w[0] <= w[1]))
            && (order == 0 || idx.chunks(order).zip(idx.chunks(order).skip(1)).all(|(a, b)| a < b));
        if !(ok && sorted) {
            return Err(Error::InvalidInput("malformed tensor data".into()));
        }
        Ok(Self { order, dim, idx, val })
    }

    pub(crate) fn raw(&self) -> (&[u32], &[f64]) {
        (&self.idx, &self.val)
    }

    pub fn len(&self) -> usize {
        self.val.len()
    }

    pub fn is_empty(&self) -> bool {
        self.val.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&[u32], f64)> {
        let n = self.order;
        self.val.iter().enumerate().map(move |(i, v)| (&self.idx[i * n..(i + 1) * n], *v))
    }

    /// Value at an arbitrary (unsorted) multi-index.
    pub fn get(&self, index: &[u32]) -> f64 {
        let mut k = index.to_vec();
        k.sort_unstable();
        if self.order == 0 {
            return self.val[0];
        }
        let n = self.order;
        let (mut lo, mut hi) = (0, self.val.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.idx[mid * n..(mid + 1) * n].cmp(&k[..]) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return self.val[mid],
            }
        }
        0.0
    }

    pub fn scaled(mut self, c: f64) -> Self {
        self.val.iter_mut().for_each(|v| *v *= c);
        self
    }

    /// Σ_{p,q} S(p, q, ·) C_{pq}: a symmetric tensor of order n − 2.
    pub fn contract(&self, gram: &DMatrix<f64>) -> Self {
        assert!(self.order >= 2, "contraction needs order ≥ 2");
        let mut map: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
        for (a, v) in self.entries() {
            // Each distinct ordered value pair (p, q) ⊂ a is hit mult(p)·mult(q)
            // (or mult(p)(mult(p) − 1)) times by position pairs.
            let mult = |x: u32| a.iter().filter(|y| **y == x).count() as f64;
            for i in 0..a.len() {
                for j in 0..a.len() {
                    if i == j {
                        continue;
                    }
                    let (p, q) = (a[i], a[j]);
                    let count = if p == q { mult(p) * (mult(p) - 1.0) } else { mult(p) * mult(q) };
                    let rest: Vec<u32> = a.iter().enumerate().filter(|(l, _)| *l != i && *l != j).map(|(_, x)| *x).collect();
                    *map.entry(rest).or_insert(0.0) += v * gram[(p as usize, q as usize)] / count;
                }
            }
        }
        Self::from_map(self.order - 2, self.dim, map)
    }

    /// S(k, ·): a symmetric tensor of order n − 1.
    pub fn slice(&self, k: u32) -> Self {
        assert!(self.order >= 1, "slicing needs order ≥ 1");
        let mut map = BTreeMap::new();
        for (a, v) in self.entries() {
            if let Some(pos) = a.iter().position(|x| *x == k) {
                let mut rest = a.to_vec();
                rest.remove(pos);
                map.insert(rest, v);
            }
        }
        Self::from_map(self.order - 1, self.dim, map)
    }

    /// ⟨S, T⟩ = Σ_{i,k ordered} S_i T_k Π_l C_{i_l k_l}.
    pub fn inner(&self, other: &Self, gram: &DMatrix<f64>) -> f64 {
        assert_eq!(self.order, other.order);
        let n = self.order;
        if n == 0 {
            return self.val[0] * other.val[0];
        }
        let nf = factorial(n);
        let mut m = vec![0.0; n * n];
        let mut total = 0.0;
        for (a, va) in self.entries() {
            let wa = va * nf / stabilizer(a);
            for (b, vb) in other.entries() {
                for i in 0..n {
                    for j in 0..n {
                        m[i * n + j] = gram[(a[i] as usize, b[j] as usize)];
                    }
                }
                total += wa * vb * permanent(&m, n) / stabilizer(b);
            }
        }
        total
    }

    /// ⟨S, w^{⊗n}⟩ over ordered indices.
    pub fn evaluate(&self, w: &[f64]) -> f64 {
        if self.order == 0 {
            return self.val[0];
        }
        let nf = factorial(self.order);
        self.entries().map(|(a, v)| v * nf / stabilizer(a) * a.iter().map(|k| w[*k as usize]).product::<f64>()).sum()
    }

    /// Multiple Wiener integral I_n(S) as a polynomial in the cell integrals W.
    pub fn wick_form(&self, gram: &DMatrix<f64>) -> WickForm {
        let n = self.order;
        let mut terms = Vec::new();
        let mut current = self.clone();
        let mut j = 0;
        loop {
            // (−1)^j n!/(j! 2^j (n − 2j)!)
            let c = factorial(n) / (factorial(j) * 2f64.powi(j as i32) * factorial(n - 2 * j));
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            terms.push(WeightedMonomials::new(&current, sign * c));
            if current.order < 2 {
                break;
            }
            current = current.contract(gram);
            j += 1;
        }
        WickForm { order: n, terms }
    }
}

/// Monomials Σ c_a Π W_{a_l} with the ordering multiplicities folded in.
#[derive(Debug, Clone)]
struct WeightedMonomials {
    degree: usize,
    idx: Vec<u32>,
    coef: Vec<f64>,
}

impl WeightedMonomials {
    fn new(t: &SymTensor, scale: f64) -> Self {
        let nf = factorial(t.order);
        let (idx, coef) = if t.order == 0 {
            (Vec::new(), vec![scale * t.val[0]])
        } else {
            (t.idx.clone(), t.entries().map(|(a, v)| scale * v * nf / stabilizer(a)).collect())
        };
        Self { degree: t.order, idx, coef }
    }

    fn eval(&self, w: &[f64]) -> f64 {
        let n = self.degree;
        match n {
            0 => self.coef[0],
            1 => self.coef.iter().zip(&self.idx).map(|(c, k)| c * w[*k as usize]).sum(),
            _ => self.coef.iter().zip(self.idx.chunks_exact(n)).map(|(c, a)| c * a.iter().map(|k| w[*k as usize]).product::<f64>()).sum(),
        }
    }
}

/// I_n(S) = Σ_j (−1)^j n!/(j!2^j(n−2j)!) ⟨S contracted j times, W^{⊗(n−2j)}⟩.
#[derive(Debug, Clone)]
pub struct WickForm {
    pub order: usize,
    terms: Vec<WeightedMonomials>,
}

impl WickForm {
    pub fn eval(&self, w: &[f64]) -> f64 {
        self.terms.iter().map(|t| t.eval(w)).sum()
    }
}

/// Cell-averaged projection of a chain kernel.
#[derive(Debug, Clone)]
pub struct ProjectedKernel {
    pub tensor: SymTensor,
    /// L² distance between the kernel and its cell-average projection.
    pub reconstruction_error: f64,
}

/// Projects `kernel` onto products of cell indicators: each coefficient is the
/// average of the kernel over the cell product (Gauss–Legendre, `points` per
/// axis), then symmetrized.
pub fn project_kernel(grid: &NoiseGrid, kernel: &ChainFn, points: usize, max_order: usize) -> Result<ProjectedKernel> {
    let n = kernel.order();
    if n == 0 {
        return Err(Error::InvalidInput("order must be at least 1".into()));
    }
    if n > max_order {
        return Err(Error::OrderTooLarge { n, max: max_order });
    }
    let window = kernel.window().ok_or_else(|| Error::InvalidInput("the kernel must have bounded support".into()))?;
    if window.0 < -grid.half_width - 1e-12 || window.1 > grid.half_width + 1e-12 {
        return Err(Error::Domain("kernel support exceeds the noise grid".into()));
    }
    let h = grid.cell_width();
    let m = grid.cells;
    if kernel.reach() <= 0.0 {
        return Ok(ProjectedKernel { tensor: SymTensor::zero(n, m), reconstruction_error: 0.0 });
    }
    let (nodes, weights) = gauss_legendre_on(points, 0.0, 1.0);
    let span = (kernel.reach() / h).ceil() as i64 + 1;
    let last_lo = grid.cell_of(window.0.max(-grid.half_width)).unwrap_or(0);
    let last_hi = grid.cell_of(window.1.min(grid.half_width)).unwrap_or(m - 1);
    let mut ordered = Vec::new();
    let mut residual = 0.0;
    let mut cells = vec![0i64; n];
    let mut x = vec![0.0; n];
    let total_nodes = points.pow(n as u32);
    // Depth-first enumeration of chains of neighbouring cells.
    fn visit(
        level: usize,
        cells: &mut Vec<i64>,
        span: i64,
        m: i64,
        f: &mut dyn FnMut(&[i64]),
    ) {
        if level == 0 {
            f(cells);
            return;
        }
        let j = level - 1;
        let next = cells[j + 1];
        for c in (next - span).max(0)..=(next + span).min(m - 1) {
            cells[j] = c;
            visit(j, cells, span, m, f);
        }
    }
    for last in last_lo..=last_hi {
        cells[n - 1] = last as i64;
        let mut body = |cs: &[i64]| {
            // Cell-gap test: chain length lower bound.
            let gap: f64 = cs.windows(2).map(|w| ((w[1] - w[0]).abs() - 1).max(0) as f64 * h).sum();
            if gap >= kernel.reach() {
                return;
            }
            let (mut s1, mut s2) = (0.0, 0.0);
            for flat in 0..total_nodes {
                let mut r = flat;
                let mut wt = 1.0;
                for slot in 0..n {
                    let q = r % points;
                    r /= points;
                    x[slot] = grid.cell_left(cs[slot] as usize) + h * nodes[q];
                    wt *= weights[q];
                }
                let v = kernel.eval(&x);
                s1 += wt * v;
                s2 += wt * v * v;
            }
            if s1 != 0.0 || s2 != 0.0 {
                residual += h.powi(n as i32) * (s2 - s1 * s1).max(0.0);
                ordered.push((cs.iter().map(|c| *c as u32).collect::<Vec<u32>>(), s1));
            }
        };
        if n == 1 {
            body(&cells);
        } else {
            visit(n - 1, &mut cells, span, m as i64, &mut body);
        }
    }
    Ok(ProjectedKernel { tensor: SymTensor::symmetrize(n, m, ordered), reconstruction_error: residual.sqrt() })
}

/// Σ_{i,k} F_i F'_k Π C_{i_l k_l} for dense row-major tensors (no symmetrization).
pub fn dense_inner(order: usize, dim: usize, f: &[f64], g: &[f64], gram: &DMatrix<f64>) -> f64 {
    let unflatten = |flat: usize| {
        let mut k = vec![0usize; order];
        let mut r = flat;
        for slot in (0..order).rev() {
            k[slot] = r % dim;
            r /= dim;
        }
        k
    };
    let mut total = 0.0;
    for (i, fi) in f.iter().enumerate() {
        if *fi == 0.0 {
            continue;
        }
        let a = unflatten(i);
        for (k, gk) in g.iter().enumerate() {
            if *gk == 0.0 {
                continue;
            }
            let b = unflatten(k);
            total += fi * gk * (0..order).map(|l| gram[(a[l], b[l])]).product::<f64>();
        }
    }
    total
}

/// Distinct orderings of a canonical multi-index, exposed for diagnostics.
pub fn distinct_orderings(a: &[u32]) -> Vec<Vec<u32>> {
    orderings(a)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity(m: usize) -> DMatrix<f64> {
        DMatrix::identity(m, m)
    }

    #[test]
    fn first_and_second_hermite() {
        let g = identity(3);
        let e1 = SymTensor::symmetrize(1, 3, [(vec![1], 1.0)]);
        let w = [0.3, -1.2, 2.0];
        assert_eq!(e1.wick_form(&g).eval(&w), -1.2);
        let e11 = SymTensor::symmetrize(2, 3, [(vec![1, 1], 1.0)]);
        assert!((e11.wick_form(&g).eval(&w) - (1.44 - 1.0)).abs() < 1e-15);
        // e_0 ⊗ e_2 symmetrized: I_2 = ξ_0 ξ_2.
        let e02 = SymTensor::symmetrize(2, 3, [(vec![0, 2], 1.0)]);
        assert!((e02.wick_form(&g).eval(&w) - 0.6).abs() < 1e-15);
        // e_1^{⊗3}: H_3(x) = x³ − 3x.
        let e111 = SymTensor::symmetrize(3, 3, [(vec![1, 1, 1], 1.0)]);
        let x: f64 = -1.2;
        assert!((e111.wick_form(&g).eval(&w) - (x.powi(3) - 3.0 * x)).abs() < 1e-14);
    }

    #[test]
    fn contraction_matches_dense() {
        let m = 3;
        let gram = DMatrix::from_fn(m, m, |i, j| 1.0 / (1.0 + i.abs_diff(j) as f64));
        let dense: Vec<f64> = (0..27).map(|i| ((i * 7 % 11) as f64 - 5.0) / 3.0).collect();
        let s = SymTensor::from_dense(3, m, &dense);
        let c = s.contract(&gram);
        // Direct: v_k = Σ_{p,q} S̃_{pqk} C_{pq}.
        for k in 0..m as u32 {
            let mut v = 0.0;
            for p in 0..m as u32 {
                for q in 0..m as u32 {
                    v += s.get(&[p, q, k]) * gram[(p as usize, q as usize)];
                }
            }
            assert!((c.get(&[k]) - v).abs() < 1e-13);
        }
    }

    #[test]
    fn inner_matches_dense_of_symmetrized() {
        let m = 3;
        let gram = DMatrix::from_fn(m, m, |i, j| 0.5f64.powi(i.abs_diff(j) as i32));
        let f: Vec<f64> = (0..9).map(|i| (i as f64 * 0.37).sin()).collect();
        let s = SymTensor::from_dense(2, m, &f);
        let mut sym = vec![0.0; 9];
        for i in 0..3u32 {
            for j in 0..3u32 {
                sym[(i * 3 + j) as usize] = s.get(&[i, j]);
            }
        }
        let a = s.inner(&s, &gram);
        let b = dense_inner(2, m, &sym, &sym, &gram);
        assert!((a - b).abs() < 1e-13);
        assert!(a <= dense_inner(2, m, &f, &f, &gram) + 1e-13);
    }

    #[test]
    fn slice_of_symmetric_tensor() {
        let s = SymTensor::symmetrize(2, 4, [(vec![1, 3], 2.0)]);
        // Symmetrized value at (1, 3) is 1.
        assert_eq!(s.get(&[3, 1]), 1.0);
        let sl = s.slice(3);
        assert_eq!(sl.get(&[1]), 1.0);
        assert_eq!(sl.get(&[0]), 0.0);
    }

    #[test]
    fn orderings_count() {
        assert_eq!(distinct_orderings(&[1, 1, 2]).len(), 3);
        assert_eq!(distinct_orderings(&[0, 1, 2]).len(), 6);
        assert_eq!(stabilizer(&[2, 2, 2]), 6.0);
    }
}
