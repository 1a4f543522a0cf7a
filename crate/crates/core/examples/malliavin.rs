//! Malliavin derivatives of the chaos-truncated solution u(t, 0).
use ham_clt::covariance::CovarianceModel;
use ham_clt::chaos::spatial::ChainFn;
use ham_clt::wick::{malliavin, solution_sum, NoiseGrid};

fn main() -> ham_clt::Result<()> {
    let t = 1.0;
    let model = CovarianceModel::riesz(0.5, 1)?;
    let zs: Vec<f64> = (0..9).map(|k| -0.5 + k as f64 / 8.0 + 1e-9).collect();
    let g = |z: f64| ChainFn::Point { n: 1, t, anchor: 0.0 }.eval(&[z]);
    for cells in [16, 32, 64] {
        let grid = NoiseGrid::build(2.0, cells, &model)?;
        let (u, _) = solution_sum(&grid, t, 0.0, 3, 4)?;
        let rep = malliavin::derivative_domination(&u, &grid, &zs, g)?;
        println!("{cells:>3} cells: ‖D_z u‖₂ / G(t, z) in [{:.4}, {:.4}]", rep.min_ratio, rep.max_ratio);
    }
    let grid = NoiseGrid::build(2.0, 32, &model)?;
    let (u2, _) = solution_sum(&grid, t, 0.0, 2, 4)?;
    let (w, z) = (-0.2, 0.3);
    let d2 = malliavin::second_derivative(&u2, &grid, w, z)?;
    let kernel = malliavin::pair_value(&u2.tensors[1], &grid, w, z)?;
    println!("second-chaos D²_(w,z) = {:.6}, kernel value {:.6}, ratio {:.3}", malliavin::constant_term(&d2), kernel, malliavin::constant_term(&d2) / kernel);
    Ok(())
}
