//! Monte Carlo chaos-kernel norms against the factorial bound.
use ham_clt::chaos::{kernel_norm_sq, ChaosKernel};
use ham_clt::covariance::CovarianceModel;
use ham_clt::mc::McSettings;
use ham_clt::wave::d_const;

fn main() -> ham_clt::Result<()> {
    let model = CovarianceModel::riesz(0.5, 1)?;
    let c = model.dalang_constant()?;
    let t = 1.0;
    println!("n   ‖f_n‖²            bound");
    for n in 1..=4 {
        let e = kernel_norm_sq(&ChaosKernel::new(n, t, vec![0.0]), &model, &McSettings::new(20_000, n as u64))?;
        let nf: f64 = (1..=n).map(|k| k as f64).product();
        let bound = (t.powi(n as i32) / nf).powi(2) * (d_const(t) * c).powi(n as i32);
        println!("{n}   {:.3e} ± {:.1e}  {bound:.3e}", e.value, e.std_error);
    }
    Ok(())
}
