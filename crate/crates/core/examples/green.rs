//! The wave Green function: mass, L^p norms and its Fourier transform.
use ham_clt::quad::{self, QuadSettings};
use ham_clt::wave::{d_const, green, green_fourier, green_lp_norm};
use std::f64::consts::PI;

fn main() -> ham_clt::Result<()> {
    let q = QuadSettings::default().with_rel_tol(1e-10);
    for t in [0.5, 1.0, 2.0] {
        let mass = quad::integrate_singular_left(|u| 2.0 * PI * (t - u) * green(2, t, &[t - u, 0.0]), 0.0, t, 0.5, &q)?.value;
        println!("t = {t}: ∫G_t = {mass:.10}, D_t = {}, G^_t(1) = {:.6}", d_const(t), green_fourier(t, &[1.0, 0.0]));
        for p in [0.5, 1.0, 1.5] {
            println!("    ‖G_t‖_{p}^{p} = {:.8}", green_lp_norm(t, p)?);
        }
    }
    Ok(())
}
