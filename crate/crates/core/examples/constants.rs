//! Limit constants: Dalang constant, κ, K′ and the embedding exponent q.
use ham_clt::asymptotics::{kappa, kappa_mc, limit_constant_k, limit_constant_kprime};
use ham_clt::covariance::CovarianceModel;
use ham_clt::mc::McSettings;
use ham_clt::quad::QuadSettings;

fn main() -> ham_clt::Result<()> {
    let q = QuadSettings::default();
    for model in [
        CovarianceModel::white_noise(1)?,
        CovarianceModel::heat(1.0, 1)?,
        CovarianceModel::riesz(0.5, 1)?,
        CovarianceModel::riesz(1.0, 2)?,
    ] {
        println!("{:<12} d={} C_mu = {:.6}", model.kernel.name(), model.dimension, model.dalang_constant()?);
    }

    let k = kappa(0.5, 1, &q)?;
    let mc = kappa_mc(0.5, 1, &McSettings::new(100_000, 1))?;
    println!("kappa(0.5, 1) = {k:.12}  (MC {:.4} ± {:.4})", mc.value, mc.std_error);
    for (t, s) in [(1.0, 1.0), (1.0, 0.5)] {
        let kp = limit_constant_kprime(t, s, 0.5, 1, &q)?.k_prime.unwrap();
        println!("K'({t}, {s}) = {kp:.7}");
    }

    let heat = CovarianceModel::heat(1.0, 1)?;
    let lim = limit_constant_k(1.0, 1.0, &heat, 4, &McSettings::new(20_000, 2))?;
    let kv = lim.k.unwrap();
    println!("heat K(1, 1) = {:.5} ± {:.5}, tail ≤ {:.2e}", kv.value, kv.std_error, kv.tail_bound);

    let q2 = CovarianceModel::heat(1.0, 2)?.with_ell(2.0).embed_exponent()?;
    println!("embedding exponent q (d=2, ell=2) = {q2:.6}");
    Ok(())
}
