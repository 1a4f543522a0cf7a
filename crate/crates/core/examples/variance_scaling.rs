//! Variance of the spatial integral F_R(t) and its growth exponent.
use ham_clt::asymptotics::{exponent_fit, limit_constant_kprime, variance_table};
use ham_clt::covariance::CovarianceModel;
use ham_clt::mc::McSettings;
use ham_clt::quad::QuadSettings;

fn main() -> ham_clt::Result<()> {
    let model = CovarianceModel::riesz(0.5, 1)?;
    let radii = [4.0, 8.0, 16.0, 32.0, 64.0];
    let table = variance_table(&radii, 1.0, &model, 4, &McSettings::new(20_000, 3))?;
    for row in &table {
        let first = row.per_chaos[0].value;
        println!("R = {:>4}: σ² = {:>10.3}  first chaos {:>10.3}  σ²/R^1.5 = {:.4}", row.radius, row.total.value, first, row.total.value / row.radius.powf(1.5));
    }
    let fit = exponent_fit(&table.iter().map(|r| (r.radius, r.total.value)).collect::<Vec<_>>())?;
    let kp = limit_constant_kprime(1.0, 1.0, 0.5, 1, &QuadSettings::default())?.k_prime.unwrap();
    println!("fitted exponent {:.4} ± {:.4} (2d − β = 1.5), K' = {kp:.5}", fit.slope, fit.half_width);
    Ok(())
}
