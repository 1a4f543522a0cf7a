//! Stein-bound integrals A_1..A_4 and the total-variation bound.
use ham_clt::asymptotics::{exponent_fit, stein_bound_a};
use ham_clt::covariance::CovarianceModel;
use ham_clt::mc::McSettings;

fn main() -> ham_clt::Result<()> {
    let model = CovarianceModel::heat(1.0, 1)?;
    let mut rows = Vec::new();
    for r in [4.0, 8.0, 16.0, 32.0, 64.0] {
        let e = stein_bound_a(r, 1.0, &model, &McSettings::new(20_000, r as u64), 0.1)?;
        let terms: Vec<String> = e.terms.iter().map(|t| format!("{:.3e}", t.value)).collect();
        println!("R = {r:>4}: A = [{}]  total {:.3e}  d_TV ≤ {:.4}", terms.join(", "), e.total.value, e.dtv_bound);
        rows.push((r, e.dtv_bound));
    }
    println!("d_TV bound decays like R^{:.3}", exponent_fit(&rows)?.slope);
    Ok(())
}
