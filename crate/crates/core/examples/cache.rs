//! Content-addressed cache for noise grids and projected tensors.
use ham_clt::cache::Cache;
use ham_clt::covariance::CovarianceModel;
use ham_clt::wick::solution_sum;
use std::time::Instant;

fn main() -> ham_clt::Result<()> {
    let dir = std::env::temp_dir().join("ham-clt-cache-example");
    let cache = Cache::new(&dir);
    let model = CovarianceModel::riesz(0.5, 1)?;
    for pass in 1..=2 {
        let start = Instant::now();
        let grid = cache.grid(66.0, 528, &model)?;
        println!("pass {pass}: grid of {} cells in {:?}", grid.cells, start.elapsed());
    }
    let grid = cache.grid(66.0, 528, &model)?;
    let (u, _) = solution_sum(&grid, 1.0, 0.0, 3, 4)?;
    cache.store_tensors("u_t1_x0", &u.tensors)?;
    let back = cache.load_tensors("u_t1_x0")?.expect("tensors were just stored");
    println!("reloaded {} tensors, identical: {}", back.len(), back == u.tensors);
    println!("cache directory: {}", dir.display());
    Ok(())
}
