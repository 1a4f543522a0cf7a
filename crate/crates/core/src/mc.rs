//! Counter-based random streams and a deterministic parallel Monte Carlo driver.
//!
//! Every batch of samples draws from its own ChaCha8 stream keyed by
//! `(seed, stream)`. Batch partial sums are merged in index order, so results
//! do not depend on the number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Environment variable read for the worker-thread count.
pub const THREADS_ENV: &str = "HAM_CLT_THREADS";

/// Random stream for a given seed and stream index.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Derives a sub-seed from a master seed and a task label.
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    // FNV-1a over the label, mixed with the seed.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325 ^ seed.rotate_left(17);
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h ^ seed
}

/// Runs `f` inside the configured thread pool.
pub fn with_pool<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    match std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        Some(n) if n > 0 => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        _ => f(),
    }
}

/// Sample-count and seed for a Monte Carlo estimator.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct McSettings {
    pub samples: usize,
    pub seed: u64,
}

impl McSettings {
    pub fn new(samples: usize, seed: u64) -> Self {
        Self { samples, seed }
    }

    /// Same sample count with a seed derived from `label`.
    pub fn labelled(&self, label: &str) -> Self {
        Self { samples: self.samples, seed: derive_seed(self.seed, label) }
    }
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize, serde::Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self { value, std_error: 0.0 }
    }

    pub fn scale(self, c: f64) -> Self {
        Self { value: self.value * c, std_error: self.std_error * c.abs() }
    }

    /// Sum of independent estimates.
    pub fn add(self, other: Self) -> Self {
        Self { value: self.value + other.value, std_error: self.std_error.hypot(other.std_error) }
    }

    /// True when `|value − target| ≤ k·std_error + slack`.
    pub fn within(&self, target: f64, k: f64, slack: f64) -> bool {
        (self.value - target).abs() <= k * self.std_error + slack
    }
}

/// Running mean and centered second moment of a stream of vectors.
#[derive(Debug, Clone)]
pub struct Moments {
    pub count: u64,
    pub mean: Vec<f64>,
    pub m2: Vec<f64>,
}

impl Moments {
    pub fn new(dim: usize) -> Self {
        Self { count: 0, mean: vec![0.0; dim], m2: vec![0.0; dim] }
    }

    pub fn push(&mut self, x: &[f64]) {
        self.count += 1;
        let n = self.count as f64;
        for (i, &xi) in x.iter().enumerate() {
            let d = xi - self.mean[i];
            self.mean[i] += d / n;
            self.m2[i] += d * (xi - self.mean[i]);
        }
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = other.clone();
            return;
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        for i in 0..self.mean.len() {
            let d = other.mean[i] - self.mean[i];
            self.mean[i] += d * nb / n;
            self.m2[i] += other.m2[i] + d * d * na * nb / n;
        }
        self.count += other.count;
    }

    pub fn estimate(&self, i: usize) -> Estimate {
        let n = self.count as f64;
        let var = if self.count > 1 { self.m2[i] / (n - 1.0) } else { 0.0 };
        Estimate { value: self.mean[i], std_error: (var / n).sqrt() }
    }

    pub fn estimates(&self) -> Vec<Estimate> {
        (0..self.mean.len()).map(|i| self.estimate(i)).collect()
    }
}

const BATCH: usize = 256;

/// Averages `dim` jointly sampled quantities over `mc.samples` draws.
///
/// `draw` fills its output slice from the supplied stream.
pub fn mean_vec<F>(mc: &McSettings, dim: usize, draw: F) -> Vec<Estimate>
where
    F: Fn(&mut ChaCha8Rng, &mut [f64]) + Sync,
{
    let batches = mc.samples.div_ceil(BATCH);
    let partials: Vec<Moments> = with_pool(|| {
        (0..batches)
            .into_par_iter()
            .map(|b| {
                let mut rng = stream(mc.seed, b as u64);
                let mut m = Moments::new(dim);
                let mut buf = vec![0.0; dim];
                let count = BATCH.min(mc.samples - b * BATCH);
                for _ in 0..count {
                    buf.iter_mut().for_each(|v| *v = 0.0);
                    draw(&mut rng, &mut buf);
                    m.push(&buf);
                }
                m
            })
            .collect()
    });
    let mut total = Moments::new(dim);
    for p in &partials {
        total.merge(p);
    }
    total.estimates()
}

/// Scalar version of [`mean_vec`].
pub fn mean<F>(mc: &McSettings, draw: F) -> Estimate
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    mean_vec(mc, 1, |rng, out| out[0] = draw(rng))[0]
}
