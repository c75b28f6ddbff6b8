//! Deterministic, splittable randomness.
//!
//! A single user seed fans out into independent ChaCha streams, one per
//! consumer, so adding draws in one place never perturbs another.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn stream(seed: u64, stream_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}

/// Opinions drawn uniformly from `[0, 1)`.
pub fn uniform_opinions(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = stream(seed, 16);
    (0..n).map(|_| rng.gen::<f64>()).collect()
}

/// Heavy-tailed opinions in `[0, 1]`: Pareto(`shape`) samples divided by
/// their maximum.
pub fn power_law_opinions(n: usize, shape: f64, seed: u64) -> Vec<f64> {
    let mut rng = stream(seed, 17);
    let raw: Vec<f64> = (0..n)
        .map(|_| {
            let u: f64 = rng.gen();
            (1.0 - u).powf(-1.0 / shape)
        })
        .collect();
    let max = raw.iter().cloned().fold(f64::MIN, f64::max);
    raw.into_iter().map(|x| x / max).collect()
}

/// First half of the nodes draws from `[0, split)`, second half from
/// `[split, 1)`.
pub fn two_camp_opinions(n: usize, split: f64, seed: u64) -> Vec<f64> {
    let mut rng = stream(seed, 18);
    (0..n)
        .map(|i| {
            if i < n / 2 {
                rng.gen_range(0.0..split)
            } else {
                rng.gen_range(split..1.0)
            }
        })
        .collect()
}
