//! Counter-keyed random streams.
//!
//! Every random draw in a run is addressed by `(seed, stream, counter)`, so the
//! gradient-noise, update-noise and mini-batch streams never share state and a
//! run can be replayed from any iteration.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    GradientNoise = 1,
    UpdateNoise = 2,
    Batch = 3,
    Start = 4,
    Probe = 5,
    Instances = 6,
}

/// Generator for draw block `counter` of `stream`. Each block owns 2^32
/// 32-bit words of the ChaCha keystream.
pub fn stream_rng(seed: u64, stream: Stream, counter: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng.set_word_pos(u128::from(counter) << 32);
    rng
}

/// `n` i.i.d. draws from `U[-bound, bound]`.
pub fn uniform_vector(rng: &mut impl Rng, n: usize, bound: f64) -> Vec<f64> {
    if bound == 0.0 {
        return vec![0.0; n];
    }
    (0..n).map(|_| rng.random_range(-bound..=bound)).collect()
}

/// A uniformly distributed unit vector.
pub fn unit_vector(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    use rand_distr::{Distribution, StandardNormal};
    loop {
        let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let norm = crate::linalg::norm(&v);
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}
