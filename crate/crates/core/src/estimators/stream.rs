//! Seeded sample streams.
//!
//! Every estimator draws from ChaCha8 generators keyed by
//! `(seed, op-name, chunk)`; chunk c covers sample indices
//! `[c·CHUNK, (c+1)·CHUNK)`. The first N samples therefore do not depend on
//! how many more are requested, and chunks can be produced in parallel.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Samples per independently seeded chunk.
pub const CHUNK: usize = 4096;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xCBF2_9CE4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01B3)
    })
}

/// Generator for chunk `chunk` of the stream named `op` under `seed`.
pub fn chunk_rng(seed: u64, op: &str, chunk: u64) -> ChaCha8Rng {
    let key = splitmix64(splitmix64(seed ^ fnv1a(op)) ^ chunk);
    ChaCha8Rng::seed_from_u64(key)
}

/// Number of chunks covering `n` samples.
pub fn chunk_count(n: usize) -> usize {
    n.div_ceil(CHUNK)
}

/// Uniform direction on S^{n-1}.
pub fn unit_vector<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let r = crate::linalg::norm(&g);
        if r > 1e-12 {
            return g.into_iter().map(|c| c / r).collect();
        }
    }
}

/// Uniform point in the unit ball of R^n.
pub fn unit_ball<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let u = unit_vector(rng, n);
    let r = rng.gen::<f64>().powf(1.0 / n as f64);
    u.into_iter().map(|c| c * r).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_keyed() {
        let a: u64 = chunk_rng(7, "op", 0).gen();
        assert_eq!(a, chunk_rng(7, "op", 0).gen::<u64>());
        assert_ne!(a, chunk_rng(7, "op", 1).gen::<u64>());
        assert_ne!(a, chunk_rng(7, "other", 0).gen::<u64>());
        assert_ne!(a, chunk_rng(8, "op", 0).gen::<u64>());
    }

    #[test]
    fn ball_samples_inside() {
        let mut rng = chunk_rng(1, "ball", 0);
        for _ in 0..1000 {
            assert!(crate::linalg::norm(&unit_ball(&mut rng, 3)) <= 1.0);
            assert!((crate::linalg::norm(&unit_vector(&mut rng, 4)) - 1.0).abs() < 1e-15);
        }
        assert_eq!(chunk_count(0), 0);
        assert_eq!(chunk_count(CHUNK + 1), 2);
    }
}
