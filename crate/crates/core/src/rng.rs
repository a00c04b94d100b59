//! Reproducible random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 stream keyed by a
//! master seed and a 64-bit stream id. ChaCha is counter based, so the
//! stream for `(seed, replicate, lane)` is fixed regardless of how many
//! other streams were used or in which order replicates are scheduled.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::sphere::UnitPoint;

/// The generator type handed to every sampler.
pub type RandomStream = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream for replicate `replicate`, sub-lane `lane` of experiment `seed`.
pub fn stream(seed: u64, replicate: u64, lane: u64) -> RandomStream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(splitmix64(replicate ^ splitmix64(lane)));
    rng
}

/// Uniform point on S^d from a normalised isotropic Gaussian vector.
pub fn uniform_on_sphere<R: Rng + ?Sized>(d: usize, rng: &mut R) -> UnitPoint {
    loop {
        let g: Vec<f64> = (0..=d).map(|_| rng.sample(StandardNormal)).collect();
        let norm = g.iter().map(|c| c * c).sum::<f64>().sqrt();
        // a zero draw has probability zero; redraw rather than divide by it
        if norm > 1e-300 {
            return UnitPoint::from_unit(g.into_iter().map(|c| c / norm).collect());
        }
    }
}
