//! Counter-based seed derivation so parallel work stays reproducible and
//! order-independent: every unit of work (path, epoch, run, sweep level)
//! gets its own RNG seeded from `(master, stream, index)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer; good avalanche behaviour for seed mixing.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Derive a child seed from a master seed, a stream tag, and an index.
pub fn derive(master: u64, stream: u64, index: u64) -> u64 {
    mix(mix(master ^ mix(stream)).wrapping_add(index))
}

/// RNG for one unit of work.
pub fn rng(master: u64, stream: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(master, stream, index))
}

/// Stream tags used across the crate; keeping them in one place avoids
/// accidental stream collisions between subsystems.
pub mod stream {
    pub const ENSEMBLE_PATH: u64 = 1;
    pub const CALIBRATION_INIT: u64 = 2;
    pub const CALIBRATION_EPOCH: u64 = 3;
    pub const CONTROL_INIT: u64 = 4;
    pub const CONTROL_ITERATION: u64 = 5;
    pub const CONTROL_RUN: u64 = 6;
    pub const SWEEP_LEVEL: u64 = 7;
}
