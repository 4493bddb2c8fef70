//! Seed derivation and the random-number streams owned by an environment.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Independent streams of one environment instance. Each stream is a ChaCha8
/// generator keyed by the reset seed with its own stream id, so drawing more
/// demand never shifts the choice noise and vice versa.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnvStreams {
    pub demand: SimRng,
    pub choice: SimRng,
}

pub const DEMAND_STREAM: u64 = 1;
pub const CHOICE_STREAM: u64 = 2;
pub const POLICY_STREAM: u64 = 3;
pub const EPISODE_SEED_STREAM: u64 = 4;

pub fn stream(seed: u64, id: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

impl EnvStreams {
    pub fn from_seed(seed: u64) -> Self {
        EnvStreams {
            demand: stream(seed, DEMAND_STREAM),
            choice: stream(seed, CHOICE_STREAM),
        }
    }
}

/// Seed of parallel training instance `r`.
pub fn training_instance_seed(seed: u64, instance: u64) -> u64 {
    seed.wrapping_add(instance.wrapping_mul(1_000))
}

/// Seed of parallel evaluation instance `r`.
pub fn evaluation_instance_seed(seed: u64, instance: u64) -> u64 {
    seed.wrapping_add(instance.wrapping_mul(100_000))
}
