//! Counter-based seeding.
//!
//! Every random draw in the crate comes from a generator keyed by
//! `(seed, trial_index, stream)`. Trials can therefore run in any order, on
//! any number of workers, and still reproduce bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent sub-streams of one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Graph = 0,
    Features = 1,
    Split = 2,
    Auxiliary = 3,
}

/// SplitMix64 finalizer (Steele, Lea & Flood 2014).
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `trial_seed = splitmix64(splitmix64(seed) ^ trial_index)`.
pub fn trial_seed(seed: u64, trial_index: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ trial_index)
}

pub fn trial_rng(seed: u64, trial_index: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, trial_index));
    rng.set_stream(stream as u64);
    rng
}
