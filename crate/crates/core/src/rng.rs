//! All randomness derives from one user seed; independent consumers take
//! separate ChaCha streams of it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const DEFAULT_SEED: u64 = 42;

/// Stream ids in use.
pub mod streams {
    pub const AXPY: u64 = 1;
    pub const SWM_INIT: u64 = 2;
    pub const NET_PAYLOAD: u64 = 3;
}

pub fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}
