//! Seeded generators. Every consumer derives its own ChaCha stream from a
//! `(seed, stream)` pair so draws are reproducible independently of the
//! order in which other components consume randomness.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub mod streams {
    pub const SKETCH_ROWS: u64 = 1;
    pub const SKETCH_COLS: u64 = 2;
    pub const FEATURES: u64 = 3;
    pub const OPTIMIZER: u64 = 4;
    pub const SUBSAMPLE: u64 = 5;
    pub const SYNTH: u64 = 6;
}

pub fn stream(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
