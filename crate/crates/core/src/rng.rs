//! Seeded random streams.
//!
//! Every stream is a ChaCha8 generator keyed by the master seed and selected
//! by a 64-bit stream id, so trial `i` draws the same numbers whether trials
//! run serially or in parallel, on any platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Independent substream `stream` of the generator keyed by `master_seed`.
pub fn substream(master_seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}
