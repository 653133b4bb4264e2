//! Reproducible random streams.
//!
//! Every stream is a ChaCha8 generator keyed by a master seed and selected by a
//! 64-bit stream id, so replicate `i` draws the same numbers no matter which
//! worker thread runs it or in which order replicates are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Independent stream `stream` of the family keyed by `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
