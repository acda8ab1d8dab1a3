//! Deterministic random streams.
//!
//! Each stream is a ChaCha8 generator keyed by the master seed with the
//! stream index selecting an independent ChaCha stream, so trajectory `i`
//! draws the same numbers no matter which thread runs it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub index: u64,
}

impl RngStream {
    pub fn new(seed: u64, index: u64) -> Self {
        Self { seed, index }
    }

    /// Sub-stream for work item `i` of this stream (e.g. trajectory `i`).
    ///
    /// Derived streams are keyed by a seed mixed from `(seed, index)`, so
    /// `RngStream::new(s, a).substream(i)` never aliases
    /// `RngStream::new(s, b).substream(i)` for `a != b`.
    pub fn substream(&self, i: u64) -> RngStream {
        RngStream {
            seed: splitmix64(self.seed ^ splitmix64(self.index.wrapping_add(0x9E37_79B9))),
            index: i,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.index);
        rng
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
