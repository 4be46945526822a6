//! Deterministic random streams keyed by `(master seed, stream index)`.
//!
//! Every Monte Carlo quantity draws from its own stream; within a stream,
//! work is cut into batches and batch `b` uses ChaCha's `set_stream(b)`.
//! Two estimates that must be independent simply use different stream
//! indices.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamKey {
    pub master: u64,
    pub stream: u64,
}

impl StreamKey {
    pub fn new(master: u64, stream: u64) -> Self {
        Self { master, stream }
    }

    /// The generator for batch `batch` of this stream.
    pub fn batch_rng(&self, batch: u64) -> ChaCha8Rng {
        let mut seed = [0u8; 32];
        seed[..8].copy_from_slice(&self.master.to_le_bytes());
        seed[8..16].copy_from_slice(&self.stream.to_le_bytes());
        seed[16..24].copy_from_slice(b"chaos-mc");
        let mut rng = ChaCha8Rng::from_seed(seed);
        rng.set_stream(batch);
        rng
    }

    /// A single generator for non-batched work (batch 0).
    pub fn rng(&self) -> ChaCha8Rng {
        self.batch_rng(0)
    }

    /// A derived key, for sub-experiments that need their own streams.
    pub fn substream(&self, k: u64) -> StreamKey {
        StreamKey::new(self.master, self.stream.wrapping_mul(1_000_003).wrapping_add(k + 1))
    }
}
