use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// Deterministic random source used by every sampling routine in the crate.
///
/// Backed by the ChaCha stream cipher with 12 rounds, seeded from a 64-bit
/// value, so a given (seed, stream) pair produces the same draw sequence on
/// every platform. Parallel work should give each worker its own stream id
/// instead of sharing one generator.
#[derive(Debug, Clone)]
pub struct Rng {
    seed: u64,
    stream: u64,
    inner: ChaCha12Rng,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    /// Independent generator for the same seed: distinct `stream` values
    /// select non-overlapping cipher streams.
    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha12Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self {
            seed,
            stream,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Fresh generator for deterministic retry logic. The derived stream
    /// offsets the attempt number into the high bits, so retries never
    /// collide with ordinarily assigned (small) stream ids of the same seed.
    pub fn retry_fork(&self, attempt: u64) -> Rng {
        Self::with_stream(self.seed, self.stream.wrapping_add(attempt << 32))
    }

    /// Uniform draw from `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.inner.gen_range(lo..hi)
    }

    /// True with probability `p`; `p` must lie in `[0, 1]`.
    pub fn chance(&mut self, p: f64) -> bool {
        self.inner.gen_bool(p)
    }

    /// Uniform index from `0..n`.
    pub fn index(&mut self, n: usize) -> usize {
        self.inner.gen_range(0..n)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.gen()
    }
}
