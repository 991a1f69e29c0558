//! Named, seeded RNG streams.
//!
//! Each stochastic component (random loss, handover schedule, PHY jitter)
//! draws from its own stream so that reconfiguring one source never
//! perturbs the draw sequence of another. ChaCha8 keyed by (seed, label)
//! gives identical sequences across runs and platforms.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy)]
pub struct RngStream {
    seed: u64,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        RngStream { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// One independent stream per label.
    pub fn stream(&self, label: &str) -> ChaCha8Rng {
        self.keyed(label, 0)
    }

    /// Random-access substream, e.g. one per 100 ms PHY bin.
    pub fn indexed(&self, label: &str, index: u64) -> ChaCha8Rng {
        self.keyed(label, index)
    }

    fn keyed(&self, label: &str, index: u64) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&fnv1a64(label.as_bytes()).to_le_bytes());
        key[16..24].copy_from_slice(&index.to_le_bytes());
        ChaCha8Rng::from_seed(key)
    }
}

// FNV-1a: stable across platforms, unlike the std hasher.
fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}
