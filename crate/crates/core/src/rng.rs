//! Seeded random streams with label-based splitting.
//!
//! A `RandomStream` remembers the 32-byte key it was created from, so child
//! streams can be derived by hashing `key || label`. Derivation depends only
//! on the label, never on how much the parent has already been consumed,
//! which is what makes parallel and serial episode collection bit-identical.

use rand::Rng;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

#[derive(Clone, Debug)]
pub struct RandomStream {
    key: [u8; 32],
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn from_seed(seed: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        Self { rng: ChaCha8Rng::from_seed(key), key }
    }

    /// Derive an independent child stream. Children with distinct labels are
    /// independent of each other and of the parent's consumption state.
    pub fn child(&self, label: &str) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(self.key);
        hasher.update(label.as_bytes());
        let key: [u8; 32] = hasher.finalize().into();
        Self { rng: ChaCha8Rng::from_seed(key), key }
    }

    /// Convenience for indexed children ("agent", 3) and the like.
    pub fn child_indexed(&self, label: &str, index: u64) -> Self {
        self.child(&format!("{label}:{index}"))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    /// Uniform in [lo, hi).
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform integer in [0, n). Panics if n == 0.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0)");
        self.rng.gen_range(0..n)
    }

    /// Standard normal draw.
    pub fn normal(&mut self) -> f64 {
        self.rng.sample(rand_distr::StandardNormal)
    }

    /// Bernoulli with success probability p.
    pub fn coin(&mut self, p: f64) -> bool {
        self.uniform() < p
    }
}
