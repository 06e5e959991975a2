//! Seeded, labelled random streams.
//!
//! Every experiment draws from named sub-streams (`"data"`, `"init"`,
//! `"batch"`, `"output-index"`) so that changing how one stream is consumed
//! never perturbs another. A stream is a ChaCha20 generator keyed by
//! `SHA-256(seed || label)`, which is identical on every platform.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use sha2::{Digest, Sha256};

pub const DATA: &str = "data";
pub const INIT: &str = "init";
pub const BATCH: &str = "batch";
pub const OUTPUT_INDEX: &str = "output-index";

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    label: String,
    inner: ChaCha20Rng,
}

impl RngStream {
    pub fn new(seed: u64, label: &str) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(seed.to_le_bytes());
        hasher.update(label.as_bytes());
        let digest = hasher.finalize();
        let mut key = [0u8; 32];
        key.copy_from_slice(&digest);
        Self {
            seed,
            label: label.to_owned(),
            inner: ChaCha20Rng::from_seed(key),
        }
    }

    /// Derives a child stream, e.g. `batch/spider`.
    pub fn child(&self, sublabel: &str) -> Self {
        Self::new(self.seed, &format!("{}/{}", self.label, sublabel))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    /// Uniform index in `0..n`.
    pub fn index(&mut self, n: usize) -> usize {
        assert!(n > 0, "index range must be nonempty");
        self.inner.random_range(0..n)
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }

    /// Draw from `Normal(mean, sd^2)`.
    pub fn normal(&mut self, mean: f64, sd: f64) -> f64 {
        mean + sd * self.standard_normal()
    }

    pub fn normal_vec(&mut self, n: usize, mean: f64, sd: f64) -> Vec<f64> {
        (0..n).map(|_| self.normal(mean, sd)).collect()
    }

    /// `count` indices drawn uniformly from `0..n`, with or without
    /// replacement. Without replacement requires `count <= n`.
    pub fn batch(&mut self, n: usize, count: usize, with_replacement: bool) -> Vec<usize> {
        if with_replacement {
            (0..count).map(|_| self.index(n)).collect()
        } else {
            assert!(count <= n, "cannot draw {count} of {n} without replacement");
            rand::seq::index::sample(&mut self.inner, n, count).into_vec()
        }
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_and_label_replay() {
        let mut a = RngStream::new(42, DATA);
        let mut b = RngStream::new(42, DATA);
        for _ in 0..10_000 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn labels_separate_streams() {
        let mut a = RngStream::new(42, DATA);
        let mut b = RngStream::new(42, BATCH);
        let xs: Vec<u64> = (0..8).map(|_| a.next_u64()).collect();
        let ys: Vec<u64> = (0..8).map(|_| b.next_u64()).collect();
        assert_ne!(xs, ys);
    }

    #[test]
    fn first_draws_are_pinned() {
        // Guards against silent changes in the generator or key derivation.
        assert_eq!(RngStream::new(7, INIT).next_u64(), 12493905442825163402);
        assert_eq!(RngStream::new(0, DATA).standard_normal(), 0.41380701462375713);
    }

    #[test]
    fn batch_without_replacement_is_distinct() {
        let mut r = RngStream::new(1, BATCH);
        let mut idx = r.batch(50, 50, false);
        idx.sort_unstable();
        assert_eq!(idx, (0..50).collect::<Vec<_>>());
    }
}
