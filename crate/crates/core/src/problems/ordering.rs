use alloc::vec::Vec;

use rand::seq::SliceRandom;

/// Visiting order of separable components.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ordering {
    ord: Vec<usize>,
}

impl Ordering {
    pub fn identity(n: usize) -> Self {
        Self { ord: (0..n).collect() }
    }

    /// Replaces the order with a uniform permutation drawn from `seed`
    /// (Fisher-Yates over the identity, so the result depends only on the seed).
    pub fn shuffle(&mut self, seed: u64) {
        for (i, slot) in self.ord.iter_mut().enumerate() {
            *slot = i;
        }
        self.ord.shuffle(&mut crate::seeded_rng(seed));
    }

    #[inline]
    pub fn get(&self, position: usize) -> usize {
        self.ord[position]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.ord
    }

    pub fn len(&self) -> usize {
        self.ord.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ord.is_empty()
    }
}
