//! Monte Carlo record generation by inverse-CDF descent through a tree.
//!
//! At every level one uniform variate `u` in `[0, 1)` is drawn and the first
//! alternative whose cumulative probability reaches `u` is taken. Exactly one
//! variate is consumed per column, including at nodes with a single
//! alternative, so the stream stays aligned regardless of tree shape.
//!
//! A [`Generator`] owns its random stream and must not be shared between
//! threads while drawing. To generate in parallel, create one generator per
//! thread over the same `Arc<ProbabilityTree>` with distinct seeds. The merged
//! output is exchangeable with a single-stream run but is not equal to it.

use std::sync::Arc;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use thiserror::Error;

use crate::table::{CategoricalTable, Record};
use crate::tree::{DataNode, ProbabilityTree};

/// Name of the default stream, recorded in serialized outputs.
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha 0.9, seed_from_u64); u = (x >> 11) * 2^-53";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SampleError {
    #[error("record count must be at least 1")]
    InvalidCount,
}

/// Maps a 64-bit output onto `[0, 1)` using its high 53 bits.
pub fn unit_uniform(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Index of the first alternative whose cumulative probability is `>= u`.
///
/// Falls back to the last alternative if rounding leaves the running sum
/// just below `u`.
pub fn select(data: &[DataNode], u: f64) -> usize {
    let mut cumulative = 0.0;
    for (k, d) in data.iter().enumerate() {
        cumulative += d.probability;
        if cumulative >= u {
            return k;
        }
    }
    data.len() - 1
}

/// Seedable record generator over a shared tree.
#[derive(Debug, Clone)]
pub struct Generator<R = ChaCha8Rng> {
    tree: Arc<ProbabilityTree>,
    rng: R,
}

impl Generator {
    /// Generator using the default ChaCha8 stream.
    pub fn new(tree: impl Into<Arc<ProbabilityTree>>, seed: u64) -> Self {
        Self::with_seed(tree, seed)
    }
}

impl<R: RngCore + SeedableRng> Generator<R> {
    pub fn with_seed(tree: impl Into<Arc<ProbabilityTree>>, seed: u64) -> Self {
        Generator {
            tree: tree.into(),
            rng: R::seed_from_u64(seed),
        }
    }

    /// Resets the stream to the state of a fresh generator with `seed`.
    pub fn set_seed(&mut self, seed: u64) {
        self.rng = R::seed_from_u64(seed);
    }
}

impl<R: RngCore> Generator<R> {
    /// Wraps an arbitrary stream, e.g. an instrumented one in tests.
    pub fn from_rng(tree: impl Into<Arc<ProbabilityTree>>, rng: R) -> Self {
        Generator {
            tree: tree.into(),
            rng,
        }
    }

    pub fn tree(&self) -> &Arc<ProbabilityTree> {
        &self.tree
    }

    pub fn rng(&self) -> &R {
        &self.rng
    }

    /// Draws one full-length record.
    pub fn get_record(&mut self) -> Record {
        let mut record = Vec::with_capacity(self.tree.depth());
        self.fill_record(&mut record);
        record
    }

    /// Clears `record` and fills it with a fresh draw, reusing its allocation.
    pub fn fill_record(&mut self, record: &mut Record) {
        record.clear();
        let mut node = Some(self.tree.root());
        while let Some(n) = node {
            let u = unit_uniform(self.rng.next_u64());
            let chosen = &n.data[select(&n.data, u)];
            record.push(chosen.value.clone());
            node = chosen.next.as_deref();
        }
    }

    /// Draws `n` records into a table with the tree's columns.
    pub fn get_records(&mut self, n: usize) -> Result<CategoricalTable, SampleError> {
        if n == 0 {
            return Err(SampleError::InvalidCount);
        }
        let rows = (0..n).map(|_| self.get_record()).collect();
        Ok(CategoricalTable::from_trusted(self.tree.columns().to_vec(), rows))
    }
}
