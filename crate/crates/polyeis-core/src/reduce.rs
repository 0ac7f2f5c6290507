//! Deterministic summation.
//!
//! Long numeric sums are reduced with a fixed-shape block tree so the result
//! is independent of chunking decisions made upstream (and of any future
//! parallel split points). Accumulation order is fully determined by the
//! index order of the inputs.

use alloc::vec::Vec;
use num_complex::Complex64;

const BLOCK: usize = 64;

/// Sum with a fixed-topology pairwise tree: leaves are contiguous blocks of
/// 64 summed left to right, blocks are combined pairwise.
pub fn tree_sum_c(values: &[Complex64]) -> Complex64 {
    if values.is_empty() {
        return Complex64::new(0.0, 0.0);
    }
    let mut level: Vec<Complex64> = values
        .chunks(BLOCK)
        .map(|c| {
            let mut acc = Complex64::new(0.0, 0.0);
            for v in c {
                acc += v;
            }
            acc
        })
        .collect();
    while level.len() > 1 {
        level = level
            .chunks(2)
            .map(|p| if p.len() == 2 { p[0] + p[1] } else { p[0] })
            .collect();
    }
    level[0]
}

pub fn tree_sum_f(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut level: Vec<f64> = values
        .chunks(BLOCK)
        .map(|c| c.iter().sum::<f64>())
        .collect();
    while level.len() > 1 {
        level = level
            .chunks(2)
            .map(|p| if p.len() == 2 { p[0] + p[1] } else { p[0] })
            .collect();
    }
    level[0]
}

/// Streaming variant of [`tree_sum_c`]: push terms one at a time, finish to
/// collapse. Produces bit-identical results to the slice version.
pub struct TreeAccumulator {
    pending: Vec<Complex64>,
    blocks: Vec<Complex64>,
    in_block: Complex64,
    fill: usize,
}

impl TreeAccumulator {
    pub fn new() -> Self {
        TreeAccumulator {
            pending: Vec::new(),
            blocks: Vec::new(),
            in_block: Complex64::new(0.0, 0.0),
            fill: 0,
        }
    }

    pub fn push(&mut self, v: Complex64) {
        self.in_block += v;
        self.fill += 1;
        if self.fill == BLOCK {
            self.blocks.push(self.in_block);
            self.in_block = Complex64::new(0.0, 0.0);
            self.fill = 0;
        }
    }

    pub fn finish(mut self) -> Complex64 {
        if self.fill > 0 {
            self.blocks.push(self.in_block);
        }
        if self.blocks.is_empty() {
            return Complex64::new(0.0, 0.0);
        }
        self.pending = self.blocks;
        while self.pending.len() > 1 {
            self.pending = self
                .pending
                .chunks(2)
                .map(|p| if p.len() == 2 { p[0] + p[1] } else { p[0] })
                .collect();
        }
        self.pending[0]
    }
}

impl Default for TreeAccumulator {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn streaming_matches_slice_bitwise() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for n in [0usize, 1, 63, 64, 65, 1000, 4096, 4097] {
            let vals: Vec<Complex64> = (0..n)
                .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect();
            let a = tree_sum_c(&vals);
            let mut acc = TreeAccumulator::new();
            for v in &vals {
                acc.push(*v);
            }
            let b = acc.finish();
            assert_eq!(a.re.to_bits(), b.re.to_bits(), "n={}", n);
            assert_eq!(a.im.to_bits(), b.im.to_bits(), "n={}", n);
        }
    }

    #[test]
    fn agrees_with_naive_to_roundoff() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let vals: Vec<f64> = (0..10_000).map(|_| rng.gen::<f64>() - 0.5).collect();
        let naive: f64 = vals.iter().sum();
        let tree = tree_sum_f(&vals);
        assert!((naive - tree).abs() < 1e-9);
    }
}
