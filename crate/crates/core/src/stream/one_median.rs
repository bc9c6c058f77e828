//! Streaming 1-median: uniform reservoir sample plus a weighted coreset.
//!
//! The reservoir keeps `ceil(log2 n)` points uniformly at random from the
//! stream; at query time the candidate family is the reservoir together
//! with reconstructions from each of its five-element subsets, and the
//! coreset picks the winner.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use super::coreset::CoresetBuilder;
use super::StreamError;
use crate::perm::{Permutation, UlamScratch};
use crate::tournament::{median_reconstruct, RECONSTRUCT_ARITY};

#[derive(Debug, Clone)]
pub struct OneMedianConfig {
    pub d: usize,
    pub n_bound: usize,
    pub lambda: f64,
    pub seed: u64,
    /// Coreset block-size override; `None` derives it from `lambda` as in
    /// [`super::StreamConfig::coreset_block_size`].
    pub coreset_block: Option<usize>,
}

impl OneMedianConfig {
    pub fn new(d: usize, n_bound: usize, lambda: f64, seed: u64) -> Self {
        Self {
            d,
            n_bound,
            lambda,
            seed,
            coreset_block: None,
        }
    }

    pub fn with_coreset_block(mut self, block: usize) -> Self {
        self.coreset_block = Some(block);
        self
    }

    fn reservoir_capacity(&self) -> usize {
        super::ceil_log2(self.n_bound).max(1)
    }

    fn block_size(&self) -> usize {
        if let Some(b) = self.coreset_block {
            return b.max(1);
        }
        let formula = self.lambda.powi(-2).ceil() * 5.0 * super::ceil_log2(self.n_bound).max(1) as f64;
        if formula >= self.n_bound as f64 {
            self.n_bound
        } else {
            (formula as usize).max(1)
        }
    }
}

/// Query-time answer plus the storage accounting the run observed.
#[derive(Debug, Clone, PartialEq)]
pub struct OneMedianOutcome {
    pub median: Permutation,
    pub weighted_objective: f64,
    /// The final uniform sample.
    pub reservoir: Vec<Permutation>,
    /// Largest number of permutations held at any point (reservoir plus
    /// coreset storage).
    pub stored_peak: usize,
    /// Storage bound from the construction's accounting: reservoir capacity
    /// plus one coreset block per merge level plus the buffer.
    pub stored_bound: usize,
    pub coreset_points: usize,
}

/// Single-pass 1-median over a stream of at most `n_bound` permutations of
/// dimension `d`.
pub fn streaming_1_median(
    stream: impl IntoIterator<Item = Permutation>,
    config: &OneMedianConfig,
) -> Result<OneMedianOutcome, StreamError> {
    if config.d == 0 || config.n_bound == 0 {
        return Err(StreamError::InvalidConfig(
            "d and n_bound must be at least 1".to_string(),
        ));
    }
    if !(config.lambda > 0.0 && config.lambda < 1.0) {
        return Err(StreamError::InvalidConfig(
            "lambda must lie in (0, 1)".to_string(),
        ));
    }

    let r_cap = config.reservoir_capacity();
    let mut reservoir: Vec<Permutation> = Vec::with_capacity(r_cap);
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    let mut builder = CoresetBuilder::new(
        1,
        config.block_size(),
        ChaCha12Rng::seed_from_u64(config.seed ^ 0x9e3779b97f4a7c15),
    );

    let mut seen = 0usize;
    let mut stored_peak = 0usize;
    for x in stream {
        if x.dimension() != config.d {
            return Err(StreamError::DimensionMismatch {
                expected: config.d,
                got: x.dimension(),
            });
        }
        if seen >= config.n_bound {
            return Err(StreamError::StreamOverflow {
                n_bound: config.n_bound,
            });
        }
        seen += 1;
        if reservoir.len() < r_cap {
            reservoir.push(x.clone());
        } else {
            let j = rng.random_range(0..seen);
            if j < r_cap {
                reservoir[j] = x.clone();
            }
        }
        builder.push(x);
        stored_peak = stored_peak.max(reservoir.len() + builder.stored());
    }
    if seen == 0 {
        return Err(StreamError::EmptySketch);
    }

    // Candidate family: the sample in lexicographic order, then
    // reconstructions per five-element subset; earliest candidate wins ties.
    let mut sample = reservoir.clone();
    sample.sort();
    sample.dedup();
    let mut candidates = sample.clone();
    let mut seen_syms: std::collections::HashSet<Vec<u32>> =
        candidates.iter().map(|c| c.symbols().to_vec()).collect();
    for combo in crate::cluster::Combinations::new(sample.len(), RECONSTRUCT_ARITY) {
        let tuple: Vec<Permutation> = combo.iter().map(|&i| sample[i].clone()).collect();
        let rec = median_reconstruct(&tuple)
            .expect("arity and dimensions hold by construction")
            .output;
        if seen_syms.insert(rec.symbols().to_vec()) {
            candidates.push(rec);
        }
    }

    let coreset = builder.flatten();
    let mut scratch = UlamScratch::new();
    let mut best: Option<(f64, usize)> = None;
    for (i, c) in candidates.iter().enumerate() {
        let score: f64 = coreset
            .points
            .iter()
            .map(|(p, w)| w * scratch.distance_unchecked(p.symbols(), c.symbols()) as f64)
            .sum();
        if best.is_none_or(|(s, _)| score < s) {
            best = Some((score, i));
        }
    }
    let (weighted_objective, winner) = best.expect("candidates non-empty");

    let stored_bound = r_cap + builder.stored_bound(config.n_bound);
    Ok(OneMedianOutcome {
        median: candidates[winner].clone(),
        weighted_objective,
        reservoir,
        stored_peak,
        stored_bound,
        coreset_points: coreset.len(),
    })
}
