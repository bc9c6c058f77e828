//! Single-pass streaming k-median sketch.
//!
//! The sketch runs three samplers over one pass of the stream:
//!
//! - a grid of sample buckets, one per (scale, probability) cell: each keeps
//!   points sampled at its rate, pruned to pairwise distance at least
//!   `beta * ell`, and resets to empty on hitting its cap;
//! - faraway sampling (rings of geometrically spaced separation thresholds)
//!   covering clusters whose objective share is small;
//! - a weighted coreset standing in for the whole stream when scoring
//!   candidate median sets at query time.
//!
//! The query unions the surviving bucket members `R` with the faraway
//! sample `F`, adds reconstructions from five-element subsets of `R`
//! (computed on demand), and picks the size-at-most-k candidate subset
//! minimizing the coreset-weighted objective. Over-budget enumerations
//! either error or, when the caller opts in, fall back to a greedy
//! selection with local swaps.
//!
//! Published constants (`beta`, `lambda`, `rho`) are so small that at
//! desk scale pruning only rejects exact duplicates and the coreset stays
//! exact; the config exposes overrides so tests can exercise the pruning
//! and reduction paths meaningfully.

mod arena;
mod coreset;
mod faraway;
mod one_median;
mod snapshot;

pub use coreset::WeightedCoreset;
pub use one_median::{streaming_1_median, OneMedianConfig, OneMedianOutcome};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::cluster::{
    binomial, exact_select, greedy_select, subsets_up_to, swap_improve, CandidateTable, Scorer,
};
use crate::dataset::MedianSet;
use crate::perm::{Permutation, UlamScratch};
use crate::tournament::{median_reconstruct, RECONSTRUCT_ARITY};
use arena::Arena;
use coreset::CoresetBuilder;
use faraway::FarawaySampler;

/// Published parameter values.
pub const BETA_PUBLISHED: f64 = 0.0000001;
pub const LAMBDA_PUBLISHED: f64 = 0.0000001;
pub const RHO_PUBLISHED: f64 = 0.00000001;
pub const GAMMA_PUBLISHED: f64 = 0.1;
pub const KAPPA_PUBLISHED: f64 = 1.0 / 3.0;

#[derive(Debug, Error)]
pub enum StreamError {
    #[error("invalid stream config: {0}")]
    InvalidConfig(String),
    #[error("dimension mismatch: sketch d={expected}, item d={got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("stream exceeded the declared bound of {n_bound} items")]
    StreamOverflow { n_bound: usize },
    #[error("sketch holds no sampled permutations")]
    EmptySketch,
    #[error("query needs {required} candidate evaluations, over the budget of {budget}; raise the budget or enable the greedy fallback")]
    BudgetExceeded { required: u128, budget: u64 },
    #[error("sketch was loaded from a snapshot and only supports queries")]
    SnapshotFrozen,
    #[error("snapshot line {line}: {message}")]
    SnapshotParse { line: usize, message: String },
}

/// Sketch parameters. `beta`, `gamma`, `lambda`, `rho`, `kappa` default to
/// the published values; the setters exist so desk-scale runs can make
/// pruning and coreset reduction observable.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamConfig {
    pub k: usize,
    pub d: usize,
    pub n_bound: usize,
    pub seed: u64,
    pub beta: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub rho: f64,
    pub kappa: f64,
    /// Coreset block-size override; `None` derives it from `lambda`, which
    /// at published values keeps the coreset exact.
    pub coreset_block: Option<usize>,
}

impl StreamConfig {
    pub fn new(k: usize, d: usize, n_bound: usize, seed: u64) -> Self {
        Self {
            k,
            d,
            n_bound,
            seed,
            beta: BETA_PUBLISHED,
            gamma: GAMMA_PUBLISHED,
            lambda: LAMBDA_PUBLISHED,
            rho: RHO_PUBLISHED,
            kappa: KAPPA_PUBLISHED,
            coreset_block: None,
        }
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = rho;
        self
    }

    pub fn with_coreset_block(mut self, block: usize) -> Self {
        self.coreset_block = Some(block);
        self
    }

    fn validate(&self) -> Result<(), StreamError> {
        let fail = |msg: &str| Err(StreamError::InvalidConfig(msg.to_string()));
        if self.k == 0 {
            return fail("k must be at least 1");
        }
        if self.d == 0 {
            return fail("d must be at least 1");
        }
        if self.n_bound == 0 {
            return fail("n_bound must be at least 1");
        }
        if !self.beta.is_finite() || self.beta <= 0.0 {
            return fail("beta must be positive");
        }
        if !self.rho.is_finite() || self.rho <= 0.0 {
            return fail("rho must be positive");
        }
        for (name, v) in [
            ("gamma", self.gamma),
            ("lambda", self.lambda),
            ("kappa", self.kappa),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return fail(&format!("{name} must lie in (0, 1)"));
            }
        }
        Ok(())
    }

    /// `ceil(log2 n_bound)`, clamped to at least 1.
    pub fn log2_n(&self) -> usize {
        ceil_log2(self.n_bound).max(1)
    }

    /// Bucket reset threshold: `k * ceil(log2 n)^3`.
    pub fn bucket_cap(&self) -> usize {
        self.k * self.log2_n().pow(3)
    }

    /// Scale grid `1, (1+gamma), (1+gamma)^2, ..` up to covering `d`.
    pub fn ell_grid(&self) -> Vec<f64> {
        let steps = ceil_log_base(self.d as f64, 1.0 + self.gamma);
        (0..=steps).map(|j| (1.0 + self.gamma).powi(j as i32)).collect()
    }

    /// Probability grid `1, 1/(1+gamma), ..` down to covering `1/n_bound`.
    pub fn p_grid(&self) -> Vec<f64> {
        let steps = ceil_log_base(self.n_bound as f64, 1.0 + self.gamma);
        (0..=steps)
            .map(|j| (1.0 + self.gamma).powi(-(j as i32)))
            .collect()
    }

    /// Ring count for the faraway sampler: `k * ceil(log2(1 + k*kappa*n))`.
    pub fn faraway_ring_count(&self) -> usize {
        let inner = 1.0 + self.k as f64 * self.kappa * self.n_bound as f64;
        (self.k * (inner.log2().ceil() as usize).max(1)).max(1)
    }

    /// Size bound for the faraway sample:
    /// `k^2 * ceil(1/(rho*kappa)) * ceil(log2(2k)) * ceil(log2(1 + k*kappa*n))`,
    /// clamped to the stream bound (the sample holds input points only).
    pub fn faraway_bound(&self) -> usize {
        let inner = 1.0 + self.k as f64 * self.kappa * self.n_bound as f64;
        let raw = (self.k * self.k) as f64
            * (1.0 / (self.rho * self.kappa)).ceil()
            * ((2 * self.k) as f64).log2().ceil().max(1.0)
            * inner.log2().ceil().max(1.0);
        if raw >= self.n_bound as f64 {
            self.n_bound
        } else {
            raw as usize
        }
    }

    /// Coreset block size: the override, else
    /// `ceil(lambda^-2) * k^2 * 5 * ceil(log2 n)` clamped to `n_bound`.
    /// At published `lambda` this equals `n_bound`, so no reduction happens
    /// and the coreset is the exact stream.
    pub fn coreset_block_size(&self) -> usize {
        if let Some(b) = self.coreset_block {
            return b.max(1);
        }
        let formula =
            self.lambda.powi(-2).ceil() * (self.k * self.k) as f64 * 5.0 * self.log2_n() as f64;
        if formula >= self.n_bound as f64 {
            self.n_bound
        } else {
            (formula as usize).max(1)
        }
    }
}

fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

fn ceil_log_base(x: f64, base: f64) -> usize {
    if x <= 1.0 {
        return 0;
    }
    (x.ln() / base.ln()).ceil() as usize
}

/// One grid cell: points sampled at rate `p`, pruned to pairwise distance
/// at least `beta * ell`, reset to empty upon reaching the cap.
#[derive(Debug, Clone)]
struct SampleBucket {
    ell: f64,
    p: f64,
    members: Vec<u32>,
    resets: u64,
}

/// Counters and formula bounds describing the sketch's storage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SketchStats {
    pub items_seen: usize,
    /// Largest total of held permutation slots (buckets + faraway +
    /// coreset) observed after any update.
    pub peak_stored: usize,
    pub stored_now: usize,
    pub bucket_points: usize,
    pub faraway_points: usize,
    pub coreset_points: usize,
    /// Distinct permutations physically held (buckets and rings share
    /// storage).
    pub distinct_interned: usize,
    pub resets_total: u64,
    pub grid_cells: usize,
    pub bucket_cap: usize,
    pub bound_bucket_points: usize,
    pub bound_faraway: usize,
    pub bound_coreset: usize,
}

impl SketchStats {
    pub fn bound_total(&self) -> usize {
        self.bound_bucket_points + self.bound_faraway + self.bound_coreset
    }
}

/// Options for [`StreamSketch::query`].
#[derive(Debug, Clone, Copy)]
pub struct QueryOptions {
    pub budget: u64,
    /// Over budget, use greedy selection with local swaps and
    /// cluster-guided reconstructions instead of erroring; flagged in the
    /// result.
    pub greedy_fallback: bool,
}

impl Default for QueryOptions {
    fn default() -> Self {
        Self {
            budget: crate::cluster::DEFAULT_SELECT_BUDGET,
            greedy_fallback: false,
        }
    }
}

/// End-of-stream answer: medians, their coreset-weighted objective, and the
/// nearest-median assignment of each coreset point (ties toward the lowest
/// median index).
#[derive(Debug, Clone, PartialEq)]
pub struct StreamQueryResult {
    pub medians: MedianSet,
    pub weighted_objective: f64,
    pub assignment: Vec<usize>,
    pub used_fallback: bool,
}

/// The full streaming state. Updates are strictly serialized (single
/// writer); queries take `&self` and may run repeatedly.
#[derive(Debug)]
pub struct StreamSketch {
    config: StreamConfig,
    buckets: Vec<SampleBucket>,
    faraway: FarawaySampler,
    coreset_builder: CoresetBuilder,
    loaded_coreset: Option<WeightedCoreset>,
    arena: Arena,
    rng_buckets: ChaCha12Rng,
    scratch: UlamScratch,
    memo_val: Vec<u32>,
    memo_epoch: Vec<u64>,
    epoch: u64,
    items_seen: usize,
    bucket_points: usize,
    peak_stored: usize,
    frozen: bool,
}

impl StreamSketch {
    /// Empty buckets for every grid cell, seeded RNGs, empty faraway sample
    /// and coreset.
    pub fn init(config: StreamConfig) -> Result<Self, StreamError> {
        config.validate()?;
        let mut buckets = Vec::new();
        for &ell in &config.ell_grid() {
            for &p in &config.p_grid() {
                buckets.push(SampleBucket {
                    ell,
                    p,
                    members: Vec::new(),
                    resets: 0,
                });
            }
        }
        let faraway = FarawaySampler::new(
            config.faraway_ring_count(),
            config.d,
            config.faraway_bound(),
        );
        let coreset_builder = CoresetBuilder::new(
            config.k,
            config.coreset_block_size(),
            ChaCha12Rng::seed_from_u64(config.seed ^ 0x9e3779b97f4a7c15),
        );
        let rng_buckets = ChaCha12Rng::seed_from_u64(config.seed);
        Ok(Self {
            config,
            buckets,
            faraway,
            coreset_builder,
            loaded_coreset: None,
            arena: Arena::new(),
            rng_buckets,
            scratch: UlamScratch::new(),
            memo_val: Vec::new(),
            memo_epoch: Vec::new(),
            epoch: 0,
            items_seen: 0,
            bucket_points: 0,
            peak_stored: 0,
            frozen: false,
        })
    }

    pub fn config(&self) -> &StreamConfig {
        &self.config
    }

    pub fn items_seen(&self) -> usize {
        self.items_seen
    }

    /// Feeds one stream item through every bucket, the faraway sampler, and
    /// the coreset builder. Each bucket draws independently whether to keep
    /// the item, prunes against its members, and resets on reaching the cap.
    pub fn update(&mut self, x: Permutation) -> Result<(), StreamError> {
        if self.frozen {
            return Err(StreamError::SnapshotFrozen);
        }
        if x.dimension() != self.config.d {
            return Err(StreamError::DimensionMismatch {
                expected: self.config.d,
                got: x.dimension(),
            });
        }
        if self.items_seen >= self.config.n_bound {
            return Err(StreamError::StreamOverflow {
                n_bound: self.config.n_bound,
            });
        }

        self.epoch += 1;
        let cap = self.config.bucket_cap();
        let beta = self.config.beta;

        for b in 0..self.buckets.len() {
            // One draw per bucket per item keeps the RNG stream aligned
            // regardless of outcomes.
            let u: f64 = self.rng_buckets.random();
            if u >= self.buckets[b].p {
                continue;
            }
            let threshold = beta * self.buckets[b].ell;
            let mut admissible = true;
            for i in 0..self.buckets[b].members.len() {
                let slot = self.buckets[b].members[i];
                let dist = cached_distance(
                    &self.arena,
                    &mut self.memo_val,
                    &mut self.memo_epoch,
                    self.epoch,
                    &mut self.scratch,
                    &x,
                    slot,
                );
                if (dist as f64) < threshold {
                    admissible = false;
                    break;
                }
            }
            if !admissible {
                continue;
            }
            let slot = self.arena.acquire(&x);
            self.buckets[b].members.push(slot);
            self.bucket_points += 1;
            debug_assert!(self.buckets[b].members.len() <= cap);
            if self.buckets[b].members.len() >= cap {
                for &s in &self.buckets[b].members {
                    self.arena.release(s);
                }
                self.bucket_points -= self.buckets[b].members.len();
                self.buckets[b].members.clear();
                self.buckets[b].resets += 1;
            }
        }

        {
            let (arena, memo_val, memo_epoch, scratch) = (
                &mut self.arena,
                &mut self.memo_val,
                &mut self.memo_epoch,
                &mut self.scratch,
            );
            let epoch = self.epoch;
            self.faraway.offer(arena, &x, |arena, slot| {
                cached_distance(arena, memo_val, memo_epoch, epoch, scratch, &x, slot)
            });
        }

        self.coreset_builder.push(x);
        self.items_seen += 1;

        let stored = self.stored_now();
        self.peak_stored = self.peak_stored.max(stored);
        Ok(())
    }

    fn stored_now(&self) -> usize {
        let coreset = match &self.loaded_coreset {
            Some(c) => c.len(),
            None => self.coreset_builder.stored(),
        };
        self.bucket_points + self.faraway.member_count() + coreset
    }

    /// Union of surviving bucket members, deduplicated and in lexicographic
    /// order.
    pub fn surviving_sample(&self) -> Vec<Permutation> {
        let mut slots: Vec<u32> = self
            .buckets
            .iter()
            .flat_map(|b| b.members.iter().copied())
            .collect();
        slots.sort_unstable();
        slots.dedup();
        let mut perms: Vec<Permutation> =
            slots.into_iter().map(|s| self.arena.get(s).clone()).collect();
        perms.sort();
        perms
    }

    /// The faraway sample, deduplicated and in lexicographic order.
    pub fn faraway_sample(&self) -> Vec<Permutation> {
        let mut perms: Vec<Permutation> = self
            .faraway
            .sample(&self.arena)
            .into_iter()
            .cloned()
            .collect();
        perms.sort();
        perms
    }

    /// The weighted coreset as of now.
    pub fn coreset(&self) -> WeightedCoreset {
        match &self.loaded_coreset {
            Some(c) => c.clone(),
            None => self.coreset_builder.flatten(),
        }
    }

    pub fn stats(&self) -> SketchStats {
        let grid_cells = self.buckets.len();
        let bucket_cap = self.config.bucket_cap();
        SketchStats {
            items_seen: self.items_seen,
            peak_stored: self.peak_stored,
            stored_now: self.stored_now(),
            bucket_points: self.bucket_points,
            faraway_points: self.faraway.member_count(),
            coreset_points: match &self.loaded_coreset {
                Some(c) => c.len(),
                None => self.coreset_builder.stored(),
            },
            distinct_interned: self.arena.live(),
            resets_total: self.buckets.iter().map(|b| b.resets).sum(),
            grid_cells,
            bucket_cap,
            bound_bucket_points: grid_cells * bucket_cap,
            bound_faraway: self.config.faraway_bound(),
            bound_coreset: self
                .coreset_builder
                .stored_bound(self.config.n_bound),
            }
    }

    /// End-of-stream k-median: candidates are the surviving sample `R`, the
    /// faraway sample `F`, and reconstructions from five-element subsets of
    /// `R`; the winner minimizes the coreset-weighted objective with a
    /// fixed lexicographic tie-break.
    pub fn query(&self, opts: &QueryOptions) -> Result<StreamQueryResult, StreamError> {
        let k = self.config.k;
        let r = self.surviving_sample();
        let f = self.faraway_sample();
        if r.is_empty() && f.is_empty() {
            return Err(StreamError::EmptySketch);
        }

        let coreset = self.coreset();
        let points: Vec<Permutation> = coreset.points.iter().map(|(p, _)| p.clone()).collect();
        let weights: Vec<f64> = coreset.points.iter().map(|(_, w)| *w).collect();

        // Candidate generation order: R, then new members of F, then
        // reconstructions in combination order.
        let mut candidates: Vec<Permutation> = Vec::with_capacity(r.len() + f.len());
        let mut seen: std::collections::HashSet<Vec<u32>> = std::collections::HashSet::new();
        for p in r.iter().chain(f.iter()) {
            if seen.insert(p.symbols().to_vec()) {
                candidates.push(p.clone());
            }
        }

        let recon_count = binomial(r.len() as u128, RECONSTRUCT_ARITY as u128);
        let tuple_required = subsets_up_to(candidates.len() as u128 + recon_count, k);
        let required = recon_count.max(tuple_required);

        if required <= opts.budget as u128 {
            for combo in crate::cluster::Combinations::new(r.len(), RECONSTRUCT_ARITY) {
                let tuple: Vec<Permutation> = combo.iter().map(|&i| r[i].clone()).collect();
                let rec = median_reconstruct(&tuple)
                    .expect("arity and dimensions hold by construction")
                    .output;
                if seen.insert(rec.symbols().to_vec()) {
                    candidates.push(rec);
                }
            }
            let table = CandidateTable::build(&candidates, &points);
            let chosen = exact_select(
                &table,
                k.min(candidates.len()),
                Scorer::Weighted(&weights),
                u64::MAX,
            )
            .expect("budget already verified");
            return Ok(self.finalize_query(&candidates, chosen, &coreset, false));
        }

        if !opts.greedy_fallback {
            return Err(StreamError::BudgetExceeded {
                required,
                budget: opts.budget,
            });
        }

        // Fallback: greedy seed over R and F, reconstructions from the
        // closest sampled points around each greedy median, then one more
        // selection round (exact when affordable).
        let mut table = CandidateTable::build(&candidates, &points);
        let seed = greedy_select(&table, k.min(candidates.len()), Scorer::Weighted(&weights));

        let mut scratch = UlamScratch::new();
        for &c in &seed {
            let median = candidates[c].clone();
            let mut by_dist: Vec<(u32, usize)> = r
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    (
                        scratch.distance_unchecked(p.symbols(), median.symbols()),
                        i,
                    )
                })
                .collect();
            by_dist.sort_unstable();
            let pool: Vec<usize> = by_dist.iter().take(10).map(|&(_, i)| i).collect();
            if pool.len() < RECONSTRUCT_ARITY {
                continue;
            }
            for combo in crate::cluster::Combinations::new(pool.len(), RECONSTRUCT_ARITY) {
                let tuple: Vec<Permutation> =
                    combo.iter().map(|&i| r[pool[i]].clone()).collect();
                let rec = median_reconstruct(&tuple)
                    .expect("arity and dimensions hold by construction")
                    .output;
                if seen.insert(rec.symbols().to_vec()) {
                    candidates.push(rec);
                }
            }
        }
        table.extend(&candidates, &points);

        let kk = k.min(candidates.len());
        let chosen = if subsets_up_to(candidates.len() as u128, kk) <= opts.budget as u128 {
            exact_select(&table, kk, Scorer::Weighted(&weights), u64::MAX)
                .expect("budget verified")
        } else {
            let seed = greedy_select(&table, kk, Scorer::Weighted(&weights));
            swap_improve(&table, seed, Scorer::Weighted(&weights))
        };
        Ok(self.finalize_query(&candidates, chosen, &coreset, true))
    }

    fn finalize_query(
        &self,
        candidates: &[Permutation],
        chosen: Vec<usize>,
        coreset: &WeightedCoreset,
        used_fallback: bool,
    ) -> StreamQueryResult {
        let medians = MedianSet::new(chosen.iter().map(|&c| candidates[c].clone()).collect())
            .expect("selection is non-empty");
        let mut scratch = UlamScratch::new();
        let mut weighted_objective = 0.0;
        let mut assignment = Vec::with_capacity(coreset.len());
        for (p, w) in &coreset.points {
            let mut best = (u32::MAX, 0usize);
            for (i, m) in medians.medians().iter().enumerate() {
                let dist = scratch.distance_unchecked(p.symbols(), m.symbols());
                if dist < best.0 {
                    best = (dist, i);
                }
            }
            weighted_objective += w * best.0 as f64;
            assignment.push(best.1);
        }
        StreamQueryResult {
            medians,
            weighted_objective,
            assignment,
            used_fallback,
        }
    }

    /// Serializes config, bucket members, the faraway sample, and the
    /// weighted coreset as versioned text; the format is documented in the
    /// snapshot module.
    pub fn snapshot_string(&self) -> String {
        snapshot::save(self)
    }

    /// Restores a sketch from [`Self::snapshot_string`] output. The result
    /// answers queries bit-identically to the saved sketch but refuses
    /// further updates.
    pub fn from_snapshot_str(text: &str) -> Result<Self, StreamError> {
        snapshot::load(text)
    }
}

/// Distance from the in-flight item to an interned permutation, memoized
/// per update so shared members cost one evaluation.
#[allow(clippy::too_many_arguments)]
fn cached_distance(
    arena: &Arena,
    memo_val: &mut Vec<u32>,
    memo_epoch: &mut Vec<u64>,
    epoch: u64,
    scratch: &mut UlamScratch,
    x: &Permutation,
    slot: u32,
) -> u32 {
    let i = slot as usize;
    if i >= memo_val.len() {
        memo_val.resize(arena.capacity().max(i + 1), 0);
        memo_epoch.resize(arena.capacity().max(i + 1), 0);
    }
    if memo_epoch[i] != epoch {
        memo_val[i] = scratch.distance_unchecked(x.symbols(), arena.get(slot).symbols());
        memo_epoch[i] = epoch;
    }
    memo_val[i]
}

// Snapshot internals need field access.
mod builder_access {
    use super::*;

    pub(crate) type BucketPart<'a> = (usize, u64, Vec<&'a Permutation>);
    pub(crate) type RingPart<'a> = (usize, Vec<&'a Permutation>);

    impl StreamSketch {
        pub(crate) fn snapshot_parts(
            &self,
        ) -> (
            &StreamConfig,
            usize,
            usize,
            Vec<BucketPart<'_>>,
            Vec<RingPart<'_>>,
            WeightedCoreset,
        ) {
            let buckets = self
                .buckets
                .iter()
                .enumerate()
                .filter(|(_, b)| !b.members.is_empty())
                .map(|(i, b)| {
                    (
                        i,
                        b.resets,
                        b.members.iter().map(|&s| self.arena.get(s)).collect(),
                    )
                })
                .collect();
            let rings = self
                .faraway
                .rings
                .iter()
                .enumerate()
                .filter(|(_, r)| !r.members.is_empty())
                .map(|(i, r)| {
                    (
                        i,
                        r.members.iter().map(|&s| self.arena.get(s)).collect::<Vec<_>>(),
                    )
                })
                .collect();
            (
                &self.config,
                self.items_seen,
                self.peak_stored,
                buckets,
                rings,
                self.coreset(),
            )
        }

        /// Rebuilds a frozen sketch from snapshot pieces.
        pub(crate) fn assemble_frozen(
            config: StreamConfig,
            items_seen: usize,
            peak_stored: usize,
            bucket_parts: Vec<(usize, u64, Vec<Permutation>)>,
            ring_parts: Vec<(usize, Vec<Permutation>)>,
            coreset: WeightedCoreset,
        ) -> Result<StreamSketch, StreamError> {
            let mut sketch = StreamSketch::init(config)?;
            for (idx, resets, members) in bucket_parts {
                if idx >= sketch.buckets.len() {
                    return Err(StreamError::InvalidConfig(format!(
                        "bucket index {idx} out of range"
                    )));
                }
                for p in &members {
                    let slot = sketch.arena.acquire(p);
                    sketch.buckets[idx].members.push(slot);
                    sketch.bucket_points += 1;
                }
                sketch.buckets[idx].resets = resets;
            }
            for (idx, members) in ring_parts {
                if idx >= sketch.faraway.rings.len() {
                    return Err(StreamError::InvalidConfig(format!(
                        "ring index {idx} out of range"
                    )));
                }
                for p in &members {
                    let slot = sketch.arena.acquire(p);
                    sketch.faraway.rings[idx].members.push(slot);
                }
            }
            sketch.loaded_coreset = Some(coreset);
            sketch.items_seen = items_seen;
            sketch.peak_stored = peak_stored;
            sketch.frozen = true;
            Ok(sketch)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::SliceRandom;

    fn perm(symbols: &[u32]) -> Permutation {
        Permutation::new(symbols.to_vec()).unwrap()
    }

    fn random_perm(d: usize, rng: &mut ChaCha12Rng) -> Permutation {
        let mut symbols: Vec<u32> = (1..=d as u32).collect();
        symbols.shuffle(rng);
        Permutation::new(symbols).unwrap()
    }

    #[test]
    fn grid_dimensions_match_formula() {
        let cfg = StreamConfig::new(1, 8, 16, 0);
        // ceil(log_1.1 8) + 1 and ceil(log_1.1 16) + 1.
        assert_eq!(cfg.ell_grid().len(), 23);
        assert_eq!(cfg.p_grid().len(), 31);

        let cfg = StreamConfig::new(1, 1, 1, 0);
        assert_eq!(cfg.ell_grid(), vec![1.0]);
        assert_eq!(cfg.p_grid(), vec![1.0]);
    }

    #[test]
    fn bucket_cap_formula() {
        let cfg = StreamConfig::new(2, 8, 1024, 0);
        assert_eq!(cfg.bucket_cap(), 2000);
    }

    #[test]
    fn grid_covers_every_scale_and_rate() {
        let cfg = StreamConfig::new(1, 57, 923, 0);
        let ells = cfg.ell_grid();
        for target in 1..=57 {
            let t = target as f64;
            assert!(
                ells.iter()
                    .any(|&l| l <= t && t < l * (1.0 + cfg.gamma)),
                "no grid scale covers {target}"
            );
        }
        let ps = cfg.p_grid();
        for m in 1..=923usize {
            let target = 1.0 / m as f64;
            assert!(
                ps.iter()
                    .any(|&p| p / (1.0 + cfg.gamma) < target && target <= p),
                "no grid rate covers 1/{m}"
            );
        }
    }

    #[test]
    fn invalid_configs_are_rejected() {
        assert!(StreamSketch::init(StreamConfig::new(0, 5, 10, 0)).is_err());
        assert!(StreamSketch::init(StreamConfig::new(1, 0, 10, 0)).is_err());
        assert!(StreamSketch::init(StreamConfig::new(1, 5, 0, 0)).is_err());
        assert!(StreamSketch::init(StreamConfig::new(1, 5, 10, 0).with_beta(0.0)).is_err());
    }

    #[test]
    fn duplicate_points_are_pruned_at_default_beta() {
        let mut sketch = StreamSketch::init(StreamConfig::new(1, 6, 8, 7)).unwrap();
        let x = perm(&[2, 1, 3, 4, 5, 6]);
        for _ in 0..8 {
            sketch.update(x.clone()).unwrap();
        }
        // Every bucket holds at most one copy: beta*ell > 0 rejects
        // duplicates everywhere.
        for b in &sketch.buckets {
            assert!(b.members.len() <= 1, "bucket kept duplicates");
        }
        assert_eq!(sketch.surviving_sample(), vec![x]);
    }

    #[test]
    fn pruning_invariant_holds_with_desk_beta() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let cfg = StreamConfig::new(1, 12, 64, 13).with_beta(0.4);
        let mut sketch = StreamSketch::init(cfg).unwrap();
        for _ in 0..64 {
            sketch.update(random_perm(12, &mut rng)).unwrap();
        }
        let mut scratch = UlamScratch::new();
        for b in &sketch.buckets {
            let threshold = sketch.config.beta * b.ell;
            for i in 0..b.members.len() {
                for j in (i + 1)..b.members.len() {
                    let d = scratch.distance_unchecked(
                        sketch.arena.get(b.members[i]).symbols(),
                        sketch.arena.get(b.members[j]).symbols(),
                    );
                    assert!(
                        d as f64 >= threshold,
                        "members {i},{j} at distance {d} under threshold {threshold}"
                    );
                }
            }
        }
    }

    #[test]
    fn bucket_resets_on_reaching_cap() {
        // n_bound = 2 gives cap = k * 1^3 = 1: the first admitted member
        // immediately trips the reset.
        let cfg = StreamConfig::new(1, 5, 2, 3);
        let mut sketch = StreamSketch::init(cfg).unwrap();
        assert_eq!(sketch.config.bucket_cap(), 1);
        sketch.update(perm(&[1, 2, 3, 4, 5])).unwrap();
        let stats = sketch.stats();
        assert_eq!(stats.bucket_points, 0);
        assert!(stats.resets_total > 0);
    }

    #[test]
    fn update_rejects_bad_items() {
        let mut sketch = StreamSketch::init(StreamConfig::new(1, 5, 2, 3)).unwrap();
        assert!(matches!(
            sketch.update(perm(&[1, 2, 3])),
            Err(StreamError::DimensionMismatch {
                expected: 5,
                got: 3
            })
        ));
        sketch.update(perm(&[1, 2, 3, 4, 5])).unwrap();
        sketch.update(perm(&[2, 1, 3, 4, 5])).unwrap();
        assert!(matches!(
            sketch.update(perm(&[1, 2, 3, 4, 5])),
            Err(StreamError::StreamOverflow { n_bound: 2 })
        ));
    }

    #[test]
    fn constant_stream_queries_to_that_constant() {
        let x = perm(&[3, 1, 2, 5, 4, 6]);
        let mut sketch = StreamSketch::init(StreamConfig::new(1, 6, 32, 5)).unwrap();
        for _ in 0..32 {
            sketch.update(x.clone()).unwrap();
        }
        let res = sketch.query(&QueryOptions::default()).unwrap();
        assert_eq!(res.medians.medians(), &[x]);
        assert_eq!(res.weighted_objective, 0.0);
        assert!(!res.used_fallback);
    }

    #[test]
    fn empty_sketch_errors() {
        let sketch = StreamSketch::init(StreamConfig::new(1, 6, 8, 5)).unwrap();
        assert!(matches!(
            sketch.query(&QueryOptions::default()),
            Err(StreamError::EmptySketch)
        ));
    }

    #[test]
    fn seeded_runs_are_bit_identical() {
        let mut rng = ChaCha12Rng::seed_from_u64(21);
        let stream: Vec<Permutation> = (0..100).map(|_| random_perm(10, &mut rng)).collect();
        let run = |seed: u64| {
            let mut sketch =
                StreamSketch::init(StreamConfig::new(2, 10, 100, seed).with_beta(0.3)).unwrap();
            for x in &stream {
                sketch.update(x.clone()).unwrap();
            }
            sketch.snapshot_string()
        };
        assert_eq!(run(42), run(42));
        assert_ne!(run(42), run(43), "different seeds should sample differently");
    }

    #[test]
    fn query_budget_error_reports_requirement() {
        let mut rng = ChaCha12Rng::seed_from_u64(31);
        let mut sketch = StreamSketch::init(StreamConfig::new(1, 8, 64, 9)).unwrap();
        for _ in 0..64 {
            sketch.update(random_perm(8, &mut rng)).unwrap();
        }
        let opts = QueryOptions {
            budget: 5,
            greedy_fallback: false,
        };
        assert!(matches!(
            sketch.query(&opts),
            Err(StreamError::BudgetExceeded { budget: 5, .. })
        ));
        let opts = QueryOptions {
            budget: 5,
            greedy_fallback: true,
        };
        let res = sketch.query(&opts).unwrap();
        assert!(res.used_fallback);
    }

    #[test]
    fn small_stream_query_matches_offline_over_same_family() {
        // Exact coreset plus full enumeration: the query must equal the
        // offline argmin over the identical candidate family.
        let mut rng = ChaCha12Rng::seed_from_u64(33);
        let stream: Vec<Permutation> = (0..9).map(|_| random_perm(6, &mut rng)).collect();
        let mut sketch = StreamSketch::init(StreamConfig::new(1, 6, 9, 17)).unwrap();
        for x in &stream {
            sketch.update(x.clone()).unwrap();
        }
        let res = sketch.query(&QueryOptions::default()).unwrap();

        let ds = crate::dataset::Dataset::new(stream.clone()).unwrap();
        let offline = crate::cluster::approx_k_median(&ds, 1).unwrap();
        assert_eq!(res.weighted_objective, offline.objective as f64);
    }

    #[test]
    fn stats_respect_formula_bounds() {
        let mut rng = ChaCha12Rng::seed_from_u64(41);
        let cfg = StreamConfig::new(2, 10, 128, 3).with_beta(0.3);
        let mut sketch = StreamSketch::init(cfg).unwrap();
        for _ in 0..128 {
            sketch.update(random_perm(10, &mut rng)).unwrap();
        }
        let stats = sketch.stats();
        assert!(stats.bucket_points <= stats.bound_bucket_points);
        assert!(stats.faraway_points <= stats.bound_faraway);
        assert!(stats.coreset_points <= stats.bound_coreset);
        assert!(stats.peak_stored <= stats.bound_total());
        assert_eq!(stats.items_seen, 128);
    }
}
