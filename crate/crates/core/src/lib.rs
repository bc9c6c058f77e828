//! Approximate k-median clustering of permutations under the Ulam metric.
//!
//! The crate provides:
//!
//! - exact Ulam distances (`d` minus the longest common subsequence,
//!   computed by patience sorting) with an independent quadratic reference;
//! - reconstruction of a candidate median from five permutations through a
//!   majority tournament with triangle removal;
//! - offline approximation algorithms for the k-median problem, with and
//!   without outliers, plus exhaustive small-instance oracles;
//! - a single-pass streaming sketch (grid sampling, faraway sampling, and
//!   a weighted coreset) answering k-median queries at end of stream, and
//!   a lighter uniform-sampling variant for the 1-median.

pub mod cluster;
pub mod dataset;
mod par;
pub mod perm;
pub mod stream;
pub mod tournament;

pub use cluster::{
    approx_k_median, approx_k_median_outliers, approx_k_median_with, approx_median,
    best_from_input, brute_force_k_median, objective, objective_with_outliers, ApproxConstants,
    ClusterError, ClusteringResult, SelectOptions,
};
pub use dataset::{Dataset, DatasetError, MedianSet};
pub use perm::{
    all_permutations, lcs_length, lcs_length_oracle, ulam_distance, Distance, PermError,
    Permutation, UlamScratch,
};
pub use stream::{
    streaming_1_median, OneMedianConfig, OneMedianOutcome, QueryOptions, SketchStats,
    StreamConfig, StreamError, StreamQueryResult, StreamSketch, WeightedCoreset,
};
pub use tournament::{
    median_reconstruct, ReconstructError, ReconstructionReport, TournamentGraph,
    RECONSTRUCT_ARITY,
};
