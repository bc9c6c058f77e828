//! Streaming weighted coreset via merge-and-reduce with sensitivity
//! sampling.
//!
//! Incoming points fill a buffer of `block` unit-weight points; full
//! blocks cascade through a binary merge tree, and every merge is reduced
//! back to `block` points by importance sampling against a farthest-first
//! k-clustering of the merged block. Weights are scaled so the weighted
//! objective stays an unbiased estimate of the exact one; when `block`
//! is at least the stream bound the structure degenerates to the exact
//! multiset with unit weights.

use rand::Rng;
use rand_chacha::ChaCha12Rng;

use crate::perm::{Permutation, UlamScratch};

/// A weighted point set standing in for the full stream.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedCoreset {
    pub points: Vec<(Permutation, f64)>,
}

impl WeightedCoreset {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn weight_sum(&self) -> f64 {
        self.points.iter().map(|(_, w)| w).sum()
    }

    /// Weighted objective of a median set over the coreset.
    pub fn weighted_objective(&self, medians: &[Permutation]) -> f64 {
        let mut scratch = UlamScratch::new();
        self.points
            .iter()
            .map(|(p, w)| {
                let min = medians
                    .iter()
                    .map(|m| scratch.distance_unchecked(p.symbols(), m.symbols()))
                    .min()
                    .expect("non-empty median set");
                w * min as f64
            })
            .sum()
    }
}

#[derive(Debug, Clone)]
pub(crate) struct CoresetBuilder {
    k: usize,
    block: usize,
    buffer: Vec<Permutation>,
    levels: Vec<Option<Vec<(Permutation, f64)>>>,
    rng: ChaCha12Rng,
    stored: usize,
}

impl CoresetBuilder {
    pub(crate) fn new(k: usize, block: usize, rng: ChaCha12Rng) -> Self {
        Self {
            k: k.max(1),
            block: block.max(1),
            buffer: Vec::new(),
            levels: Vec::new(),
            rng,
            stored: 0,
        }
    }

    /// Points currently held (buffer plus all levels).
    pub(crate) fn stored(&self) -> usize {
        self.stored
    }

    pub(crate) fn push(&mut self, x: Permutation) {
        self.buffer.push(x);
        self.stored += 1;
        if self.buffer.len() < self.block {
            return;
        }
        let mut carry: Vec<(Permutation, f64)> =
            self.buffer.drain(..).map(|p| (p, 1.0)).collect();
        let mut level = 0;
        loop {
            if level == self.levels.len() {
                self.levels.push(None);
            }
            match self.levels[level].take() {
                None => {
                    self.levels[level] = Some(carry);
                    break;
                }
                Some(mut existing) => {
                    existing.append(&mut carry);
                    carry = reduce(existing, self.block, self.k, &mut self.rng);
                    level += 1;
                }
            }
        }
        self.stored = self.buffer.len()
            + self
                .levels
                .iter()
                .map(|l| l.as_ref().map_or(0, |v| v.len()))
                .sum::<usize>();
    }

    /// The current coreset: levels in ascending order, then the buffer with
    /// unit weights.
    pub(crate) fn flatten(&self) -> WeightedCoreset {
        let mut points = Vec::with_capacity(self.stored);
        for block in self.levels.iter().flatten() {
            points.extend(block.iter().cloned());
        }
        points.extend(self.buffer.iter().map(|p| (p.clone(), 1.0)));
        WeightedCoreset { points }
    }

    /// Storage bound from the merge-and-reduce accounting: one block per
    /// level plus the buffer.
    pub(crate) fn stored_bound(&self, n_bound: usize) -> usize {
        let levels = if n_bound <= self.block {
            0
        } else {
            (n_bound / self.block).next_power_of_two().trailing_zeros() as usize + 1
        };
        self.block * (levels + 1)
    }
}

/// Reduces a merged weighted block to `target` points by sensitivity
/// sampling: each point's sampling mass combines its share of the
/// clustering cost around `k` farthest-first centers with its share of its
/// cluster's weight. Sampled points get weights that keep expectations
/// unchanged; duplicates within the sample are aggregated.
fn reduce(
    points: Vec<(Permutation, f64)>,
    target: usize,
    k: usize,
    rng: &mut ChaCha12Rng,
) -> Vec<(Permutation, f64)> {
    if points.len() <= target {
        return points;
    }
    let mut scratch = UlamScratch::new();
    let n = points.len();

    // Farthest-first centers, seeded at the first point.
    let mut centers: Vec<usize> = vec![0];
    let mut min_dist: Vec<u32> = points
        .iter()
        .map(|(p, _)| scratch.distance_unchecked(p.symbols(), points[0].0.symbols()))
        .collect();
    while centers.len() < k.min(n) {
        let far = (0..n)
            .max_by(|&a, &b| min_dist[a].cmp(&min_dist[b]).then(b.cmp(&a)))
            .expect("non-empty");
        if min_dist[far] == 0 {
            break;
        }
        centers.push(far);
        for j in 0..n {
            let d = scratch.distance_unchecked(points[j].0.symbols(), points[far].0.symbols());
            min_dist[j] = min_dist[j].min(d);
        }
    }

    // Nearest-center assignment (ties to the earliest center).
    let mut assign = vec![0usize; n];
    for j in 0..n {
        let mut best = (u32::MAX, 0usize);
        for (ci, &c) in centers.iter().enumerate() {
            let d = scratch.distance_unchecked(points[j].0.symbols(), points[c].0.symbols());
            if d < best.0 {
                best = (d, ci);
            }
        }
        assign[j] = best.1;
    }

    let mut cluster_weight = vec![0.0f64; centers.len()];
    let mut cost = 0.0f64;
    for j in 0..n {
        cluster_weight[assign[j]] += points[j].1;
        cost += points[j].1 * min_dist[j] as f64;
    }

    let sens: Vec<f64> = (0..n)
        .map(|j| {
            let dist_share = if cost > 0.0 {
                points[j].1 * min_dist[j] as f64 / cost
            } else {
                0.0
            };
            dist_share + points[j].1 / cluster_weight[assign[j]]
        })
        .collect();
    let total: f64 = sens.iter().sum();
    let cumulative: Vec<f64> = sens
        .iter()
        .scan(0.0, |acc, s| {
            *acc += s;
            Some(*acc)
        })
        .collect();

    let mut counts = vec![0u32; n];
    for _ in 0..target {
        let u: f64 = rng.random::<f64>() * total;
        let idx = cumulative.partition_point(|&c| c <= u).min(n - 1);
        counts[idx] += 1;
    }

    let mut out = Vec::new();
    for j in 0..n {
        if counts[j] > 0 {
            let weight = counts[j] as f64 * points[j].1 * total / (target as f64 * sens[j]);
            out.push((points[j].0.clone(), weight));
        }
    }
    out
}
