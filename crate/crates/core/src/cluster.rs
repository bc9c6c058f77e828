//! Objective functions and offline k-median approximation.
//!
//! The candidate family combines every distinct input with a permutation
//! reconstructed from each five-element subset of the input (by index), and
//! the algorithms select the best size-at-most-k subset of that family.
//! Small-instance exact searches over the whole permutation space serve as
//! test oracles.

use thiserror::Error;

use crate::dataset::{Dataset, MedianSet};
use crate::par;
use crate::perm::{all_permutations, Permutation, UlamScratch};
use crate::tournament::{median_reconstruct, RECONSTRUCT_ARITY};

/// Constants appearing in the approximation guarantee of the
/// reconstruction-based algorithms. They are recorded for reference and do
/// not steer any control flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproxConstants {
    pub epsilon: f64,
    pub alpha: f64,
}

impl Default for ApproxConstants {
    fn default() -> Self {
        let epsilon = 0.03319;
        Self {
            epsilon,
            alpha: epsilon / 11.0,
        }
    }
}

/// Default cap on the number of candidate subsets an exact selection may
/// enumerate.
pub const DEFAULT_SELECT_BUDGET: u64 = 100_000_000;

/// Default cap on `d!^k` for the exhaustive oracle.
pub const DEFAULT_ORACLE_BUDGET: u64 = 1_000_000;

#[derive(Debug, Error)]
pub enum ClusterError {
    #[error("dataset must contain at least one permutation")]
    EmptyDataset,
    #[error("median set must contain at least one permutation")]
    EmptyMedianSet,
    #[error("dimension mismatch: dataset d={expected}, argument d={got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("outlier fraction must lie in [0, 1), got {0}")]
    InvalidOutlierFraction(f64),
    #[error("k must satisfy 1 <= k <= {n}, got {k}")]
    InvalidK { k: usize, n: usize },
    #[error("enumeration needs {required} candidate evaluations, over the budget of {budget}; shrink the instance, raise the budget, or enable the greedy fallback")]
    BudgetExceeded { required: u128, budget: u64 },
}

/// Knobs for the candidate-subset selection stage.
#[derive(Debug, Clone, Copy)]
pub struct SelectOptions {
    /// Cap on exact subset enumeration (number of scored subsets).
    pub budget: u64,
    /// Over budget, fall back to greedy selection with local swaps plus
    /// cluster-guided reconstructions instead of erroring. The fallback
    /// trades the enumeration guarantee for feasibility and is flagged in
    /// the result.
    pub greedy_fallback: bool,
}

impl Default for SelectOptions {
    fn default() -> Self {
        Self {
            budget: DEFAULT_SELECT_BUDGET,
            greedy_fallback: false,
        }
    }
}

/// A clustering outcome: chosen medians, per-point nearest-median
/// assignment (ties toward the lowest median index), the objective over
/// non-outlier points, and the excluded indices (empty when `p = 0`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusteringResult {
    pub medians: MedianSet,
    pub assignment: Vec<usize>,
    pub objective: u64,
    pub outliers: Vec<usize>,
    /// True when the greedy fallback produced this result instead of exact
    /// subset enumeration.
    pub used_fallback: bool,
}

/// `Obj(S, Y)`: the sum over points of the distance to the nearest median.
pub fn objective(s: &Dataset, y: &MedianSet) -> Result<u64, ClusterError> {
    check_dims(s, y)?;
    let mut scratch = UlamScratch::new();
    let mut total = 0u64;
    for p in s.points() {
        total += point_min(p, y.medians(), &mut scratch) as u64;
    }
    Ok(total)
}

/// `Obj_p(S, Y)`: drops the `floor(p * n)` largest per-point distances
/// (ties: higher dataset index discarded first) and sums the rest. Returns
/// the objective and the excluded indices in ascending order.
pub fn objective_with_outliers(
    s: &Dataset,
    y: &MedianSet,
    p: f64,
) -> Result<(u64, Vec<usize>), ClusterError> {
    check_dims(s, y)?;
    let drop = outlier_count(p, s.len())?;
    let mut scratch = UlamScratch::new();
    let mins: Vec<u32> = s
        .points()
        .iter()
        .map(|x| point_min(x, y.medians(), &mut scratch))
        .collect();
    Ok(sum_excluding_largest(&mins, drop))
}

/// The best subset of at most `k` distinct input points, by exhaustive
/// enumeration in lexicographic index order (ties to the earliest tuple).
pub fn best_from_input(s: &Dataset, k: usize) -> Result<MedianSet, ClusterError> {
    if k == 0 {
        return Err(ClusterError::InvalidK { k, n: s.len() });
    }
    let distinct: Vec<Permutation> = s.distinct().into_iter().map(|(_, p)| p.clone()).collect();
    let table = CandidateTable::build(&distinct, s.points());
    let chosen = exact_select(&table, k.min(distinct.len()), Scorer::Unit { drop: 0 }, u64::MAX)
        .expect("unbounded budget cannot be exceeded");
    MedianSet::new(chosen.iter().map(|&c| distinct[c].clone()).collect())
        .map_err(|_| ClusterError::EmptyDataset)
}

/// 1-median approximation: the best input point plus one reconstruction per
/// five-element index subset, scored against the full dataset; earliest
/// generated candidate wins ties. With fewer than five points the
/// reconstruction family is empty and the best input is returned.
pub fn approx_median(s: &Dataset) -> Result<Permutation, ClusterError> {
    let best = best_from_input(s, 1)?.medians()[0].clone();
    let mut scratch = UlamScratch::new();
    let mut winner = best;
    let mut winner_obj = singleton_objective(&winner, s, &mut scratch);
    for combo in Combinations::new(s.len(), RECONSTRUCT_ARITY) {
        let tuple: Vec<Permutation> = combo.iter().map(|&i| s.points()[i].clone()).collect();
        let candidate = median_reconstruct(&tuple)
            .expect("arity and dimensions hold by construction")
            .output;
        let obj = singleton_objective(&candidate, s, &mut scratch);
        if obj < winner_obj {
            winner_obj = obj;
            winner = candidate;
        }
    }
    Ok(winner)
}

/// 1.999-style k-median approximation with exact candidate-subset
/// enumeration and the default budget; errors when the enumeration would
/// blow the budget.
pub fn approx_k_median(s: &Dataset, k: usize) -> Result<ClusteringResult, ClusterError> {
    approx_k_median_with(s, k, 0.0, &SelectOptions::default())
}

/// The outlier variant: identical candidate family, objective `Obj_p`.
pub fn approx_k_median_outliers(
    s: &Dataset,
    k: usize,
    p: f64,
) -> Result<ClusteringResult, ClusterError> {
    approx_k_median_with(s, k, p, &SelectOptions::default())
}

/// Full-control entry point for the offline approximation; `p = 0` is the
/// plain k-median.
pub fn approx_k_median_with(
    s: &Dataset,
    k: usize,
    p: f64,
    opts: &SelectOptions,
) -> Result<ClusteringResult, ClusterError> {
    if k == 0 || k > s.len() {
        return Err(ClusterError::InvalidK { k, n: s.len() });
    }
    let drop = outlier_count(p, s.len())?;

    let distinct: Vec<Permutation> = s.distinct().into_iter().map(|(_, p)| p.clone()).collect();
    let recon_family = binomial(s.len() as u128, RECONSTRUCT_ARITY as u128);
    let family_upper = distinct.len() as u128 + recon_family;
    let required = subsets_up_to(family_upper, k);

    if required <= opts.budget as u128 {
        // Small enough: materialize every candidate and enumerate exactly.
        let mut candidates = distinct;
        let mut seen: std::collections::HashSet<Vec<u32>> = candidates
            .iter()
            .map(|c| c.symbols().to_vec())
            .collect();
        for combo in Combinations::new(s.len(), RECONSTRUCT_ARITY) {
            let tuple: Vec<Permutation> = combo.iter().map(|&i| s.points()[i].clone()).collect();
            let rec = median_reconstruct(&tuple)
                .expect("arity and dimensions hold by construction")
                .output;
            if seen.insert(rec.symbols().to_vec()) {
                candidates.push(rec);
            }
        }
        let table = CandidateTable::build(&candidates, s.points());
        let chosen = exact_select(
            &table,
            k.min(candidates.len()),
            Scorer::Unit { drop },
            u64::MAX,
        )
        .expect("budget already verified");
        return finalize(s, &candidates, chosen, drop, false);
    }

    if !opts.greedy_fallback {
        return Err(ClusterError::BudgetExceeded {
            required,
            budget: opts.budget,
        });
    }

    // Fallback: greedy selection over the inputs, enriched with
    // reconstructions drawn from the points closest to each greedy median,
    // then re-selected (exactly when affordable, greedily otherwise).
    let mut candidates = distinct;
    let mut table = CandidateTable::build(&candidates, s.points());
    let chosen = greedy_select(&table, k.min(candidates.len()), Scorer::Unit { drop });

    let pools = recon_pools(s, &table, &chosen);
    let mut seen: std::collections::HashSet<Vec<u32>> = candidates
        .iter()
        .map(|c| c.symbols().to_vec())
        .collect();
    for pool in pools {
        for combo in Combinations::new(pool.len(), RECONSTRUCT_ARITY) {
            let tuple: Vec<Permutation> = combo
                .iter()
                .map(|&i| s.points()[pool[i]].clone())
                .collect();
            let rec = median_reconstruct(&tuple)
                .expect("arity and dimensions hold by construction")
                .output;
            if seen.insert(rec.symbols().to_vec()) {
                candidates.push(rec);
            }
        }
    }
    table.extend(&candidates, s.points());

    let kk = k.min(candidates.len());
    let chosen = if subsets_up_to(candidates.len() as u128, kk) <= opts.budget as u128 {
        exact_select(&table, kk, Scorer::Unit { drop }, u64::MAX).expect("budget verified")
    } else {
        let seed = greedy_select(&table, kk, Scorer::Unit { drop });
        swap_improve(&table, seed, Scorer::Unit { drop })
    };
    finalize(s, &candidates, chosen, drop, true)
}

/// Exhaustive oracle: searches every size-at-most-k subset of the whole
/// permutation space (all `d!` permutations) for the exact optimum of
/// `Obj_p`. Guarded by `d <= 7` and `d!^k` against the default budget.
pub fn brute_force_k_median(
    s: &Dataset,
    k: usize,
    p: f64,
) -> Result<ClusteringResult, ClusterError> {
    if k == 0 {
        return Err(ClusterError::InvalidK { k, n: s.len() });
    }
    let drop = outlier_count(p, s.len())?;
    let d = s.dimension();
    let factorial: u128 = (1..=d as u128).product();
    let required = factorial.saturating_pow(k as u32);
    if d > 7 || required > DEFAULT_ORACLE_BUDGET as u128 {
        return Err(ClusterError::BudgetExceeded {
            required,
            budget: DEFAULT_ORACLE_BUDGET,
        });
    }

    let candidates = all_permutations(d);
    let table = CandidateTable::build(&candidates, s.points());
    let chosen = exact_select(
        &table,
        k.min(candidates.len()),
        Scorer::Unit { drop },
        u64::MAX,
    )
    .expect("budget already verified");
    finalize(s, &candidates, chosen, drop, false)
}

// ---------------------------------------------------------------------------
// Selection machinery shared with the streaming query.
// ---------------------------------------------------------------------------

/// Distances from every candidate to every point, candidate-major.
pub(crate) struct CandidateTable {
    n: usize,
    rows: Vec<Vec<u32>>,
}

impl CandidateTable {
    pub(crate) fn build(candidates: &[Permutation], points: &[Permutation]) -> Self {
        let rows = par::map_range(candidates.len(), |range| {
            let mut scratch = UlamScratch::new();
            range
                .map(|c| {
                    points
                        .iter()
                        .map(|p| {
                            scratch.distance_unchecked(candidates[c].symbols(), p.symbols())
                        })
                        .collect()
                })
                .collect()
        });
        Self {
            n: points.len(),
            rows,
        }
    }

    /// Appends rows for candidates added after the initial build.
    pub(crate) fn extend(&mut self, candidates: &[Permutation], points: &[Permutation]) {
        let start = self.rows.len();
        let mut extra = par::map_range(candidates.len() - start, |range| {
            let mut scratch = UlamScratch::new();
            range
                .map(|off| {
                    points
                        .iter()
                        .map(|p| {
                            scratch
                                .distance_unchecked(candidates[start + off].symbols(), p.symbols())
                        })
                        .collect()
                })
                .collect()
        });
        self.rows.append(&mut extra);
    }

    pub(crate) fn len(&self) -> usize {
        self.rows.len()
    }

    pub(crate) fn row(&self, c: usize) -> &[u32] {
        &self.rows[c]
    }
}

/// How a set of per-point minima turns into one number. Unit scoring sums
/// integers (optionally dropping the largest `drop` of them); weighted
/// scoring is used by the streaming query against a coreset. Integer sums
/// stay exact in f64 far beyond any feasible instance size.
#[derive(Clone, Copy)]
pub(crate) enum Scorer<'a> {
    Unit { drop: usize },
    Weighted(&'a [f64]),
}

impl Scorer<'_> {
    fn score(&self, mins: &[u32]) -> f64 {
        match self {
            Scorer::Unit { drop: 0 } => mins.iter().map(|&m| m as u64).sum::<u64>() as f64,
            Scorer::Unit { drop } => sum_excluding_largest(mins, *drop).0 as f64,
            Scorer::Weighted(w) => mins
                .iter()
                .zip(w.iter())
                .map(|(&m, &wj)| wj * m as f64)
                .sum(),
        }
    }
}

fn sum_excluding_largest(mins: &[u32], drop: usize) -> (u64, Vec<usize>) {
    let mut order: Vec<usize> = (0..mins.len()).collect();
    order.sort_by(|&a, &b| mins[b].cmp(&mins[a]).then(b.cmp(&a)));
    let mut excluded: Vec<usize> = order.into_iter().take(drop).collect();
    let flags = {
        let mut f = vec![false; mins.len()];
        for &i in &excluded {
            f[i] = true;
        }
        f
    };
    let total = mins
        .iter()
        .enumerate()
        .filter(|(i, _)| !flags[*i])
        .map(|(_, &m)| m as u64)
        .sum();
    excluded.sort_unstable();
    (total, excluded)
}

/// Enumerates all non-empty subsets of candidates of size at most `k` in
/// lexicographic index order (prefixes before extensions), keeping the
/// first strict minimizer. Errors if the enumeration would exceed `budget`.
pub(crate) fn exact_select(
    table: &CandidateTable,
    k: usize,
    scorer: Scorer<'_>,
    budget: u64,
) -> Result<Vec<usize>, ClusterError> {
    let m = table.len();
    let required = subsets_up_to(m as u128, k);
    if required > budget as u128 {
        return Err(ClusterError::BudgetExceeded { required, budget });
    }

    let mut best_score = f64::INFINITY;
    let mut best: Vec<usize> = Vec::new();
    let mut stack_min: Vec<Vec<u32>> = vec![vec![u32::MAX; table.n]; k + 1];
    let mut chosen: Vec<usize> = Vec::new();

    #[allow(clippy::too_many_arguments)]
    fn descend(
        table: &CandidateTable,
        k: usize,
        scorer: Scorer<'_>,
        start: usize,
        chosen: &mut Vec<usize>,
        stack_min: &mut Vec<Vec<u32>>,
        best_score: &mut f64,
        best: &mut Vec<usize>,
    ) {
        let depth = chosen.len();
        for c in start..table.len() {
            let (lower, upper) = stack_min.split_at_mut(depth + 1);
            let prev = &lower[depth];
            let cur = &mut upper[0];
            let row = table.row(c);
            for j in 0..table.n {
                cur[j] = prev[j].min(row[j]);
            }
            let score = scorer.score(cur);
            chosen.push(c);
            if score < *best_score {
                *best_score = score;
                best.clone_from(chosen);
            }
            if depth + 1 < k {
                descend(table, k, scorer, c + 1, chosen, stack_min, best_score, best);
            }
            chosen.pop();
        }
    }

    descend(
        table,
        k,
        scorer,
        0,
        &mut chosen,
        &mut stack_min,
        &mut best_score,
        &mut best,
    );
    Ok(best)
}

/// Greedy selection: repeatedly add the candidate with the best marginal
/// score (ties to the lowest index); stops early when no addition strictly
/// improves.
pub(crate) fn greedy_select(table: &CandidateTable, k: usize, scorer: Scorer<'_>) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::new();
    let mut cur_min = vec![u32::MAX; table.n];
    let mut cur_score = f64::INFINITY;
    for _ in 0..k {
        let scores: Vec<f64> = par::map_range(table.len(), |range| {
            range
                .map(|c| {
                    let row = table.row(c);
                    let mins: Vec<u32> = (0..table.n).map(|j| cur_min[j].min(row[j])).collect();
                    scorer.score(&mins)
                })
                .collect()
        });
        let mut pick = None;
        for (c, &score) in scores.iter().enumerate() {
            if chosen.contains(&c) {
                continue;
            }
            if pick.map_or(score < cur_score, |(_, s)| score < s) {
                pick = Some((c, score));
            }
        }
        match pick {
            Some((c, score)) => {
                chosen.push(c);
                cur_score = score;
                let row = table.row(c);
                for j in 0..table.n {
                    cur_min[j] = cur_min[j].min(row[j]);
                }
            }
            None => break,
        }
    }
    chosen
}

/// One-swap local search on top of a seed selection; applies the single
/// best strict improvement per pass until stable.
pub(crate) fn swap_improve(
    table: &CandidateTable,
    seed: Vec<usize>,
    scorer: Scorer<'_>,
) -> Vec<usize> {
    let score_of = |set: &[usize]| -> f64 {
        let mut mins = vec![u32::MAX; table.n];
        for &c in set {
            let row = table.row(c);
            for j in 0..table.n {
                mins[j] = mins[j].min(row[j]);
            }
        }
        scorer.score(&mins)
    };

    let mut chosen = seed;
    let mut cur = score_of(&chosen);
    for _ in 0..16 {
        let mut best_move: Option<(usize, usize, f64)> = None;
        for slot in 0..chosen.len() {
            for c in 0..table.len() {
                if chosen.contains(&c) {
                    continue;
                }
                let mut trial = chosen.clone();
                trial[slot] = c;
                let score = score_of(&trial);
                if score < cur && best_move.is_none_or(|(_, _, s)| score < s) {
                    best_move = Some((slot, c, score));
                }
            }
        }
        match best_move {
            Some((slot, c, score)) => {
                chosen[slot] = c;
                cur = score;
            }
            None => break,
        }
    }
    chosen
}

/// For each selected median, the indices of the up-to-ten closest distinct
/// points (by distance then index): the pools the fallback reconstructs
/// from.
fn recon_pools(s: &Dataset, table: &CandidateTable, chosen: &[usize]) -> Vec<Vec<usize>> {
    const POOL: usize = 10;
    let n = s.len();
    let assignment: Vec<usize> = (0..n)
        .map(|j| {
            let mut best = (u32::MAX, 0usize);
            for (slot, &c) in chosen.iter().enumerate() {
                let dist = table.row(c)[j];
                if dist < best.0 {
                    best = (dist, slot);
                }
            }
            best.1
        })
        .collect();
    let mut pools = Vec::new();
    for (slot, &c) in chosen.iter().enumerate() {
        let mut members: Vec<usize> = (0..n).filter(|&j| assignment[j] == slot).collect();
        members.sort_by(|&a, &b| table.row(c)[a].cmp(&table.row(c)[b]).then(a.cmp(&b)));
        let mut pool = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for j in members {
            if seen.insert(s.points()[j].symbols()) {
                pool.push(j);
                if pool.len() == POOL {
                    break;
                }
            }
        }
        if pool.len() >= RECONSTRUCT_ARITY {
            pools.push(pool);
        }
    }
    pools
}

fn finalize(
    s: &Dataset,
    candidates: &[Permutation],
    chosen: Vec<usize>,
    drop: usize,
    used_fallback: bool,
) -> Result<ClusteringResult, ClusterError> {
    let medians = MedianSet::new(chosen.iter().map(|&c| candidates[c].clone()).collect())
        .map_err(|_| ClusterError::EmptyDataset)?;
    let mut scratch = UlamScratch::new();
    let mut assignment = Vec::with_capacity(s.len());
    let mut mins = Vec::with_capacity(s.len());
    for p in s.points() {
        let mut best = (u32::MAX, 0usize);
        for (i, m) in medians.medians().iter().enumerate() {
            let dist = scratch.distance_unchecked(p.symbols(), m.symbols());
            if dist < best.0 {
                best = (dist, i);
            }
        }
        assignment.push(best.1);
        mins.push(best.0);
    }
    let (objective, outliers) = sum_excluding_largest(&mins, drop);
    Ok(ClusteringResult {
        medians,
        assignment,
        objective,
        outliers,
        used_fallback,
    })
}

fn check_dims(s: &Dataset, y: &MedianSet) -> Result<(), ClusterError> {
    if y.is_empty() {
        return Err(ClusterError::EmptyMedianSet);
    }
    if y.dimension() != s.dimension() {
        return Err(ClusterError::DimensionMismatch {
            expected: s.dimension(),
            got: y.dimension(),
        });
    }
    Ok(())
}

fn point_min(p: &Permutation, medians: &[Permutation], scratch: &mut UlamScratch) -> u32 {
    medians
        .iter()
        .map(|m| scratch.distance_unchecked(p.symbols(), m.symbols()))
        .min()
        .expect("median set is non-empty")
}

fn singleton_objective(candidate: &Permutation, s: &Dataset, scratch: &mut UlamScratch) -> u64 {
    s.points()
        .iter()
        .map(|p| scratch.distance_unchecked(candidate.symbols(), p.symbols()) as u64)
        .sum()
}

/// `floor(p * n)` with a tiny epsilon so fractions like `1/3` computed in
/// floating point do not round down one short.
pub(crate) fn outlier_count(p: f64, n: usize) -> Result<usize, ClusterError> {
    if !(0.0..1.0).contains(&p) {
        return Err(ClusterError::InvalidOutlierFraction(p));
    }
    Ok(((p * n as f64) + 1e-9).floor() as usize)
}

pub(crate) fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let mut result: u128 = 1;
    for i in 0..k {
        result = result.saturating_mul(n - i) / (i + 1);
    }
    result
}

/// Number of non-empty subsets of size at most `k` from `m` candidates,
/// saturating.
pub(crate) fn subsets_up_to(m: u128, k: usize) -> u128 {
    let mut total: u128 = 0;
    for s in 1..=k as u128 {
        total = total.saturating_add(binomial(m, s));
        if total == u128::MAX {
            break;
        }
    }
    total
}

/// Lexicographic fixed-size index combinations of `0..n`.
pub(crate) struct Combinations {
    n: usize,
    indices: Vec<usize>,
    done: bool,
}

impl Combinations {
    pub(crate) fn new(n: usize, k: usize) -> Self {
        Self {
            n,
            indices: (0..k).collect(),
            done: k > n || k == 0,
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let current = self.indices.clone();
        let k = self.indices.len();
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.indices[i] < self.n - (k - i) {
                self.indices[i] += 1;
                for j in (i + 1)..k {
                    self.indices[j] = self.indices[j - 1] + 1;
                }
                break;
            }
        }
        Some(current)
    }
}
