//! Median reconstruction from five permutations via a majority tournament.
//!
//! Five permutations of common dimension induce a complete directed graph
//! on the symbols: the edge between `a` and `b` points the way a strict
//! majority (at least three of five) orders them. Cycles are removed by a
//! single ascending sweep deleting one directed triangle at a time (in a
//! tournament every shortest cycle is a triangle), and the surviving
//! acyclic tournament is read off in its unique topological order. The
//! deleted symbols are appended at the end in ascending order.

use thiserror::Error;

use crate::perm::{PermError, Permutation};

/// The reconstruction takes exactly this many permutations.
pub const RECONSTRUCT_ARITY: usize = 5;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReconstructError {
    #[error("expected exactly {RECONSTRUCT_ARITY} permutations, got {0}")]
    WrongArity(usize),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("vertex {0} has been removed")]
    VertexRemoved(u32),
    #[error("surviving tournament is not acyclic")]
    CyclicGraph,
}

/// A directed triangle `v -> a -> b -> v`.
pub type Triangle = [u32; 3];

/// A complete majority-order graph over the symbols `1..=d` with a shrinking
/// set of alive vertices. Removed vertices carry no incident edges in any
/// traversal.
#[derive(Debug, Clone)]
pub struct TournamentGraph {
    d: usize,
    // Orientation per unordered pair {a, b} with a < b: true means a -> b.
    forward: Vec<bool>,
    alive: Vec<bool>,
}

impl TournamentGraph {
    /// Builds the tournament for exactly five permutations of common
    /// dimension: `a -> b` iff `a` precedes `b` in at least three of them.
    /// Five being odd, a strict majority always exists.
    pub fn from_majority(perms: &[Permutation]) -> Result<Self, ReconstructError> {
        if perms.len() != RECONSTRUCT_ARITY {
            return Err(ReconstructError::WrongArity(perms.len()));
        }
        let d = perms[0].dimension();
        for p in perms {
            if p.dimension() != d {
                return Err(ReconstructError::DimensionMismatch(d, p.dimension()));
            }
        }

        let mut pos = vec![[0u32; RECONSTRUCT_ARITY]; d + 1];
        for (t, p) in perms.iter().enumerate() {
            for (i, &s) in p.symbols().iter().enumerate() {
                pos[s as usize][t] = i as u32;
            }
        }

        let mut forward = vec![false; d * (d - 1) / 2];
        let mut idx = 0;
        for a in 1..=d {
            for b in (a + 1)..=d {
                let votes = (0..RECONSTRUCT_ARITY)
                    .filter(|&t| pos[a][t] < pos[b][t])
                    .count();
                forward[idx] = votes >= 3;
                idx += 1;
            }
        }

        Ok(Self {
            d,
            forward,
            alive: vec![true; d + 1],
        })
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn is_alive(&self, v: u32) -> bool {
        self.alive[v as usize]
    }

    pub fn alive_symbols(&self) -> impl Iterator<Item = u32> + '_ {
        (1..=self.d as u32).filter(|&v| self.alive[v as usize])
    }

    fn pair_index(&self, a: u32, b: u32) -> usize {
        debug_assert!(a < b);
        let (a, b, d) = (a as usize, b as usize, self.d);
        (a - 1) * d - (a - 1) * a / 2 + (b - a - 1)
    }

    /// Whether the directed edge `from -> to` exists between two alive
    /// vertices.
    pub fn has_edge(&self, from: u32, to: u32) -> bool {
        if from == to || !self.is_alive(from) || !self.is_alive(to) {
            return false;
        }
        if from < to {
            self.forward[self.pair_index(from, to)]
        } else {
            !self.forward[self.pair_index(to, from)]
        }
    }

    /// A shortest directed cycle through `v` among alive vertices, if any.
    /// In a tournament a shortest cycle has length three, so only triangles
    /// `v -> a -> b -> v` are searched, with `(a, b)` scanned in
    /// lexicographic order and the first hit returned.
    pub fn shortest_cycle_through(&self, v: u32) -> Result<Option<Triangle>, ReconstructError> {
        if !self.is_alive(v) {
            return Err(ReconstructError::VertexRemoved(v));
        }
        for a in 1..=self.d as u32 {
            if a == v || !self.is_alive(a) || !self.has_edge(v, a) {
                continue;
            }
            for b in 1..=self.d as u32 {
                if b == v || b == a || !self.is_alive(b) {
                    continue;
                }
                if self.has_edge(a, b) && self.has_edge(b, v) {
                    return Ok(Some([v, a, b]));
                }
            }
        }
        Ok(None)
    }

    /// Sweeps the vertices in ascending symbol order; whenever the current
    /// vertex is alive and lies on a triangle, all three triangle vertices
    /// are deleted. Returns the removed triangles. The resulting alive
    /// subgraph is acyclic: a vertex surviving its own visit can never gain
    /// a triangle from later deletions.
    pub fn remove_cycles(&mut self) -> Vec<Triangle> {
        let mut removed = Vec::new();
        for v in 1..=self.d as u32 {
            if !self.is_alive(v) {
                continue;
            }
            if let Some(tri) = self
                .shortest_cycle_through(v)
                .expect("v checked alive above")
            {
                for &u in &tri {
                    self.alive[u as usize] = false;
                }
                removed.push(tri);
            }
        }
        removed
    }

    /// The unique topological order of an acyclic tournament: alive vertices
    /// by descending out-degree. Errors with `CyclicGraph` if the score
    /// sequence is not `m-1, m-2, .., 0`, which in a tournament happens iff
    /// a cycle survives.
    pub fn topological_permutation(&self) -> Result<Vec<u32>, ReconstructError> {
        let mut scored: Vec<(usize, u32)> = self
            .alive_symbols()
            .map(|v| {
                let deg = self
                    .alive_symbols()
                    .filter(|&u| u != v && self.has_edge(v, u))
                    .count();
                (deg, v)
            })
            .collect();
        scored.sort_by(|x, y| y.0.cmp(&x.0).then(x.1.cmp(&y.1)));
        let m = scored.len();
        for (rank, &(deg, _)) in scored.iter().enumerate() {
            if deg != m - 1 - rank {
                return Err(ReconstructError::CyclicGraph);
            }
        }
        Ok(scored.into_iter().map(|(_, v)| v).collect())
    }
}

/// The outcome of a reconstruction: the produced permutation plus what the
/// cycle removal deleted. Removed symbols form the suffix of `output`, in
/// ascending order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReconstructionReport {
    pub output: Permutation,
    pub removed_symbols: Vec<u32>,
    pub removed_cycle_count: usize,
}

/// Reconstructs a candidate median from exactly five permutations:
/// majority tournament, triangle removal, topological prefix, removed
/// symbols appended in ascending order. `O(d^3)` overall.
pub fn median_reconstruct(perms: &[Permutation]) -> Result<ReconstructionReport, ReconstructError> {
    let mut graph = TournamentGraph::from_majority(perms)?;
    let removed = graph.remove_cycles();
    let mut symbols = graph.topological_permutation()?;

    let mut removed_symbols: Vec<u32> = removed.iter().flatten().copied().collect();
    removed_symbols.sort_unstable();
    symbols.extend_from_slice(&removed_symbols);

    let output = Permutation::new(symbols).map_err(|e: PermError| {
        // Prefix and suffix partition 1..=d, so this cannot fail.
        unreachable!("reconstruction produced an invalid permutation: {e}")
    })?;
    Ok(ReconstructionReport {
        output,
        removed_symbols,
        removed_cycle_count: removed.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn perm(symbols: &[u32]) -> Permutation {
        Permutation::new(symbols.to_vec()).unwrap()
    }

    fn random_perm(d: usize, rng: &mut ChaCha12Rng) -> Permutation {
        let mut symbols: Vec<u32> = (1..=d as u32).collect();
        symbols.shuffle(rng);
        Permutation::new(symbols).unwrap()
    }

    /// Tournament with arbitrary orientations, for structural tests.
    fn random_tournament(d: usize, rng: &mut ChaCha12Rng) -> TournamentGraph {
        let mut g = TournamentGraph::from_majority(&vec![
            Permutation::identity(d).unwrap();
            RECONSTRUCT_ARITY
        ])
        .unwrap();
        for bit in g.forward.iter_mut() {
            *bit = rng.random_bool(0.5);
        }
        g
    }

    fn has_triangle_exhaustive(g: &TournamentGraph) -> bool {
        let alive: Vec<u32> = g.alive_symbols().collect();
        for &a in &alive {
            for &b in &alive {
                for &c in &alive {
                    if a < b && a < c && b != c && g.has_edge(a, b) && g.has_edge(b, c) && g.has_edge(c, a) {
                        return true;
                    }
                }
            }
        }
        false
    }

    #[test]
    fn wrong_arity_and_dimension_are_rejected() {
        let x = perm(&[1, 2, 3]);
        assert!(matches!(
            TournamentGraph::from_majority(&[x.clone(), x.clone()]),
            Err(ReconstructError::WrongArity(2))
        ));
        let mixed = vec![x.clone(), x.clone(), x.clone(), x.clone(), perm(&[1, 2])];
        assert!(matches!(
            TournamentGraph::from_majority(&mixed),
            Err(ReconstructError::DimensionMismatch(3, 2))
        ));
    }

    #[test]
    fn unanimous_tournament_is_the_input_order() {
        let x = perm(&[3, 1, 4, 2, 5, 6]);
        let g = TournamentGraph::from_majority(&vec![x.clone(); 5]).unwrap();
        let syms = x.symbols();
        for i in 0..syms.len() {
            for j in (i + 1)..syms.len() {
                assert!(g.has_edge(syms[i], syms[j]));
                assert!(!g.has_edge(syms[j], syms[i]));
            }
        }
        assert_eq!(g.topological_permutation().unwrap(), syms);
    }

    #[test]
    fn three_copies_fix_the_majority() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for _ in 0..50 {
            let x = random_perm(7, &mut rng);
            let y = random_perm(7, &mut rng);
            let t = vec![x.clone(), x.clone(), x.clone(), y.clone(), y.clone()];
            let g = TournamentGraph::from_majority(&t).unwrap();
            let g_unanimous = TournamentGraph::from_majority(&vec![x.clone(); 5]).unwrap();
            assert_eq!(g.forward, g_unanimous.forward);
        }
    }

    #[test]
    fn majority_edges_match_pairwise_count_oracle() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let d = 6;
        for _ in 0..50 {
            let t: Vec<Permutation> = (0..5).map(|_| random_perm(d, &mut rng)).collect();
            let g = TournamentGraph::from_majority(&t).unwrap();

            // Independent oracle: count precedences straight off the symbol
            // sequences.
            let mut edge_count = 0;
            for a in 1..=d as u32 {
                for b in 1..=d as u32 {
                    if a == b {
                        continue;
                    }
                    let votes = t
                        .iter()
                        .filter(|p| {
                            let pa = p.symbols().iter().position(|&s| s == a).unwrap();
                            let pb = p.symbols().iter().position(|&s| s == b).unwrap();
                            pa < pb
                        })
                        .count();
                    assert_eq!(g.has_edge(a, b), votes >= 3, "pair ({a}, {b})");
                    if g.has_edge(a, b) {
                        edge_count += 1;
                    }
                }
            }
            assert_eq!(edge_count, d * (d - 1) / 2);
        }
    }

    #[test]
    fn acyclic_tournament_has_no_cycle_through_any_vertex() {
        let x = perm(&[2, 4, 1, 3]);
        let g = TournamentGraph::from_majority(&vec![x; 5]).unwrap();
        for v in 1..=4 {
            assert_eq!(g.shortest_cycle_through(v).unwrap(), None);
        }
    }

    #[test]
    fn rock_paper_scissors_triangle() {
        // 1 -> 2 -> 3 -> 1 from majority over crafted inputs.
        let t = vec![
            perm(&[1, 2, 3]),
            perm(&[1, 2, 3]),
            perm(&[2, 3, 1]),
            perm(&[2, 3, 1]),
            perm(&[3, 1, 2]),
        ];
        let g = TournamentGraph::from_majority(&t).unwrap();
        assert!(g.has_edge(1, 2) && g.has_edge(2, 3) && g.has_edge(3, 1));
        assert_eq!(g.shortest_cycle_through(1).unwrap(), Some([1, 2, 3]));

        let mut g = g;
        let removed = g.remove_cycles();
        assert_eq!(removed, vec![[1, 2, 3]]);
        assert_eq!(g.alive_symbols().count(), 0);
        assert_eq!(g.topological_permutation().unwrap(), Vec::<u32>::new());
    }

    #[test]
    fn vertex_removed_is_reported() {
        let t = vec![
            perm(&[1, 2, 3]),
            perm(&[1, 2, 3]),
            perm(&[2, 3, 1]),
            perm(&[2, 3, 1]),
            perm(&[3, 1, 2]),
        ];
        let mut g = TournamentGraph::from_majority(&t).unwrap();
        g.remove_cycles();
        assert!(matches!(
            g.shortest_cycle_through(1),
            Err(ReconstructError::VertexRemoved(1))
        ));
    }

    #[test]
    fn cycle_search_matches_exhaustive_enumeration() {
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        for _ in 0..200 {
            let g = random_tournament(7, &mut rng);
            for v in 1..=7u32 {
                let found = g.shortest_cycle_through(v).unwrap();
                // Existence must agree with brute-force enumeration of all
                // triples through v.
                let mut exists = false;
                for a in 1..=7u32 {
                    for b in 1..=7u32 {
                        if a != v
                            && b != v
                            && a != b
                            && g.has_edge(v, a)
                            && g.has_edge(a, b)
                            && g.has_edge(b, v)
                        {
                            exists = true;
                        }
                    }
                }
                assert_eq!(found.is_some(), exists);
                if let Some([t0, a, b]) = found {
                    assert_eq!(t0, v);
                    assert!(g.has_edge(v, a) && g.has_edge(a, b) && g.has_edge(b, v));
                }
            }
        }
    }

    #[test]
    fn remove_cycles_leaves_triangle_free_graphs() {
        let mut rng = ChaCha12Rng::seed_from_u64(23);
        for _ in 0..300 {
            let mut g = random_tournament(8, &mut rng);
            let removed = g.remove_cycles();
            for tri in &removed {
                assert_eq!(tri.len(), 3);
            }
            // In a tournament triangle-free implies acyclic.
            assert!(!has_triangle_exhaustive(&g));
            assert!(g.topological_permutation().is_ok());
        }
    }

    #[test]
    fn acyclic_input_is_unchanged() {
        let x = perm(&[5, 2, 4, 1, 3]);
        let mut g = TournamentGraph::from_majority(&vec![x; 5]).unwrap();
        let removed = g.remove_cycles();
        assert!(removed.is_empty());
        assert_eq!(g.alive_symbols().count(), 5);
    }

    #[test]
    fn topological_order_matches_dfs_oracle() {
        let mut rng = ChaCha12Rng::seed_from_u64(29);
        for _ in 0..100 {
            let mut g = random_tournament(6, &mut rng);
            g.remove_cycles();
            let ours = g.topological_permutation().unwrap();

            // Independent DFS topological sort.
            let alive: Vec<u32> = g.alive_symbols().collect();
            let mut visited = std::collections::HashSet::new();
            let mut order = Vec::new();
            fn dfs(
                v: u32,
                g: &TournamentGraph,
                alive: &[u32],
                visited: &mut std::collections::HashSet<u32>,
                order: &mut Vec<u32>,
            ) {
                visited.insert(v);
                for &u in alive {
                    if !visited.contains(&u) && g.has_edge(v, u) {
                        dfs(u, g, alive, visited, order);
                    }
                }
                order.push(v);
            }
            for &v in &alive {
                if !visited.contains(&v) {
                    dfs(v, &g, &alive, &mut visited, &mut order);
                }
            }
            order.reverse();
            assert_eq!(ours, order);

            // Every edge points forward.
            for i in 0..ours.len() {
                for j in (i + 1)..ours.len() {
                    assert!(g.has_edge(ours[i], ours[j]));
                }
            }
        }
    }

    #[test]
    fn reconstruct_five_copies_returns_input() {
        let x = perm(&[4, 1, 3, 2, 6, 5]);
        let report = median_reconstruct(&vec![x.clone(); 5]).unwrap();
        assert_eq!(report.output, x);
        assert!(report.removed_symbols.is_empty());
        assert_eq!(report.removed_cycle_count, 0);
    }

    #[test]
    fn reconstruct_majority_of_three_wins() {
        let mut rng = ChaCha12Rng::seed_from_u64(31);
        for _ in 0..100 {
            let x = random_perm(9, &mut rng);
            let y = random_perm(9, &mut rng);
            let z = random_perm(9, &mut rng);
            let t = vec![x.clone(), x.clone(), x.clone(), y, z];
            let report = median_reconstruct(&t).unwrap();
            assert_eq!(report.output, x);
        }
    }

    #[test]
    fn reconstruct_is_input_order_insensitive() {
        let mut rng = ChaCha12Rng::seed_from_u64(37);
        for _ in 0..50 {
            let mut t: Vec<Permutation> = (0..5).map(|_| random_perm(8, &mut rng)).collect();
            let report = median_reconstruct(&t).unwrap();
            t.shuffle(&mut rng);
            let shuffled = median_reconstruct(&t).unwrap();
            assert_eq!(report, shuffled);
        }
    }

    #[test]
    fn reconstruction_quality_vs_exhaustive_median_logged() {
        // Five random permutations of dimension six: the output must be a
        // valid permutation, and its distance to the exhaustive 1-median of
        // the tuple is printed for inspection.
        let mut rng = ChaCha12Rng::seed_from_u64(53);
        let mut scratch = crate::perm::UlamScratch::new();
        for trial in 0..5 {
            let t: Vec<Permutation> = (0..5).map(|_| random_perm(6, &mut rng)).collect();
            let report = median_reconstruct(&t).unwrap();
            assert_eq!(report.output.dimension(), 6);

            let tuple_objective = |cand: &Permutation, scratch: &mut crate::perm::UlamScratch| {
                t.iter()
                    .map(|p| scratch.distance_unchecked(p.symbols(), cand.symbols()) as u64)
                    .sum::<u64>()
            };
            let mut best: Option<(u64, Permutation)> = None;
            for cand in crate::perm::all_permutations(6) {
                let obj = tuple_objective(&cand, &mut scratch);
                if best.as_ref().is_none_or(|(b, _)| obj < *b) {
                    best = Some((obj, cand));
                }
            }
            let (opt_obj, opt_median) = best.unwrap();
            let recon_obj = tuple_objective(&report.output, &mut scratch);
            let gap =
                scratch.distance_unchecked(report.output.symbols(), opt_median.symbols());
            println!(
                "trial {trial}: reconstruction objective {recon_obj}, exhaustive optimum \
                 {opt_obj}, distance(reconstruction, optimum) = {gap}"
            );
        }
    }

    #[test]
    fn reconstruct_output_is_valid_and_suffix_sorted() {
        let mut rng = ChaCha12Rng::seed_from_u64(41);
        for _ in 0..200 {
            let t: Vec<Permutation> = (0..5).map(|_| random_perm(10, &mut rng)).collect();
            let report = median_reconstruct(&t).unwrap();
            assert_eq!(report.output.dimension(), 10);
            let suffix =
                &report.output.symbols()[10 - report.removed_symbols.len()..];
            assert_eq!(suffix, report.removed_symbols.as_slice());
            assert!(report.removed_symbols.windows(2).all(|w| w[0] < w[1]));
            assert_eq!(report.removed_symbols.len(), 3 * report.removed_cycle_count);
        }
    }
}
