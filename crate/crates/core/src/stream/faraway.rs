//! Faraway sampling: a monotone sampler whose union of rings keeps, for
//! every cluster scale, a few well-separated representatives.
//!
//! Rings carry geometrically spaced distance thresholds spanning `[1, d]`.
//! A point enters a ring if it is strictly farther than the ring's
//! threshold from every current member and the ring is below its cap;
//! members are never evicted. The sample is the union of the rings.

use super::arena::Arena;

#[derive(Debug, Clone)]
pub(crate) struct Ring {
    pub threshold: f64,
    pub cap: usize,
    pub members: Vec<u32>,
}

#[derive(Debug, Clone)]
pub(crate) struct FarawaySampler {
    pub rings: Vec<Ring>,
}

impl FarawaySampler {
    /// `ring_count` thresholds geometric in `[1, d]`, each ring capped so
    /// the whole sample respects `total_bound`.
    pub(crate) fn new(ring_count: usize, d: usize, total_bound: usize) -> Self {
        let ring_count = ring_count.max(1);
        let cap = total_bound.div_ceil(ring_count).max(1);
        let rings = (0..ring_count)
            .map(|i| {
                let threshold = if ring_count == 1 {
                    1.0
                } else {
                    (d as f64).powf(i as f64 / (ring_count - 1) as f64)
                };
                Ring {
                    threshold,
                    cap,
                    members: Vec::new(),
                }
            })
            .collect();
        Self { rings }
    }

    /// Offers one stream point; `dist_to` resolves the distance from the
    /// point to an interned member. Returns how many rings accepted.
    pub(crate) fn offer(
        &mut self,
        arena: &mut Arena,
        x: &crate::perm::Permutation,
        mut dist_to: impl FnMut(&Arena, u32) -> u32,
    ) -> usize {
        let mut accepted = 0;
        for r in 0..self.rings.len() {
            if self.rings[r].members.len() >= self.rings[r].cap {
                continue;
            }
            let far_enough = self.rings[r]
                .members
                .iter()
                .all(|&slot| dist_to(arena, slot) as f64 > self.rings[r].threshold);
            if far_enough {
                let slot = arena.acquire(x);
                self.rings[r].members.push(slot);
                accepted += 1;
            }
        }
        accepted
    }

    pub(crate) fn member_count(&self) -> usize {
        self.rings.iter().map(|r| r.members.len()).sum()
    }

    /// Distinct sampled permutations, deduplicated across rings.
    pub(crate) fn sample<'a>(&self, arena: &'a Arena) -> Vec<&'a crate::perm::Permutation> {
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::new();
        for ring in &self.rings {
            for &slot in &ring.members {
                if seen.insert(slot) {
                    out.push(arena.get(slot));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::{Permutation, UlamScratch};

    fn perm(symbols: &[u32]) -> Permutation {
        Permutation::new(symbols.to_vec()).unwrap()
    }

    fn offer_plain(sampler: &mut FarawaySampler, arena: &mut Arena, x: &Permutation) -> usize {
        let mut scratch = UlamScratch::new();
        sampler.offer(arena, x, |arena, slot| {
            scratch.distance_unchecked(x.symbols(), arena.get(slot).symbols())
        })
    }

    #[test]
    fn constant_stream_keeps_a_singleton() {
        let mut arena = Arena::new();
        let mut sampler = FarawaySampler::new(4, 6, 100);
        let x = perm(&[3, 1, 2, 4, 5, 6]);
        for _ in 0..50 {
            offer_plain(&mut sampler, &mut arena, &x);
        }
        let sample = sampler.sample(&arena);
        assert_eq!(sample, vec![&x]);
    }

    #[test]
    fn caps_are_respected() {
        let mut arena = Arena::new();
        let mut sampler = FarawaySampler::new(3, 8, 6);
        let perms = crate::perm::all_permutations(4);
        for p in &perms {
            let padded: Vec<u32> = p
                .symbols()
                .iter()
                .copied()
                .chain(5..=8)
                .collect();
            offer_plain(&mut sampler, &mut arena, &perm(&padded));
        }
        assert!(sampler.member_count() <= 6);
        for ring in &sampler.rings {
            assert!(ring.members.len() <= ring.cap);
        }
    }

    #[test]
    fn thresholds_span_one_to_d_geometrically() {
        let sampler = FarawaySampler::new(5, 16, 100);
        let t: Vec<f64> = sampler.rings.iter().map(|r| r.threshold).collect();
        assert_eq!(t[0], 1.0);
        assert_eq!(t[4], 16.0);
        for w in t.windows(2) {
            assert!(w[1] > w[0]);
        }
    }
}
