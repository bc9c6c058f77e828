//! Planted-cluster dataset generation.
//!
//! Each point is its cluster's center with `radius` random character moves
//! applied (pick a symbol, reinsert it at a random position), so every
//! point sits within Ulam distance `radius` of its center. Outliers are
//! uniform random permutations. The shuffled dataset goes to one file and
//! the centers to a sidecar truth file.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use ulam_median::{Dataset, DatasetError, Permutation};

#[derive(Debug, Error)]
pub enum GenError {
    #[error("sizes must list exactly k cluster sizes, got {got} for k={k}")]
    SizesMismatch { k: usize, got: usize },
    #[error("cluster sizes must be positive")]
    EmptyCluster,
    #[error("radius must be smaller than d")]
    RadiusTooLarge,
    #[error("k and d must be at least 1")]
    Degenerate,
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

#[derive(Debug, Clone)]
pub struct PlantedSpec {
    pub k: usize,
    pub d: usize,
    pub sizes: Vec<usize>,
    pub radius: usize,
    pub outlier_count: usize,
    pub seed: u64,
}

/// A generated instance: the shuffled dataset, the planted centers, and the
/// per-point truth (`Some(cluster)` or `None` for an outlier).
#[derive(Debug, Clone)]
pub struct PlantedInstance {
    pub dataset: Dataset,
    pub centers: Vec<Permutation>,
    pub labels: Vec<Option<usize>>,
}

pub fn random_permutation(d: usize, rng: &mut ChaCha12Rng) -> Permutation {
    let mut symbols: Vec<u32> = (1..=d as u32).collect();
    symbols.shuffle(rng);
    Permutation::new(symbols).expect("shuffled identity is a permutation")
}

/// One character move: a uniformly chosen symbol is removed and reinserted
/// at a uniformly chosen position (possibly its own).
pub fn character_move(symbols: &mut Vec<u32>, rng: &mut ChaCha12Rng) {
    let d = symbols.len();
    let symbol = rng.random_range(1..=d as u32);
    let from = symbols.iter().position(|&s| s == symbol).expect("bijection");
    symbols.remove(from);
    let to = rng.random_range(0..=symbols.len());
    symbols.insert(to, symbol);
}

pub fn perturb(center: &Permutation, moves: usize, rng: &mut ChaCha12Rng) -> Permutation {
    let mut symbols = center.symbols().to_vec();
    for _ in 0..moves {
        character_move(&mut symbols, rng);
    }
    Permutation::new(symbols).expect("moves preserve the bijection")
}

pub fn generate(spec: &PlantedSpec) -> Result<PlantedInstance, GenError> {
    if spec.k == 0 || spec.d == 0 {
        return Err(GenError::Degenerate);
    }
    if spec.sizes.len() != spec.k {
        return Err(GenError::SizesMismatch {
            k: spec.k,
            got: spec.sizes.len(),
        });
    }
    if spec.sizes.contains(&0) {
        return Err(GenError::EmptyCluster);
    }
    if spec.radius >= spec.d {
        return Err(GenError::RadiusTooLarge);
    }

    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
    let centers: Vec<Permutation> = (0..spec.k)
        .map(|_| random_permutation(spec.d, &mut rng))
        .collect();

    let mut labeled: Vec<(Permutation, Option<usize>)> = Vec::new();
    for (i, &size) in spec.sizes.iter().enumerate() {
        for _ in 0..size {
            labeled.push((perturb(&centers[i], spec.radius, &mut rng), Some(i)));
        }
    }
    for _ in 0..spec.outlier_count {
        labeled.push((random_permutation(spec.d, &mut rng), None));
    }
    labeled.shuffle(&mut rng);

    let (points, labels): (Vec<Permutation>, Vec<Option<usize>>) = labeled.into_iter().unzip();
    Ok(PlantedInstance {
        dataset: Dataset::new(points)?,
        centers,
        labels,
    })
}

/// Truth sidecar text: header `d k`, then one center per line.
pub fn truth_text(instance: &PlantedInstance) -> String {
    let mut out = format!(
        "{} {}\n",
        instance.centers[0].dimension(),
        instance.centers.len()
    );
    for c in &instance.centers {
        out.push_str(&c.to_string());
        out.push('\n');
    }
    out
}

/// Parses a truth sidecar back into the centers.
pub fn parse_truth(text: &str) -> Result<Vec<Permutation>, DatasetError> {
    let ds = Dataset::parse(text)?;
    Ok(ds.points().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ulam_median::ulam_distance;

    fn spec() -> PlantedSpec {
        PlantedSpec {
            k: 2,
            d: 10,
            sizes: vec![5, 7],
            radius: 2,
            outlier_count: 3,
            seed: 99,
        }
    }

    #[test]
    fn radius_zero_copies_the_centers() {
        let mut s = spec();
        s.radius = 0;
        s.outlier_count = 0;
        let inst = generate(&s).unwrap();
        for (p, label) in inst.dataset.points().iter().zip(&inst.labels) {
            assert_eq!(p, &inst.centers[label.unwrap()]);
        }
    }

    #[test]
    fn points_stay_within_radius_of_their_center() {
        let inst = generate(&spec()).unwrap();
        assert_eq!(inst.dataset.len(), 15);
        for (p, label) in inst.dataset.points().iter().zip(&inst.labels) {
            if let Some(c) = label {
                let dist = ulam_distance(p, &inst.centers[*c]).unwrap().value() as usize;
                assert!(dist <= 2, "point drifted to distance {dist}");
            }
        }
    }

    #[test]
    fn generation_is_deterministic_per_seed() {
        let a = generate(&spec()).unwrap();
        let b = generate(&spec()).unwrap();
        assert_eq!(a.dataset, b.dataset);
        assert_eq!(a.centers, b.centers);

        let mut other = spec();
        other.seed = 100;
        let c = generate(&other).unwrap();
        assert_ne!(a.dataset, c.dataset);
    }

    #[test]
    fn truth_roundtrip() {
        let inst = generate(&spec()).unwrap();
        let parsed = parse_truth(&truth_text(&inst)).unwrap();
        assert_eq!(parsed, inst.centers);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut s = spec();
        s.sizes = vec![5];
        assert!(matches!(generate(&s), Err(GenError::SizesMismatch { .. })));
        let mut s = spec();
        s.radius = 10;
        assert!(matches!(generate(&s), Err(GenError::RadiusTooLarge)));
        let mut s = spec();
        s.sizes = vec![0, 3];
        assert!(matches!(generate(&s), Err(GenError::EmptyCluster)));
    }
}
