//! Permutations over `1..=d` and the Ulam distance between them.
//!
//! The Ulam distance counts the minimum number of character moves (pick a
//! symbol up, reinsert it elsewhere) needed to turn one permutation into
//! another, which equals `d` minus the length of a longest common
//! subsequence. Since both sequences are permutations of the same symbol
//! set, the LCS reduces to a longest increasing subsequence after
//! relabeling, solved here by patience sorting in `O(d log d)`.

use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PermError {
    #[error("permutation must contain at least one symbol")]
    DimensionZero,
    #[error("symbol {0} is duplicated or out of range; expected each of 1..=d exactly once")]
    NotBijection(u32),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
}

/// A permutation of the symbols `1..=d`, validated at construction and
/// immutable afterwards. Values are freely shareable across threads.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Permutation {
    symbols: Vec<u32>,
}

impl Permutation {
    /// Validates that `symbols` is a bijection on `{1, .., d}` where
    /// `d = symbols.len()`.
    pub fn new(symbols: Vec<u32>) -> Result<Self, PermError> {
        if symbols.is_empty() {
            return Err(PermError::DimensionZero);
        }
        let d = symbols.len();
        let mut seen = vec![false; d + 1];
        for &s in &symbols {
            if s == 0 || s as usize > d {
                return Err(PermError::NotBijection(s));
            }
            if seen[s as usize] {
                return Err(PermError::NotBijection(s));
            }
            seen[s as usize] = true;
        }
        Ok(Self { symbols })
    }

    /// The identity permutation `1, 2, .., d`.
    pub fn identity(d: usize) -> Result<Self, PermError> {
        Self::new((1..=d as u32).collect())
    }

    pub fn dimension(&self) -> usize {
        self.symbols.len()
    }

    /// The symbols in order, 1-based.
    pub fn symbols(&self) -> &[u32] {
        &self.symbols
    }

    /// Parses one line of space-separated 1-based integers.
    pub fn parse_line(line: &str) -> Result<Self, PermError> {
        let mut symbols = Vec::new();
        for token in line.split_whitespace() {
            let s: u32 = token.parse().map_err(|_| PermError::NotBijection(0))?;
            symbols.push(s);
        }
        Self::new(symbols)
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.symbols.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

/// An Ulam distance: a count of character moves. For two permutations of
/// dimension `d` the value lies in `0..=d-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Distance(u32);

impl Distance {
    pub fn value(self) -> u32 {
        self.0
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<Distance> for u64 {
    fn from(d: Distance) -> u64 {
        d.0 as u64
    }
}

/// Reusable buffers for repeated distance evaluations. The public
/// free functions allocate internally; hot loops should keep one of
/// these around instead.
#[derive(Debug, Default, Clone)]
pub struct UlamScratch {
    pos: Vec<u32>,
    tails: Vec<u32>,
}

impl UlamScratch {
    pub fn new() -> Self {
        Self::default()
    }

    /// `|lcs(x, y)|` via relabel-then-LIS patience sorting.
    pub fn lcs_length(&mut self, x: &Permutation, y: &Permutation) -> Result<usize, PermError> {
        if x.dimension() != y.dimension() {
            return Err(PermError::DimensionMismatch(x.dimension(), y.dimension()));
        }
        Ok(self.lcs_unchecked(x.symbols(), y.symbols()))
    }

    pub fn distance(&mut self, x: &Permutation, y: &Permutation) -> Result<Distance, PermError> {
        let lcs = self.lcs_length(x, y)?;
        Ok(Distance((x.dimension() - lcs) as u32))
    }

    /// Distance without the dimension check; callers guarantee `x.len() == y.len()`.
    pub(crate) fn distance_unchecked(&mut self, x: &[u32], y: &[u32]) -> u32 {
        debug_assert_eq!(x.len(), y.len());
        (x.len() - self.lcs_unchecked(x, y)) as u32
    }

    fn lcs_unchecked(&mut self, x: &[u32], y: &[u32]) -> usize {
        let d = x.len();
        self.pos.clear();
        self.pos.resize(d + 1, 0);
        for (i, &s) in x.iter().enumerate() {
            self.pos[s as usize] = i as u32;
        }
        // LIS of y relabeled by position in x. Symbols are distinct, so
        // strict and non-strict LIS coincide.
        self.tails.clear();
        for &s in y {
            let v = self.pos[s as usize];
            match self.tails.binary_search(&v) {
                // v never repeats; Err gives the insertion point.
                Ok(_) => unreachable!("positions are distinct"),
                Err(idx) => {
                    if idx == self.tails.len() {
                        self.tails.push(v);
                    } else {
                        self.tails[idx] = v;
                    }
                }
            }
        }
        self.tails.len()
    }
}

/// Length of a longest common subsequence of two equal-dimension
/// permutations, computed in `O(d log d)`.
pub fn lcs_length(x: &Permutation, y: &Permutation) -> Result<usize, PermError> {
    UlamScratch::new().lcs_length(x, y)
}

/// Reference LCS: the textbook `O(d^2)` dynamic program. Kept as an
/// independent check on [`lcs_length`]; shares no code with it.
pub fn lcs_length_oracle(x: &Permutation, y: &Permutation) -> Result<usize, PermError> {
    if x.dimension() != y.dimension() {
        return Err(PermError::DimensionMismatch(x.dimension(), y.dimension()));
    }
    let (a, b) = (x.symbols(), y.symbols());
    let n = b.len();
    let mut prev = vec![0usize; n + 1];
    let mut cur = vec![0usize; n + 1];
    for &ai in a {
        for (j, &bj) in b.iter().enumerate() {
            cur[j + 1] = if ai == bj {
                prev[j] + 1
            } else {
                prev[j + 1].max(cur[j])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[n])
}

/// The Ulam distance `d - |lcs(x, y)|`.
pub fn ulam_distance(x: &Permutation, y: &Permutation) -> Result<Distance, PermError> {
    UlamScratch::new().distance(x, y)
}

/// All `d!` permutations of `1..=d` in lexicographic order. Intended for
/// exhaustive small-dimension searches; callers must keep `d` small.
pub fn all_permutations(d: usize) -> Vec<Permutation> {
    let mut out = Vec::new();
    let mut symbols: Vec<u32> = (1..=d as u32).collect();
    heap_permute(&mut symbols, d, &mut out);
    out.sort();
    out
}

fn heap_permute(symbols: &mut Vec<u32>, k: usize, out: &mut Vec<Permutation>) {
    if k <= 1 {
        out.push(Permutation::new(symbols.clone()).expect("valid by construction"));
        return;
    }
    for i in 0..k {
        heap_permute(symbols, k - 1, out);
        if k.is_multiple_of(2) {
            symbols.swap(i, k - 1);
        } else {
            symbols.swap(0, k - 1);
        }
    }
}
