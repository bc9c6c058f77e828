//! Datasets of permutations and the text format used to exchange them.
//!
//! A dataset file starts with a header line `d n`, followed by `n` lines
//! each holding one permutation of `1..=d` as space-separated 1-based
//! integers. Blank lines are skipped; anything else malformed is rejected
//! with the offending line number.

use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

use crate::perm::{PermError, Permutation};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("dataset must contain at least one permutation")]
    Empty,
    #[error("line {line}: expected permutation of dimension {expected}, got dimension {got}")]
    PointDimension {
        line: usize,
        expected: usize,
        got: usize,
    },
    #[error("line {line}: malformed header, expected `d n`")]
    Header { line: usize },
    #[error("line {line}: bad token {token:?}")]
    Token { line: usize, token: String },
    #[error("line {line}: {source}")]
    Permutation { line: usize, source: PermError },
    #[error("expected {expected} permutation lines, found {got}")]
    MissingLines { expected: usize, got: usize },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// An ordered multiset of permutations of a common dimension. Duplicates
/// are permitted; the order is the order of arrival.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    points: Vec<Permutation>,
    d: usize,
}

impl Dataset {
    pub fn new(points: Vec<Permutation>) -> Result<Self, DatasetError> {
        let d = match points.first() {
            Some(p) => p.dimension(),
            None => return Err(DatasetError::Empty),
        };
        for (i, p) in points.iter().enumerate() {
            if p.dimension() != d {
                return Err(DatasetError::PointDimension {
                    line: i + 1,
                    expected: d,
                    got: p.dimension(),
                });
            }
        }
        Ok(Self { points, d })
    }

    pub fn points(&self) -> &[Permutation] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    /// Distinct permutations in order of first occurrence, paired with the
    /// index where each first occurs.
    pub fn distinct(&self) -> Vec<(usize, &Permutation)> {
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::new();
        for (i, p) in self.points.iter().enumerate() {
            if seen.insert(p.symbols()) {
                out.push((i, p));
            }
        }
        out
    }

    /// Parses the `d n` + permutation-lines format.
    pub fn parse(text: &str) -> Result<Self, DatasetError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l))
            .filter(|(_, l)| !l.trim().is_empty());

        let (header_no, header) = lines.next().ok_or(DatasetError::Header { line: 1 })?;
        let mut it = header.split_whitespace();
        let d: usize = parse_token(&mut it, header_no, header)?;
        let n: usize = parse_token(&mut it, header_no, header)?;
        if it.next().is_some() {
            return Err(DatasetError::Header { line: header_no });
        }
        if n == 0 {
            return Err(DatasetError::Empty);
        }

        let mut points = Vec::with_capacity(n);
        for _ in 0..n {
            let (line_no, line) = lines.next().ok_or(DatasetError::MissingLines {
                expected: n,
                got: points.len(),
            })?;
            let p = parse_perm_line(line_no, line)?;
            if p.dimension() != d {
                return Err(DatasetError::PointDimension {
                    line: line_no,
                    expected: d,
                    got: p.dimension(),
                });
            }
            points.push(p);
        }
        Dataset::new(points)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self, DatasetError> {
        Self::parse(&fs::read_to_string(path)?)
    }

    /// Renders back to the text format, ending with a newline.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.d, self.points.len());
        for p in &self.points {
            out.push_str(&p.to_string());
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<(), DatasetError> {
        fs::write(path, self.to_text())?;
        Ok(())
    }
}

fn parse_token<T: std::str::FromStr>(
    it: &mut std::str::SplitWhitespace<'_>,
    line: usize,
    whole: &str,
) -> Result<T, DatasetError> {
    let token = it.next().ok_or(DatasetError::Header { line })?;
    token.parse().map_err(|_| DatasetError::Token {
        line,
        token: if token.is_empty() {
            whole.to_string()
        } else {
            token.to_string()
        },
    })
}

/// Parses a single permutation line, reporting `line_no` on failure.
pub fn parse_perm_line(line_no: usize, line: &str) -> Result<Permutation, DatasetError> {
    let mut symbols = Vec::new();
    for token in line.split_whitespace() {
        let s: u32 = token.parse().map_err(|_| DatasetError::Token {
            line: line_no,
            token: token.to_string(),
        })?;
        symbols.push(s);
    }
    Permutation::new(symbols).map_err(|source| DatasetError::Permutation {
        line: line_no,
        source,
    })
}

/// A non-empty set of candidate medians of a common dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MedianSet {
    medians: Vec<Permutation>,
}

impl MedianSet {
    pub fn new(medians: Vec<Permutation>) -> Result<Self, DatasetError> {
        let d = match medians.first() {
            Some(p) => p.dimension(),
            None => return Err(DatasetError::Empty),
        };
        for (i, p) in medians.iter().enumerate() {
            if p.dimension() != d {
                return Err(DatasetError::PointDimension {
                    line: i + 1,
                    expected: d,
                    got: p.dimension(),
                });
            }
        }
        Ok(Self { medians })
    }

    pub fn medians(&self) -> &[Permutation] {
        &self.medians
    }

    pub fn len(&self) -> usize {
        self.medians.len()
    }

    pub fn is_empty(&self) -> bool {
        self.medians.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.medians[0].dimension()
    }
}
