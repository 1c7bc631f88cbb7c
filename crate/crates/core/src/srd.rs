//! Footrule (Manhattan) distance between rankings and normalized SRD scores.

use serde::Serialize;

use crate::error::{Result, SrdError};
use crate::ranking::Ranking;

/// Distance in half-rank units, i.e. twice the L1 distance. Exact even with ties.
pub fn distance_doubled(a: &Ranking, b: &Ranking) -> Result<u64> {
    if a.len() != b.len() {
        return Err(SrdError::SizeMismatch { left: a.len(), right: b.len() });
    }
    Ok(doubled_l1(a.doubled_ranks(), b.doubled_ranks()))
}

pub(crate) fn doubled_l1(a: &[u32], b: &[u32]) -> u64 {
    a.iter().zip(b).map(|(&x, &y)| u64::from(x.abs_diff(y))).sum()
}

/// `sum_k |a_k - b_k|`.
pub fn distance(a: &Ranking, b: &Ranking) -> Result<f64> {
    distance_doubled(a, b).map(|d| d as f64 / 2.0)
}

/// Largest footrule distance between two permutations of `n` objects:
/// `n^2 / 2` for even `n`, `(n^2 - 1) / 2` for odd `n`.
pub fn max_distance(n: usize) -> Result<u64> {
    if n < 2 {
        return Err(SrdError::TooShort { len: n });
    }
    Ok(max_distance_unchecked(n))
}

pub(crate) fn max_distance_unchecked(n: usize) -> u64 {
    let n = n as u64;
    if n.is_multiple_of(2) {
        n * n / 2
    } else {
        (n * n - 1) / 2
    }
}

/// Raw and normalized distance of a ranking from its reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SrdScore {
    raw_doubled: u64,
    n: usize,
}

impl SrdScore {
    /// Builds a score from a raw distance; fails if it is not a multiple of
    /// 1/2 or exceeds the maximum for `n`.
    pub fn from_raw(raw: f64, n: usize) -> Result<Self> {
        let max = max_distance(n)?;
        let doubled = 2.0 * raw;
        if !doubled.is_finite() || doubled < 0.0 || doubled.fract() != 0.0 || doubled > (2 * max) as f64 {
            return Err(SrdError::InvalidRanking(format!("raw distance {raw} is not attainable for n = {n}")));
        }
        Ok(Self { raw_doubled: doubled as u64, n })
    }

    pub fn raw(&self) -> f64 {
        self.raw_doubled as f64 / 2.0
    }

    pub fn raw_doubled(&self) -> u64 {
        self.raw_doubled
    }

    pub fn normalized(&self) -> f64 {
        self.raw_doubled as f64 / (2 * max_distance_unchecked(self.n)) as f64
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// SRD of `ranking` against `reference`, normalized by the maximal distance.
/// Tied rankings use the same normalizer.
pub fn srd(ranking: &Ranking, reference: &Ranking) -> Result<SrdScore> {
    let raw_doubled = distance_doubled(ranking, reference)?;
    Ok(SrdScore { raw_doubled, n: ranking.len() })
}
