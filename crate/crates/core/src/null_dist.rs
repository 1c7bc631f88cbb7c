//! Null distribution of SRD under uniformly random rankings and the SRD
//! permutation test.
//!
//! For `n <= 10` the exact law is obtained by enumerating all of `S_n`
//! (right-invariance makes the reference irrelevant, so distances are taken
//! from the identity). Larger `n` use the normal approximation
//! `SRDnorm ~ N(2/3, sqrt(8 / (45 n)))`.

use std::sync::{Arc, OnceLock};

use serde::Serialize;

use crate::error::{Result, SrdError};
use crate::special::{normal_cdf, normal_quantile};
use crate::srd::{max_distance_unchecked, SrdScore};

/// Largest `n` for which the exact null is enumerated.
pub const EXACT_MAX_N: usize = 10;

/// Distance counts over all `n!` permutations.
#[derive(Debug)]
struct ExactCounts {
    /// `counts[d]` = number of permutations at raw distance `d` from the identity.
    counts: Vec<u64>,
    total: u64,
}

static EXACT_CACHE: [OnceLock<Arc<ExactCounts>>; EXACT_MAX_N + 1] = [const { OnceLock::new() }; EXACT_MAX_N + 1];

fn enumerate_counts(n: usize) -> ExactCounts {
    let max = max_distance_unchecked(n) as usize;
    let mut counts = vec![0u64; max + 1];
    let mut perm: Vec<usize> = (0..n).collect();
    let mut dist = 0usize;
    counts[0] += 1;
    let mut total = 1u64;

    // Heap's algorithm, iterative; the distance is updated per transposition
    let mut c = vec![0usize; n];
    let mut i = 1;
    while i < n {
        if c[i] < i {
            let j = if i % 2 == 0 { 0 } else { c[i] };
            dist -= perm[i].abs_diff(i) + perm[j].abs_diff(j);
            perm.swap(i, j);
            dist += perm[i].abs_diff(i) + perm[j].abs_diff(j);
            counts[dist] += 1;
            total += 1;
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    ExactCounts { counts, total }
}

#[derive(Debug, Clone)]
enum Law {
    Exact(Arc<ExactCounts>),
    Normal { mean: f64, sd: f64 },
}

/// Null law of the SRD of a uniformly random ranking of `n` objects.
#[derive(Debug, Clone)]
pub struct SrdNull {
    n: usize,
    law: Law,
}

/// Exact null by full enumeration; cached per `n` after the first call.
pub fn exact_null(n: usize) -> Result<SrdNull> {
    if !(2..=EXACT_MAX_N).contains(&n) {
        return Err(SrdError::OutOfSupportedRange { n });
    }
    let counts = EXACT_CACHE[n].get_or_init(|| Arc::new(enumerate_counts(n))).clone();
    Ok(SrdNull { n, law: Law::Exact(counts) })
}

/// Asymptotic normal null with mean 2/3 and sd `sqrt(8 / (45 n))` in normalized units.
pub fn normal_null(n: usize) -> Result<SrdNull> {
    if n < 2 {
        return Err(SrdError::TooShort { len: n });
    }
    Ok(SrdNull { n, law: Law::Normal { mean: 2.0 / 3.0, sd: (8.0 / (45.0 * n as f64)).sqrt() } })
}

/// Exact null for small `n`, normal approximation otherwise.
pub fn null_for(n: usize) -> Result<SrdNull> {
    if n <= EXACT_MAX_N {
        exact_null(n)
    } else {
        normal_null(n)
    }
}

impl SrdNull {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.law, Law::Exact(_))
    }

    fn max(&self) -> f64 {
        max_distance_unchecked(self.n) as f64
    }

    /// `(raw distance, probability)` pairs with nonzero mass; `None` for the normal law.
    pub fn pmf(&self) -> Option<Vec<(u64, f64)>> {
        match &self.law {
            Law::Exact(c) => Some(
                c.counts
                    .iter()
                    .enumerate()
                    .filter(|(_, &k)| k > 0)
                    .map(|(d, &k)| (d as u64, k as f64 / c.total as f64))
                    .collect(),
            ),
            Law::Normal { .. } => None,
        }
    }

    /// `(raw distance, count)` pairs and the number of permutations, exact kind only.
    pub fn counts(&self) -> Option<(Vec<(u64, u64)>, u64)> {
        match &self.law {
            Law::Exact(c) => Some((
                c.counts.iter().enumerate().filter(|(_, &k)| k > 0).map(|(d, &k)| (d as u64, k)).collect(),
                c.total,
            )),
            Law::Normal { .. } => None,
        }
    }

    pub fn mean_normalized(&self) -> f64 {
        match &self.law {
            Law::Exact(c) => {
                let s: f64 = c.counts.iter().enumerate().map(|(d, &k)| d as f64 * k as f64).sum();
                s / c.total as f64 / self.max()
            }
            Law::Normal { mean, .. } => *mean,
        }
    }

    pub fn sd_normalized(&self) -> f64 {
        match &self.law {
            Law::Exact(c) => {
                let mean = self.mean_normalized() * self.max();
                let v: f64 =
                    c.counts.iter().enumerate().map(|(d, &k)| (d as f64 - mean).powi(2) * k as f64).sum::<f64>()
                        / c.total as f64;
                v.sqrt() / self.max()
            }
            Law::Normal { sd, .. } => *sd,
        }
    }

    /// `P(SRD <= observed)` for an observed doubled raw distance.
    fn cdf_doubled(&self, raw_doubled: u64) -> f64 {
        match &self.law {
            Law::Exact(c) => {
                let below: u64 = c.counts.iter().take((raw_doubled / 2) as usize + 1).sum();
                below as f64 / c.total as f64
            }
            Law::Normal { mean, sd } => {
                let x = raw_doubled as f64 / (2.0 * self.max());
                normal_cdf((x - mean) / sd)
            }
        }
    }

    /// `P(SRDnorm <= x)`.
    pub fn cdf_normalized(&self, x: f64) -> f64 {
        match &self.law {
            Law::Exact(_) => {
                if x < 0.0 {
                    return 0.0;
                }
                let raw = (x * self.max() + 1e-9).floor();
                self.cdf_doubled((2.0 * raw) as u64)
            }
            Law::Normal { mean, sd } => normal_cdf((x - mean) / sd),
        }
    }

    /// Smallest normalized value whose CDF reaches `q` (exact kind), or the
    /// normal quantile.
    pub fn quantile_normalized(&self, q: f64) -> f64 {
        assert!(q > 0.0 && q < 1.0, "quantile level must lie in (0, 1)");
        match &self.law {
            Law::Exact(c) => {
                let target = q * c.total as f64;
                let mut acc = 0u64;
                for (d, &k) in c.counts.iter().enumerate() {
                    acc += k;
                    if acc as f64 >= target {
                        return d as f64 / self.max();
                    }
                }
                1.0
            }
            Law::Normal { mean, sd } => mean + sd * normal_quantile(q),
        }
    }
}

/// Outcome of comparing an observed SRD with random rankings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PermTestResult {
    pub srd_normalized: f64,
    /// One-sided lower tail `P(SRDnorm_null <= observed)`.
    pub p_value: f64,
    /// 5% quantile of the null.
    pub xx1: f64,
    pub median: f64,
    /// 95% quantile of the null.
    pub xx19: f64,
    pub exact: bool,
}

pub fn perm_test(score: &SrdScore) -> Result<PermTestResult> {
    let null = null_for(score.n())?;
    Ok(PermTestResult {
        srd_normalized: score.normalized(),
        p_value: null.cdf_doubled(score.raw_doubled()),
        xx1: null.quantile_normalized(0.05),
        median: null.quantile_normalized(0.5),
        xx19: null.quantile_normalized(0.95),
        exact: null.is_exact(),
    })
}
