//! Cross-validated hypothesis tests comparing two rankings against a common
//! reference.
//!
//! All three tests compute normalized SRDs of both rankings on row subsets
//! (folds) and test whether the paired fold scores differ:
//!
//! * Wilcoxon: k leave-out folds, exact two-sided signed-rank test on the
//!   paired differences.
//! * Dietterich: k random half/half bipartitions, t statistic with k degrees
//!   of freedom built from the first fold's difference.
//! * Alpaydin: same bipartitions, F statistic with (2k, k) degrees of freedom.
//!
//! Fold SRDs are normalized by the maximal distance for the fold size.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SrdError};
use crate::ranking::{doubled_average_ranks, Ranking, RowSubset};
use crate::rng::seeded_rng;
use crate::special::{erfc, fisher_f_upper, student_t_two_sided};
use crate::srd::{doubled_l1, max_distance_unchecked};

pub const MIN_FOLDS: usize = 2;
pub const MAX_FOLDS: usize = 20;
pub const MIN_ROWS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Wilcoxon,
    Dietterich,
    Alpaydin,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Wilcoxon, Method::Dietterich, Method::Alpaydin];

    pub fn label(self) -> &'static str {
        match self {
            Method::Wilcoxon => "wilcoxon",
            Method::Dietterich => "dietterich",
            Method::Alpaydin => "alpaydin",
        }
    }

    pub(crate) fn code(self) -> u64 {
        match self {
            Method::Wilcoxon => 1,
            Method::Dietterich => 2,
            Method::Alpaydin => 3,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Method {
    type Err = SrdError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "wilcoxon" | "w" => Ok(Method::Wilcoxon),
            "dietterich" | "d" => Ok(Method::Dietterich),
            "alpaydin" | "a" => Ok(Method::Alpaydin),
            _ => Err(SrdError::UnknownMethod(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub method: Method,
    pub folds: usize,
    pub alpha: f64,
    pub seed: u64,
    /// p-value computation for the Wilcoxon test; ignored by the other methods.
    #[serde(default)]
    pub wilcoxon_p: WilcoxonPValue,
}

/// How the Wilcoxon signed-rank p-value is obtained.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WilcoxonPValue {
    /// Exact when the exact test can reach `alpha` with the observed number
    /// of nonzero differences (`2 / 2^k_r < alpha`), normal approximation otherwise.
    #[default]
    Auto,
    /// Exact sign enumeration.
    Exact,
    /// Normal approximation with tie-corrected variance, no continuity correction.
    Normal,
}

impl FromStr for WilcoxonPValue {
    type Err = SrdError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "auto" => Ok(WilcoxonPValue::Auto),
            "exact" => Ok(WilcoxonPValue::Exact),
            "normal" => Ok(WilcoxonPValue::Normal),
            _ => Err(SrdError::UnknownMethod(format!("Wilcoxon p-value mode {s}"))),
        }
    }
}

impl CvConfig {
    pub fn new(method: Method, folds: usize) -> Self {
        Self { method, folds, alpha: 0.05, seed: 0, wilcoxon_p: WilcoxonPValue::Auto }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_wilcoxon_p(mut self, mode: WilcoxonPValue) -> Self {
        self.wilcoxon_p = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(MIN_FOLDS..=MAX_FOLDS).contains(&self.folds) {
            return Err(SrdError::InvalidFolds { k: self.folds });
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(SrdError::InvalidAlpha(self.alpha));
        }
        Ok(())
    }
}

/// Row subsets on which fold-level SRDs are computed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FoldPlan {
    /// Fold `i` keeps every row except `left_out[i]`. With more folds than
    /// rows, each fold leaves out one row drawn with replacement.
    LeaveOut { folds: Vec<RowSubset>, left_out: Vec<Vec<usize>>, bootstrap: bool },
    /// Independent random bipartitions `(A_i, A_i^c)` of sizes `floor(n/2)` and `ceil(n/2)`.
    Halves { pairs: Vec<(RowSubset, RowSubset)> },
}

impl FoldPlan {
    pub fn len(&self) -> usize {
        match self {
            FoldPlan::LeaveOut { folds, .. } => folds.len(),
            FoldPlan::Halves { pairs } => pairs.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn make_fold_plan<R: Rng + ?Sized>(n: usize, config: &CvConfig, rng: &mut R) -> Result<FoldPlan> {
    if n < MIN_ROWS {
        return Err(SrdError::TooFewRows { n });
    }
    config.validate()?;
    let k = config.folds;
    match config.method {
        Method::Wilcoxon if k <= n => {
            let mut rows: Vec<usize> = (0..n).collect();
            rows.shuffle(rng);
            // first n % k blocks get one extra row
            let base = n / k;
            let extra = n % k;
            let mut left_out = Vec::with_capacity(k);
            let mut start = 0;
            for i in 0..k {
                let size = base + usize::from(i < extra);
                let mut block = rows[start..start + size].to_vec();
                block.sort_unstable();
                left_out.push(block);
                start += size;
            }
            let folds = left_out.iter().map(|block| RowSubset::new_unchecked(complement(n, block))).collect();
            Ok(FoldPlan::LeaveOut { folds, left_out, bootstrap: false })
        }
        Method::Wilcoxon => {
            let left_out: Vec<Vec<usize>> = (0..k).map(|_| vec![rng.random_range(0..n)]).collect();
            let folds = left_out.iter().map(|block| RowSubset::new_unchecked(complement(n, block))).collect();
            Ok(FoldPlan::LeaveOut { folds, left_out, bootstrap: true })
        }
        Method::Dietterich | Method::Alpaydin => {
            let half = n / 2;
            let mut rows: Vec<usize> = (0..n).collect();
            let pairs = (0..k)
                .map(|_| {
                    rows.shuffle(rng);
                    let mut a = rows[..half].to_vec();
                    let mut b = rows[half..].to_vec();
                    a.sort_unstable();
                    b.sort_unstable();
                    (RowSubset::new_unchecked(a), RowSubset::new_unchecked(b))
                })
                .collect();
            Ok(FoldPlan::Halves { pairs })
        }
    }
}

/// Rows of `0..n` not in the sorted `block`.
fn complement(n: usize, block: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(n - block.len());
    let mut it = block.iter().peekable();
    for r in 0..n {
        if it.peek() == Some(&&r) {
            it.next();
        } else {
            out.push(r);
        }
    }
    out
}

/// Normalized SRDs of both rankings on one row subset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FoldScores {
    pub srd1: f64,
    pub srd2: f64,
    /// `srd1 - srd2`, computed from the exact integer distances with a single rounding.
    pub diff: f64,
}

fn fold_scores(pi1: &Ranking, pi2: &Ranking, reference: &Ranking, rows: &RowSubset) -> FoldScores {
    let idx = rows.indices();
    let r1 = pi1.restrict_unchecked(idx);
    let r2 = pi2.restrict_unchecked(idx);
    let rr = reference.restrict_unchecked(idx);
    let d1 = doubled_l1(r1.doubled_ranks(), rr.doubled_ranks());
    let d2 = doubled_l1(r2.doubled_ranks(), rr.doubled_ranks());
    let den = (2 * max_distance_unchecked(idx.len())) as f64;
    FoldScores { srd1: d1 as f64 / den, srd2: d2 as f64 / den, diff: (d1 as f64 - d2 as f64) / den }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvTestResult {
    pub method: Method,
    pub folds: usize,
    pub alpha: f64,
    /// `W+` for Wilcoxon, `t` for Dietterich, `F` for Alpaydin.
    pub statistic: f64,
    pub p_value: f64,
    pub reject: bool,
    /// Per fold: scores on `A_i` and, for the k×2 tests, on `A_i^c`.
    pub fold_scores: Vec<(FoldScores, Option<FoldScores>)>,
}

/// Outcome of a signed-rank test on paired differences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedRank {
    pub w_plus: f64,
    pub w_minus: f64,
    /// Number of nonzero differences.
    pub nonzero: usize,
    pub p_value: f64,
    /// Whether `p_value` comes from exact enumeration.
    pub exact: bool,
}

/// Nonzero differences with their doubled average ranks of `|d|`.
struct RankedDiffs {
    ranks: Vec<u32>,
    /// Doubled `W+`.
    w_plus: u64,
    /// Doubled `k_r (k_r + 1) / 2`.
    total: u64,
}

fn rank_diffs(diffs: &[f64]) -> RankedDiffs {
    let nonzero: Vec<f64> = diffs.iter().copied().filter(|d| *d != 0.0).collect();
    let abs: Vec<f64> = nonzero.iter().map(|d| d.abs()).collect();
    let ranks = doubled_average_ranks(&abs);
    let total = ranks.iter().map(|&r| u64::from(r)).sum();
    let w_plus = ranks.iter().zip(&nonzero).filter(|(_, d)| **d > 0.0).map(|(&r, _)| u64::from(r)).sum();
    RankedDiffs { ranks, w_plus, total }
}

impl RankedDiffs {
    fn result(&self, p_value: f64, exact: bool) -> SignedRank {
        SignedRank {
            w_plus: self.w_plus as f64 / 2.0,
            w_minus: (self.total - self.w_plus) as f64 / 2.0,
            nonzero: self.ranks.len(),
            p_value,
            exact,
        }
    }

    fn exact_p(&self) -> f64 {
        if self.ranks.is_empty() {
            return 1.0;
        }
        // ways[s] = number of sign vectors with doubled W+ = s
        let mut ways = vec![0u64; self.total as usize + 1];
        ways[0] = 1;
        let mut reach = 0usize;
        for &r in &self.ranks {
            let r = r as usize;
            for s in (0..=reach).rev() {
                if ways[s] > 0 {
                    ways[s + r] += ways[s];
                }
            }
            reach += r;
        }
        let observed = (2 * self.w_plus).abs_diff(self.total);
        let extreme: u64 = ways
            .iter()
            .enumerate()
            .filter(|(s, _)| (2 * *s as u64).abs_diff(self.total) >= observed)
            .map(|(_, &w)| w)
            .sum();
        extreme as f64 / (self.ranks.len() as f64).exp2()
    }

    fn normal_p(&self) -> f64 {
        if self.ranks.is_empty() {
            return 1.0;
        }
        // Var(W+) = sum of squared ranks / 4, which already accounts for ties
        let var: f64 = self.ranks.iter().map(|&r| (r as f64 / 2.0).powi(2)).sum::<f64>() / 4.0;
        let z = (self.w_plus as f64 - self.total as f64 / 2.0) / 2.0 / var.sqrt();
        erfc(z.abs() / std::f64::consts::SQRT_2)
    }
}

/// Exact two-sided Wilcoxon signed-rank test. Zero differences are dropped,
/// absolute differences get average ranks, and the p-value is the share of
/// the `2^k_r` sign assignments whose `W+` lies at least as far from its null
/// mean as the observed one.
pub fn signed_rank_test(diffs: &[f64]) -> SignedRank {
    let ranked = rank_diffs(diffs);
    ranked.result(ranked.exact_p(), true)
}

/// Signed-rank test with the p-value chosen by `mode`.
pub fn signed_rank_test_with(diffs: &[f64], mode: WilcoxonPValue, alpha: f64) -> SignedRank {
    let ranked = rank_diffs(diffs);
    let exact = match mode {
        WilcoxonPValue::Exact => true,
        WilcoxonPValue::Normal => false,
        WilcoxonPValue::Auto => 2.0 / (ranked.ranks.len() as f64).exp2() < alpha,
    };
    let p = if exact { ranked.exact_p() } else { ranked.normal_p() };
    ranked.result(p, exact)
}

fn check_inputs(pi1: &Ranking, pi2: &Ranking, reference: &Ranking) -> Result<()> {
    for other in [pi2, reference] {
        if other.len() != pi1.len() {
            return Err(SrdError::SizeMismatch { left: pi1.len(), right: other.len() });
        }
    }
    if pi1.len() < MIN_ROWS {
        return Err(SrdError::TooFewRows { n: pi1.len() });
    }
    Ok(())
}

fn half_scores(pi1: &Ranking, pi2: &Ranking, reference: &Ranking, plan: &FoldPlan) -> Vec<(FoldScores, FoldScores)> {
    match plan {
        FoldPlan::Halves { pairs } => pairs
            .iter()
            .map(|(a, b)| (fold_scores(pi1, pi2, reference, a), fold_scores(pi1, pi2, reference, b)))
            .collect(),
        FoldPlan::LeaveOut { .. } => unreachable!("k×2 tests use bipartition plans"),
    }
}

/// `s^2_{Delta,i}` for one bipartition.
fn fold_variance(a: &FoldScores, b: &FoldScores) -> f64 {
    let mean = (a.diff + b.diff) / 2.0;
    (a.diff - mean).powi(2) + (b.diff - mean).powi(2)
}

fn finish(
    config: &CvConfig,
    statistic: f64,
    p_value: f64,
    fold_scores: Vec<(FoldScores, Option<FoldScores>)>,
) -> CvTestResult {
    CvTestResult {
        method: config.method,
        folds: config.folds,
        alpha: config.alpha,
        statistic,
        p_value,
        reject: p_value < config.alpha,
        fold_scores,
    }
}

fn wilcoxon_with_plan(
    pi1: &Ranking,
    pi2: &Ranking,
    reference: &Ranking,
    config: &CvConfig,
    plan: &FoldPlan,
) -> CvTestResult {
    let FoldPlan::LeaveOut { folds, .. } = plan else { unreachable!("Wilcoxon uses leave-out plans") };
    let scores: Vec<FoldScores> = folds.iter().map(|f| fold_scores(pi1, pi2, reference, f)).collect();
    let diffs: Vec<f64> = scores.iter().map(|s| s.diff).collect();
    let test = signed_rank_test_with(&diffs, config.wilcoxon_p, config.alpha);
    finish(config, test.w_plus, test.p_value, scores.into_iter().map(|s| (s, None)).collect())
}

fn dietterich_with_plan(
    pi1: &Ranking,
    pi2: &Ranking,
    reference: &Ranking,
    config: &CvConfig,
    plan: &FoldPlan,
) -> CvTestResult {
    let halves = half_scores(pi1, pi2, reference, plan);
    let k = halves.len() as f64;
    let mean_var = halves.iter().map(|(a, b)| fold_variance(a, b)).sum::<f64>() / k;
    let numerator = halves[0].0.diff;
    let (statistic, p_value) = if mean_var > 0.0 {
        let t = numerator / mean_var.sqrt();
        (t, student_t_two_sided(t, k))
    } else if numerator == 0.0 {
        (0.0, 1.0)
    } else {
        (numerator.signum() * f64::INFINITY, 0.0)
    };
    finish(config, statistic, p_value, halves.into_iter().map(|(a, b)| (a, Some(b))).collect())
}

fn alpaydin_with_plan(
    pi1: &Ranking,
    pi2: &Ranking,
    reference: &Ranking,
    config: &CvConfig,
    plan: &FoldPlan,
) -> CvTestResult {
    let halves = half_scores(pi1, pi2, reference, plan);
    let k = halves.len() as f64;
    let numerator = halves.iter().map(|(a, b)| a.diff.powi(2) + b.diff.powi(2)).sum::<f64>() / (2.0 * k);
    let denominator = halves.iter().map(|(a, b)| fold_variance(a, b)).sum::<f64>() / k;
    let (statistic, p_value) = if denominator > 0.0 {
        let f = numerator / denominator;
        (f, fisher_f_upper(f, 2.0 * k, k))
    } else if numerator == 0.0 {
        (0.0, 1.0)
    } else {
        (f64::INFINITY, 0.0)
    };
    finish(config, statistic, p_value, halves.into_iter().map(|(a, b)| (a, Some(b))).collect())
}

/// Runs the test selected by `config.method` with fold randomness drawn from `rng`.
pub fn run_cv_test_with_rng<R: Rng + ?Sized>(
    pi1: &Ranking,
    pi2: &Ranking,
    reference: &Ranking,
    config: &CvConfig,
    rng: &mut R,
) -> Result<CvTestResult> {
    check_inputs(pi1, pi2, reference)?;
    let plan = make_fold_plan(pi1.len(), config, rng)?;
    Ok(match config.method {
        Method::Wilcoxon => wilcoxon_with_plan(pi1, pi2, reference, config, &plan),
        Method::Dietterich => dietterich_with_plan(pi1, pi2, reference, config, &plan),
        Method::Alpaydin => alpaydin_with_plan(pi1, pi2, reference, config, &plan),
    })
}

/// Runs the test selected by `config.method`; deterministic in `config.seed`.
pub fn run_cv_test(pi1: &Ranking, pi2: &Ranking, reference: &Ranking, config: &CvConfig) -> Result<CvTestResult> {
    run_cv_test_with_rng(pi1, pi2, reference, config, &mut seeded_rng(config.seed))
}

pub fn wilcoxon_cv(pi1: &Ranking, pi2: &Ranking, reference: &Ranking, config: &CvConfig) -> Result<CvTestResult> {
    run_cv_test(pi1, pi2, reference, &CvConfig { method: Method::Wilcoxon, ..*config })
}

pub fn dietterich_cv(pi1: &Ranking, pi2: &Ranking, reference: &Ranking, config: &CvConfig) -> Result<CvTestResult> {
    run_cv_test(pi1, pi2, reference, &CvConfig { method: Method::Dietterich, ..*config })
}

pub fn alpaydin_cv(pi1: &Ranking, pi2: &Ranking, reference: &Ranking, config: &CvConfig) -> Result<CvTestResult> {
    run_cv_test(pi1, pi2, reference, &CvConfig { method: Method::Alpaydin, ..*config })
}
