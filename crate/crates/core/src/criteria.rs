//! Criteria for ranking test variants from a rejection table, Borda
//! aggregation, and the SRD comparison of the criteria themselves.
//!
//! Every criterion works on the cells of one ranking size `n`. Type I
//! scenarios reward low rejection rates and type II scenarios reward high ones.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::cv::Method;
use crate::error::{Result, SrdError};
use crate::null_dist::{perm_test, PermTestResult};
use crate::ranking::{doubled_average_ranks, rank_column};
use crate::scenario::ScenarioType;
use crate::special::{binomial_half_upper, student_t_two_sided};
use crate::srd::srd;
use crate::table::{variant_label, RejectionTable};

pub type Variant = (Method, usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Criterion {
    #[serde(rename = "DISC")]
    Disc,
    #[serde(rename = "MAXDIFF")]
    MaxDiff,
    #[serde(rename = "AVGDIFF")]
    AvgDiff,
    #[serde(rename = "BLNC")]
    Blnc,
    #[serde(rename = "SRD")]
    Srd,
    #[serde(rename = "CEPWAVG")]
    CePwAvg,
    #[serde(rename = "WTPWAVG")]
    WtPwAvg,
}

impl Criterion {
    pub const ALL: [Criterion; 7] = [
        Criterion::Disc,
        Criterion::MaxDiff,
        Criterion::AvgDiff,
        Criterion::Blnc,
        Criterion::Srd,
        Criterion::CePwAvg,
        Criterion::WtPwAvg,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Criterion::Disc => "DISC",
            Criterion::MaxDiff => "MAXDIFF",
            Criterion::AvgDiff => "AVGDIFF",
            Criterion::Blnc => "BLNC",
            Criterion::Srd => "SRD",
            Criterion::CePwAvg => "CEPWAVG",
            Criterion::WtPwAvg => "WTPWAVG",
        }
    }

    pub fn direction(self) -> Direction {
        match self {
            Criterion::Disc | Criterion::CePwAvg | Criterion::WtPwAvg => Direction::HigherBetter,
            _ => Direction::LowerBetter,
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Criterion {
    type Err = SrdError;

    fn from_str(s: &str) -> Result<Self> {
        Criterion::ALL
            .into_iter()
            .find(|c| c.label().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| SrdError::MalformedTable(format!("unknown criterion {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    HigherBetter,
    LowerBetter,
}

/// Pairwise significance test used by the pairwise-correlation criteria.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairwiseTest {
    /// Exact binomial(1/2) test of B given B + C.
    ConditionalFisher,
    /// `t = (B - C) / sqrt(B + C)` with `B + C - 1` degrees of freedom.
    WilliamsT,
}

/// Significance level of the pairwise tests.
pub const PAIRWISE_ALPHA: f64 = 0.05;

/// Raw values and ranks of one criterion over the variants of one size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionScores {
    pub criterion: Criterion,
    pub n: usize,
    pub variants: Vec<Variant>,
    pub raw: Vec<f64>,
    /// 1 is best; ties share the average rank.
    pub ranks: Vec<f64>,
    pub direction: Direction,
}

impl CriterionScores {
    fn new(criterion: Criterion, n: usize, variants: Vec<Variant>, raw: Vec<f64>) -> Self {
        let ranks = preference_ranks(&raw, criterion.direction());
        Self { criterion, n, variants, raw, ranks, direction: criterion.direction() }
    }

    pub fn raw_of(&self, v: Variant) -> Option<f64> {
        self.variants.iter().position(|x| *x == v).map(|i| self.raw[i])
    }

    pub fn rank_of(&self, v: Variant) -> Option<f64> {
        self.variants.iter().position(|x| *x == v).map(|i| self.ranks[i])
    }
}

/// Values are compared on a 1e-9 grid so that sums of 4-decimal rates tie exactly.
fn snap(x: f64) -> f64 {
    (x * 1e9).round() / 1e9
}

/// Average ranks with 1 for the most preferred value.
pub fn preference_ranks(raw: &[f64], direction: Direction) -> Vec<f64> {
    let keyed: Vec<f64> = raw
        .iter()
        .map(|&x| match direction {
            Direction::LowerBetter => snap(x),
            Direction::HigherBetter => -snap(x),
        })
        .collect();
    doubled_average_ranks(&keyed).into_iter().map(|d| d as f64 / 2.0).collect()
}

/// Rates of one size arranged as scenarios × variants.
struct Grid {
    n: usize,
    variants: Vec<Variant>,
    scenarios: Vec<(String, ScenarioType)>,
    /// `rates[s][v]`
    rates: Vec<Vec<f64>>,
}

impl Grid {
    fn build(table: &RejectionTable, n: usize) -> Result<Self> {
        let variants: Vec<Variant> = table.cells().iter().filter(|c| c.n == n).fold(Vec::new(), |mut acc, c| {
            if !acc.contains(&(c.method, c.folds)) {
                acc.push((c.method, c.folds));
            }
            acc
        });
        let scenarios = table.scenarios(n);
        if variants.is_empty() || scenarios.is_empty() {
            return Err(SrdError::MissingScenario(format!("any cell for n = {n}")));
        }
        let mut rates = Vec::with_capacity(scenarios.len());
        for (label, _) in &scenarios {
            let mut row = Vec::with_capacity(variants.len());
            for &(m, k) in &variants {
                let cell = table
                    .get(n, label, m, k)
                    .ok_or_else(|| SrdError::MissingScenario(format!("{label} for {}", variant_label(m, k))))?;
                row.push(cell.rejection_rate_pct);
            }
            rates.push(row);
        }
        Ok(Self { n, variants, scenarios, rates })
    }

    fn row(&self, label: &str) -> Result<&[f64]> {
        self.scenarios
            .iter()
            .position(|(s, _)| s == label)
            .map(|i| self.rates[i].as_slice())
            .ok_or_else(|| SrdError::MissingScenario(format!("scenario {label} at n = {}", self.n)))
    }

    fn scores(&self, criterion: Criterion, raw: Vec<f64>) -> CriterionScores {
        CriterionScores::new(criterion, self.n, self.variants.clone(), raw)
    }

    /// Gaps from the per-scenario best rate, `gaps[s][v]`.
    fn gaps(&self) -> Vec<Vec<f64>> {
        self.scenarios
            .iter()
            .zip(&self.rates)
            .map(|((_, kind), row)| {
                let best = match kind {
                    ScenarioType::I => row.iter().copied().fold(f64::INFINITY, f64::min),
                    ScenarioType::II => row.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                };
                row.iter().map(|r| (r - best).abs()).collect()
            })
            .collect()
    }
}

pub const RT_I: &str = "RT I";
pub const RT_II: &str = "RT II";

/// `|RT II - RT I|`, higher is better.
pub fn disc(table: &RejectionTable, n: usize) -> Result<CriterionScores> {
    let g = Grid::build(table, n)?;
    let (one, two) = (g.row(RT_I)?, g.row(RT_II)?);
    let raw = one.iter().zip(two).map(|(a, b)| (b - a).abs()).collect();
    Ok(g.scores(Criterion::Disc, raw))
}

/// Largest gap from the per-scenario best rate, lower is better.
pub fn maxdiff(table: &RejectionTable, n: usize) -> Result<CriterionScores> {
    let g = Grid::build(table, n)?;
    let gaps = g.gaps();
    let raw = (0..g.variants.len()).map(|v| gaps.iter().map(|r| r[v]).fold(0.0, f64::max)).collect();
    Ok(g.scores(Criterion::MaxDiff, raw))
}

/// Mean gap from the per-scenario best rate, lower is better.
pub fn avgdiff(table: &RejectionTable, n: usize) -> Result<CriterionScores> {
    let g = Grid::build(table, n)?;
    let gaps = g.gaps();
    let s = gaps.len() as f64;
    let raw = (0..g.variants.len()).map(|v| gaps.iter().map(|r| r[v]).sum::<f64>() / s).collect();
    Ok(g.scores(Criterion::AvgDiff, raw))
}

/// Distance from the equal-error point, `|RT I - (100 - RT II)|`, lower is better.
pub fn blnc(table: &RejectionTable, n: usize) -> Result<CriterionScores> {
    let g = Grid::build(table, n)?;
    let (one, two) = (g.row(RT_I)?, g.row(RT_II)?);
    let raw = one.iter().zip(two).map(|(a, b)| (a - (100.0 - b)).abs()).collect();
    Ok(g.scores(Criterion::Blnc, raw))
}

/// Normalized SRD of each variant's rate vector over the scenarios from the
/// ideal vector (row minimum for type I, row maximum for type II). Lower is better.
pub fn srd_criterion(table: &RejectionTable, n: usize) -> Result<CriterionScores> {
    let g = Grid::build(table, n)?;
    let ideal: Vec<f64> = g
        .scenarios
        .iter()
        .zip(&g.rates)
        .map(|((_, kind), row)| match kind {
            ScenarioType::I => row.iter().copied().fold(f64::INFINITY, f64::min),
            ScenarioType::II => row.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
        .collect();
    let reference = rank_column(&ideal)?;
    let raw = (0..g.variants.len())
        .map(|v| {
            let column: Vec<f64> = g.rates.iter().map(|r| r[v]).collect();
            Ok(srd(&rank_column(&column)?, &reference)?.normalized())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(g.scores(Criterion::Srd, raw))
}

/// Counts `(A, B, C)` over scenarios for a pair of oriented deviation vectors:
/// A both positive, B only the first positive, C only the second.
pub fn pair_counts(x1: &[f64], x2: &[f64]) -> (u64, u64, u64) {
    let (mut a, mut b, mut c) = (0, 0, 0);
    for (&d1, &d2) in x1.iter().zip(x2) {
        if d1 == 0.0 || d2 == 0.0 {
            continue;
        }
        match (d1 > 0.0, d2 > 0.0) {
            (true, true) => a += 1,
            (true, false) => b += 1,
            (false, true) => c += 1,
            (false, false) => {}
        }
    }
    (a, b, c)
}

/// `Some(true)` if the first solution wins, `Some(false)` if it loses, `None` for a tie.
pub fn pairwise_decision(b: u64, c: u64, test: PairwiseTest) -> Option<bool> {
    match test {
        PairwiseTest::ConditionalFisher => {
            let trials = b + c;
            if trials == 0 {
                return None;
            }
            if binomial_half_upper(b, trials) < PAIRWISE_ALPHA {
                Some(true)
            } else if binomial_half_upper(c, trials) < PAIRWISE_ALPHA {
                Some(false)
            } else {
                None
            }
        }
        PairwiseTest::WilliamsT => {
            let trials = b + c;
            if trials <= 1 || b == c {
                return None;
            }
            let t = (b as f64 - c as f64) / (trials as f64).sqrt();
            (student_t_two_sided(t, (trials - 1) as f64) < PAIRWISE_ALPHA).then_some(b > c)
        }
    }
}

/// Probability-weighted pairwise score `(wins - losses) / (m - 1)` against
/// the per-scenario average, higher is better.
pub fn pairwise_correlation(table: &RejectionTable, n: usize, test: PairwiseTest) -> Result<CriterionScores> {
    let g = Grid::build(table, n)?;
    let m = g.variants.len();
    // deviations[v][s], positive = better than average
    let mut deviations = vec![Vec::with_capacity(g.scenarios.len()); m];
    for ((_, kind), row) in g.scenarios.iter().zip(&g.rates) {
        let mean = row.iter().sum::<f64>() / m as f64;
        for (v, &r) in row.iter().enumerate() {
            let d = snap(r - mean);
            deviations[v].push(if *kind == ScenarioType::I { -d } else { d });
        }
    }
    let raw = (0..m)
        .map(|i| {
            let mut net = 0i64;
            for j in (0..m).filter(|&j| j != i) {
                let (_, b, c) = pair_counts(&deviations[i], &deviations[j]);
                match pairwise_decision(b, c, test) {
                    Some(true) => net += 1,
                    Some(false) => net -= 1,
                    None => {}
                }
            }
            if m > 1 {
                net as f64 / (m - 1) as f64
            } else {
                0.0
            }
        })
        .collect();
    let criterion = match test {
        PairwiseTest::ConditionalFisher => Criterion::CePwAvg,
        PairwiseTest::WilliamsT => Criterion::WtPwAvg,
    };
    Ok(g.scores(criterion, raw))
}

/// All seven criteria for size `n`.
pub fn all_criteria(table: &RejectionTable, n: usize) -> Result<Vec<CriterionScores>> {
    Ok(vec![
        disc(table, n)?,
        maxdiff(table, n)?,
        avgdiff(table, n)?,
        blnc(table, n)?,
        srd_criterion(table, n)?,
        pairwise_correlation(table, n, PairwiseTest::ConditionalFisher)?,
        pairwise_correlation(table, n, PairwiseTest::WilliamsT)?,
    ])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BordaResult {
    pub variants: Vec<Variant>,
    /// `sum over criteria of (m - rank)`.
    pub scores: Vec<f64>,
    /// 1 for the highest score; ties share the average rank.
    pub final_ranks: Vec<f64>,
    /// Variants by descending score, ties in input order.
    pub ranking: Vec<Variant>,
}

impl BordaResult {
    pub fn score_of(&self, v: Variant) -> Option<f64> {
        self.variants.iter().position(|x| *x == v).map(|i| self.scores[i])
    }
}

pub fn borda(criteria: &[CriterionScores]) -> Result<BordaResult> {
    let first = criteria.first().ok_or_else(|| SrdError::ShapeMismatch("Borda needs at least one criterion".into()))?;
    let variants = first.variants.clone();
    let m = variants.len() as f64;
    let mut scores = vec![0.0; variants.len()];
    for c in criteria {
        if c.variants.len() != variants.len() || !variants.iter().all(|v| c.variants.contains(v)) {
            return Err(SrdError::MethodSetMismatch);
        }
        for (i, v) in variants.iter().enumerate() {
            scores[i] += m - c.rank_of(*v).expect("checked membership");
        }
    }
    Ok(borda_from_scores(variants, scores))
}

/// Borda aggregation of rank vectors given directly, `ranks[criterion][variant]`.
pub fn borda_from_ranks(variants: Vec<Variant>, ranks: &[Vec<f64>]) -> Result<BordaResult> {
    let m = variants.len() as f64;
    let mut scores = vec![0.0; variants.len()];
    for r in ranks {
        if r.len() != variants.len() {
            return Err(SrdError::MethodSetMismatch);
        }
        for (s, x) in scores.iter_mut().zip(r) {
            *s += m - x;
        }
    }
    Ok(borda_from_scores(variants, scores))
}

fn borda_from_scores(variants: Vec<Variant>, scores: Vec<f64>) -> BordaResult {
    let final_ranks = preference_ranks(&scores, Direction::HigherBetter);
    let mut order: Vec<usize> = (0..variants.len()).collect();
    order.sort_by(|&a, &b| snap(scores[b]).total_cmp(&snap(scores[a])));
    let ranking = order.iter().map(|&i| variants[i]).collect();
    BordaResult { variants, scores, final_ranks, ranking }
}

/// Criteria and Borda aggregate for one size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    pub n: usize,
    pub criteria: Vec<CriterionScores>,
    pub borda: BordaResult,
}

pub fn evaluate(table: &RejectionTable, n: usize) -> Result<Evaluation> {
    let criteria = all_criteria(table, n)?;
    let borda = borda(&criteria)?;
    Ok(Evaluation { n, criteria, borda })
}

/// Normalized SRD of each criterion from the consensus of all criteria.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetaSrd {
    pub criteria: Vec<Criterion>,
    pub srd: Vec<f64>,
    /// Number of stacked (size, variant) objects.
    pub objects: usize,
    /// Null reference values for `objects` objects.
    pub null: PermTestResult,
    /// Permutation test p-value of each criterion.
    pub p_values: Vec<f64>,
}

/// Min-max normalizes each criterion within each size (1 = best), stacks the
/// sizes into one object axis, uses the object-wise mean as reference and
/// computes every criterion's SRD from it.
pub fn meta_srd(evaluations: &[Evaluation]) -> Result<MetaSrd> {
    let first = evaluations.first().ok_or_else(|| SrdError::ShapeMismatch("no evaluations".into()))?;
    let criteria: Vec<Criterion> = first.criteria.iter().map(|c| c.criterion).collect();
    if criteria.len() < 2 {
        return Err(SrdError::ShapeMismatch("meta SRD needs at least two criteria".into()));
    }
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); criteria.len()];
    for e in evaluations {
        let got: Vec<Criterion> = e.criteria.iter().map(|c| c.criterion).collect();
        if got != criteria {
            return Err(SrdError::ShapeMismatch(format!("criteria at n = {} differ", e.n)));
        }
        let len = e.criteria[0].raw.len();
        if e.criteria.iter().any(|c| c.raw.len() != len || c.variants != e.criteria[0].variants) {
            return Err(SrdError::ShapeMismatch(format!("criteria at n = {} cover different variants", e.n)));
        }
        for (col, c) in columns.iter_mut().zip(&e.criteria) {
            col.extend(normalize_higher_better(&c.raw, c.direction));
        }
    }
    let objects = columns[0].len();
    let reference: Vec<f64> =
        (0..objects).map(|o| columns.iter().map(|c| c[o]).sum::<f64>() / columns.len() as f64).collect();
    let reference = rank_column(&snap_all(&reference))?;
    let mut scores = Vec::with_capacity(criteria.len());
    let mut p_values = Vec::with_capacity(criteria.len());
    let mut null = None;
    for col in &columns {
        let score = srd(&rank_column(&snap_all(col))?, &reference)?;
        let test = perm_test(&score)?;
        scores.push(score.normalized());
        p_values.push(test.p_value);
        null = Some(test);
    }
    Ok(MetaSrd { criteria, srd: scores, objects, null: null.expect("at least two criteria"), p_values })
}

fn snap_all(values: &[f64]) -> Vec<f64> {
    values.iter().map(|&x| snap(x)).collect()
}

/// Maps raw values onto [0, 1] with 1 for the best value. A constant column maps to 1.
pub fn normalize_higher_better(raw: &[f64], direction: Direction) -> Vec<f64> {
    let lo = raw.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    raw.iter()
        .map(|&x| {
            if span <= 0.0 {
                1.0
            } else {
                match direction {
                    Direction::HigherBetter => (x - lo) / span,
                    Direction::LowerBetter => (hi - x) / span,
                }
            }
        })
        .collect()
}

/// `criterion,method,folds,raw,rank`
pub fn criteria_csv(criteria: &[CriterionScores]) -> String {
    let mut out = String::from("criterion,method,folds,raw,rank\n");
    for c in criteria {
        for (i, (m, k)) in c.variants.iter().enumerate() {
            out.push_str(&format!("{},{},{},{:.6},{}\n", c.criterion, m, k, c.raw[i], c.ranks[i]));
        }
    }
    out
}

/// `method,folds,borda_score,final_rank`, in input variant order.
pub fn borda_csv(result: &BordaResult) -> String {
    let mut out = String::from("method,folds,borda_score,final_rank\n");
    for (i, (m, k)) in result.variants.iter().enumerate() {
        out.push_str(&format!("{},{},{},{}\n", m, k, result.scores[i], result.final_ranks[i]));
    }
    out
}
