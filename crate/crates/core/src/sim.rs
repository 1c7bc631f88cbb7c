//! Monte Carlo estimation of rejection rates over scenarios and test variants.
//!
//! Each run draws a scenario pair and applies one test against the identity
//! reference. Run `r` of round `j` in a cell uses a generator seeded from
//! `(master_seed, n, scenario id, method, folds, j, r)`, so the table does not
//! depend on the number of worker threads.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cv::{run_cv_test_with_rng, CvConfig, Method, WilcoxonPValue, MAX_FOLDS, MIN_FOLDS};
use crate::error::{Result, SrdError};
use crate::ranking::Ranking;
use crate::rng::{derive_seed, seeded_rng, SimRng};
use crate::scenario::{sample_scenario_pair, scenario_catalog, Scenario};
use crate::table::{variant_label, Cell, RejectionTable};

pub const DESK_RUNS: u64 = 10_000;
pub const DESK_ROUNDS: u32 = 3;
pub const FULL_RUNS: u64 = 100_000;
pub const FULL_ROUNDS: u32 = 10;

/// Fold counts studied for every method.
pub const DEFAULT_FOLDS: [usize; 6] = [5, 6, 7, 8, 9, 10];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimPlan {
    pub n: usize,
    pub scenarios: Vec<Scenario>,
    pub variants: Vec<(Method, usize)>,
    pub runs_per_round: u64,
    pub rounds: u32,
    pub alpha: f64,
    pub master_seed: u64,
    #[serde(default)]
    pub wilcoxon_p: WilcoxonPValue,
    /// Worker threads; `None` uses the global pool.
    #[serde(skip)]
    pub threads: Option<usize>,
}

/// Every method with folds 5 to 10.
pub fn default_variants() -> Vec<(Method, usize)> {
    Method::ALL.iter().flat_map(|&m| DEFAULT_FOLDS.map(|k| (m, k))).collect()
}

impl SimPlan {
    /// Full catalog and all default variants at desk scale.
    pub fn desk(n: usize, master_seed: u64) -> Result<Self> {
        Ok(Self {
            n,
            scenarios: scenario_catalog(n)?,
            variants: default_variants(),
            runs_per_round: DESK_RUNS,
            rounds: DESK_ROUNDS,
            alpha: 0.05,
            master_seed,
            wilcoxon_p: WilcoxonPValue::Auto,
            threads: None,
        })
    }

    /// As [`SimPlan::desk`] with 100 000 runs in each of 10 rounds.
    pub fn full_scale(n: usize, master_seed: u64) -> Result<Self> {
        Ok(Self { runs_per_round: FULL_RUNS, rounds: FULL_ROUNDS, ..Self::desk(n, master_seed)? })
    }

    /// Keeps only the listed scenario labels, in the given order.
    pub fn with_scenarios(mut self, labels: &[&str]) -> Result<Self> {
        let mut picked = Vec::with_capacity(labels.len());
        for label in labels {
            let s = self
                .scenarios
                .iter()
                .find(|s| s.label == *label)
                .ok_or_else(|| SrdError::UnknownScenario(label.to_string()))?;
            picked.push(s.clone());
        }
        self.scenarios = picked;
        Ok(self)
    }

    pub fn with_variants(mut self, variants: Vec<(Method, usize)>) -> Self {
        self.variants = variants;
        self
    }

    pub fn with_runs(mut self, runs_per_round: u64, rounds: u32) -> Self {
        self.runs_per_round = runs_per_round;
        self.rounds = rounds;
        self
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = Some(threads);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs_per_round == 0 || self.rounds == 0 {
            return Err(SrdError::InvalidPlan("runs_per_round and rounds must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(SrdError::InvalidAlpha(self.alpha));
        }
        if self.threads == Some(0) {
            return Err(SrdError::InvalidPlan("thread count must be at least 1".into()));
        }
        if let Some(s) = self.scenarios.iter().find(|s| s.n != self.n) {
            return Err(SrdError::InvalidPlan(format!(
                "scenario {} has n = {}, plan has n = {}",
                s.label, s.n, self.n
            )));
        }
        for &(_, k) in &self.variants {
            if !(MIN_FOLDS..=MAX_FOLDS).contains(&k) {
                return Err(SrdError::InvalidFolds { k });
            }
        }
        Ok(())
    }

    fn cells(&self) -> Vec<(&Scenario, Method, usize)> {
        self.variants.iter().flat_map(|&(m, k)| self.scenarios.iter().map(move |s| (s, m, k))).collect()
    }

    fn fingerprint(&self) -> String {
        serde_json::to_string(self).expect("plan serializes")
    }
}

/// Reported after each completed round.
#[derive(Debug, Clone, PartialEq)]
pub struct Progress {
    pub cell: usize,
    pub cells: usize,
    /// Zero-based.
    pub round: u32,
    pub rounds: u32,
    pub scenario: String,
    pub variant: String,
    pub rejections: u64,
    pub resumed: bool,
}

/// Decides whether one run rejects. Receives A, B, the reference, the test
/// configuration and the run's generator (already used to draw A and B).
pub trait RunTest: Sync {
    fn rejects(
        &self,
        a: &Ranking,
        b: &Ranking,
        reference: &Ranking,
        config: &CvConfig,
        rng: &mut SimRng,
    ) -> Result<bool>;
}

impl<F> RunTest for F
where
    F: Fn(&Ranking, &Ranking, &Ranking, &CvConfig, &mut SimRng) -> Result<bool> + Sync,
{
    fn rejects(
        &self,
        a: &Ranking,
        b: &Ranking,
        reference: &Ranking,
        config: &CvConfig,
        rng: &mut SimRng,
    ) -> Result<bool> {
        self(a, b, reference, config, rng)
    }
}

/// The cross-validation test selected by the configuration.
pub struct CvRunTest;

impl RunTest for CvRunTest {
    fn rejects(
        &self,
        a: &Ranking,
        b: &Ranking,
        reference: &Ranking,
        config: &CvConfig,
        rng: &mut SimRng,
    ) -> Result<bool> {
        Ok(run_cv_test_with_rng(a, b, reference, config, rng)?.reject)
    }
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct Checkpoint {
    fingerprint: String,
    /// Rejection counts of finished rounds, keyed by cell index.
    counts: BTreeMap<usize, Vec<u64>>,
}

impl Checkpoint {
    fn load(path: &Path, fingerprint: &str) -> Result<Self> {
        match fs::read_to_string(path) {
            Ok(text) => {
                let cp: Checkpoint = serde_json::from_str(&text)
                    .map_err(|e| SrdError::Checkpoint(format!("{}: {e}", path.display())))?;
                if cp.fingerprint != fingerprint {
                    return Err(SrdError::Checkpoint(format!("{} belongs to a different plan", path.display())));
                }
                Ok(cp)
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                Ok(Checkpoint { fingerprint: fingerprint.to_string(), counts: BTreeMap::new() })
            }
            Err(source) => Err(SrdError::Io { path: path.to_path_buf(), source }),
        }
    }

    fn save(&self, path: &Path) -> Result<()> {
        let tmp = PathBuf::from(format!("{}.tmp", path.display()));
        let json = serde_json::to_string(self).expect("checkpoint serializes");
        fs::write(&tmp, json).map_err(|source| SrdError::Io { path: tmp.clone(), source })?;
        fs::rename(&tmp, path).map_err(|source| SrdError::Io { path: path.to_path_buf(), source })
    }
}

/// Options for [`run_simulation_with`].
#[derive(Default)]
pub struct RunOptions<'a> {
    /// Completed rounds are stored here and skipped when the run is restarted.
    pub checkpoint: Option<&'a Path>,
    pub progress: Option<&'a mut (dyn FnMut(&Progress) + Send)>,
}

pub fn run_simulation(plan: &SimPlan) -> Result<RejectionTable> {
    run_simulation_with(plan, &CvRunTest, RunOptions::default())
}

pub fn run_simulation_with<T: RunTest>(
    plan: &SimPlan,
    test: &T,
    mut options: RunOptions<'_>,
) -> Result<RejectionTable> {
    plan.validate()?;
    match plan.threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| SrdError::InvalidPlan(format!("thread pool: {e}")))?;
            pool.install(|| simulate(plan, test, &mut options))
        }
        None => simulate(plan, test, &mut options),
    }
}

fn simulate<T: RunTest>(plan: &SimPlan, test: &T, options: &mut RunOptions<'_>) -> Result<RejectionTable> {
    let fingerprint = plan.fingerprint();
    let mut checkpoint = match options.checkpoint {
        Some(path) => Checkpoint::load(path, &fingerprint)?,
        None => Checkpoint::default(),
    };
    let reference = Ranking::identity(plan.n)?;
    let cells = plan.cells();
    let mut table = RejectionTable::new();

    for (ci, &(scenario, method, folds)) in cells.iter().enumerate() {
        let config = CvConfig::new(method, folds).with_alpha(plan.alpha).with_wilcoxon_p(plan.wilcoxon_p);
        let label = variant_label(method, folds);
        let mut counts = checkpoint.counts.get(&ci).cloned().unwrap_or_default();
        for round in 0..plan.rounds {
            let resumed = (round as usize) < counts.len();
            if !resumed {
                let cell_seed = [plan.n as u64, u64::from(scenario.id), method.code(), folds as u64, u64::from(round)];
                let rejections =
                    count_rejections(plan, scenario, &config, &reference, test, &cell_seed).map_err(|e| {
                        SrdError::CellFailed {
                            cell: format!("{} / {label} / round {}", scenario.label, round + 1),
                            source: Box::new(e),
                        }
                    })?;
                counts.push(rejections);
                if let Some(path) = options.checkpoint {
                    checkpoint.counts.insert(ci, counts.clone());
                    checkpoint.save(path)?;
                }
            }
            if let Some(progress) = options.progress.as_mut() {
                progress(&Progress {
                    cell: ci,
                    cells: cells.len(),
                    round,
                    rounds: plan.rounds,
                    scenario: scenario.label.clone(),
                    variant: label.clone(),
                    rejections: counts[round as usize],
                    resumed,
                });
            }
        }
        let (mean, se) = round_summary(&counts, plan.runs_per_round);
        table.push(Cell {
            n: plan.n,
            scenario: scenario.label.clone(),
            kind: scenario.kind,
            method,
            folds,
            alpha: plan.alpha,
            runs_per_round: plan.runs_per_round,
            rounds: plan.rounds,
            rejection_rate_pct: mean,
            round_se_pct: se,
            master_seed: plan.master_seed,
        })?;
    }
    Ok(table)
}

fn count_rejections<T: RunTest>(
    plan: &SimPlan,
    scenario: &Scenario,
    config: &CvConfig,
    reference: &Ranking,
    test: &T,
    cell_seed: &[u64; 5],
) -> Result<u64> {
    (0..plan.runs_per_round)
        .into_par_iter()
        .map(|run| {
            let mut keys = [0u64; 6];
            keys[..5].copy_from_slice(cell_seed);
            keys[5] = run;
            let mut rng = seeded_rng(derive_seed(plan.master_seed, &keys));
            let (a, b) = sample_scenario_pair(scenario, &mut rng)?;
            Ok(u64::from(test.rejects(&a, &b, reference, config, &mut rng)?))
        })
        .try_reduce(|| 0, |x, y| Ok(x + y))
}

/// Mean of the per-round percentages and their standard error (`None` for one round).
pub fn round_summary(counts: &[u64], runs_per_round: u64) -> (f64, Option<f64>) {
    let pcts: Vec<f64> = counts.iter().map(|&c| 100.0 * c as f64 / runs_per_round as f64).collect();
    let m = pcts.len() as f64;
    let mean = pcts.iter().sum::<f64>() / m;
    if pcts.len() < 2 {
        return (mean, None);
    }
    let var = pcts.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, Some((var / m).sqrt()))
}
