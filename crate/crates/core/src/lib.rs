//! Comparing rankings with Sum of Ranking Differences (SRD) and
//! cross-validated hypothesis tests.
//!
//! The crate covers the whole pipeline: ranking raw data, SRD scores and
//! their null distribution, three cross-validation tests (Wilcoxon
//! signed-rank, Dietterich k×2 t, Alpaydin k×2 F), synthetic perturbation
//! scenarios, the Monte Carlo rejection-rate harness, and the criteria used
//! to rank test variants from a rejection table.

pub mod criteria;
pub mod cv;
pub mod error;
pub mod null_dist;
pub mod ranking;
pub mod rng;
pub mod scenario;
pub mod sim;
pub mod special;
pub mod srd;
pub mod table;

pub use criteria::{borda, evaluate, meta_srd, BordaResult, Criterion, CriterionScores, Evaluation, MetaSrd};
pub use cv::{
    run_cv_test, signed_rank_test, CvConfig, CvTestResult, FoldPlan, FoldScores, Method, SignedRank, WilcoxonPValue,
};
pub use error::{Result, SrdError};
pub use null_dist::{exact_null, normal_null, perm_test, PermTestResult, SrdNull};
pub use ranking::{
    rank_column, to_ranking_matrix, DataMatrix, Fusion, Ranking, RankingMatrix, ReferenceSpec, RowSubset,
};
pub use scenario::{
    apply_transformation, calibrate_x, sample_scenario_pair, scenario_catalog, PairDraw, Scenario, ScenarioType,
    Transformation,
};
pub use sim::{run_simulation, run_simulation_with, RunOptions, SimPlan};
pub use srd::{distance, max_distance, srd, SrdScore};
pub use table::{export_table, import_table, published_table, Cell, RejectionTable};
