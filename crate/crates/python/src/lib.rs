//! Python module `srdcv`.
//!
//! Rankings are passed as plain sequences of values and ranked ascending with
//! average ranks for ties, exactly as the Rust API does.

use std::collections::BTreeMap;

use pyo3::create_exception;
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;

use srdcv_core::cv::signed_rank_test_with;
use srdcv_core::scenario::{scenario_catalog, tabulated_mid_swap_x};
use srdcv_core::sim::{run_simulation, DEFAULT_FOLDS};
use srdcv_core::table::variant_label;
use srdcv_core::{self as core, Method, Ranking};

create_exception!(srdcv, SrdError, PyValueError, "Invalid input to an srdcv routine.");

fn err(e: core::SrdError) -> PyErr {
    match e {
        core::SrdError::Io { .. } => PyOSError::new_err(e.to_string()),
        other => SrdError::new_err(other.to_string()),
    }
}

fn ranking(values: &[f64]) -> PyResult<Ranking> {
    core::rank_column(values).map_err(err)
}

fn method(name: &str) -> PyResult<Method> {
    name.parse().map_err(err)
}

#[pyclass(frozen, module = "srdcv")]
struct SrdScore {
    #[pyo3(get)]
    raw: f64,
    #[pyo3(get)]
    normalized: f64,
    #[pyo3(get)]
    n: usize,
}

#[pymethods]
impl SrdScore {
    fn __repr__(&self) -> String {
        format!("SrdScore(raw={}, normalized={:.6}, n={})", self.raw, self.normalized, self.n)
    }
}

#[pyclass(frozen, module = "srdcv")]
struct PermTest {
    #[pyo3(get)]
    srd_normalized: f64,
    #[pyo3(get)]
    p_value: f64,
    #[pyo3(get)]
    xx1: f64,
    #[pyo3(get)]
    median: f64,
    #[pyo3(get)]
    xx19: f64,
    #[pyo3(get)]
    exact: bool,
}

#[pymethods]
impl PermTest {
    fn __repr__(&self) -> String {
        format!(
            "PermTest(srd_normalized={:.6}, p_value={:.4e}, xx1={:.4}, median={:.4}, xx19={:.4}, exact={})",
            self.srd_normalized, self.p_value, self.xx1, self.median, self.xx19, self.exact
        )
    }
}

#[pyclass(frozen, module = "srdcv")]
struct SignedRank {
    #[pyo3(get)]
    w_plus: f64,
    #[pyo3(get)]
    w_minus: f64,
    #[pyo3(get)]
    nonzero: usize,
    #[pyo3(get)]
    p_value: f64,
    #[pyo3(get)]
    exact: bool,
}

#[pymethods]
impl SignedRank {
    fn __repr__(&self) -> String {
        format!(
            "SignedRank(w_plus={}, w_minus={}, p_value={:.6}, exact={})",
            self.w_plus, self.w_minus, self.p_value, self.exact
        )
    }
}

#[pyclass(frozen, module = "srdcv")]
struct CvResult {
    #[pyo3(get)]
    method: String,
    #[pyo3(get)]
    folds: usize,
    #[pyo3(get)]
    alpha: f64,
    #[pyo3(get)]
    statistic: f64,
    #[pyo3(get)]
    p_value: f64,
    #[pyo3(get)]
    reject: bool,
    /// Per-fold `SRD(a) - SRD(b)` in normalized units; k×2 tests report both halves.
    #[pyo3(get)]
    fold_diffs: Vec<Vec<f64>>,
}

#[pymethods]
impl CvResult {
    fn __repr__(&self) -> String {
        format!(
            "CvResult(method='{}', folds={}, statistic={:.6}, p_value={:.6}, reject={})",
            self.method, self.folds, self.statistic, self.p_value, self.reject
        )
    }
}

/// Rejection rates keyed by size, scenario and test variant.
#[pyclass(frozen, module = "srdcv")]
struct RejectionTable {
    inner: core::RejectionTable,
}

#[pymethods]
impl RejectionTable {
    /// Parses the CSV written by `to_csv` or the `simulate` command.
    #[staticmethod]
    fn from_csv(text: &str) -> PyResult<Self> {
        Ok(Self { inner: core::RejectionTable::from_csv_str(text).map_err(err)? })
    }

    /// Published rates for n = 32, 13 or 7.
    #[staticmethod]
    fn published(n: usize) -> PyResult<Self> {
        Ok(Self { inner: core::published_table(n).map_err(err)? })
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv_string()
    }

    fn sizes(&self) -> Vec<usize> {
        self.inner.sizes()
    }

    /// Rejection percentage of one cell, or `None`.
    fn rate(&self, n: usize, scenario: &str, method: &str, folds: usize) -> PyResult<Option<f64>> {
        let m = self::method(method)?;
        Ok(self.inner.get(n, scenario, m, folds).map(|c| c.rejection_rate_pct))
    }

    /// Every cell as a dict with the CSV column names.
    fn cells<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, pyo3::types::PyDict>>> {
        use pyo3::types::PyDict;
        self.inner
            .cells()
            .iter()
            .map(|c| {
                let d = PyDict::new(py);
                d.set_item("n", c.n)?;
                d.set_item("scenario", &c.scenario)?;
                d.set_item("type", c.kind.to_string())?;
                d.set_item("method", c.method.to_string())?;
                d.set_item("folds", c.folds)?;
                d.set_item("alpha", c.alpha)?;
                d.set_item("runs_per_round", c.runs_per_round)?;
                d.set_item("rounds", c.rounds)?;
                d.set_item("rejection_rate_pct", c.rejection_rate_pct)?;
                d.set_item("round_se_pct", c.round_se_pct)?;
                d.set_item("master_seed", c.master_seed)?;
                Ok(d)
            })
            .collect()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("RejectionTable({} cells, sizes {:?})", self.inner.len(), self.inner.sizes())
    }
}

/// Criteria and Borda aggregation for one size.
#[pyclass(frozen, module = "srdcv")]
struct Evaluation {
    inner: core::Evaluation,
}

#[pymethods]
impl Evaluation {
    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    /// Borda score per variant label, e.g. `{"Wilcoxon 5": 91.5, ...}`.
    fn borda(&self) -> BTreeMap<String, f64> {
        let b = &self.inner.borda;
        b.variants.iter().zip(&b.scores).map(|(&(m, k), &s)| (variant_label(m, k), s)).collect()
    }

    /// Variant labels from best to worst.
    fn ranking(&self) -> Vec<String> {
        self.inner.borda.ranking.iter().map(|&(m, k)| variant_label(m, k)).collect()
    }

    /// `{criterion: {variant: (raw, rank)}}`.
    fn criteria(&self) -> BTreeMap<String, BTreeMap<String, (f64, f64)>> {
        self.inner
            .criteria
            .iter()
            .map(|c| {
                let per = c
                    .variants
                    .iter()
                    .enumerate()
                    .map(|(i, &(m, k))| (variant_label(m, k), (c.raw[i], c.ranks[i])))
                    .collect();
                (c.criterion.to_string(), per)
            })
            .collect()
    }

    fn __repr__(&self) -> String {
        format!("Evaluation(n={}, best={:?})", self.inner.n, self.ranking().first())
    }
}

/// Average ranks (1-based, ties share the mean rank) of `values`.
#[pyfunction]
fn rank_column(values: Vec<f64>) -> PyResult<Vec<f64>> {
    Ok(ranking(&values)?.ranks())
}

/// Largest footrule distance between two rankings of `n` objects.
#[pyfunction]
fn max_distance(n: usize) -> PyResult<u64> {
    core::max_distance(n).map_err(err)
}

/// SRD of `values` from `reference`, both ranked ascending.
#[pyfunction]
fn srd(values: Vec<f64>, reference: Vec<f64>) -> PyResult<SrdScore> {
    let s = core::srd(&ranking(&values)?, &ranking(&reference)?).map_err(err)?;
    Ok(SrdScore { raw: s.raw(), normalized: s.normalized(), n: s.n() })
}

#[pyfunction]
fn perm_test(values: Vec<f64>, reference: Vec<f64>) -> PyResult<PermTest> {
    let s = core::srd(&ranking(&values)?, &ranking(&reference)?).map_err(err)?;
    let t = core::perm_test(&s).map_err(err)?;
    Ok(PermTest {
        srd_normalized: t.srd_normalized,
        p_value: t.p_value,
        xx1: t.xx1,
        median: t.median,
        xx19: t.xx19,
        exact: t.exact,
    })
}

/// Exact null of the raw SRD for `n <= 10` as `{raw: probability}`.
#[pyfunction]
fn exact_null(n: usize) -> PyResult<BTreeMap<u64, f64>> {
    let null = core::exact_null(n).map_err(err)?;
    Ok(null.pmf().expect("exact null has a pmf").into_iter().collect())
}

/// Two-sided signed-rank test; zeros are dropped.
#[pyfunction]
#[pyo3(signature = (diffs, mode = "exact", alpha = 0.05))]
fn signed_rank_test(diffs: Vec<f64>, mode: &str, alpha: f64) -> PyResult<SignedRank> {
    let r = signed_rank_test_with(&diffs, mode.parse().map_err(err)?, alpha);
    Ok(SignedRank { w_plus: r.w_plus, w_minus: r.w_minus, nonzero: r.nonzero, p_value: r.p_value, exact: r.exact })
}

/// Cross-validation test of rankings `a` and `b` against `reference`.
#[pyfunction]
#[pyo3(signature = (a, b, reference, method, folds, alpha = 0.05, seed = 0, wilcoxon_p = "auto"))]
#[allow(clippy::too_many_arguments)]
fn cv_test(
    a: Vec<f64>,
    b: Vec<f64>,
    reference: Vec<f64>,
    method: &str,
    folds: usize,
    alpha: f64,
    seed: u64,
    wilcoxon_p: &str,
) -> PyResult<CvResult> {
    let config = core::CvConfig::new(self::method(method)?, folds)
        .with_alpha(alpha)
        .with_seed(seed)
        .with_wilcoxon_p(wilcoxon_p.parse().map_err(err)?);
    let r = core::run_cv_test(&ranking(&a)?, &ranking(&b)?, &ranking(&reference)?, &config).map_err(err)?;
    let fold_diffs = r
        .fold_scores
        .iter()
        .map(|(first, second)| std::iter::once(first.diff).chain(second.map(|s| s.diff)).collect())
        .collect();
    Ok(CvResult {
        method: r.method.to_string(),
        folds: r.folds,
        alpha: r.alpha,
        statistic: r.statistic,
        p_value: r.p_value,
        reject: r.reject,
        fold_diffs,
    })
}

/// `(label, type)` of the nine scenarios for size `n`.
#[pyfunction]
fn scenarios(n: usize) -> PyResult<Vec<(String, String)>> {
    Ok(scenario_catalog(n).map_err(err)?.into_iter().map(|s| (s.label, s.kind.to_string())).collect())
}

/// Smallest inversion count whose mean distance matches four mid-range swaps.
#[pyfunction]
#[pyo3(signature = (n, samples = 20000, seed = 0))]
fn calibrate_x(py: Python<'_>, n: usize, samples: usize, seed: u64) -> PyResult<usize> {
    py.detach(|| core::calibrate_x(n, &mut core::rng::seeded_rng(seed), samples)).map_err(err)
}

/// Inversion count used in the `x|4m` scenario at the published sizes.
#[pyfunction]
fn tabulated_x(n: usize) -> Option<usize> {
    tabulated_mid_swap_x(n)
}

/// Monte Carlo rejection rates. `methods` and `folds` are crossed; defaults
/// are all three methods with 5 to 10 folds and all nine scenarios.
#[pyfunction]
#[pyo3(signature = (
    n, runs = 10000, rounds = 3, seed = 0, scenarios = None, methods = None, folds = None,
    alpha = 0.05, threads = None, wilcoxon_p = "auto"
))]
#[allow(clippy::too_many_arguments)]
fn simulate(
    py: Python<'_>,
    n: usize,
    runs: u64,
    rounds: u32,
    seed: u64,
    scenarios: Option<Vec<String>>,
    methods: Option<Vec<String>>,
    folds: Option<Vec<usize>>,
    alpha: f64,
    threads: Option<usize>,
    wilcoxon_p: &str,
) -> PyResult<RejectionTable> {
    let mut plan = core::SimPlan::desk(n, seed).map_err(err)?.with_runs(runs, rounds);
    if let Some(labels) = &scenarios {
        let labels: Vec<&str> = labels.iter().map(String::as_str).collect();
        plan = plan.with_scenarios(&labels).map_err(err)?;
    }
    if methods.is_some() || folds.is_some() {
        let ms = match methods {
            Some(ms) => ms.iter().map(|m| method(m)).collect::<PyResult<Vec<_>>>()?,
            None => Method::ALL.to_vec(),
        };
        let ks = folds.unwrap_or_else(|| DEFAULT_FOLDS.to_vec());
        plan = plan.with_variants(ms.iter().flat_map(|&m| ks.iter().map(move |&k| (m, k))).collect());
    }
    plan.alpha = alpha;
    plan.wilcoxon_p = wilcoxon_p.parse().map_err(err)?;
    if let Some(t) = threads {
        plan = plan.with_threads(t);
    }
    let inner = py.detach(|| run_simulation(&plan)).map_err(err)?;
    Ok(RejectionTable { inner })
}

/// Seven criteria and their Borda aggregation for size `n` of `table`.
#[pyfunction]
fn evaluate(table: &RejectionTable, n: usize) -> PyResult<Evaluation> {
    Ok(Evaluation { inner: core::evaluate(&table.inner, n).map_err(err)? })
}

/// Normalized SRD of each criterion from the consensus over all evaluations,
/// plus the 5% random threshold `xx1`.
#[pyfunction]
fn meta_srd(evaluations: Vec<PyRef<'_, Evaluation>>) -> PyResult<(BTreeMap<String, f64>, f64)> {
    let evals: Vec<core::Evaluation> = evaluations.iter().map(|e| e.inner.clone()).collect();
    let m = core::meta_srd(&evals).map_err(err)?;
    Ok((m.criteria.iter().map(|c| c.to_string()).zip(m.srd).collect(), m.null.xx1))
}

#[pymodule]
pub fn srdcv(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("SrdError", m.py().get_type::<SrdError>())?;
    m.add_class::<SrdScore>()?;
    m.add_class::<PermTest>()?;
    m.add_class::<SignedRank>()?;
    m.add_class::<CvResult>()?;
    m.add_class::<RejectionTable>()?;
    m.add_class::<Evaluation>()?;
    m.add_function(wrap_pyfunction!(rank_column, m)?)?;
    m.add_function(wrap_pyfunction!(max_distance, m)?)?;
    m.add_function(wrap_pyfunction!(srd, m)?)?;
    m.add_function(wrap_pyfunction!(perm_test, m)?)?;
    m.add_function(wrap_pyfunction!(exact_null, m)?)?;
    m.add_function(wrap_pyfunction!(signed_rank_test, m)?)?;
    m.add_function(wrap_pyfunction!(cv_test, m)?)?;
    m.add_function(wrap_pyfunction!(scenarios, m)?)?;
    m.add_function(wrap_pyfunction!(calibrate_x, m)?)?;
    m.add_function(wrap_pyfunction!(tabulated_x, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(meta_srd, m)?)?;
    Ok(())
}
