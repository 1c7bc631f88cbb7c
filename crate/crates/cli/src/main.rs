//! `srdcv`: SRD scores, permutation and cross-validation tests on CSV data,
//! rejection-rate simulations and the evaluation of test variants.
//!
//! Results go to stdout as CSV. Diagnostics go to stderr; errors are printed
//! as `error_code=<code>: <message>` and the process exits with that code.

mod input;

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand};
use srdcv_core::criteria::{borda_csv, criteria_csv};
use srdcv_core::rng::derive_seed;
use srdcv_core::scenario::{
    manifest_csv, transformation_distances, CATALOG_CALIBRATION_SAMPLES, CATALOG_CALIBRATION_SEED,
};
use srdcv_core::sim::{run_simulation_with, CvRunTest, Progress, DEFAULT_FOLDS};
use srdcv_core::table::{published_tables, variant_label};
use srdcv_core::{
    calibrate_x, evaluate, export_table, import_table, meta_srd, perm_test, rng, run_cv_test, scenario_catalog, srd,
    to_ranking_matrix, CvConfig, Fusion, Method, PairDraw, RunOptions, SimPlan, SrdError, Transformation,
    WilcoxonPValue,
};

use input::{load_dataset, Dataset, RefChoice};

pub struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    pub const GENERAL: u8 = 1;
    pub const MALFORMED: u8 = 2;
    pub const MISSING_COLUMN: u8 = 3;
    pub const INVALID_CONFIG: u8 = 4;
    pub const USAGE: u8 = 64;

    fn new(code: u8, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }

    pub fn malformed(message: impl Into<String>) -> Self {
        Self::new(Self::MALFORMED, message)
    }

    pub fn missing_column(name: &str) -> Self {
        Self::new(Self::MISSING_COLUMN, format!("no column named '{name}'"))
    }

    pub fn io(path: &Path, e: io::Error) -> Self {
        Self::new(Self::GENERAL, format!("{}: {e}", path.display()))
    }
}

impl From<SrdError> for CliError {
    fn from(e: SrdError) -> Self {
        let code = match &e {
            SrdError::Csv(_)
            | SrdError::MalformedTable(_)
            | SrdError::NonFiniteValue { .. }
            | SrdError::TooShort { .. }
            | SrdError::InvalidMatrix(_)
            | SrdError::MissingScenario(_) => CliError::MALFORMED,
            SrdError::InvalidFolds { .. }
            | SrdError::UnknownMethod(_)
            | SrdError::InvalidAlpha(_)
            | SrdError::TooFewRows { .. }
            | SrdError::UnknownScenario(_)
            | SrdError::UnsupportedSize { .. }
            | SrdError::SizeTooSmall { .. }
            | SrdError::InvalidPlan(_) => CliError::INVALID_CONFIG,
            _ => CliError::GENERAL,
        };
        CliError::new(code, e.to_string())
    }
}

#[derive(Parser)]
#[command(name = "srdcv", version, about = "Compare rankings with SRD and cross-validated tests")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// SRD of every column from the reference ranking.
    Srd(SrdArgs),
    /// SRD of every column with a permutation test against random rankings.
    Permtest(SrdArgs),
    /// Repeated cross-validation tests of two columns; prints the rejection rate.
    Cvtest(CvtestArgs),
    /// Monte Carlo rejection rates over the scenario catalog.
    Simulate(SimulateArgs),
    /// Ranks test variants from a rejection table with the seven criteria and Borda.
    Evaluate(EvaluateArgs),
    /// Inversion count matching four mid-range swaps; optionally exports distance samples.
    Calibrate(CalibrateArgs),
}

#[derive(Args)]
#[command(group(ArgGroup::new("reference").required(true).args(["ref_col", "fusion"])))]
struct DataArgs {
    /// CSV with a header row; rows are objects, columns are variables.
    #[arg(long)]
    input: PathBuf,
    /// Column holding the reference values.
    #[arg(long)]
    ref_col: Option<String>,
    /// Build the reference as the row-wise mean or median of all columns.
    #[arg(long, value_parser = parse_fusion)]
    fusion: Option<Fusion>,
    /// Columns where larger values rank first.
    #[arg(long, value_delimiter = ',')]
    descending: Vec<String>,
}

impl DataArgs {
    fn load(&self) -> Result<Dataset, CliError> {
        let reference = match (&self.ref_col, self.fusion) {
            (Some(col), _) => RefChoice::Column(col.clone()),
            (None, Some(rule)) => RefChoice::Fused(rule),
            (None, None) => unreachable!("clap requires one reference option"),
        };
        load_dataset(&self.input, reference, &self.descending)
    }
}

#[derive(Args)]
struct SrdArgs {
    #[command(flatten)]
    data: DataArgs,
}

#[derive(Args)]
struct CvtestArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    col_a: String,
    #[arg(long)]
    col_b: String,
    /// wilcoxon, dietterich or alpaydin.
    #[arg(long)]
    method: String,
    #[arg(long)]
    folds: String,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 1)]
    runs: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Wilcoxon p-value: auto, exact or normal.
    #[arg(long, default_value = "auto")]
    wilcoxon_p: String,
}

#[derive(Args)]
struct SimulateArgs {
    /// Number of objects per ranking.
    #[arg(long)]
    n: usize,
    /// Scenario labels to run (default: all nine).
    #[arg(long, value_delimiter = ',')]
    scenarios: Vec<String>,
    /// Methods to run (default: all three).
    #[arg(long, value_delimiter = ',')]
    methods: Vec<String>,
    /// Fold counts to run with every method (default: 5 to 10).
    #[arg(long, value_delimiter = ',')]
    folds: Vec<String>,
    #[arg(long, conflicts_with = "full_scale")]
    runs: Option<u64>,
    #[arg(long, conflicts_with = "full_scale")]
    rounds: Option<u32>,
    /// 100 000 runs in each of 10 rounds.
    #[arg(long)]
    full_scale: bool,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, default_value = "auto")]
    wilcoxon_p: String,
    /// Write the table here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Resume from and save finished rounds to this file.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Write the scenario catalog as CSV.
    #[arg(long)]
    manifest_out: Option<PathBuf>,
    /// Report each finished round on stderr.
    #[arg(long)]
    progress: bool,
}

#[derive(Args)]
#[command(group(ArgGroup::new("source").required(true).args(["table", "bundled"])))]
struct EvaluateArgs {
    /// Rejection table CSV as written by `simulate`.
    #[arg(long)]
    table: Option<PathBuf>,
    /// Use the bundled published tables for n = 32, 13 and 7.
    #[arg(long)]
    bundled: bool,
    /// Write `<prefix>_n<N>_criteria.csv`, `<prefix>_n<N>_borda.csv` and `<prefix>_meta_srd.csv`.
    #[arg(long)]
    out_prefix: Option<String>,
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = CATALOG_CALIBRATION_SAMPLES)]
    samples: usize,
    #[arg(long, default_value_t = CATALOG_CALIBRATION_SEED)]
    seed: u64,
    /// Write per-sample normalized SRDs of each catalog transformation (plot data).
    #[arg(long)]
    distances_out: Option<PathBuf>,
}

fn parse_fusion(s: &str) -> Result<Fusion, String> {
    s.parse().map_err(|e: SrdError| e.to_string())
}

fn parse_method(s: &str) -> Result<Method, CliError> {
    s.parse().map_err(CliError::from)
}

fn parse_folds(s: &str) -> Result<usize, CliError> {
    s.trim().parse().map_err(|_| CliError::new(CliError::INVALID_CONFIG, format!("invalid fold count '{s}'")))
}

fn parse_wilcoxon_p(s: &str) -> Result<WilcoxonPValue, CliError> {
    s.parse().map_err(CliError::from)
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn cmd_srd(args: &SrdArgs, with_test: bool, out: &mut String) -> Result<(), CliError> {
    let data = args.data.load()?;
    let rm = to_ranking_matrix(&data.matrix)?;
    if with_test {
        out.push_str("column,raw_srd,normalized_srd,p_value,xx1,median,xx19,exact\n");
    } else {
        out.push_str("column,raw_srd,normalized_srd\n");
    }
    for (c, ranking) in rm.rankings.iter().enumerate() {
        if Some(c) == data.reference_col {
            continue;
        }
        let score = srd(ranking, &rm.reference)?;
        let name = &data.matrix.names()[c];
        if with_test {
            let t = perm_test(&score)?;
            writeln!(
                out,
                "{name},{},{:.6},{:.4e},{:.6},{:.6},{:.6},{}",
                score.raw(),
                score.normalized(),
                t.p_value,
                t.xx1,
                t.median,
                t.xx19,
                t.exact
            )
            .unwrap();
        } else {
            writeln!(out, "{name},{},{:.6}", score.raw(), score.normalized()).unwrap();
        }
    }
    Ok(())
}

fn cmd_cvtest(args: &CvtestArgs, out: &mut String) -> Result<(), CliError> {
    let method = parse_method(&args.method)?;
    let folds = parse_folds(&args.folds)?;
    let config =
        CvConfig::new(method, folds).with_alpha(args.alpha).with_wilcoxon_p(parse_wilcoxon_p(&args.wilcoxon_p)?);
    config.validate()?;
    if args.runs == 0 {
        return Err(CliError::new(CliError::INVALID_CONFIG, "--runs must be at least 1"));
    }
    let data = args.data.load()?;
    let a = data.column(&args.col_a)?;
    let b = data.column(&args.col_b)?;
    let rm = to_ranking_matrix(&data.matrix)?;
    let mut rejections = 0u64;
    for run in 0..args.runs {
        let cfg = config.with_seed(derive_seed(args.seed, &[run]));
        if run_cv_test(&rm.rankings[a], &rm.rankings[b], &rm.reference, &cfg)?.reject {
            rejections += 1;
        }
    }
    let rate = 100.0 * rejections as f64 / args.runs as f64;
    out.push_str("method,folds,runs,rejection_rate_pct\n");
    writeln!(out, "{method},{folds},{},{rate:.4}", args.runs).unwrap();
    Ok(())
}

fn cmd_simulate(args: &SimulateArgs, out: &mut String) -> Result<(), CliError> {
    let methods = if args.methods.is_empty() {
        Method::ALL.to_vec()
    } else {
        args.methods.iter().map(|m| parse_method(m)).collect::<Result<_, _>>()?
    };
    let folds = if args.folds.is_empty() {
        DEFAULT_FOLDS.to_vec()
    } else {
        args.folds.iter().map(|k| parse_folds(k)).collect::<Result<_, _>>()?
    };
    let variants = methods.iter().flat_map(|&m| folds.iter().map(move |&k| (m, k))).collect();

    let mut plan =
        if args.full_scale { SimPlan::full_scale(args.n, args.seed)? } else { SimPlan::desk(args.n, args.seed)? };
    if !args.scenarios.is_empty() {
        let labels: Vec<&str> = args.scenarios.iter().map(|s| s.trim()).collect();
        plan = plan.with_scenarios(&labels)?;
    }
    plan = plan.with_variants(variants);
    plan.runs_per_round = args.runs.unwrap_or(plan.runs_per_round);
    plan.rounds = args.rounds.unwrap_or(plan.rounds);
    plan.alpha = args.alpha;
    plan.wilcoxon_p = parse_wilcoxon_p(&args.wilcoxon_p)?;
    if let Some(t) = args.threads {
        plan = plan.with_threads(t);
    }
    plan.validate()?;

    if let Some(path) = &args.manifest_out {
        write_file(path, &manifest_csv(&plan.scenarios))?;
    }
    let mut report = |p: &Progress| {
        eprintln!(
            "cell {}/{} {} {} round {}/{}: {} rejections{}",
            p.cell + 1,
            p.cells,
            p.scenario,
            p.variant,
            p.round + 1,
            p.rounds,
            p.rejections,
            if p.resumed { " (resumed)" } else { "" }
        );
    };
    let options = RunOptions {
        checkpoint: args.checkpoint.as_deref(),
        progress: if args.progress { Some(&mut report) } else { None },
    };
    let table = run_simulation_with(&plan, &CvRunTest, options)?;
    match &args.out {
        Some(path) => export_table(&table, path)?,
        None => out.push_str(&table.to_csv_string()),
    }
    Ok(())
}

fn cmd_evaluate(args: &EvaluateArgs, out: &mut String) -> Result<(), CliError> {
    let table = match &args.table {
        Some(path) => import_table(path)?,
        None => published_tables(),
    };
    let sizes = table.sizes();
    if sizes.is_empty() {
        return Err(CliError::malformed("rejection table has no rows"));
    }
    let evaluations = sizes.iter().map(|&n| evaluate(&table, n)).collect::<Result<Vec<_>, _>>()?;

    out.push_str("n,method,folds,variant,borda_score,final_rank\n");
    for e in &evaluations {
        for (i, &(m, k)) in e.borda.variants.iter().enumerate() {
            writeln!(out, "{},{m},{k},{},{},{}", e.n, variant_label(m, k), e.borda.scores[i], e.borda.final_ranks[i])
                .unwrap();
        }
    }

    if let Some(prefix) = &args.out_prefix {
        for e in &evaluations {
            write_file(Path::new(&format!("{prefix}_n{}_criteria.csv", e.n)), &criteria_csv(&e.criteria))?;
            write_file(Path::new(&format!("{prefix}_n{}_borda.csv", e.n)), &borda_csv(&e.borda))?;
        }
        let meta = meta_srd(&evaluations)?;
        let mut csv = String::from("criterion,normalized_srd,p_value,xx1,median,xx19\n");
        for (i, c) in meta.criteria.iter().enumerate() {
            writeln!(
                csv,
                "{c},{:.6},{:.6},{:.6},{:.6},{:.6}",
                meta.srd[i], meta.p_values[i], meta.null.xx1, meta.null.median, meta.null.xx19
            )
            .unwrap();
        }
        write_file(Path::new(&format!("{prefix}_meta_srd.csv")), &csv)?;
    }
    Ok(())
}

fn catalog_transformations(n: usize) -> Result<Vec<Transformation>, CliError> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for s in scenario_catalog(n)? {
        let ts = match s.draw {
            PairDraw::Fixed { a, b } => vec![a, b],
            PairDraw::RandomSame { choices } | PairDraw::RandomDistinct { choices } => choices,
        };
        for t in ts {
            if seen.insert(t.label()) {
                out.push(t);
            }
        }
    }
    Ok(out)
}

fn cmd_calibrate(args: &CalibrateArgs, out: &mut String) -> Result<(), CliError> {
    let x = calibrate_x(args.n, &mut rng::seeded_rng(args.seed), args.samples)?;
    out.push_str("n,samples,seed,x\n");
    writeln!(out, "{},{},{},{x}", args.n, args.samples, args.seed).unwrap();

    if let Some(path) = &args.distances_out {
        let mut csv = String::from("transformation,sample,normalized_srd\n");
        let mut ts = catalog_transformations(args.n)?;
        if !ts.contains(&Transformation::Inversions(x)) {
            ts.push(Transformation::Inversions(x));
        }
        for t in ts {
            for (i, d) in transformation_distances(t, args.n, args.samples, args.seed)?.iter().enumerate() {
                writeln!(csv, "{},{i},{d:.6}", t.label()).unwrap();
            }
        }
        write_file(path, &csv)?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<String, CliError> {
    let mut out = String::new();
    match &cli.command {
        Command::Srd(a) => cmd_srd(a, false, &mut out)?,
        Command::Permtest(a) => cmd_srd(a, true, &mut out)?,
        Command::Cvtest(a) => cmd_cvtest(a, &mut out)?,
        Command::Simulate(a) => cmd_simulate(a, &mut out)?,
        Command::Evaluate(a) => cmd_evaluate(a, &mut out)?,
        Command::Calibrate(a) => cmd_calibrate(a, &mut out)?,
    }
    Ok(out)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("error_code={}: {e}", CliError::USAGE);
            return ExitCode::from(CliError::USAGE);
        }
    };
    match run(cli) {
        Ok(out) => {
            let mut stdout = io::stdout().lock();
            if stdout.write_all(out.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(CliError::GENERAL);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error_code={}: {}", e.code, e.message);
            ExitCode::from(e.code)
        }
    }
}
