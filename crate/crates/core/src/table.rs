//! Rejection-rate tables and their long-form CSV representation.
//!
//! Header: `n,scenario,type,method,folds,alpha,runs_per_round,rounds,rejection_rate_pct,round_se_pct,master_seed`.
//! Rates are written with four decimals; values are rounded to that
//! precision on construction so a written table reads back unchanged.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cv::Method;
use crate::error::{Result, SrdError};
use crate::scenario::ScenarioType;

pub const CSV_HEADER: [&str; 11] = [
    "n",
    "scenario",
    "type",
    "method",
    "folds",
    "alpha",
    "runs_per_round",
    "rounds",
    "rejection_rate_pct",
    "round_se_pct",
    "master_seed",
];

/// One (scenario, method, folds) entry.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cell {
    pub n: usize,
    pub scenario: String,
    #[serde(rename = "type")]
    pub kind: ScenarioType,
    pub method: Method,
    pub folds: usize,
    pub alpha: f64,
    pub runs_per_round: u64,
    pub rounds: u32,
    /// Mean over rounds of the per-round rejection percentage.
    pub rejection_rate_pct: f64,
    /// Standard error of the round means; absent when unknown.
    pub round_se_pct: Option<f64>,
    pub master_seed: u64,
}

/// Rounds to the four decimals used in CSV output.
pub fn round4(x: f64) -> f64 {
    format!("{x:.4}").parse().expect("formatted float parses")
}

impl Cell {
    /// Display name of the test variant, e.g. `Wilcoxon 8`.
    pub fn variant_label(&self) -> String {
        variant_label(self.method, self.folds)
    }
}

pub fn variant_label(method: Method, folds: usize) -> String {
    let name = match method {
        Method::Wilcoxon => "Wilcoxon",
        Method::Dietterich => "Dietterich",
        Method::Alpaydin => "Alpaydin",
    };
    format!("{name} {folds}")
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RejectionTable {
    cells: Vec<Cell>,
}

#[derive(Debug, Deserialize)]
struct RawRow {
    n: usize,
    scenario: String,
    #[serde(rename = "type")]
    kind: String,
    method: String,
    folds: usize,
    alpha: f64,
    runs_per_round: u64,
    rounds: u32,
    rejection_rate_pct: f64,
    round_se_pct: Option<f64>,
    master_seed: u64,
}

impl RejectionTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a cell, rounding its rates to four decimals.
    pub fn push(&mut self, mut cell: Cell) -> Result<()> {
        if !(0.0..=100.0).contains(&cell.rejection_rate_pct) {
            return Err(SrdError::MalformedTable(format!("rate {} outside [0, 100]", cell.rejection_rate_pct)));
        }
        if cell.round_se_pct.is_some_and(|se| se.is_nan() || se < 0.0) {
            return Err(SrdError::MalformedTable("negative standard error".into()));
        }
        if self.get(cell.n, &cell.scenario, cell.method, cell.folds).is_some() {
            return Err(SrdError::MalformedTable(format!(
                "duplicate cell n={} {} {}",
                cell.n,
                cell.scenario,
                cell.variant_label()
            )));
        }
        cell.rejection_rate_pct = round4(cell.rejection_rate_pct);
        cell.round_se_pct = cell.round_se_pct.map(round4);
        self.cells.push(cell);
        Ok(())
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn get(&self, n: usize, scenario: &str, method: Method, folds: usize) -> Option<&Cell> {
        self.cells.iter().find(|c| c.n == n && c.scenario == scenario && c.method == method && c.folds == folds)
    }

    /// Distinct sizes in first-appearance order.
    pub fn sizes(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for c in &self.cells {
            if !out.contains(&c.n) {
                out.push(c.n);
            }
        }
        out
    }

    /// Distinct `(method, folds)` variants in first-appearance order.
    pub fn variants(&self) -> Vec<(Method, usize)> {
        let mut out = Vec::new();
        for c in &self.cells {
            if !out.contains(&(c.method, c.folds)) {
                out.push((c.method, c.folds));
            }
        }
        out
    }

    /// Distinct `(scenario, type)` pairs for size `n`, in first-appearance order.
    pub fn scenarios(&self, n: usize) -> Vec<(String, ScenarioType)> {
        let mut out: Vec<(String, ScenarioType)> = Vec::new();
        for c in self.cells.iter().filter(|c| c.n == n) {
            if !out.iter().any(|(s, _)| *s == c.scenario) {
                out.push((c.scenario.clone(), c.kind));
            }
        }
        out
    }

    /// Concatenates tables; fails on duplicate cells.
    pub fn merge(tables: impl IntoIterator<Item = RejectionTable>) -> Result<Self> {
        let mut out = Self::new();
        for t in tables {
            for c in t.cells {
                out.push(c)?;
            }
        }
        Ok(out)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
        w.write_record(CSV_HEADER)?;
        for c in &self.cells {
            w.write_record([
                c.n.to_string(),
                c.scenario.clone(),
                c.kind.to_string(),
                c.method.to_string(),
                c.folds.to_string(),
                c.alpha.to_string(),
                c.runs_per_round.to_string(),
                c.rounds.to_string(),
                format!("{:.4}", c.rejection_rate_pct),
                c.round_se_pct.map(|se| format!("{se:.4}")).unwrap_or_default(),
                c.master_seed.to_string(),
            ])?;
        }
        w.flush().map_err(|e| SrdError::Csv(e.into()))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is UTF-8")
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        if header != CSV_HEADER {
            return Err(SrdError::MalformedTable(format!("unexpected header {}", header.join(","))));
        }
        let mut table = Self::new();
        for row in r.deserialize() {
            let row: RawRow = row?;
            table.push(Cell {
                n: row.n,
                scenario: row.scenario,
                kind: row.kind.parse()?,
                method: row.method.parse()?,
                folds: row.folds,
                alpha: row.alpha,
                runs_per_round: row.runs_per_round,
                rounds: row.rounds,
                rejection_rate_pct: row.rejection_rate_pct,
                round_se_pct: row.round_se_pct,
                master_seed: row.master_seed,
            })?;
        }
        Ok(table)
    }

    pub fn from_csv_str(s: &str) -> Result<Self> {
        Self::read_csv(s.as_bytes())
    }
}

/// Writes `table` to `path`.
pub fn export_table(table: &RejectionTable, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|source| SrdError::Io { path: path.to_path_buf(), source })?;
    table.write_csv(file).map_err(|e| with_path(e, path))
}

pub fn import_table(path: &Path) -> Result<RejectionTable> {
    let file = File::open(path).map_err(|source| SrdError::Io { path: path.to_path_buf(), source })?;
    RejectionTable::read_csv(file).map_err(|e| with_path(e, path))
}

fn with_path(e: SrdError, path: &Path) -> SrdError {
    match e {
        SrdError::Csv(c) if c.is_io_error() => match c.into_kind() {
            csv::ErrorKind::Io(source) => SrdError::Io { path: path.to_path_buf(), source },
            _ => unreachable!(),
        },
        other => other,
    }
}

const PUBLISHED_32: &str = include_str!("../data/rejection_n32.csv");
const PUBLISHED_13: &str = include_str!("../data/rejection_n13.csv");
const PUBLISHED_7: &str = include_str!("../data/rejection_n7.csv");

/// Published rejection rates (100 000 runs × 10 rounds) for n = 32, 13 or 7.
pub fn published_table(n: usize) -> Result<RejectionTable> {
    let src = match n {
        32 => PUBLISHED_32,
        13 => PUBLISHED_13,
        7 => PUBLISHED_7,
        _ => return Err(SrdError::UnsupportedSize { n }),
    };
    RejectionTable::from_csv_str(src)
}

/// All three published tables stacked in the order n = 32, 13, 7.
pub fn published_tables() -> RejectionTable {
    RejectionTable::merge([32, 13, 7].map(|n| published_table(n).expect("bundled table parses")))
        .expect("bundled tables are disjoint")
}
