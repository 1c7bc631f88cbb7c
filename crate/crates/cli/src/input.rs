//! Loading a data matrix from CSV: a header row of column names, one row per
//! object, every field a number with `.` as decimal separator.

use std::collections::HashSet;
use std::fs::File;
use std::path::Path;

use srdcv_core::{DataMatrix, Fusion, ReferenceSpec};

use crate::CliError;

pub enum RefChoice {
    Column(String),
    Fused(Fusion),
}

pub struct Dataset {
    pub matrix: DataMatrix,
    /// Index of the reference column, if the reference is a column.
    pub reference_col: Option<usize>,
}

impl Dataset {
    pub fn column(&self, name: &str) -> Result<usize, CliError> {
        self.matrix.column_index(name).ok_or_else(|| CliError::missing_column(name))
    }
}

pub fn read_columns(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>), CliError> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let names: Vec<String> = reader
        .headers()
        .map_err(|e| CliError::malformed(format!("{}: {e}", path.display())))?
        .iter()
        .map(str::to_string)
        .collect();
    if names.is_empty() || names.iter().any(String::is_empty) {
        return Err(CliError::malformed(format!("{}: empty column name in header", path.display())));
    }
    let mut seen = HashSet::new();
    if let Some(dup) = names.iter().find(|n| !seen.insert(n.as_str())) {
        return Err(CliError::malformed(format!("{}: duplicate column '{dup}'", path.display())));
    }

    let mut columns = vec![Vec::new(); names.len()];
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::malformed(format!("{}: {e}", path.display())))?;
        for (c, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| {
                CliError::malformed(format!(
                    "{}: row {}, column '{}': '{field}' is not a number",
                    path.display(),
                    row + 1,
                    names[c]
                ))
            })?;
            if !v.is_finite() {
                return Err(CliError::malformed(format!(
                    "{}: row {}, column '{}' is not finite",
                    path.display(),
                    row + 1,
                    names[c]
                )));
            }
            columns[c].push(v);
        }
    }
    if columns[0].len() < 2 {
        return Err(CliError::malformed(format!("{}: need at least 2 data rows", path.display())));
    }
    Ok((names, columns))
}

/// Reads the CSV, negates the `descending` columns and attaches the reference.
pub fn load_dataset(path: &Path, reference: RefChoice, descending: &[String]) -> Result<Dataset, CliError> {
    let (names, columns) = read_columns(path)?;
    let find = |name: &str| names.iter().position(|n| n == name).ok_or_else(|| CliError::missing_column(name));
    let (spec, reference_col) = match reference {
        RefChoice::Column(name) => {
            let c = find(&name)?;
            (ReferenceSpec::Column(c), Some(c))
        }
        RefChoice::Fused(rule) => (ReferenceSpec::Fused(rule), None),
    };
    let mut flip = descending.iter().map(|d| find(d)).collect::<Result<Vec<_>, _>>()?;
    flip.sort_unstable();
    flip.dedup();
    let mut matrix = DataMatrix::new(columns, names, spec).map_err(CliError::from)?;
    for c in flip {
        matrix.negate_column(c);
    }
    Ok(Dataset { matrix, reference_col })
}
