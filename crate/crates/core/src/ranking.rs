//! Rankings, column ranking with average ties, and fold restriction.
//!
//! Ranks are stored doubled (`2 * rank`) as integers so that the half-integer
//! ranks produced by ties stay exact through every distance computation.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SrdError};

/// A ranking of `n >= 2` objects. Entry `i` is the rank of object `i`;
/// the smallest value gets rank 1 and ties share the average of their ranks.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ranking {
    doubled: Vec<u32>,
}

impl Ranking {
    /// The reference ranking `(1, 2, ..., n)`.
    pub fn identity(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(SrdError::TooShort { len: n });
        }
        Ok(Self { doubled: (1..=n as u32).map(|r| 2 * r).collect() })
    }

    /// Builds a tie-free ranking from 1-based ranks that form a permutation of `1..=n`.
    pub fn from_permutation(perm: &[usize]) -> Result<Self> {
        let n = perm.len();
        if n < 2 {
            return Err(SrdError::TooShort { len: n });
        }
        let mut seen = vec![false; n + 1];
        for &r in perm {
            if r == 0 || r > n || seen[r] {
                return Err(SrdError::InvalidRanking(format!("{perm:?} is not a permutation of 1..={n}")));
            }
            seen[r] = true;
        }
        Ok(Self { doubled: perm.iter().map(|&r| 2 * r as u32).collect() })
    }

    /// Builds a ranking from explicit (possibly half-integer) ranks. The ranks
    /// must be exactly what average-rank ranking would assign to them.
    pub fn from_ranks(ranks: &[f64]) -> Result<Self> {
        let n = ranks.len();
        if n < 2 {
            return Err(SrdError::TooShort { len: n });
        }
        let mut doubled = Vec::with_capacity(n);
        for &r in ranks {
            let d = 2.0 * r;
            if !d.is_finite() || d.fract() != 0.0 || d < 2.0 || d > 2.0 * n as f64 {
                return Err(SrdError::InvalidRanking(format!("rank {r} is not valid for n = {n}")));
            }
            doubled.push(d as u32);
        }
        // a valid average-rank vector is a fixed point of re-ranking
        let reranked = rerank_doubled(&doubled, 2 * n as u32);
        if reranked != doubled {
            return Err(SrdError::InvalidRanking(format!("{ranks:?} does not follow the average-rank convention")));
        }
        Ok(Self { doubled })
    }

    pub(crate) fn from_doubled(doubled: Vec<u32>) -> Self {
        debug_assert!(doubled.len() >= 2);
        Self { doubled }
    }

    pub fn len(&self) -> usize {
        self.doubled.len()
    }

    /// Always false; rankings hold at least two objects.
    pub fn is_empty(&self) -> bool {
        self.doubled.is_empty()
    }

    pub fn rank(&self, object: usize) -> f64 {
        f64::from(self.doubled[object]) / 2.0
    }

    pub fn ranks(&self) -> Vec<f64> {
        self.doubled.iter().map(|&d| f64::from(d) / 2.0).collect()
    }

    /// Ranks multiplied by two.
    pub fn doubled_ranks(&self) -> &[u32] {
        &self.doubled
    }

    pub fn is_tie_free(&self) -> bool {
        self.doubled.iter().all(|d| d % 2 == 0) && {
            let mut seen = vec![false; self.len() + 1];
            self.doubled.iter().all(|&d| !std::mem::replace(&mut seen[(d / 2) as usize], true))
        }
    }

    /// Exchanges the ranks of objects `i` and `j`.
    pub(crate) fn swap(&mut self, i: usize, j: usize) {
        self.doubled.swap(i, j);
    }

    /// Restriction to `subset`, re-ranked over the selected objects.
    pub fn restrict(&self, subset: &RowSubset) -> Result<Ranking> {
        if let Some(&bad) = subset.indices.iter().find(|&&i| i >= self.len()) {
            return Err(SrdError::IndexOutOfRange { index: bad, n: self.len() });
        }
        Ok(self.restrict_unchecked(&subset.indices))
    }

    pub(crate) fn restrict_unchecked(&self, indices: &[usize]) -> Ranking {
        let picked: Vec<u32> = indices.iter().map(|&i| self.doubled[i]).collect();
        Ranking::from_doubled(rerank_doubled(&picked, 2 * self.len() as u32))
    }
}

/// Average-rank re-ranking of small nonnegative integers bounded by `max_value`,
/// returning doubled ranks. Counting sort, so linear in `values.len() + max_value`.
pub(crate) fn rerank_doubled(values: &[u32], max_value: u32) -> Vec<u32> {
    let mut counts = vec![0u32; max_value as usize + 1];
    for &v in values {
        counts[v as usize] += 1;
    }
    // counts[v] becomes 2 * (#values below v) + count(v) + 1, the doubled average rank
    let mut below = 0u32;
    for c in counts.iter_mut() {
        let here = *c;
        *c = 2 * below + here + 1;
        below += here;
    }
    values.iter().map(|&v| counts[v as usize]).collect()
}

/// Ranks a numeric column ascending with average ranks for ties.
pub fn rank_column(values: &[f64]) -> Result<Ranking> {
    if values.len() < 2 {
        return Err(SrdError::TooShort { len: values.len() });
    }
    if let Some(index) = values.iter().position(|v| !v.is_finite()) {
        return Err(SrdError::NonFiniteValue { index });
    }
    Ok(Ranking::from_doubled(doubled_average_ranks(values)))
}

/// Doubled average ranks of finite values; no length requirement.
pub(crate) fn doubled_average_ranks(values: &[f64]) -> Vec<u32> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));

    let mut doubled = vec![0u32; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        while end + 1 < order.len() && values[order[end + 1]] == values[order[start]] {
            end += 1;
        }
        // 1-based positions start+1 ..= end+1 share their average
        let shared = (start + 1 + end + 1) as u32;
        for &obj in &order[start..=end] {
            doubled[obj] = shared;
        }
        start = end + 1;
    }
    doubled
}

/// A multiset of 0-based row indices. Bootstrap folds may repeat a row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowSubset {
    indices: Vec<usize>,
}

impl RowSubset {
    pub fn new(indices: Vec<usize>, n: usize) -> Result<Self> {
        if indices.len() < 2 {
            return Err(SrdError::TooShort { len: indices.len() });
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= n) {
            return Err(SrdError::IndexOutOfRange { index: bad, n });
        }
        Ok(Self { indices })
    }

    pub(crate) fn new_unchecked(indices: Vec<usize>) -> Self {
        Self { indices }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Row-wise aggregate used to build a reference column by data fusion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fusion {
    Mean,
    Median,
}

impl std::str::FromStr for Fusion {
    type Err = SrdError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mean" => Ok(Fusion::Mean),
            "median" => Ok(Fusion::Median),
            other => Err(SrdError::InvalidMatrix(format!("unknown fusion rule '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceSpec {
    Column(usize),
    Fused(Fusion),
}

/// `n x m` input matrix: rows are objects, columns are the compared variables.
#[derive(Debug, Clone)]
pub struct DataMatrix {
    columns: Vec<Vec<f64>>,
    names: Vec<String>,
    reference: ReferenceSpec,
}

impl DataMatrix {
    pub fn new(columns: Vec<Vec<f64>>, names: Vec<String>, reference: ReferenceSpec) -> Result<Self> {
        if columns.is_empty() {
            return Err(SrdError::InvalidMatrix("no columns".into()));
        }
        if names.len() != columns.len() {
            return Err(SrdError::InvalidMatrix(format!("{} names for {} columns", names.len(), columns.len())));
        }
        let n = columns[0].len();
        if n < 2 {
            return Err(SrdError::TooShort { len: n });
        }
        for (name, col) in names.iter().zip(&columns) {
            if col.len() != n {
                return Err(SrdError::InvalidMatrix(format!("column '{name}' has {} rows, expected {n}", col.len())));
            }
            if let Some(index) = col.iter().position(|v| !v.is_finite()) {
                return Err(SrdError::NonFiniteValue { index });
            }
        }
        if let ReferenceSpec::Column(c) = reference {
            if c >= columns.len() {
                return Err(SrdError::IndexOutOfRange { index: c, n: columns.len() });
            }
        }
        Ok(Self { columns, names, reference })
    }

    /// Builds a matrix from rows of equal length.
    pub fn from_rows(rows: &[Vec<f64>], names: Vec<String>, reference: ReferenceSpec) -> Result<Self> {
        let m = names.len();
        let mut columns = vec![Vec::with_capacity(rows.len()); m];
        for (r, row) in rows.iter().enumerate() {
            if row.len() != m {
                return Err(SrdError::InvalidMatrix(format!("row {r} has {} values, expected {m}", row.len())));
            }
            for (col, &v) in columns.iter_mut().zip(row) {
                col.push(v);
            }
        }
        Self::new(columns, names, reference)
    }

    pub fn n_rows(&self) -> usize {
        self.columns[0].len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn column(&self, idx: usize) -> &[f64] {
        &self.columns[idx]
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn reference(&self) -> ReferenceSpec {
        self.reference
    }

    /// Flips a column so that larger values rank first.
    pub fn negate_column(&mut self, idx: usize) {
        for v in &mut self.columns[idx] {
            *v = -*v;
        }
    }

    fn fused_column(&self, rule: Fusion) -> Vec<f64> {
        (0..self.n_rows())
            .map(|r| {
                let mut row: Vec<f64> = self.columns.iter().map(|c| c[r]).collect();
                match rule {
                    Fusion::Mean => row.iter().sum::<f64>() / row.len() as f64,
                    Fusion::Median => {
                        row.sort_by(f64::total_cmp);
                        let mid = row.len() / 2;
                        if row.len() % 2 == 1 {
                            row[mid]
                        } else {
                            (row[mid - 1] + row[mid]) / 2.0
                        }
                    }
                }
            })
            .collect()
    }
}

/// Column rankings plus the reference ranking.
#[derive(Debug, Clone, PartialEq)]
pub struct RankingMatrix {
    pub rankings: Vec<Ranking>,
    pub reference: Ranking,
}

pub fn to_ranking_matrix(data: &DataMatrix) -> Result<RankingMatrix> {
    let rankings = data.columns.iter().map(|c| rank_column(c)).collect::<Result<Vec<_>>>()?;
    let reference = match data.reference {
        ReferenceSpec::Column(c) => rankings[c].clone(),
        ReferenceSpec::Fused(rule) => rank_column(&data.fused_column(rule))?,
    };
    Ok(RankingMatrix { rankings, reference })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(v: &[f64]) -> Vec<f64> {
        rank_column(v).unwrap().ranks()
    }

    #[test]
    fn rank_column_examples() {
        assert_eq!(r(&[3.2, 1.1, 2.5]), vec![3.0, 1.0, 2.0]);
        assert_eq!(r(&[1.0, 2.0, 1.0]), vec![1.5, 3.0, 1.5]);
        assert_eq!(r(&[5.0, 4.0, 3.0, 2.0, 1.0]), vec![5.0, 4.0, 3.0, 2.0, 1.0]);
        assert_eq!(r(&[7.0, 7.0, 7.0, 7.0]), vec![2.5; 4]);
    }

    #[test]
    fn rank_column_errors() {
        assert!(matches!(rank_column(&[1.0]), Err(SrdError::TooShort { len: 1 })));
        assert!(matches!(rank_column(&[1.0, f64::NAN, 2.0]), Err(SrdError::NonFiniteValue { index: 1 })));
        assert!(matches!(rank_column(&[1.0, f64::INFINITY]), Err(SrdError::NonFiniteValue { index: 1 })));
    }

    #[test]
    fn ranking_matrix_examples() {
        let names = vec!["a".to_string(), "b".to_string()];
        let rows = vec![vec![1.0, 2.0], vec![2.0, 1.0], vec![3.0, 3.0]];
        let m = DataMatrix::from_rows(&rows, names.clone(), ReferenceSpec::Column(1)).unwrap();
        let rm = to_ranking_matrix(&m).unwrap();
        assert_eq!(rm.rankings[0].ranks(), vec![1.0, 2.0, 3.0]);
        assert_eq!(rm.rankings[1].ranks(), vec![2.0, 1.0, 3.0]);
        assert_eq!(rm.reference.ranks(), vec![2.0, 1.0, 3.0]);

        let rows = vec![vec![1.0, 1.0], vec![2.0, 2.0]];
        let m = DataMatrix::from_rows(&rows, names, ReferenceSpec::Fused(Fusion::Mean)).unwrap();
        assert_eq!(to_ranking_matrix(&m).unwrap().reference.ranks(), vec![1.0, 2.0]);

        let col = vec![0.3, 0.1, 0.9];
        let m = DataMatrix::new(
            vec![col.clone(), col.clone(), col],
            vec!["x".into(), "y".into(), "z".into()],
            ReferenceSpec::Fused(Fusion::Median),
        )
        .unwrap();
        let rm = to_ranking_matrix(&m).unwrap();
        assert!(rm.rankings.iter().all(|rk| *rk == rm.reference));
    }

    #[test]
    fn matrix_validation() {
        let bad_ref = DataMatrix::new(vec![vec![1.0, 2.0]], vec!["a".into()], ReferenceSpec::Column(1));
        assert!(matches!(bad_ref, Err(SrdError::IndexOutOfRange { .. })));
        let ragged =
            DataMatrix::new(vec![vec![1.0, 2.0], vec![1.0]], vec!["a".into(), "b".into()], ReferenceSpec::Column(0));
        assert!(matches!(ragged, Err(SrdError::InvalidMatrix(_))));
        let nan = DataMatrix::new(vec![vec![1.0, f64::NAN]], vec!["a".into()], ReferenceSpec::Column(0));
        assert!(matches!(nan, Err(SrdError::NonFiniteValue { index: 1 })));
    }

    #[test]
    fn restrict_examples() {
        let rk = Ranking::from_permutation(&[1, 2, 3, 4]).unwrap();
        let sub = RowSubset::new(vec![1, 3], 4).unwrap();
        assert_eq!(rk.restrict(&sub).unwrap().ranks(), vec![1.0, 2.0]);

        let rk = Ranking::from_permutation(&[4, 3, 2, 1]).unwrap();
        let sub = RowSubset::new(vec![0, 2], 4).unwrap();
        assert_eq!(rk.restrict(&sub).unwrap().ranks(), vec![2.0, 1.0]);

        let rk = Ranking::from_permutation(&[1, 2, 3]).unwrap();
        let sub = RowSubset::new(vec![1, 1, 2], 3).unwrap();
        assert_eq!(rk.restrict(&sub).unwrap().ranks(), vec![1.5, 1.5, 3.0]);
    }

    #[test]
    fn restrict_errors() {
        assert!(matches!(RowSubset::new(vec![0, 5], 4), Err(SrdError::IndexOutOfRange { index: 5, n: 4 })));
        assert!(matches!(RowSubset::new(vec![0], 4), Err(SrdError::TooShort { .. })));
        let rk = Ranking::identity(3).unwrap();
        let sub = RowSubset::new(vec![0, 3], 4).unwrap();
        assert!(matches!(rk.restrict(&sub), Err(SrdError::IndexOutOfRange { index: 3, n: 3 })));
    }

    #[test]
    fn from_ranks_validation() {
        assert!(Ranking::from_ranks(&[1.5, 3.0, 1.5]).is_ok());
        assert!(Ranking::from_ranks(&[1.0, 1.0, 3.0]).is_err());
        assert!(Ranking::from_ranks(&[1.25, 1.75]).is_err());
        assert!(Ranking::from_ranks(&[0.0, 1.0]).is_err());
        assert!(Ranking::from_permutation(&[1, 1]).is_err());
        assert!(Ranking::identity(1).is_err());
        assert!(Ranking::identity(4).unwrap().is_tie_free());
        assert!(!Ranking::from_ranks(&[1.5, 1.5]).unwrap().is_tie_free());
    }
}
