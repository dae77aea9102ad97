//! Binary datasets with optional per-row weights.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DatasetError {
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("duplicate column `{0}`")]
    DuplicateColumn(String),
    #[error("row {row}, column `{column}`: value {value} is not 0 or 1")]
    NonBinary { row: usize, column: String, value: u64 },
    #[error("row {row} has {got} values, expected {expected}")]
    RowWidth { row: usize, got: usize, expected: usize },
    #[error("{got} weights for {rows} rows")]
    WeightLength { got: usize, rows: usize },
    #[error("row {0} has a negative or non-finite weight")]
    InvalidWeight(usize),
    #[error("weights sum to zero")]
    ZeroTotalWeight,
    #[error("selection value must be 0 or 1, got {0}")]
    SelectionValue(u8),
}

/// Keep only rows where `node == value`.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct SelectionRule {
    pub node: String,
    pub value: u8,
}

impl SelectionRule {
    pub fn new(node: impl Into<String>, value: u8) -> Self {
        SelectionRule { node: node.into(), value }
    }
}

/// `n` rows of named 0/1 columns, stored row-major.
///
/// Weights are either frequency weights (a row standing for several
/// observations) or probability weights (an enumerated population); the
/// estimators treat both the same way.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    columns: Vec<String>,
    values: Vec<u8>,
    weights: Option<Vec<f64>>,
}

impl Dataset {
    pub fn new(columns: Vec<String>) -> Result<Self, DatasetError> {
        for (i, c) in columns.iter().enumerate() {
            if columns[..i].contains(c) {
                return Err(DatasetError::DuplicateColumn(c.clone()));
            }
        }
        Ok(Dataset { columns, values: Vec::new(), weights: None })
    }

    pub fn from_rows<R: AsRef<[u8]>>(columns: Vec<String>, rows: &[R]) -> Result<Self, DatasetError> {
        let mut d = Self::new(columns)?;
        d.values.reserve(rows.len() * d.columns.len());
        for r in rows {
            d.push_row(r.as_ref())?;
        }
        Ok(d)
    }

    pub(crate) fn from_raw(columns: Vec<String>, values: Vec<u8>, weights: Option<Vec<f64>>) -> Self {
        debug_assert!(columns.is_empty() || values.len() % columns.len() == 0);
        Dataset { columns, values, weights }
    }

    pub fn push_row(&mut self, row: &[u8]) -> Result<(), DatasetError> {
        let n = self.n_rows();
        if row.len() != self.columns.len() {
            return Err(DatasetError::RowWidth { row: n, got: row.len(), expected: self.columns.len() });
        }
        if let Some(j) = row.iter().position(|&v| v > 1) {
            return Err(DatasetError::NonBinary { row: n, column: self.columns[j].clone(), value: row[j] as u64 });
        }
        if let Some(w) = &mut self.weights {
            w.push(1.0);
        }
        self.values.extend_from_slice(row);
        Ok(())
    }

    /// Attaches weights (one per row, non-negative, positive total).
    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self, DatasetError> {
        if weights.len() != self.n_rows() {
            return Err(DatasetError::WeightLength { got: weights.len(), rows: self.n_rows() });
        }
        if let Some(i) = weights.iter().position(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(DatasetError::InvalidWeight(i));
        }
        if weights.iter().sum::<f64>() <= 0.0 {
            return Err(DatasetError::ZeroTotalWeight);
        }
        self.weights = Some(weights);
        Ok(self)
    }

    pub fn without_weights(mut self) -> Self {
        self.weights = None;
        self
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn n_rows(&self) -> usize {
        if self.columns.is_empty() {
            0
        } else {
            self.values.len() / self.columns.len()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.n_rows() == 0
    }

    pub fn column_index(&self, name: &str) -> Result<usize, DatasetError> {
        self.columns.iter().position(|c| c == name).ok_or_else(|| DatasetError::UnknownColumn(name.to_string()))
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[u8] {
        let k = self.columns.len();
        &self.values[i * k..(i + 1) * k]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u8]> + '_ {
        self.values.chunks_exact(self.columns.len().max(1))
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.values[row * self.columns.len() + col]
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    #[inline]
    pub fn weight(&self, row: usize) -> f64 {
        self.weights.as_ref().map_or(1.0, |w| w[row])
    }

    pub fn total_weight(&self) -> f64 {
        match &self.weights {
            Some(w) => w.iter().sum(),
            None => self.n_rows() as f64,
        }
    }

    /// Weighted mean of a column.
    pub fn mean(&self, name: &str) -> Result<f64, DatasetError> {
        let j = self.column_index(name)?;
        let s: f64 = (0..self.n_rows()).map(|i| self.weight(i) * self.get(i, j) as f64).sum();
        Ok(s / self.total_weight())
    }

    /// Rows satisfying the rule, in their original order.
    pub fn apply_selection(&self, rule: &SelectionRule) -> Result<Dataset, DatasetError> {
        if rule.value > 1 {
            return Err(DatasetError::SelectionValue(rule.value));
        }
        let j = self.column_index(&rule.node)?;
        let keep: Vec<usize> = (0..self.n_rows()).filter(|&i| self.get(i, j) == rule.value).collect();
        let mut values = Vec::with_capacity(keep.len() * self.n_cols());
        for &i in &keep {
            values.extend_from_slice(self.row(i));
        }
        let weights = self.weights.as_ref().map(|w| keep.iter().map(|&i| w[i]).collect());
        Ok(Dataset::from_raw(self.columns.clone(), values, weights))
    }

    /// Groups rows by their values on `cols`.
    pub fn patterns(&self, cols: &[&str]) -> Result<Patterns, DatasetError> {
        let idx: Vec<usize> = cols.iter().map(|c| self.column_index(c)).collect::<Result<_, _>>()?;
        let mut lookup: BTreeMap<Vec<u8>, usize> = BTreeMap::new();
        let mut keys: Vec<Vec<u8>> = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        let mut row_pattern = Vec::with_capacity(self.n_rows());
        let mut key = Vec::with_capacity(idx.len());
        for i in 0..self.n_rows() {
            key.clear();
            key.extend(idx.iter().map(|&j| self.get(i, j)));
            let p = match lookup.get(&key) {
                Some(&p) => p,
                None => {
                    lookup.insert(key.clone(), keys.len());
                    keys.push(key.clone());
                    weights.push(0.0);
                    keys.len() - 1
                }
            };
            weights[p] += self.weight(i);
            row_pattern.push(p);
        }
        Ok(Patterns { columns: cols.iter().map(|c| c.to_string()).collect(), keys, weights, row_pattern })
    }
}

/// Distinct rows of a dataset restricted to some columns, with total weight
/// per distinct row and the pattern index of every original row.
#[derive(Debug, Clone)]
pub struct Patterns {
    columns: Vec<String>,
    keys: Vec<Vec<u8>>,
    weights: Vec<f64>,
    row_pattern: Vec<usize>,
}

impl Patterns {
    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn row_pattern(&self) -> &[usize] {
        &self.row_pattern
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// One row per pattern carrying the given per-pattern weights;
    /// patterns with zero weight are dropped.
    pub fn to_dataset(&self, weights: &[f64]) -> Dataset {
        let mut values = Vec::new();
        let mut w = Vec::new();
        for (k, &wk) in self.keys.iter().zip(weights) {
            if wk > 0.0 {
                values.extend_from_slice(k);
                w.push(wk);
            }
        }
        Dataset::from_raw(self.columns.clone(), values, Some(w))
    }

    /// The collapsed dataset with the observed pattern weights.
    pub fn collapsed(&self) -> Dataset {
        self.to_dataset(&self.weights)
    }
}
