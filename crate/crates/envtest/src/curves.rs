use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A set of `s + 1` statistic vectors of common dimension `d`.
///
/// Row 0 is the observed statistic; rows `1..=s` are replicates generated
/// under the null hypothesis. Column `k` of every row refers to the same grid
/// location, so pointwise ranking across rows is meaningful.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveSet {
    values: Vec<f64>,
    rows: usize,
    cols: usize,
}

impl CurveSet {
    /// Builds a curve set from a row-major flat buffer.
    pub fn from_flat(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows < 2 {
            return Err(Error::InvalidInput(format!(
                "curve set needs at least 2 rows (observed + 1 replicate), got {rows}"
            )));
        }
        if cols == 0 {
            return Err(Error::InvalidInput(
                "curve set dimension d must be >= 1".into(),
            ));
        }
        if values.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "flat buffer has {} entries, expected {rows} x {cols}",
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite statistic value {bad}"
            )));
        }
        Ok(Self { values, rows, cols })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_rows = rows.len();
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidInput("rows have unequal lengths".into()));
        }
        Self::from_flat(n_rows, cols, rows.into_iter().flatten().collect())
    }

    /// Number of curves, `s + 1`.
    pub fn n_curves(&self) -> usize {
        self.rows
    }

    /// Number of replicates `s`.
    pub fn replicates(&self) -> usize {
        self.rows - 1
    }

    /// Dimension `d` of each statistic vector.
    pub fn dim(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    /// The observed statistic (row 0).
    pub fn observed(&self) -> &[f64] {
        self.row(0)
    }

    pub fn value(&self, i: usize, k: usize) -> f64 {
        self.values[i * self.cols + k]
    }
}
