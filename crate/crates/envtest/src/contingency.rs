//! Contingency tables for categorical samples.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{FieldGeometry, StatisticField};
use crate::sample::BivariateSample;

/// Cross-tabulated counts of a categorical bivariate sample, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContingencyTable {
    pub counts: Vec<u64>,
    pub k1: usize,
    pub k2: usize,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
}

impl ContingencyTable {
    pub fn from_sample(sample: &BivariateSample) -> Result<Self> {
        let (x_codes, y_codes, x_labels, y_labels) = sample.categories()?;
        let k1 = x_labels.len();
        let k2 = y_labels.len();
        if k1 < 2 || k2 < 2 {
            return Err(Error::DegenerateInput(format!(
                "contingency table needs at least 2 categories per marginal, got {k1} x {k2}"
            )));
        }
        let mut counts = vec![0u64; k1 * k2];
        for (&cx, &cy) in x_codes.iter().zip(y_codes) {
            counts[cx as usize * k2 + cy as usize] += 1;
        }
        Ok(Self {
            counts,
            k1,
            k2,
            row_labels: x_labels.to_vec(),
            col_labels: y_labels.to_vec(),
        })
    }

    /// Builds a table directly from counts (labels positional).
    pub fn from_counts(
        counts: Vec<u64>,
        row_labels: Vec<String>,
        col_labels: Vec<String>,
    ) -> Result<Self> {
        let k1 = row_labels.len();
        let k2 = col_labels.len();
        if k1 < 2 || k2 < 2 {
            return Err(Error::DegenerateInput("need at least a 2 x 2 table".into()));
        }
        if counts.len() != k1 * k2 {
            return Err(Error::InvalidInput(format!(
                "count buffer has {} entries, expected {k1} x {k2}",
                counts.len()
            )));
        }
        Ok(Self {
            counts,
            k1,
            k2,
            row_labels,
            col_labels,
        })
    }

    pub fn n(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn count(&self, r: usize, c: usize) -> u64 {
        self.counts[r * self.k2 + c]
    }

    pub fn row_sums(&self) -> Vec<u64> {
        (0..self.k1)
            .map(|r| self.counts[r * self.k2..(r + 1) * self.k2].iter().sum())
            .collect()
    }

    pub fn col_sums(&self) -> Vec<u64> {
        (0..self.k2)
            .map(|c| (0..self.k1).map(|r| self.count(r, c)).sum())
            .collect()
    }

    /// Expands the table back into a categorical sample, row-major order.
    pub fn expand(&self) -> Result<BivariateSample> {
        let mut x = Vec::with_capacity(self.n() as usize);
        let mut y = Vec::with_capacity(self.n() as usize);
        for r in 0..self.k1 {
            for c in 0..self.k2 {
                for _ in 0..self.count(r, c) {
                    x.push(self.row_labels[r].clone());
                    y.push(self.col_labels[c].clone());
                }
            }
        }
        BivariateSample::categorical(x, y)
    }
}

/// The vector of all `k1 * k2` table cells as a statistic field.
pub fn contingency_statistic(sample: &BivariateSample) -> Result<StatisticField> {
    let table = ContingencyTable::from_sample(sample)?;
    Ok(StatisticField {
        values: table.counts.iter().map(|&c| c as f64).collect(),
        geometry: FieldGeometry::Table {
            row_labels: table.row_labels,
            col_labels: table.col_labels,
        },
        atom_regions: Vec::new(),
    })
}
