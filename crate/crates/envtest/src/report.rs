//! Machine-readable test reports (JSON) with atomic file writes.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::envelope::Fraction;
use crate::error::{Error, Result};
use crate::grid::{AtomRegion, FieldGeometry};
use crate::permute::EnvelopeTest;
use crate::sample::BivariateSample;

/// Which envelope statistic produced the report.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportMethod {
    Cdf,
    Qq,
    Table,
}

/// Grid description carried by a report. Pixel geometries also carry the
/// data quantiles at the pixel boundaries so axes can be labeled in data
/// units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ReportGeometry {
    Quantile {
        levels_x: Vec<f64>,
        values_x: Vec<f64>,
        atom_x: Vec<bool>,
        levels_y: Vec<f64>,
        values_y: Vec<f64>,
        atom_y: Vec<bool>,
    },
    Pixels {
        rows: usize,
        cols: usize,
        x_quantiles: Vec<f64>,
        y_quantiles: Vec<f64>,
    },
    Table {
        row_labels: Vec<String>,
        col_labels: Vec<String>,
    },
}

impl ReportGeometry {
    /// (x extent, y extent) in cells.
    pub fn extent(&self) -> (usize, usize) {
        match self {
            ReportGeometry::Quantile {
                values_x, values_y, ..
            } => (values_x.len(), values_y.len()),
            ReportGeometry::Pixels { rows, cols, .. } => (*cols, *rows),
            ReportGeometry::Table {
                row_labels,
                col_labels,
            } => (col_labels.len(), row_labels.len()),
        }
    }
}

/// A complete, serializable account of one envelope test run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub method: ReportMethod,
    pub n: usize,
    pub s: usize,
    pub alpha: f64,
    pub seed: u64,
    pub p_erl: Fraction,
    pub p_value: f64,
    pub rejected: bool,
    pub critical_e: f64,
    pub index_set_size: usize,
    pub geometry: ReportGeometry,
    pub observed: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub above: Vec<bool>,
    pub below: Vec<bool>,
    pub atom_regions: Vec<AtomRegion>,
    pub wall_time_secs: f64,
}

/// Type-1 quantiles of `values` at levels `k / count`, `k = 1..=count`.
fn boundary_quantiles(values: &[f64], count: usize) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    (1..=count)
        .map(|k| {
            let idx = (k * n).div_ceil(count);
            sorted[idx.max(1) - 1]
        })
        .collect()
}

impl TestReport {
    pub fn from_envelope_test(
        test: &EnvelopeTest,
        sample: &BivariateSample,
        method: ReportMethod,
        s: usize,
        seed: u64,
        wall_time_secs: f64,
    ) -> Self {
        let geometry = match &test.field.geometry {
            FieldGeometry::Quantile(g) => ReportGeometry::Quantile {
                levels_x: g.coords_x.iter().map(|c| c.level).collect(),
                values_x: g.coords_x.iter().map(|c| c.value).collect(),
                atom_x: g.coords_x.iter().map(|c| c.is_atom).collect(),
                levels_y: g.coords_y.iter().map(|c| c.level).collect(),
                values_y: g.coords_y.iter().map(|c| c.value).collect(),
                atom_y: g.coords_y.iter().map(|c| c.is_atom).collect(),
            },
            FieldGeometry::Pixels(p) => {
                let (x, y) = sample
                    .numeric()
                    .expect("pixel geometry implies numeric data");
                ReportGeometry::Pixels {
                    rows: p.rows,
                    cols: p.cols,
                    x_quantiles: boundary_quantiles(x, p.cols),
                    y_quantiles: boundary_quantiles(y, p.rows),
                }
            }
            FieldGeometry::Table {
                row_labels,
                col_labels,
            } => ReportGeometry::Table {
                row_labels: row_labels.clone(),
                col_labels: col_labels.clone(),
            },
        };
        TestReport {
            method,
            n: sample.n(),
            s,
            alpha: test.result.alpha,
            seed,
            p_erl: test.result.p_erl,
            p_value: test.result.p_erl.value(),
            rejected: test.result.rejected(),
            critical_e: test.result.critical_e,
            index_set_size: test.result.index_set_size,
            geometry,
            observed: test.result.observed.clone(),
            lower: test.result.lower.clone(),
            upper: test.result.upper.clone(),
            above: test.result.above.clone(),
            below: test.result.below.clone(),
            atom_regions: test.field.atom_regions.clone(),
            wall_time_secs,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Writes the report to `path` atomically (temp file + rename).
    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_json()?.as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

/// Atomic write: a temporary file in the target directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::InvalidArgument(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(
        ".{}.tmp-{}",
        file_name.to_string_lossy(),
        std::process::id()
    ));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}
