//! Grid geometries for vector statistics: marginal quantile grids (with atom
//! collapse), regular pixel grids, and contingency-table cells.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::BivariateSample;

/// One coordinate of a marginal quantile grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridCoordinate {
    /// Probability level of the coordinate. For a regular coordinate this is
    /// the requested `k / g`; for an atom coordinate it is the empirical CDF
    /// at the atom.
    pub level: f64,
    /// The sample quantile (type-1: order statistic at `ceil(level * n)`).
    pub value: f64,
    pub is_atom: bool,
}

/// A grid of sample-quantile pairs. The flattened statistic index is
/// `ix * len_y + iy` (x-major).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantileGrid {
    pub coords_x: Vec<GridCoordinate>,
    pub coords_y: Vec<GridCoordinate>,
}

impl QuantileGrid {
    pub fn len_x(&self) -> usize {
        self.coords_x.len()
    }

    pub fn len_y(&self) -> usize {
        self.coords_y.len()
    }

    pub fn dim(&self) -> usize {
        self.len_x() * self.len_y()
    }

    pub fn values_x(&self) -> Vec<f64> {
        self.coords_x.iter().map(|c| c.value).collect()
    }

    pub fn values_y(&self) -> Vec<f64> {
        self.coords_y.iter().map(|c| c.value).collect()
    }

    /// The grid point at flat index `k`.
    pub fn point(&self, k: usize) -> (f64, f64) {
        let iy = k % self.len_y();
        let ix = k / self.len_y();
        (self.coords_x[ix].value, self.coords_y[iy].value)
    }
}

/// A regular pixel grid over the unit square; pixel centers sit at
/// `((col + 0.5) / cols, (row + 0.5) / rows)`, row 0 at the bottom.
/// Field values are flattened as `row * cols + col`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PixelGrid {
    pub rows: usize,
    pub cols: usize,
}

impl PixelGrid {
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument(
                "pixel grid must have positive dimensions".into(),
            ));
        }
        Ok(Self { rows, cols })
    }

    pub fn dim(&self) -> usize {
        self.rows * self.cols
    }

    pub fn center_x(&self, col: usize) -> f64 {
        (col as f64 + 0.5) / self.cols as f64
    }

    pub fn center_y(&self, row: usize) -> f64 {
        (row as f64 + 0.5) / self.rows as f64
    }

    /// Area of one pixel.
    pub fn pixel_area(&self) -> f64 {
        1.0 / (self.rows as f64 * self.cols as f64)
    }
}

/// Pixel regions of an intensity field replaced by lower-dimensional
/// estimates because of atoms in the marginals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum AtomRegion {
    /// Rows `start..start + count` carry a replicated 1D estimate for the
    /// y-atom at `atom`.
    RowBand {
        start: usize,
        count: usize,
        atom: f64,
    },
    /// Columns replaced for an x-atom.
    ColBand {
        start: usize,
        count: usize,
        atom: f64,
    },
    /// Constant block where an x-atom and a y-atom intersect.
    Block {
        row_start: usize,
        row_count: usize,
        col_start: usize,
        col_count: usize,
        atom_x: f64,
        atom_y: f64,
    },
}

/// Geometry attached to a statistic vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum FieldGeometry {
    Quantile(QuantileGrid),
    Pixels(PixelGrid),
    Table {
        row_labels: Vec<String>,
        col_labels: Vec<String>,
    },
}

impl FieldGeometry {
    pub fn dim(&self) -> usize {
        match self {
            FieldGeometry::Quantile(g) => g.dim(),
            FieldGeometry::Pixels(p) => p.dim(),
            FieldGeometry::Table {
                row_labels,
                col_labels,
            } => row_labels.len() * col_labels.len(),
        }
    }
}

/// A statistic vector together with the grid it was evaluated on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatisticField {
    pub values: Vec<f64>,
    pub geometry: FieldGeometry,
    pub atom_regions: Vec<AtomRegion>,
}

/// Type-1 empirical quantile: order statistic at `ceil(level * n)`.
fn type1_quantile(sorted: &[f64], level_num: usize, level_den: usize) -> f64 {
    let n = sorted.len();
    // ceil(level * n) with integer arithmetic; level = level_num / level_den
    let idx = (level_num * n).div_ceil(level_den);
    sorted[idx.max(1) - 1]
}

fn marginal_grid(values: &[f64], atoms: &[f64], g: usize) -> Vec<GridCoordinate> {
    let n = values.len();
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let ecdf_at = |v: f64| sorted.partition_point(|x| *x <= v) as f64 / n as f64;

    let mut coords: Vec<GridCoordinate> = Vec::with_capacity(g);
    let mut seen_atom = vec![false; atoms.len()];
    for k in 1..=g {
        let q = type1_quantile(&sorted, k, g);
        if let Some(a) = atoms.iter().position(|&a| a == q) {
            // All levels covered by the atom collapse to a single coordinate
            // at the atom's empirical CDF level.
            if !seen_atom[a] {
                seen_atom[a] = true;
                coords.push(GridCoordinate {
                    level: ecdf_at(q),
                    value: q,
                    is_atom: true,
                });
            }
            continue;
        }
        coords.push(GridCoordinate {
            level: k as f64 / g as f64,
            value: q,
            is_atom: false,
        });
    }
    // Declared atoms too light to be hit by any requested level still appear
    // exactly once, inserted at their empirical CDF level.
    for (a, &seen) in seen_atom.iter().enumerate() {
        if !seen {
            let c = GridCoordinate {
                level: ecdf_at(atoms[a]),
                value: atoms[a],
                is_atom: true,
            };
            let pos = coords.partition_point(|x| x.level < c.level);
            coords.insert(pos, c);
        }
    }
    let distinct = {
        let mut d = sorted.clone();
        d.dedup();
        d.len()
    };
    if distinct < coords.len() {
        log::warn!(
            "quantile grid ({} coordinates) exceeds distinct-value support ({distinct}); \
             duplicate grid values produce constant statistic columns",
            coords.len()
        );
    }
    coords
}

/// Builds the quantile grid of a numeric sample at levels `k/g`, `k = 1..=g`,
/// per marginal. Levels covered by a declared atom are collapsed so the atom
/// value appears exactly once among the grid coordinates of its marginal.
pub fn make_quantile_grid(
    sample: &BivariateSample,
    g_x: usize,
    g_y: usize,
) -> Result<QuantileGrid> {
    if g_x < 2 || g_y < 2 {
        return Err(Error::InvalidArgument(
            "quantile grid needs g >= 2 per marginal".into(),
        ));
    }
    let (x, y) = sample.numeric()?;
    Ok(QuantileGrid {
        coords_x: marginal_grid(x, sample.atoms_x(), g_x),
        coords_y: marginal_grid(y, sample.atoms_y(), g_y),
    })
}
