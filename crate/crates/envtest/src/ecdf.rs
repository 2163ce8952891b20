//! Bivariate empirical CDF evaluated on a quantile grid.

use crate::error::Result;
use crate::grid::{FieldGeometry, QuantileGrid, StatisticField};
use crate::sample::BivariateSample;

/// For each observation, the first grid index `k` with `value <= grid[k]`
/// (or `grid.len()` when the value exceeds every grid coordinate). The
/// observation then contributes to all CDF counts at indices `>= k`.
pub(crate) fn bucket_indices(values: &[f64], grid_values: &[f64]) -> Vec<u32> {
    values
        .iter()
        .map(|&v| grid_values.partition_point(|&g| g < v) as u32)
        .collect()
}

/// Joint ECDF over the grid from per-observation bucket indices, via a 2D
/// histogram and prefix sums. `hist` is scratch of size
/// `(gx + 1) * (gy + 1)`; `out` has length `gx * gy`, x-major
/// (`index = ix * gy + iy`). The pairing is `(bx[i], by[perm_or_identity])`,
/// chosen by the caller through the slices it passes.
pub(crate) fn joint_ecdf_into(
    bx: &[u32],
    by: &[u32],
    gx: usize,
    gy: usize,
    hist: &mut [u32],
    out: &mut [f64],
) {
    debug_assert_eq!(bx.len(), by.len());
    debug_assert_eq!(hist.len(), (gx + 1) * (gy + 1));
    debug_assert_eq!(out.len(), gx * gy);
    let n = bx.len();
    hist.fill(0);
    let w = gy + 1;
    for i in 0..n {
        hist[bx[i] as usize * w + by[i] as usize] += 1;
    }
    // 2D prefix sums in place: hist[ix][iy] = #{ i : bx_i <= ix, by_i <= iy }
    for ix in 0..=gx {
        for iy in 1..=gy {
            hist[ix * w + iy] += hist[ix * w + iy - 1];
        }
    }
    for ix in 1..=gx {
        for iy in 0..=gy {
            hist[ix * w + iy] += hist[(ix - 1) * w + iy];
        }
    }
    let n_f = n as f64;
    for ix in 0..gx {
        for iy in 0..gy {
            out[ix * gy + iy] = hist[ix * w + iy] as f64 / n_f;
        }
    }
}

/// Marginal ECDF values at the grid coordinates, from bucket indices.
pub(crate) fn marginal_ecdf_from_buckets(buckets: &[u32], g: usize) -> Vec<f64> {
    let n = buckets.len();
    let mut counts = vec![0u32; g + 1];
    for &b in buckets {
        counts[b as usize] += 1;
    }
    let mut acc = 0u32;
    let mut out = Vec::with_capacity(g);
    for k in 0..g {
        acc += counts[k];
        out.push(acc as f64 / n as f64);
    }
    out
}

/// The sample CDF `F(u, v) = #{ i : x_i <= u, y_i <= v } / n` at every grid
/// point, flattened x-major. The grid is built from the observed sample and
/// held fixed across permutations.
pub fn ecdf_statistic(sample: &BivariateSample, grid: &QuantileGrid) -> Result<StatisticField> {
    let (x, y) = sample.numeric()?;
    let gx = grid.len_x();
    let gy = grid.len_y();
    let bx = bucket_indices(x, &grid.values_x());
    let by = bucket_indices(y, &grid.values_y());
    let mut hist = vec![0u32; (gx + 1) * (gy + 1)];
    let mut values = vec![0.0; gx * gy];
    joint_ecdf_into(&bx, &by, gx, gy, &mut hist, &mut values);
    Ok(StatisticField {
        values,
        geometry: FieldGeometry::Quantile(grid.clone()),
        atom_regions: Vec::new(),
    })
}
