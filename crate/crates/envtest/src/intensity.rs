//! The 2D qq-plot of a bivariate sample and kernel estimates of its
//! intensity function.
//!
//! Observations are mapped to mid-rank quantile pairs in the unit square;
//! under independence the resulting point pattern has constant intensity.
//! The intensity is estimated with an isotropic Gaussian kernel, divided by
//! the analytically computed kernel mass inside the window to correct edge
//! bias. Marginals with declared atoms get the corresponding pixel rows or
//! columns replaced by one-dimensional estimates (or constant blocks where
//! two atoms meet), each region scaled so it carries exactly the mass of its
//! observations and the whole field integrates to `n`.

use crate::error::{Error, Result};
use crate::grid::{AtomRegion, FieldGeometry, PixelGrid, StatisticField};
use crate::sample::BivariateSample;
use crate::special::std_normal_cdf;

/// Scott/Silverman rule-of-thumb bandwidth for the 2D estimate:
/// `sigma = n^(-1/6) * sqrt(1/12)`, with `1/12` the limit variance of `n`
/// regularly spaced points in the unit interval.
pub fn intensity_bandwidth(n: usize) -> f64 {
    (n as f64).powf(-1.0 / 6.0) * (1.0f64 / 12.0).sqrt()
}

/// 1D analogue used for atom bands: `sigma = m^(-1/5) * sqrt(1/12)` for the
/// atom subsample of size `m`.
pub fn intensity_bandwidth_1d(m: usize) -> f64 {
    (m as f64).powf(-1.0 / 5.0) * (1.0f64 / 12.0).sqrt()
}

/// Ranks 0..n-1 under ascending order, ties broken by original position
/// (stable), so every observation gets a distinct rank.
pub(crate) fn distinct_ranks0(values: &[f64]) -> Vec<u32> {
    let n = values.len();
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.sort_unstable_by(|&a, &b| {
        values[a as usize]
            .partial_cmp(&values[b as usize])
            .expect("finite values")
            .then(a.cmp(&b))
    });
    let mut ranks = vec![0u32; n];
    for (pos, &idx) in order.iter().enumerate() {
        ranks[idx as usize] = pos as u32;
    }
    ranks
}

/// Maps each observation to its mid-rank quantile pair
/// `((rank_x - 0.5) / n, (rank_y - 0.5) / n)` in the open unit square.
pub fn qq_transform(sample: &BivariateSample) -> Result<Vec<(f64, f64)>> {
    let (x, y) = sample.numeric()?;
    let n = x.len() as f64;
    let rx = distinct_ranks0(x);
    let ry = distinct_ranks0(y);
    Ok(rx
        .iter()
        .zip(&ry)
        .map(|(&a, &b)| ((a as f64 + 0.5) / n, (b as f64 + 0.5) / n))
        .collect())
}

#[inline]
fn gauss(u: f64, inv_sigma: f64, norm: f64) -> f64 {
    let z = u * inv_sigma;
    (-0.5 * z * z).exp() * norm
}

/// Kernel mass of a 1D Gaussian centered at `x` inside the union of
/// disjoint intervals `domain`.
fn edge_correction_1d(x: f64, sigma: f64, domain: &[(f64, f64)]) -> f64 {
    domain
        .iter()
        .map(|&(a, b)| std_normal_cdf((b - x) / sigma) - std_normal_cdf((a - x) / sigma))
        .sum()
}

/// Kernel mass of the isotropic 2D Gaussian centered at `(x, y)` inside the
/// unit square: the product of two 1D Gaussian CDF differences.
pub fn edge_correction(x: f64, y: f64, sigma: f64) -> f64 {
    edge_correction_1d(x, sigma, &[(0.0, 1.0)]) * edge_correction_1d(y, sigma, &[(0.0, 1.0)])
}

fn pixel_centers(count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| (i as f64 + 0.5) / count as f64)
        .collect()
}

/// Edge-corrected Gaussian kernel intensity of a point pattern in the unit
/// square, evaluated at the pixel centers of `grid`.
///
/// The field integrates (pixel sum times pixel area) approximately to the
/// number of points; no rescaling is applied here.
pub fn kernel_intensity(
    points: &[(f64, f64)],
    grid: PixelGrid,
    sigma: f64,
) -> Result<StatisticField> {
    if points.is_empty() {
        return Err(Error::InvalidInput(
            "kernel intensity of an empty point set".into(),
        ));
    }
    if !(sigma > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "bandwidth must be positive, got {sigma}"
        )));
    }
    for &(px, py) in points {
        if !(0.0..=1.0).contains(&px) || !(0.0..=1.0).contains(&py) {
            return Err(Error::InvalidInput(format!(
                "point ({px}, {py}) outside the unit square"
            )));
        }
    }
    let (rows, cols) = (grid.rows, grid.cols);
    let cx = pixel_centers(cols);
    let cy = pixel_centers(rows);
    let inv_sigma = 1.0 / sigma;
    let norm = inv_sigma / (2.0 * std::f64::consts::PI).sqrt();

    let mut out = vec![0.0f64; rows * cols];
    let mut kxv = vec![0.0f64; cols];
    let mut kyv = vec![0.0f64; rows];
    for &(px, py) in points {
        for (b, &c) in cx.iter().enumerate() {
            kxv[b] = gauss(c - px, inv_sigma, norm);
        }
        for (a, &c) in cy.iter().enumerate() {
            kyv[a] = gauss(c - py, inv_sigma, norm);
        }
        for a in 0..rows {
            let w = kyv[a];
            let row = &mut out[a * cols..(a + 1) * cols];
            for b in 0..cols {
                row[b] += w * kxv[b];
            }
        }
    }
    let unit = [(0.0, 1.0)];
    let inv_ex: Vec<f64> = cx
        .iter()
        .map(|&c| 1.0 / edge_correction_1d(c, sigma, &unit))
        .collect();
    let inv_ey: Vec<f64> = cy
        .iter()
        .map(|&c| 1.0 / edge_correction_1d(c, sigma, &unit))
        .collect();
    for a in 0..rows {
        let row = &mut out[a * cols..(a + 1) * cols];
        for b in 0..cols {
            row[b] *= inv_ey[a] * inv_ex[b];
        }
    }
    Ok(StatisticField {
        values: out,
        geometry: FieldGeometry::Pixels(grid),
        atom_regions: Vec::new(),
    })
}

/// A pixel band replaced because of an atom on one axis.
#[derive(Clone, Debug)]
struct Band {
    atom: f64,
    /// Multiplicity of the atom value in its marginal.
    m: usize,
    /// Replaced pixel range along the axis.
    start: usize,
    count: usize,
    /// 1D kernel values at the band bandwidth: rank-major, `n x cross-axis
    /// pixel count`.
    kernel: Vec<f64>,
    /// Reciprocal 1D edge correction over the cross-axis domain.
    inv_e: Vec<f64>,
}

/// Precomputed machinery to evaluate the qq intensity statistic for the
/// observed pairing and for arbitrary permutations of y, bit-identically.
pub(crate) struct QqMachine {
    grid: PixelGrid,
    n: usize,
    rx: Vec<u32>,
    ry: Vec<u32>,
    /// Per observation: index into `col_bands` when x_i is an atom value.
    x_atom_of: Vec<Option<u8>>,
    /// Per y slot (original order): index into `row_bands`.
    y_atom_of: Vec<Option<u8>>,
    /// 2D kernel values, rank-major: `kx2[r * cols + b]`, `ky2[r * rows + a]`.
    kx2: Vec<f64>,
    ky2: Vec<f64>,
    /// Reciprocal 2D edge correction over the continuous domain.
    inv_e2: Vec<f64>,
    row_bands: Vec<Band>,
    col_bands: Vec<Band>,
    is_band_row: Vec<bool>,
    is_band_col: Vec<bool>,
}

pub(crate) struct QqScratch {
    acc: Vec<f64>,
    acc1: Vec<f64>,
    vals1: Vec<f64>,
    block_counts: Vec<u32>,
}

/// Bands, continuous quantile domain, per-pixel band membership, and
/// per-observation atom classification for one axis.
type AxisLayout = (Vec<Band>, Vec<(f64, f64)>, Vec<bool>, Vec<Option<u8>>);

fn build_bands(values: &[f64], atoms: &[f64], pixels: usize) -> Result<AxisLayout> {
    let n = values.len();
    let mut bands: Vec<Band> = Vec::with_capacity(atoms.len());
    let mut quantile_bands: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
    let mut atom_of: Vec<Option<u8>> = vec![None; n];
    let mut prev_end = 0usize;

    for (ai, &a) in atoms.iter().enumerate() {
        let m = values.iter().filter(|&&v| v == a).count();
        if m == n {
            return Err(Error::InvalidInput(format!(
                "atom {a} has weight 1: the marginal is degenerate"
            )));
        }
        let w = m as f64 / n as f64;
        let below = values.iter().filter(|&&v| v < a).count();
        let lo = below as f64 / n as f64;
        let count = ((w * pixels as f64).round() as usize).max(1);
        if prev_end + count > pixels {
            return Err(Error::InvalidInput(
                "atom bands exceed the pixel grid; use a finer grid".into(),
            ));
        }
        let start = ((lo * pixels as f64).round() as usize)
            .min(pixels - count)
            .max(prev_end);
        prev_end = start + count;
        quantile_bands.push((lo, lo + w));
        for (i, &v) in values.iter().enumerate() {
            if v == a {
                atom_of[i] = Some(ai as u8);
            }
        }
        // kernels filled in by the caller once the cross-axis domain is known
        bands.push(Band {
            atom: a,
            m,
            start,
            count,
            kernel: Vec::new(),
            inv_e: Vec::new(),
        });
    }

    // Continuous quantile domain of this axis: complement of the atom bands.
    let mut domain: Vec<(f64, f64)> = Vec::new();
    let mut lo = 0.0;
    for &(a, b) in &quantile_bands {
        if a > lo {
            domain.push((lo, a));
        }
        lo = b;
    }
    if lo < 1.0 {
        domain.push((lo, 1.0));
    }

    let continuous = n - atom_of.iter().filter(|o| o.is_some()).count();
    let free = pixels - bands.iter().map(|b| b.count).sum::<usize>();
    if continuous > 0 && free == 0 {
        return Err(Error::InvalidInput(
            "atom bands cover every pixel but continuous observations remain".into(),
        ));
    }

    let mut is_band = vec![false; pixels];
    for b in &bands {
        for i in b.start..b.start + b.count {
            is_band[i] = true;
        }
    }
    Ok((bands, domain, is_band, atom_of))
}

/// Rank-major 1D kernel matrix: entry `r * centers.len() + j` holds the
/// kernel value between pixel center `j` and quantile position
/// `(r + 0.5) / n`.
fn kernel_matrix(n: usize, centers: &[f64], sigma: f64) -> Vec<f64> {
    let inv_sigma = 1.0 / sigma;
    let norm = inv_sigma / (2.0 * std::f64::consts::PI).sqrt();
    let mut out = vec![0.0f64; n * centers.len()];
    for r in 0..n {
        let q = (r as f64 + 0.5) / n as f64;
        let row = &mut out[r * centers.len()..(r + 1) * centers.len()];
        for (j, &c) in centers.iter().enumerate() {
            row[j] = gauss(c - q, inv_sigma, norm);
        }
    }
    out
}

impl QqMachine {
    pub(crate) fn for_sample(
        sample: &BivariateSample,
        grid: PixelGrid,
        sigma: f64,
    ) -> Result<Self> {
        let (x, y) = sample.numeric()?;
        if !(sigma > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "bandwidth must be positive, got {sigma}"
            )));
        }
        let n = x.len();
        let rx = distinct_ranks0(x);
        let ry = distinct_ranks0(y);

        let (mut col_bands, domain_x, is_band_col, x_atom_of) =
            build_bands(x, sample.atoms_x(), grid.cols)?;
        let (mut row_bands, domain_y, is_band_row, y_atom_of) =
            build_bands(y, sample.atoms_y(), grid.rows)?;

        let cx = pixel_centers(grid.cols);
        let cy = pixel_centers(grid.rows);
        let kx2 = kernel_matrix(n, &cx, sigma);
        let ky2 = kernel_matrix(n, &cy, sigma);
        let inv_ex: Vec<f64> = cx
            .iter()
            .map(|&c| 1.0 / edge_correction_1d(c, sigma, &domain_x))
            .collect();
        let inv_ey: Vec<f64> = cy
            .iter()
            .map(|&c| 1.0 / edge_correction_1d(c, sigma, &domain_y))
            .collect();
        let mut inv_e2 = vec![0.0f64; grid.rows * grid.cols];
        for a in 0..grid.rows {
            for b in 0..grid.cols {
                inv_e2[a * grid.cols + b] = inv_ey[a] * inv_ex[b];
            }
        }

        // 1D estimates for a y-atom run along x (and vice versa): kernel at
        // the band's own bandwidth, edge-corrected over the cross-axis
        // continuous domain.
        for band in &mut row_bands {
            let s1 = intensity_bandwidth_1d(band.m);
            band.kernel = kernel_matrix(n, &cx, s1);
            band.inv_e = cx
                .iter()
                .map(|&c| 1.0 / edge_correction_1d(c, s1, &domain_x))
                .collect();
        }
        for band in &mut col_bands {
            let s1 = intensity_bandwidth_1d(band.m);
            band.kernel = kernel_matrix(n, &cy, s1);
            band.inv_e = cy
                .iter()
                .map(|&c| 1.0 / edge_correction_1d(c, s1, &domain_y))
                .collect();
        }

        Ok(Self {
            grid,
            n,
            rx,
            ry,
            x_atom_of,
            y_atom_of,
            kx2,
            ky2,
            inv_e2,
            row_bands,
            col_bands,
            is_band_row,
            is_band_col,
        })
    }

    pub(crate) fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub(crate) fn n_obs(&self) -> usize {
        self.n
    }

    pub(crate) fn grid(&self) -> PixelGrid {
        self.grid
    }

    pub(crate) fn atom_regions(&self) -> Vec<AtomRegion> {
        let mut regions = Vec::new();
        for b in &self.row_bands {
            regions.push(AtomRegion::RowBand {
                start: b.start,
                count: b.count,
                atom: b.atom,
            });
        }
        for b in &self.col_bands {
            regions.push(AtomRegion::ColBand {
                start: b.start,
                count: b.count,
                atom: b.atom,
            });
        }
        for cb in &self.col_bands {
            for rb in &self.row_bands {
                regions.push(AtomRegion::Block {
                    row_start: rb.start,
                    row_count: rb.count,
                    col_start: cb.start,
                    col_count: cb.count,
                    atom_x: cb.atom,
                    atom_y: rb.atom,
                });
            }
        }
        regions
    }

    pub(crate) fn make_scratch(&self) -> QqScratch {
        QqScratch {
            acc: vec![0.0; self.grid.dim()],
            acc1: vec![0.0; self.grid.rows.max(self.grid.cols)],
            vals1: vec![0.0; self.grid.rows.max(self.grid.cols)],
            block_counts: vec![0; self.row_bands.len() * self.col_bands.len().max(1)],
        }
    }

    /// Evaluates the statistic for the pairing `(x_i, y_{perm[i]})`
    /// (identity when `perm` is `None`). The field always integrates to `n`.
    pub(crate) fn eval_into(&self, perm: Option<&[u32]>, out: &mut [f64], scratch: &mut QqScratch) {
        debug_assert_eq!(out.len(), self.grid.dim());
        let (rows, cols) = (self.grid.rows, self.grid.cols);
        let n = self.n;
        let area = self.grid.pixel_area();
        let y_slot = |i: usize| perm.map_or(i, |p| p[i] as usize);

        if self.row_bands.is_empty() && self.col_bands.is_empty() {
            out.fill(0.0);
            for i in 0..n {
                let kyv = &self.ky2[self.ry[y_slot(i)] as usize * rows..][..rows];
                let kxv = &self.kx2[self.rx[i] as usize * cols..][..cols];
                for a in 0..rows {
                    let w = kyv[a];
                    let row = &mut out[a * cols..(a + 1) * cols];
                    for b in 0..cols {
                        row[b] += w * kxv[b];
                    }
                }
            }
            let mut total = 0.0;
            for (v, inv_e) in out.iter_mut().zip(&self.inv_e2) {
                *v *= inv_e;
                total += *v;
            }
            let scale = n as f64 / (total * area);
            for v in out.iter_mut() {
                *v *= scale;
            }
            return;
        }

        out.fill(0.0);
        scratch.acc.fill(0.0);
        scratch.block_counts.fill(0);
        let n_row_bands = self.row_bands.len();
        let mut n_continuous = 0usize;
        let mut row_members: Vec<u32> = vec![0; n_row_bands]; // per y-atom, continuous x only
        let mut col_members: Vec<u32> = vec![0; self.col_bands.len()];

        // One pass to classify and accumulate the 2D part.
        for i in 0..n {
            let ys = y_slot(i);
            match (self.x_atom_of[i], self.y_atom_of[ys]) {
                (None, None) => {
                    n_continuous += 1;
                    let kyv = &self.ky2[self.ry[ys] as usize * rows..][..rows];
                    let kxv = &self.kx2[self.rx[i] as usize * cols..][..cols];
                    for a in 0..rows {
                        let w = kyv[a];
                        let row = &mut scratch.acc[a * cols..(a + 1) * cols];
                        for b in 0..cols {
                            row[b] += w * kxv[b];
                        }
                    }
                }
                (Some(cb), Some(rb)) => {
                    scratch.block_counts[cb as usize * n_row_bands + rb as usize] += 1;
                }
                (None, Some(rb)) => row_members[rb as usize] += 1,
                (Some(cb), None) => col_members[cb as usize] += 1,
            }
        }

        // 2D region: free rows x free cols, edge-corrected then rescaled so
        // its mass equals the continuous count.
        if n_continuous > 0 {
            let mut raw_mass = 0.0;
            for a in (0..rows).filter(|&a| !self.is_band_row[a]) {
                for b in (0..cols).filter(|&b| !self.is_band_col[b]) {
                    let v = scratch.acc[a * cols + b] * self.inv_e2[a * cols + b];
                    out[a * cols + b] = v;
                    raw_mass += v;
                }
            }
            raw_mass *= area;
            if raw_mass > 0.0 {
                let scale = n_continuous as f64 / raw_mass;
                for a in (0..rows).filter(|&a| !self.is_band_row[a]) {
                    for b in (0..cols).filter(|&b| !self.is_band_col[b]) {
                        out[a * cols + b] *= scale;
                    }
                }
            }
        }

        // Row bands: 1D estimate along x of the x-quantiles of this atom's
        // observations, replicated across the band rows.
        for (bi, band) in self.row_bands.iter().enumerate() {
            let members = row_members[bi];
            if members == 0 {
                continue;
            }
            scratch.acc1[..cols].fill(0.0);
            for i in 0..n {
                if self.x_atom_of[i].is_none() && self.y_atom_of[y_slot(i)] == Some(bi as u8) {
                    let kxv = &band.kernel[self.rx[i] as usize * cols..][..cols];
                    for b in 0..cols {
                        scratch.acc1[b] += kxv[b];
                    }
                }
            }
            let mut raw_mass = 0.0;
            for b in 0..cols {
                let v = scratch.acc1[b] * band.inv_e[b];
                scratch.vals1[b] = v;
                if !self.is_band_col[b] {
                    raw_mass += v;
                }
            }
            raw_mass *= band.count as f64 * area;
            let scale = if raw_mass > 0.0 {
                members as f64 / raw_mass
            } else {
                0.0
            };
            for a in band.start..band.start + band.count {
                for b in (0..cols).filter(|&b| !self.is_band_col[b]) {
                    out[a * cols + b] = scratch.vals1[b] * scale;
                }
            }
        }

        // Column bands, symmetric.
        for (bi, band) in self.col_bands.iter().enumerate() {
            let members = col_members[bi];
            if members == 0 {
                continue;
            }
            scratch.acc1[..rows].fill(0.0);
            for i in 0..n {
                if self.x_atom_of[i] == Some(bi as u8) && self.y_atom_of[y_slot(i)].is_none() {
                    let kyv = &band.kernel[self.ry[y_slot(i)] as usize * rows..][..rows];
                    for a in 0..rows {
                        scratch.acc1[a] += kyv[a];
                    }
                }
            }
            let mut raw_mass = 0.0;
            for a in 0..rows {
                let v = scratch.acc1[a] * band.inv_e[a];
                scratch.vals1[a] = v;
                if !self.is_band_row[a] {
                    raw_mass += v;
                }
            }
            raw_mass *= band.count as f64 * area;
            let scale = if raw_mass > 0.0 {
                members as f64 / raw_mass
            } else {
                0.0
            };
            for a in (0..rows).filter(|&a| !self.is_band_row[a]) {
                for b in band.start..band.start + band.count {
                    out[a * cols + b] = scratch.vals1[a] * scale;
                }
            }
        }

        // Blocks: constant value carrying the count of observations at the
        // atom combination.
        for (ci, cb) in self.col_bands.iter().enumerate() {
            for (ri, rb) in self.row_bands.iter().enumerate() {
                let count = scratch.block_counts[ci * n_row_bands + ri];
                let cells = (rb.count * cb.count) as f64;
                let value = count as f64 * (rows * cols) as f64 / cells;
                for a in rb.start..rb.start + rb.count {
                    for b in cb.start..cb.start + cb.count {
                        out[a * cols + b] = value;
                    }
                }
            }
        }
    }
}

/// Kernel intensity of the 2D qq-plot as a test statistic.
///
/// Without declared atoms this is the edge-corrected kernel estimate of the
/// qq point pattern, rescaled so the field integrates to exactly `n`. Atom
/// bands are replaced by 1D estimates and atom intersections by constant
/// blocks, each scaled to its observation count, preserving the total.
pub fn qq_intensity_statistic(
    sample: &BivariateSample,
    grid: PixelGrid,
    sigma: f64,
) -> Result<StatisticField> {
    let machine = QqMachine::for_sample(sample, grid, sigma)?;
    let mut scratch = machine.make_scratch();
    let mut values = vec![0.0f64; machine.dim()];
    machine.eval_into(None, &mut values, &mut scratch);
    Ok(StatisticField {
        values,
        geometry: FieldGeometry::Pixels(grid),
        atom_regions: machine.atom_regions(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bandwidth_rule_of_thumb() {
        assert_relative_eq!(
            intensity_bandwidth(1),
            0.288_675_134_594_812_9,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            intensity_bandwidth(64),
            0.144_337_567_297_406_4,
            max_relative = 1e-12
        );
        // n = 360: 360^(-1/6) / sqrt(12) = exp(-ln(360)/6 - ln(12)/2)
        let expect = (-(360.0f64).ln() / 6.0 - 12.0f64.ln() / 2.0).exp();
        assert_relative_eq!(intensity_bandwidth(360), expect, max_relative = 1e-12);
        assert_relative_eq!(intensity_bandwidth(360), 0.108_232_8, max_relative = 1e-6);
    }

    #[test]
    fn edge_correction_bounds_and_small_sigma_limit() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..200 {
            let x = rng.gen::<f64>();
            let y = rng.gen::<f64>();
            let sigma = rng.gen::<f64>() * 0.5 + 1e-3;
            let e = edge_correction(x, y, sigma);
            assert!(e > 0.0 && e <= 1.0, "e({x}, {y}; {sigma}) = {e}");
        }
        // interior pixels: e -> 1 as sigma -> 0
        for sigma in [0.1, 0.01, 0.001] {
            let e = edge_correction(0.4, 0.6, sigma);
            assert!(e <= 1.0);
            assert!(1.0 - e <= 1.0 - edge_correction(0.4, 0.6, sigma * 2.0) + 1e-15);
        }
        assert!((1.0 - edge_correction(0.4, 0.6, 0.01)).abs() < 1e-12);
    }

    #[test]
    fn qq_transform_two_points() {
        let s = BivariateSample::continuous(vec![5.0, 3.0], vec![7.0, 9.0]).unwrap();
        let q = qq_transform(&s).unwrap();
        assert_eq!(q, vec![(0.75, 0.25), (0.25, 0.75)]);
    }

    #[test]
    fn qq_transform_comonotone_diagonal() {
        let x: Vec<f64> = (0..40).map(|i| (i as f64).sin() * 10.0).collect();
        let s = BivariateSample::continuous(x.clone(), x).unwrap();
        for (u, v) in qq_transform(&s).unwrap() {
            assert_eq!(u, v);
        }
    }

    #[test]
    fn qq_transform_marginals_exactly_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 100;
        let x: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let s = BivariateSample::continuous(x, y).unwrap();
        let q = qq_transform(&s).unwrap();
        let mut us: Vec<f64> = q.iter().map(|p| p.0).collect();
        us.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (i, &u) in us.iter().enumerate() {
            assert_eq!(u, (i as f64 + 0.5) / n as f64);
        }
        // each band of width 1/n holds exactly one point per axis
        let mut vs: Vec<f64> = q.iter().map(|p| p.1).collect();
        vs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (i, &v) in vs.iter().enumerate() {
            assert_eq!(v, (i as f64 + 0.5) / n as f64);
        }
    }

    #[test]
    fn single_center_point_peaks_centrally_and_integrates_to_one() {
        let grid = PixelGrid::new(64, 64).unwrap();
        let f = kernel_intensity(&[(0.5, 0.5)], grid, 0.1).unwrap();
        let argmax = f
            .values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        let (row, col) = (argmax / 64, argmax % 64);
        assert!((31..=32).contains(&row) && (31..=32).contains(&col));
        let mass: f64 = f.values.iter().sum::<f64>() * grid.pixel_area();
        assert!((0.99..=1.01).contains(&mass), "mass {mass}");
    }

    #[test]
    fn corner_point_edge_correction() {
        // A Gaussian centered at the corner keeps about a quarter of its
        // mass inside the square, so e(0, 0) = 1/4 and the corrected corner
        // value is the raw kernel value divided by it.
        assert_relative_eq!(edge_correction(0.0, 0.0, 0.1), 0.25, max_relative = 1e-12);
        let grid = PixelGrid::new(32, 32).unwrap();
        let sigma = 0.1;
        let f = kernel_intensity(&[(0.0, 0.0)], grid, sigma).unwrap();
        let c = grid.center_x(0);
        let raw = {
            let inv_sigma = 1.0 / sigma;
            let norm = inv_sigma / (2.0 * std::f64::consts::PI).sqrt();
            gauss(c - 0.0, inv_sigma, norm) * gauss(c - 0.0, inv_sigma, norm)
        };
        let e = edge_correction(c, c, sigma);
        assert_relative_eq!(f.values[0], raw / e, max_relative = 1e-12);
    }

    #[test]
    fn continuous_statistic_mass_is_exactly_n() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 200;
        let x: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let s = BivariateSample::continuous(x, y).unwrap();
        let grid = PixelGrid::new(32, 32).unwrap();
        let f = qq_intensity_statistic(&s, grid, intensity_bandwidth(n)).unwrap();
        let mean = f.values.iter().sum::<f64>() / f.values.len() as f64;
        assert_relative_eq!(mean, n as f64, max_relative = 1e-12);
    }

    #[test]
    fn statistic_equals_rescaled_kernel_intensity_bitwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let n = 50;
        let x: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let s = BivariateSample::continuous(x, y).unwrap();
        let grid = PixelGrid::new(16, 16).unwrap();
        let sigma = intensity_bandwidth(n);
        let stat = qq_intensity_statistic(&s, grid, sigma).unwrap();
        let raw = kernel_intensity(&qq_transform(&s).unwrap(), grid, sigma).unwrap();
        let total: f64 = raw.values.iter().sum();
        let scale = n as f64 / (total * grid.pixel_area());
        for (a, b) in stat.values.iter().zip(&raw.values) {
            assert_eq!(*a, b * scale);
        }
    }

    #[test]
    fn half_weight_atom_replaces_bottom_sixteen_rows() {
        let n = 200;
        let mut y = vec![0.0; 100];
        y.extend((1..=100).map(|v| v as f64));
        let x: Vec<f64> = (1..=n).map(|v| v as f64 * 0.7).collect();
        let s = BivariateSample::continuous_with_atoms(x, y, vec![], vec![0.0]).unwrap();
        let grid = PixelGrid::new(32, 32).unwrap();
        let f = qq_intensity_statistic(&s, grid, intensity_bandwidth(n)).unwrap();
        let bands: Vec<&AtomRegion> = f
            .atom_regions
            .iter()
            .filter(|r| matches!(r, AtomRegion::RowBand { .. }))
            .collect();
        assert_eq!(bands.len(), 1);
        match bands[0] {
            AtomRegion::RowBand { start, count, atom } => {
                assert_eq!(*start, 0);
                assert_eq!(*count, 16);
                assert_eq!(*atom, 0.0);
            }
            _ => unreachable!(),
        }
        // replicated rows are identical
        for a in 1..16 {
            for b in 0..32 {
                assert_eq!(f.values[a * 32 + b], f.values[b]);
            }
        }
        // total mass still n
        let mass: f64 = f.values.iter().sum::<f64>() * grid.pixel_area();
        assert_relative_eq!(mass, n as f64, max_relative = 1e-12);
    }

    #[test]
    fn atoms_in_both_marginals_make_a_constant_block() {
        // 10 of 40 observations sit at (0, 0); x and y both carry a 25% atom
        // at zero.
        let mut x = vec![0.0; 10];
        let mut y = vec![0.0; 10];
        x.extend((1..=30).map(|v| v as f64));
        y.extend((1..=30).map(|v| (31 - v) as f64));
        let s = BivariateSample::continuous_with_atoms(x, y, vec![0.0], vec![0.0]).unwrap();
        let grid = PixelGrid::new(16, 16).unwrap();
        let f = qq_intensity_statistic(&s, grid, intensity_bandwidth(40)).unwrap();
        // 25% of 16 pixels = 4 rows and 4 cols
        let block_value = 10.0 * (16.0 * 16.0) / 16.0;
        for a in 0..4 {
            for b in 0..4 {
                assert_eq!(f.values[a * 16 + b], block_value);
            }
        }
        let mass: f64 = f.values.iter().sum::<f64>() * grid.pixel_area();
        assert_relative_eq!(mass, 40.0, max_relative = 1e-12);
        assert!(f
            .atom_regions
            .iter()
            .any(|r| matches!(r, AtomRegion::Block { .. })));
    }

    #[test]
    fn empty_point_set_and_degenerate_atom_error() {
        let grid = PixelGrid::new(8, 8).unwrap();
        assert!(kernel_intensity(&[], grid, 0.1).is_err());
        let s = BivariateSample::continuous_with_atoms(
            vec![1.0, 2.0, 3.0],
            vec![5.0, 5.0, 5.0],
            vec![],
            vec![5.0],
        )
        .unwrap();
        assert!(qq_intensity_statistic(&s, grid, 0.1).is_err());
    }

    #[test]
    fn comonotone_sample_peaks_on_the_diagonal() {
        let n = 100;
        let x: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let s = BivariateSample::continuous(x.clone(), x).unwrap();
        let grid = PixelGrid::new(32, 32).unwrap();
        let f = qq_intensity_statistic(&s, grid, intensity_bandwidth(n)).unwrap();
        let argmax = f
            .values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        let (row, col) = (argmax / 32, argmax % 32);
        assert!(
            (row as i64 - col as i64).abs() <= 1,
            "argmax off-diagonal: ({row}, {col})"
        );
    }
}
