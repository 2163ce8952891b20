//! Scalar benchmark tests: correlation coefficients, CDF deviation
//! statistics, and the chi-square test of independence.

use serde::{Deserialize, Serialize};

use crate::contingency::ContingencyTable;
use crate::ecdf::{bucket_indices, joint_ecdf_into, marginal_ecdf_from_buckets};
use crate::error::{Error, Result};
use crate::grid::QuantileGrid;
use crate::sample::BivariateSample;
use crate::special::{reg_inc_beta, reg_upper_gamma};

/// Identifier of a scalar test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    /// Asymptotic Pearson correlation t-test.
    Pea,
    /// Permutation test with the Pearson correlation statistic.
    PeaP,
    Spe,
    Ken,
    DevS,
    DevI,
    Chi2,
}

/// Outcome of a scalar test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalarTestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub method: Method,
    /// Degrees of freedom (chi-square only).
    pub df: Option<usize>,
}

fn validate_correlation_input(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() < 3 {
        return Err(Error::InvalidInput("correlation needs n >= 3".into()));
    }
    let var = |v: &[f64]| {
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>()
    };
    if var(x) == 0.0 || var(y) == 0.0 {
        return Err(Error::DegenerateInput("zero variance marginal".into()));
    }
    Ok(())
}

pub(crate) fn pearson_of(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    sxy / (sxx * syy).sqrt()
}

/// Product-moment correlation coefficient.
pub fn pearson_r(sample: &BivariateSample) -> Result<f64> {
    let (x, y) = sample.numeric()?;
    validate_correlation_input(x, y)?;
    Ok(pearson_of(x, y))
}

/// Tie-averaged mid-ranks, 1-based.
pub(crate) fn midranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.sort_unstable_by(|&a, &b| {
        values[a as usize]
            .partial_cmp(&values[b as usize])
            .expect("finite values")
    });
    let mut ranks = vec![0.0; n];
    let mut start = 0;
    while start < n {
        let v = values[order[start] as usize];
        let mut end = start + 1;
        while end < n && values[order[end] as usize] == v {
            end += 1;
        }
        let avg = (start + end + 1) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx as usize] = avg;
        }
        start = end;
    }
    ranks
}

/// Spearman's rho: Pearson correlation of the mid-ranks.
pub fn spearman_rho(sample: &BivariateSample) -> Result<f64> {
    let (x, y) = sample.numeric()?;
    validate_correlation_input(x, y)?;
    Ok(pearson_of(&midranks(x), &midranks(y)))
}

/// Kendall's tau-b via merge-sort inversion counting, O(n log n).
pub fn kendall_tau(sample: &BivariateSample) -> Result<f64> {
    let (x, y) = sample.numeric()?;
    validate_correlation_input(x, y)?;
    Ok(kendall_tau_of(x, y))
}

pub(crate) fn kendall_tau_of(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let mut idx: Vec<u32> = (0..n as u32).collect();
    idx.sort_unstable_by(|&a, &b| {
        x[a as usize]
            .partial_cmp(&x[b as usize])
            .unwrap()
            .then(y[a as usize].partial_cmp(&y[b as usize]).unwrap())
    });
    let mut ys: Vec<f64> = idx.iter().map(|&i| y[i as usize]).collect();
    let xs: Vec<f64> = idx.iter().map(|&i| x[i as usize]).collect();

    // ties in x, and joint ties, counted over the x-sorted order
    let mut tied_x = 0u64;
    let mut tied_xy = 0u64;
    {
        let mut i = 0;
        while i < n {
            let mut j = i + 1;
            while j < n && xs[j] == xs[i] {
                j += 1;
            }
            let run = (j - i) as u64;
            tied_x += run * (run - 1) / 2;
            let mut a = i;
            while a < j {
                let mut b = a + 1;
                while b < j && ys[b] == ys[a] {
                    b += 1;
                }
                let r = (b - a) as u64;
                tied_xy += r * (r - 1) / 2;
                a = b;
            }
            i = j;
        }
    }

    // swaps = discordant pairs among x-distinct pairs, by merge sort on y
    let mut swaps = 0u64;
    let mut buf = ys.clone();
    let mut width = 1;
    while width < n {
        let mut lo = 0;
        while lo < n {
            let mid = (lo + width).min(n);
            let hi = (lo + 2 * width).min(n);
            let (mut i, mut j, mut k) = (lo, mid, lo);
            while i < mid || j < hi {
                if i < mid && (j >= hi || ys[i] <= ys[j]) {
                    buf[k] = ys[i];
                    i += 1;
                } else {
                    buf[k] = ys[j];
                    swaps += (mid - i) as u64;
                    j += 1;
                }
                k += 1;
            }
            lo = hi;
        }
        std::mem::swap(&mut ys, &mut buf);
        width *= 2;
    }

    let mut tied_y = 0u64;
    {
        let mut i = 0;
        while i < n {
            let mut j = i + 1;
            while j < n && ys[j] == ys[i] {
                j += 1;
            }
            let run = (j - i) as u64;
            tied_y += run * (run - 1) / 2;
            i = j;
        }
    }

    let n_pairs = (n as u64) * (n as u64 - 1) / 2;
    let num = n_pairs as f64 - tied_x as f64 - tied_y as f64 + tied_xy as f64 - 2.0 * swaps as f64;
    let den = ((n_pairs - tied_x) as f64 * (n_pairs - tied_y) as f64).sqrt();
    num / den
}

/// Two-sided t-test of zero correlation: `t = r sqrt((n-2)/(1-r^2))` with
/// `n - 2` degrees of freedom; the tail probability comes from the
/// regularized incomplete beta function.
pub fn pearson_asymptotic_test(sample: &BivariateSample) -> Result<ScalarTestResult> {
    let (x, _) = sample.numeric()?;
    let n = x.len();
    let r = pearson_r(sample)?;
    let nu = (n - 2) as f64;
    let p = if r.abs() >= 1.0 {
        0.0
    } else {
        let t2 = r * r * nu / (1.0 - r * r);
        reg_inc_beta(nu / 2.0, 0.5, nu / (nu + t2))
    };
    let t = if r.abs() >= 1.0 {
        f64::INFINITY * r.signum()
    } else {
        r * (nu / (1.0 - r * r)).sqrt()
    };
    Ok(ScalarTestResult {
        statistic: t,
        p_value: p,
        method: Method::Pea,
        df: None,
    })
}

/// Deviation of the joint ECDF from the product of the marginal ECDFs over
/// the grid: supremum (DevS) and sum of squares (DevI).
pub fn deviation_statistics(sample: &BivariateSample, grid: &QuantileGrid) -> Result<(f64, f64)> {
    let (x, y) = sample.numeric()?;
    let gx = grid.len_x();
    let gy = grid.len_y();
    let bx = bucket_indices(x, &grid.values_x());
    let by = bucket_indices(y, &grid.values_y());
    let fx = marginal_ecdf_from_buckets(&bx, gx);
    let fy = marginal_ecdf_from_buckets(&by, gy);
    let mut hist = vec![0u32; (gx + 1) * (gy + 1)];
    let mut joint = vec![0.0f64; gx * gy];
    joint_ecdf_into(&bx, &by, gx, gy, &mut hist, &mut joint);
    Ok(deviation_from_fields(&joint, &fx, &fy))
}

pub(crate) fn deviation_from_fields(joint: &[f64], fx: &[f64], fy: &[f64]) -> (f64, f64) {
    let gy = fy.len();
    let mut sup = 0.0f64;
    let mut ssq = 0.0f64;
    for (k, &f) in joint.iter().enumerate() {
        let d = f - fx[k / gy] * fy[k % gy];
        sup = sup.max(d.abs());
        ssq += d * d;
    }
    (sup, ssq)
}

/// Chi-square test outcome with per-cell residuals `(o - e) / sqrt(e)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Chi2Outcome {
    pub result: ScalarTestResult,
    pub expected: Vec<f64>,
    pub residuals: Vec<f64>,
}

/// Classical chi-square test of independence in a contingency table.
pub fn chi2_test(table: &ContingencyTable) -> Result<Chi2Outcome> {
    let n = table.n() as f64;
    let rows = table.row_sums();
    let cols = table.col_sums();
    if rows.contains(&0) || cols.contains(&0) {
        return Err(Error::DegenerateInput(
            "contingency table has an empty marginal".into(),
        ));
    }
    let mut stat = 0.0;
    let mut expected = Vec::with_capacity(table.counts.len());
    let mut residuals = Vec::with_capacity(table.counts.len());
    for r in 0..table.k1 {
        for c in 0..table.k2 {
            let e = rows[r] as f64 * cols[c] as f64 / n;
            let o = table.count(r, c) as f64;
            let res = (o - e) / e.sqrt();
            stat += res * res;
            expected.push(e);
            residuals.push(res);
        }
    }
    let df = (table.k1 - 1) * (table.k2 - 1);
    let p = reg_upper_gamma(df as f64 / 2.0, stat / 2.0);
    Ok(Chi2Outcome {
        result: ScalarTestResult {
            statistic: stat,
            p_value: p,
            method: Method::Chi2,
            df: Some(df),
        },
        expected,
        residuals,
    })
}

/// Chi-square statistic alone (used as a permutation statistic).
pub(crate) fn chi2_statistic_from_counts(
    counts: &[u32],
    row_sums: &[u64],
    col_sums: &[u64],
    n: f64,
    k2: usize,
) -> f64 {
    let mut stat = 0.0;
    for (idx, &o) in counts.iter().enumerate() {
        let e = row_sums[idx / k2] as f64 * col_sums[idx % k2] as f64 / n;
        let d = o as f64 - e;
        stat += d * d / e;
    }
    stat
}
