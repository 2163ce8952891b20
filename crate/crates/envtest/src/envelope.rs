//! Extreme rank length ordering and the global rank envelope.
//!
//! Curves are ordered by the extreme rank length (ERL) measure: each curve's
//! pointwise two-sided ranks are sorted ascending and the resulting vectors
//! are compared lexicographically, so curves that are extreme at many
//! coordinates sort first. The global envelope built from the least extreme
//! curves has an exact graphical interpretation: a curve leaves the envelope
//! at some coordinate if and only if its ERL measure falls below the critical
//! value.
//!
//! Ranks are kept as exact integers (doubled, so tie-averaged half-ranks stay
//! integral); lexicographic comparisons never touch floating point.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curves::CurveSet;
use crate::error::{Error, Result};

/// Exact rational with a fixed denominator, used for Monte Carlo p-values
/// (always a multiple of `1 / (s + 1)`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fraction {
    pub numerator: u64,
    pub denominator: u64,
}

impl Fraction {
    pub fn value(self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }
}

/// Pointwise ranks of a curve set, stored doubled so that tie-averaged ranks
/// (integer or half-integer) are exact integers.
#[derive(Clone, Debug)]
pub struct RankMatrix {
    /// Doubled raw ranks `2 * r_ik`, row-major `(s+1) x d`; the smallest value
    /// in a column has raw rank 1, the largest `s + 1`, ties averaged.
    raw2: Vec<u32>,
    /// Doubled two-sided ranks `2 * min(r_ik, s + 1 - r_ik)`.
    two2: Vec<u32>,
    rows: usize,
    cols: usize,
}

impl RankMatrix {
    pub fn n_curves(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.cols
    }

    /// Raw rank `r_ik` as a float (exact: numerator is integral).
    pub fn raw(&self, i: usize, k: usize) -> f64 {
        self.raw2[i * self.cols + k] as f64 / 2.0
    }

    /// Two-sided rank `R_ik = min(r_ik, s + 1 - r_ik)` as a float.
    pub fn two_sided(&self, i: usize, k: usize) -> f64 {
        self.two2[i * self.cols + k] as f64 / 2.0
    }

    /// Doubled two-sided ranks of curve `i` (exact integers).
    pub fn two_sided_row2(&self, i: usize) -> &[u32] {
        &self.two2[i * self.cols..(i + 1) * self.cols]
    }

    /// Doubled raw ranks of curve `i`.
    pub fn raw_row2(&self, i: usize) -> &[u32] {
        &self.raw2[i * self.cols..(i + 1) * self.cols]
    }
}

/// ERL measures of all curves, kept as exact counts over the common
/// denominator `s + 1`: `E_i = counts[i] / (s + 1)`.
#[derive(Clone, Debug)]
pub struct ErlMeasures {
    counts: Vec<u32>,
    denom: u32,
}

impl ErlMeasures {
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Exact numerator of `E_i` over the denominator `s + 1`.
    pub fn count(&self, i: usize) -> u32 {
        self.counts[i]
    }

    pub fn denominator(&self) -> u32 {
        self.denom
    }

    /// `E_i` as a float.
    pub fn value(&self, i: usize) -> f64 {
        self.counts[i] as f64 / self.denom as f64
    }

    pub fn values(&self) -> Vec<f64> {
        self.counts
            .iter()
            .map(|&c| c as f64 / self.denom as f64)
            .collect()
    }
}

/// Outcome of the global ERL envelope construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlobalEnvelopeResult {
    /// Normalized ERL measures `E_0, ..., E_s`.
    pub erl: Vec<f64>,
    /// Monte Carlo p-value `#{i : E_i <= E_0} / (s + 1)`.
    pub p_erl: Fraction,
    pub alpha: f64,
    /// Pointwise envelope bounds over the index set `I_alpha`.
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Row 0 of the curve set.
    pub observed: Vec<f64>,
    /// `observed[k] > upper[k]` / `observed[k] < lower[k]` per coordinate.
    pub above: Vec<bool>,
    pub below: Vec<bool>,
    /// Critical ERL value `e_(alpha)` (a multiple of `1/(s+1)`), and its exact
    /// numerator over `s + 1`.
    pub critical_e: f64,
    pub critical_count: u32,
    /// Size of the index set `I_alpha = {i : E_i >= e_(alpha)}`.
    pub index_set_size: usize,
}

impl GlobalEnvelopeResult {
    /// The test decision: the observed curve leaves the envelope somewhere.
    pub fn rejected(&self) -> bool {
        self.above.iter().chain(self.below.iter()).any(|&b| b)
    }
}

/// Computes pointwise raw and two-sided ranks per column, ties averaged.
///
/// The smallest value in a column gets raw rank 1, the largest `s + 1`; the
/// two-sided rank is `min(r, s + 1 - r)`, so the most extreme curve at a
/// coordinate (either tail) carries the lowest two-sided rank.
pub fn pointwise_ranks(curves: &CurveSet) -> RankMatrix {
    let rows = curves.n_curves();
    let cols = curves.dim();
    let mut raw2 = vec![0u32; rows * cols];
    let mut two2 = vec![0u32; rows * cols];

    // Split the output into per-column cells so columns can be ranked in
    // parallel; results are exact integers, identical for any schedule.
    let mut col_out: Vec<(usize, Vec<u32>, Vec<u32>)> = (0..cols)
        .into_par_iter()
        .map(|k| {
            // contiguous copy of the column; the row-major curve buffer is
            // stride-unfriendly for sorting
            let mut col: Vec<(f64, u32)> =
                (0..rows).map(|i| (curves.value(i, k), i as u32)).collect();
            col.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).expect("finite values"));
            let mut raw = vec![0u32; rows];
            let mut two = vec![0u32; rows];
            let full = 2 * rows as u32; // doubled s + 1
            let mut start = 0;
            while start < rows {
                let v = col[start].0;
                let mut end = start + 1;
                while end < rows && col[end].0 == v {
                    end += 1;
                }
                // ranks start+1 ..= end averaged; doubled average is integral
                let doubled = (start + end + 1) as u32;
                for &(_, idx) in &col[start..end] {
                    raw[idx as usize] = doubled;
                    two[idx as usize] = doubled.min(full - doubled);
                }
                start = end;
            }
            (k, raw, two)
        })
        .collect();
    col_out.sort_unstable_by_key(|(k, _, _)| *k);
    for (k, raw, two) in col_out {
        for i in 0..rows {
            raw2[i * cols + k] = raw[i];
            two2[i * cols + k] = two[i];
        }
    }
    RankMatrix {
        raw2,
        two2,
        rows,
        cols,
    }
}

/// Computes the ERL measure of every curve.
///
/// Each curve's two-sided ranks are sorted ascending; `E_i` counts the curves
/// whose sorted rank vector strictly precedes curve `i`'s in lexicographic
/// order, normalized by `s + 1`. Smaller `E_i` means more extreme.
pub fn erl_measures(ranks: &RankMatrix) -> ErlMeasures {
    let rows = ranks.n_curves();
    let cols = ranks.dim();
    let mut sorted = ranks.two2.clone();
    sorted
        .par_chunks_mut(cols)
        .for_each(|row| row.sort_unstable());

    let mut order: Vec<u32> = (0..rows as u32).collect();
    let row_of = |i: u32| &sorted[i as usize * cols..(i as usize + 1) * cols];
    order.par_sort_unstable_by(|&a, &b| row_of(a).cmp(row_of(b)).then(a.cmp(&b)));

    // Equal sorted vectors share the count of strictly preceding curves,
    // which is the start position of their group in the sorted order.
    let mut counts = vec![0u32; rows];
    let mut group_start = 0usize;
    for pos in 0..rows {
        if pos > 0 && row_of(order[pos]) != row_of(order[pos - 1]) {
            group_start = pos;
        }
        counts[order[pos] as usize] = group_start as u32;
    }
    ErlMeasures {
        counts,
        denom: rows as u32,
    }
}

/// Monte Carlo p-value of the observed curve: `#{i : E_i <= E_0} / (s + 1)`.
pub fn erl_p_value(erl: &ErlMeasures) -> Fraction {
    let observed = erl.counts[0];
    let numerator = erl.counts.iter().filter(|&&c| c <= observed).count() as u64;
    Fraction {
        numerator,
        denominator: erl.len() as u64,
    }
}

/// Builds the global ERL envelope at level `alpha`.
///
/// The critical value `e_(alpha)` is the largest attained ERL measure such
/// that fewer than or exactly `alpha * s` curves fall strictly below it; the
/// envelope is the pointwise min/max over the index set
/// `I_alpha = {i : E_i >= e_(alpha)}`. Curves tied with `e_(alpha)` are kept
/// in `I_alpha`, which makes the test conservative at the boundary.
///
/// A curve in `I_alpha` never leaves the envelope, so an exit anywhere
/// implies `E_i < e_(alpha)`. The converse (every curve below the critical
/// measure exits) holds whenever column values are distinct; a curve can be
/// covered at its extreme coordinate by an `I_alpha` member it ties with.
pub fn global_envelope(
    curves: &CurveSet,
    erl: &ErlMeasures,
    alpha: f64,
) -> Result<GlobalEnvelopeResult> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha must be in (0, 1), got {alpha}"
        )));
    }
    let rows = curves.n_curves();
    if erl.len() != rows {
        return Err(Error::InvalidArgument(
            "ERL measures and curve set have different curve counts".into(),
        ));
    }
    let s = rows - 1;
    let bound = alpha * s as f64;
    if bound < 1.0 {
        log::warn!(
            "alpha * s = {bound:.3} < 1: the envelope degenerates to the pointwise \
             min/max of all curves and the test cannot reject"
        );
    }

    // Largest attained E value with at most alpha * s measures strictly below.
    let mut sorted_counts: Vec<u32> = erl.counts.clone();
    sorted_counts.sort_unstable();
    let mut critical_count = sorted_counts[0];
    let mut pos = 0usize;
    while pos < rows {
        let c = sorted_counts[pos];
        // `pos` is the first occurrence of `c`, i.e. #{i : E_i < c/(s+1)}.
        if pos as f64 <= bound {
            critical_count = c;
        } else {
            break;
        }
        while pos < rows && sorted_counts[pos] == c {
            pos += 1;
        }
    }

    let cols = curves.dim();
    let mut lower = vec![f64::INFINITY; cols];
    let mut upper = vec![f64::NEG_INFINITY; cols];
    let mut index_set_size = 0usize;
    for i in 0..rows {
        if erl.counts[i] >= critical_count {
            index_set_size += 1;
            let row = curves.row(i);
            for k in 0..cols {
                if row[k] < lower[k] {
                    lower[k] = row[k];
                }
                if row[k] > upper[k] {
                    upper[k] = row[k];
                }
            }
        }
    }

    let observed = curves.observed().to_vec();
    let above: Vec<bool> = observed.iter().zip(&upper).map(|(o, u)| o > u).collect();
    let below: Vec<bool> = observed.iter().zip(&lower).map(|(o, l)| o < l).collect();

    Ok(GlobalEnvelopeResult {
        erl: erl.values(),
        p_erl: erl_p_value(erl),
        alpha,
        lower,
        upper,
        observed,
        above,
        below,
        critical_e: critical_count as f64 / rows as f64,
        critical_count,
        index_set_size,
    })
}
