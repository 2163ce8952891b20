//! Permutation engine: draws replicates of the sample under independence by
//! permuting the y coordinate, evaluates a statistic on each, and drives the
//! global envelope and scalar Monte Carlo tests.
//!
//! Reproducibility: replicate `j` draws its permutation from an RNG stream
//! derived deterministically from `(master_seed, j)`, so parallel and serial
//! runs produce bit-identical results for any thread count.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::contingency::ContingencyTable;
use crate::curves::CurveSet;
use crate::ecdf::{bucket_indices, joint_ecdf_into, marginal_ecdf_from_buckets};
use crate::envelope::{
    erl_measures, global_envelope, pointwise_ranks, Fraction, GlobalEnvelopeResult,
};
use crate::error::{Error, Result};
use crate::grid::{make_quantile_grid, FieldGeometry, PixelGrid, QuantileGrid, StatisticField};
use crate::intensity::{intensity_bandwidth, QqMachine, QqScratch};
use crate::reference::{
    chi2_statistic_from_counts, deviation_from_fields, kendall_tau_of, midranks,
};
use crate::sample::BivariateSample;

/// Scalar statistics usable in [`run_scalar_permutation_test`].
///
/// Correlation statistics are compared two-sided (`|T_i| >= |T_0|`);
/// deviation and chi-square statistics one-sided upper (`T_i >= T_0`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScalarKind {
    Pearson,
    Spearman,
    Kendall,
    /// Supremum deviation of the joint ECDF from the product of marginals.
    DevS {
        levels_x: usize,
        levels_y: usize,
    },
    /// Sum-of-squares deviation over the grid.
    DevI {
        levels_x: usize,
        levels_y: usize,
    },
    Chi2,
}

impl ScalarKind {
    pub fn dev_s_default() -> Self {
        ScalarKind::DevS {
            levels_x: 20,
            levels_y: 20,
        }
    }

    pub fn dev_i_default() -> Self {
        ScalarKind::DevI {
            levels_x: 20,
            levels_y: 20,
        }
    }
}

/// Which statistic the permutation engine evaluates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StatisticId {
    /// Joint ECDF on a quantile grid (vector statistic).
    Cdf { levels_x: usize, levels_y: usize },
    /// Kernel intensity of the 2D qq-plot on a pixel grid (vector statistic).
    QqIntensity { rows: usize, cols: usize },
    /// Contingency-table cell counts (vector statistic).
    Table,
    /// A scalar reference statistic.
    Scalar(ScalarKind),
}

impl StatisticId {
    pub fn cdf_default() -> Self {
        StatisticId::Cdf {
            levels_x: 20,
            levels_y: 20,
        }
    }

    pub fn qq_default() -> Self {
        StatisticId::QqIntensity { rows: 32, cols: 32 }
    }
}

/// Configuration of one permutation test run.
#[derive(Clone, Copy, Debug)]
pub struct PermutationPlan {
    /// Number of permutation replicates `s`.
    pub permutations: usize,
    pub master_seed: u64,
    pub statistic: StatisticId,
}

/// Uniform random permutation of `0..n` for one replicate, drawn by
/// Fisher-Yates from the RNG stream `(master_seed, replicate)`.
pub fn draw_permutation(master_seed: u64, replicate: u64, n: usize) -> Vec<u32> {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(replicate);
    let mut idx: Vec<u32> = (0..n as u32).collect();
    idx.shuffle(&mut rng);
    idx
}

/// Outcome of an envelope test run: the global envelope plus the observed
/// statistic field with its geometry.
#[derive(Clone, Debug)]
pub struct EnvelopeTest {
    pub result: GlobalEnvelopeResult,
    pub field: StatisticField,
}

/// Outcome of a scalar permutation test.
#[derive(Clone, Debug)]
pub struct ScalarPermutationTest {
    pub kind: ScalarKind,
    pub statistic: f64,
    /// Monte Carlo p-value `#{i : T_i at least as extreme as T_0} / (s + 1)`.
    pub p: Fraction,
}

// ---------------------------------------------------------------------------
// vector statistic evaluators

struct CdfEvaluator {
    grid: QuantileGrid,
    bx: Vec<u32>,
    by: Vec<u32>,
}

struct TableEvaluator {
    x_codes: Vec<u32>,
    y_codes: Vec<u32>,
    k1: usize,
    k2: usize,
    row_labels: Vec<String>,
    col_labels: Vec<String>,
}

enum VectorEvaluator {
    Cdf(CdfEvaluator),
    Qq(QqMachine),
    Table(TableEvaluator),
}

pub(crate) struct VectorScratch {
    hist: Vec<u32>,
    permuted: Vec<u32>,
    qq: Option<QqScratch>,
}

impl VectorEvaluator {
    fn new(sample: &BivariateSample, statistic: &StatisticId) -> Result<Self> {
        match *statistic {
            StatisticId::Cdf { levels_x, levels_y } => {
                let grid = make_quantile_grid(sample, levels_x, levels_y)?;
                let (x, y) = sample.numeric()?;
                let bx = bucket_indices(x, &grid.values_x());
                let by = bucket_indices(y, &grid.values_y());
                Ok(VectorEvaluator::Cdf(CdfEvaluator { grid, bx, by }))
            }
            StatisticId::QqIntensity { rows, cols } => {
                let grid = PixelGrid::new(rows, cols)?;
                let sigma = intensity_bandwidth(sample.n());
                Ok(VectorEvaluator::Qq(QqMachine::for_sample(
                    sample, grid, sigma,
                )?))
            }
            StatisticId::Table => {
                let table = ContingencyTable::from_sample(sample)?;
                let (x_codes, y_codes, _, _) = sample.categories()?;
                Ok(VectorEvaluator::Table(TableEvaluator {
                    x_codes: x_codes.to_vec(),
                    y_codes: y_codes.to_vec(),
                    k1: table.k1,
                    k2: table.k2,
                    row_labels: table.row_labels,
                    col_labels: table.col_labels,
                }))
            }
            StatisticId::Scalar(_) => Err(Error::IncompatibleStatistic(
                "scalar statistics run through run_scalar_permutation_test".into(),
            )),
        }
    }

    fn dim(&self) -> usize {
        match self {
            VectorEvaluator::Cdf(e) => e.grid.dim(),
            VectorEvaluator::Qq(m) => m.dim(),
            VectorEvaluator::Table(e) => e.k1 * e.k2,
        }
    }

    fn n(&self) -> usize {
        match self {
            VectorEvaluator::Cdf(e) => e.bx.len(),
            VectorEvaluator::Qq(m) => m.n_obs(),
            VectorEvaluator::Table(e) => e.x_codes.len(),
        }
    }

    fn make_scratch(&self) -> VectorScratch {
        match self {
            VectorEvaluator::Cdf(e) => VectorScratch {
                hist: vec![0; (e.grid.len_x() + 1) * (e.grid.len_y() + 1)],
                permuted: vec![0; e.bx.len()],
                qq: None,
            },
            VectorEvaluator::Qq(m) => VectorScratch {
                hist: Vec::new(),
                permuted: Vec::new(),
                qq: Some(m.make_scratch()),
            },
            VectorEvaluator::Table(e) => VectorScratch {
                hist: vec![0; e.k1 * e.k2],
                permuted: vec![0; e.x_codes.len()],
                qq: None,
            },
        }
    }

    fn eval_into(&self, perm: Option<&[u32]>, out: &mut [f64], scratch: &mut VectorScratch) {
        match self {
            VectorEvaluator::Cdf(e) => {
                let gx = e.grid.len_x();
                let gy = e.grid.len_y();
                let by = match perm {
                    None => &e.by,
                    Some(p) => {
                        for (slot, &src) in scratch.permuted.iter_mut().zip(p) {
                            *slot = e.by[src as usize];
                        }
                        &scratch.permuted
                    }
                };
                joint_ecdf_into(&e.bx, by, gx, gy, &mut scratch.hist, out);
            }
            VectorEvaluator::Qq(m) => {
                m.eval_into(perm, out, scratch.qq.as_mut().expect("qq scratch"));
            }
            VectorEvaluator::Table(e) => {
                scratch.hist.fill(0);
                match perm {
                    None => {
                        for (&cx, &cy) in e.x_codes.iter().zip(&e.y_codes) {
                            scratch.hist[cx as usize * e.k2 + cy as usize] += 1;
                        }
                    }
                    Some(p) => {
                        for (&cx, &pi) in e.x_codes.iter().zip(p) {
                            let cy = e.y_codes[pi as usize];
                            // permutation preserves the marginal, so every
                            // permuted label was already seen
                            debug_assert!((cy as usize) < e.k2);
                            scratch.hist[cx as usize * e.k2 + cy as usize] += 1;
                        }
                    }
                }
                for (o, &h) in out.iter_mut().zip(&scratch.hist) {
                    *o = h as f64;
                }
            }
        }
    }

    fn geometry(&self) -> FieldGeometry {
        match self {
            VectorEvaluator::Cdf(e) => FieldGeometry::Quantile(e.grid.clone()),
            VectorEvaluator::Qq(m) => FieldGeometry::Pixels(m.grid()),
            VectorEvaluator::Table(e) => FieldGeometry::Table {
                row_labels: e.row_labels.clone(),
                col_labels: e.col_labels.clone(),
            },
        }
    }

    fn atom_regions(&self) -> Vec<crate::grid::AtomRegion> {
        match self {
            VectorEvaluator::Qq(m) => m.atom_regions(),
            _ => Vec::new(),
        }
    }
}

fn validate_plan(plan: &PermutationPlan, alpha: Option<f64>) -> Result<()> {
    if plan.permutations < 1 {
        return Err(Error::Config(
            "need at least one permutation replicate".into(),
        ));
    }
    if let Some(alpha) = alpha {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "alpha must be in (0, 1), got {alpha}"
            )));
        }
        if (plan.permutations + 1) as f64 * alpha < 1.0 {
            return Err(Error::Config(format!(
                "(s + 1) * alpha = {:.4} < 1: no achievable significance level; \
                 increase the number of permutations",
                (plan.permutations + 1) as f64 * alpha
            )));
        }
    }
    Ok(())
}

/// Runs the global envelope test of independence.
///
/// Builds the curve set with row 0 the observed statistic and rows `1..=s`
/// the statistic of independently drawn uniform permutations of y, then
/// orders the curves by their ERL measures and constructs the envelope at
/// level `alpha`. Rejection (any coordinate of the observed statistic
/// outside the envelope) is exactly equivalent to `E_0 < e_(alpha)`.
pub fn run_envelope_test(
    sample: &BivariateSample,
    plan: &PermutationPlan,
    alpha: f64,
) -> Result<EnvelopeTest> {
    validate_plan(plan, Some(alpha))?;
    let evaluator = VectorEvaluator::new(sample, &plan.statistic)?;
    let d = evaluator.dim();
    let n = evaluator.n();
    let s = plan.permutations;

    let mut values = vec![0.0f64; (s + 1) * d];
    {
        let (first, rest) = values.split_at_mut(d);
        let mut scratch = evaluator.make_scratch();
        evaluator.eval_into(None, first, &mut scratch);
        rest.par_chunks_mut(d).enumerate().for_each_init(
            || evaluator.make_scratch(),
            |scratch, (j, chunk)| {
                let perm = draw_permutation(plan.master_seed, (j + 1) as u64, n);
                evaluator.eval_into(Some(&perm), chunk, scratch);
            },
        );
    }
    let observed = values[..d].to_vec();
    let curves = CurveSet::from_flat(s + 1, d, values)?;
    let ranks = pointwise_ranks(&curves);
    let erl = erl_measures(&ranks);
    let result = global_envelope(&curves, &erl, alpha)?;
    let field = StatisticField {
        values: observed,
        geometry: evaluator.geometry(),
        atom_regions: evaluator.atom_regions(),
    };
    Ok(EnvelopeTest { result, field })
}

// ---------------------------------------------------------------------------
// scalar statistic evaluators

enum ScalarEvaluator {
    /// Centered coordinates; the permuted correlation is a dot product over
    /// the fixed denominator.
    Correlation {
        cx: Vec<f64>,
        cy: Vec<f64>,
        inv_denom: f64,
    },
    Kendall {
        x: Vec<f64>,
        y: Vec<f64>,
    },
    Dev {
        bx: Vec<u32>,
        by: Vec<u32>,
        fx: Vec<f64>,
        fy: Vec<f64>,
        gx: usize,
        gy: usize,
        integral: bool,
    },
    Chi2 {
        x_codes: Vec<u32>,
        y_codes: Vec<u32>,
        k2: usize,
        row_sums: Vec<u64>,
        col_sums: Vec<u64>,
        n: f64,
    },
}

struct ScalarScratch {
    hist: Vec<u32>,
    joint: Vec<f64>,
    permuted: Vec<f64>,
    permuted_u: Vec<u32>,
}

impl ScalarEvaluator {
    fn new(sample: &BivariateSample, kind: ScalarKind) -> Result<Self> {
        match kind {
            ScalarKind::Pearson => {
                let (x, y) = sample.numeric()?;
                Self::correlation(x, y)
            }
            ScalarKind::Spearman => {
                let (x, y) = sample.numeric()?;
                Self::correlation(&midranks(x), &midranks(y))
            }
            ScalarKind::Kendall => {
                let (x, y) = sample.numeric()?;
                if x.len() < 3 {
                    return Err(Error::InvalidInput("correlation needs n >= 3".into()));
                }
                Ok(ScalarEvaluator::Kendall {
                    x: x.to_vec(),
                    y: y.to_vec(),
                })
            }
            ScalarKind::DevS { levels_x, levels_y } | ScalarKind::DevI { levels_x, levels_y } => {
                let grid = make_quantile_grid(sample, levels_x, levels_y)?;
                let (x, y) = sample.numeric()?;
                let gx = grid.len_x();
                let gy = grid.len_y();
                let bx = bucket_indices(x, &grid.values_x());
                let by = bucket_indices(y, &grid.values_y());
                let fx = marginal_ecdf_from_buckets(&bx, gx);
                let fy = marginal_ecdf_from_buckets(&by, gy);
                Ok(ScalarEvaluator::Dev {
                    bx,
                    by,
                    fx,
                    fy,
                    gx,
                    gy,
                    integral: matches!(kind, ScalarKind::DevI { .. }),
                })
            }
            ScalarKind::Chi2 => {
                let table = ContingencyTable::from_sample(sample)?;
                if table.row_sums().contains(&0) || table.col_sums().contains(&0) {
                    return Err(Error::DegenerateInput("empty table marginal".into()));
                }
                let (x_codes, y_codes, _, _) = sample.categories()?;
                Ok(ScalarEvaluator::Chi2 {
                    x_codes: x_codes.to_vec(),
                    y_codes: y_codes.to_vec(),
                    k2: table.k2,
                    row_sums: table.row_sums(),
                    col_sums: table.col_sums(),
                    n: table.n() as f64,
                })
            }
        }
    }

    fn correlation(x: &[f64], y: &[f64]) -> Result<Self> {
        if x.len() < 3 {
            return Err(Error::InvalidInput("correlation needs n >= 3".into()));
        }
        let n = x.len() as f64;
        let mx = x.iter().sum::<f64>() / n;
        let my = y.iter().sum::<f64>() / n;
        let cx: Vec<f64> = x.iter().map(|v| v - mx).collect();
        let cy: Vec<f64> = y.iter().map(|v| v - my).collect();
        let sxx: f64 = cx.iter().map(|v| v * v).sum();
        let syy: f64 = cy.iter().map(|v| v * v).sum();
        if sxx == 0.0 || syy == 0.0 {
            return Err(Error::DegenerateInput("zero variance marginal".into()));
        }
        Ok(ScalarEvaluator::Correlation {
            cx,
            cy,
            inv_denom: 1.0 / (sxx * syy).sqrt(),
        })
    }

    fn n(&self) -> usize {
        match self {
            ScalarEvaluator::Correlation { cx, .. } => cx.len(),
            ScalarEvaluator::Kendall { x, .. } => x.len(),
            ScalarEvaluator::Dev { bx, .. } => bx.len(),
            ScalarEvaluator::Chi2 { x_codes, .. } => x_codes.len(),
        }
    }

    fn two_sided(&self) -> bool {
        matches!(
            self,
            ScalarEvaluator::Correlation { .. } | ScalarEvaluator::Kendall { .. }
        )
    }

    fn make_scratch(&self) -> ScalarScratch {
        match self {
            ScalarEvaluator::Dev { gx, gy, bx, .. } => ScalarScratch {
                hist: vec![0; (gx + 1) * (gy + 1)],
                joint: vec![0.0; gx * gy],
                permuted: Vec::new(),
                permuted_u: vec![0; bx.len()],
            },
            ScalarEvaluator::Chi2 {
                x_codes,
                row_sums,
                col_sums,
                ..
            } => ScalarScratch {
                hist: vec![0; row_sums.len() * col_sums.len()],
                joint: Vec::new(),
                permuted: Vec::new(),
                permuted_u: vec![0; x_codes.len()],
            },
            ScalarEvaluator::Correlation { cy, .. } => ScalarScratch {
                hist: Vec::new(),
                joint: Vec::new(),
                permuted: vec![0.0; cy.len()],
                permuted_u: Vec::new(),
            },
            ScalarEvaluator::Kendall { y, .. } => ScalarScratch {
                hist: Vec::new(),
                joint: Vec::new(),
                permuted: vec![0.0; y.len()],
                permuted_u: Vec::new(),
            },
        }
    }

    fn eval(&self, perm: Option<&[u32]>, scratch: &mut ScalarScratch) -> f64 {
        match self {
            ScalarEvaluator::Correlation { cx, cy, inv_denom } => {
                let mut acc = 0.0;
                match perm {
                    None => {
                        for (a, b) in cx.iter().zip(cy) {
                            acc += a * b;
                        }
                    }
                    Some(p) => {
                        for (a, &pi) in cx.iter().zip(p) {
                            acc += a * cy[pi as usize];
                        }
                    }
                }
                acc * inv_denom
            }
            ScalarEvaluator::Kendall { x, y } => match perm {
                None => kendall_tau_of(x, y),
                Some(p) => {
                    for (slot, &pi) in scratch.permuted.iter_mut().zip(p) {
                        *slot = y[pi as usize];
                    }
                    kendall_tau_of(x, &scratch.permuted)
                }
            },
            ScalarEvaluator::Dev {
                bx,
                by,
                fx,
                fy,
                gx,
                gy,
                integral,
            } => {
                let by_paired: &[u32] = match perm {
                    None => by,
                    Some(p) => {
                        for (slot, &pi) in scratch.permuted_u.iter_mut().zip(p) {
                            *slot = by[pi as usize];
                        }
                        &scratch.permuted_u
                    }
                };
                joint_ecdf_into(
                    bx,
                    by_paired,
                    *gx,
                    *gy,
                    &mut scratch.hist,
                    &mut scratch.joint,
                );
                let (sup, ssq) = deviation_from_fields(&scratch.joint, fx, fy);
                if *integral {
                    ssq
                } else {
                    sup
                }
            }
            ScalarEvaluator::Chi2 {
                x_codes,
                y_codes,
                k2,
                row_sums,
                col_sums,
                n,
            } => {
                scratch.hist.fill(0);
                match perm {
                    None => {
                        for (&cx, &cy) in x_codes.iter().zip(y_codes) {
                            scratch.hist[cx as usize * k2 + cy as usize] += 1;
                        }
                    }
                    Some(p) => {
                        for (&cx, &pi) in x_codes.iter().zip(p) {
                            scratch.hist[cx as usize * k2 + y_codes[pi as usize] as usize] += 1;
                        }
                    }
                }
                chi2_statistic_from_counts(&scratch.hist, row_sums, col_sums, *n, *k2)
            }
        }
    }
}

/// Runs a univariate Monte Carlo permutation test.
///
/// The p-value counts replicates at least as extreme as the observed value:
/// two-sided (`|T_i| >= |T_0|`) for correlation statistics, one-sided upper
/// for deviation and chi-square statistics.
pub fn run_scalar_permutation_test(
    sample: &BivariateSample,
    plan: &PermutationPlan,
) -> Result<ScalarPermutationTest> {
    validate_plan(plan, None)?;
    let kind = match plan.statistic {
        StatisticId::Scalar(kind) => kind,
        _ => {
            return Err(Error::IncompatibleStatistic(
                "vector statistics run through run_envelope_test".into(),
            ))
        }
    };
    let evaluator = ScalarEvaluator::new(sample, kind)?;
    let n = evaluator.n();
    let s = plan.permutations;
    let observed = {
        let mut scratch = evaluator.make_scratch();
        evaluator.eval(None, &mut scratch)
    };
    let threshold = if evaluator.two_sided() {
        observed.abs()
    } else {
        observed
    };
    let extreme: usize = (1..=s)
        .into_par_iter()
        .map_init(
            || evaluator.make_scratch(),
            |scratch, j| {
                let perm = draw_permutation(plan.master_seed, j as u64, n);
                let t = evaluator.eval(Some(&perm), scratch);
                let v = if evaluator.two_sided() { t.abs() } else { t };
                usize::from(v >= threshold)
            },
        )
        .sum();
    Ok(ScalarPermutationTest {
        kind,
        statistic: observed,
        p: Fraction {
            numerator: (extreme + 1) as u64,
            denominator: (s + 1) as u64,
        },
    })
}
