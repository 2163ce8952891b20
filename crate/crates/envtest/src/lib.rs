//! Model-free, permutation-based tests of independence between two random
//! variables, with graphical output.
//!
//! The test statistic is a whole vector (a CDF evaluated on a quantile grid,
//! a kernel intensity field of the 2D qq-plot, or the cells of a contingency
//! table); replicates under the null hypothesis come from permuting one
//! coordinate of the sample. The global rank envelope built from the extreme
//! rank length ordering turns the vector comparison into a pointwise band:
//! the test rejects exactly when the observed statistic leaves the band, and
//! the offending grid cells show *where* the dependence lives. Continuous,
//! discrete and mixed marginals (atoms, e.g. zero precipitation) are all
//! supported.
//!
//! Quick start:
//!
//! ```
//! use envtest::{BivariateSample, PermutationPlan, StatisticId, run_envelope_test};
//!
//! let x: Vec<f64> = (0..60).map(|i| (i as f64 * 0.7).sin()).collect();
//! let y: Vec<f64> = x.iter().map(|v| v * 2.0 + 1.0).collect(); // comonotone
//! let sample = BivariateSample::continuous(x, y).unwrap();
//! let plan = PermutationPlan {
//!     permutations: 199,
//!     master_seed: 7,
//!     statistic: StatisticId::qq_default(),
//! };
//! let test = run_envelope_test(&sample, &plan, 0.05).unwrap();
//! assert!(test.result.rejected());
//! ```
//!
//! The `examples/` directory walks through each capability: CDF and qq
//! envelope tests, atom handling, categorical tables, scalar reference
//! tests, the simulation harness, and SVG heatmap reports.

mod contingency;
mod csvio;
mod curves;
mod ecdf;
mod envelope;
mod error;
mod grid;
mod harness;
mod heatmap;
mod intensity;
mod permute;
mod reference;
mod report;
mod sample;
mod samplers;
mod special;

pub use contingency::{contingency_statistic, ContingencyTable};
pub use csvio::{read_label_pairs, read_numeric_pairs};
pub use curves::CurveSet;
pub use ecdf::ecdf_statistic;
pub use envelope::{
    erl_measures, erl_p_value, global_envelope, pointwise_ranks, ErlMeasures, Fraction,
    GlobalEnvelopeResult, RankMatrix,
};
pub use error::{Error, Result};
pub use grid::{
    make_quantile_grid, AtomRegion, FieldGeometry, GridCoordinate, PixelGrid, QuantileGrid,
    StatisticField,
};
pub use harness::{run_experiment, ExperimentSpec, RejectionRow, RejectionTable, TestId};
pub use heatmap::render_svg;
pub use intensity::{
    edge_correction, intensity_bandwidth, intensity_bandwidth_1d, kernel_intensity,
    qq_intensity_statistic, qq_transform,
};
pub use permute::{
    draw_permutation, run_envelope_test, run_scalar_permutation_test, EnvelopeTest,
    PermutationPlan, ScalarKind, ScalarPermutationTest, StatisticId,
};
pub use reference::{
    chi2_test, deviation_statistics, kendall_tau, pearson_asymptotic_test, pearson_r, spearman_rho,
    Chi2Outcome, Method, ScalarTestResult,
};
pub use report::{write_atomic, ReportGeometry, ReportMethod, TestReport};
pub use sample::{detect_atoms, BivariateSample, MarginalKind};
pub use samplers::{
    sample_binormal, sample_center_mixture, sample_cross_mixture, sample_distorted_uniform,
    sample_pareto_iid, Generator,
};
