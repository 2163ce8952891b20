//! Replication harness: repeats a test battery over freshly generated
//! samples and reports per-test rejection rates.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::permute::{
    run_envelope_test, run_scalar_permutation_test, PermutationPlan, ScalarKind, StatisticId,
};
use crate::reference::pearson_asymptotic_test;
use crate::sample::BivariateSample;
use crate::samplers::Generator;

/// Tests the harness can run per replication.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TestId {
    /// Global envelope test with the ECDF statistic.
    Cdf,
    /// Global envelope test with the qq intensity statistic.
    Qq,
    DevS,
    DevI,
    /// Permutation test with the Pearson correlation.
    PeaP,
    /// Permutation test with the Spearman correlation.
    SpeP,
    /// Permutation test with the Kendall correlation.
    KenP,
    /// Asymptotic Pearson t-test.
    Pea,
}

impl TestId {
    pub fn all() -> Vec<TestId> {
        vec![
            TestId::Cdf,
            TestId::Qq,
            TestId::DevS,
            TestId::DevI,
            TestId::PeaP,
            TestId::SpeP,
            TestId::KenP,
            TestId::Pea,
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            TestId::Cdf => "cdf",
            TestId::Qq => "qq",
            TestId::DevS => "devs",
            TestId::DevI => "devi",
            TestId::PeaP => "peap",
            TestId::SpeP => "spep",
            TestId::KenP => "kenp",
            TestId::Pea => "pea",
        }
    }

    pub fn parse(name: &str) -> Result<TestId> {
        match name.to_ascii_lowercase().as_str() {
            "cdf" => Ok(TestId::Cdf),
            "qq" => Ok(TestId::Qq),
            "devs" => Ok(TestId::DevS),
            "devi" => Ok(TestId::DevI),
            "peap" => Ok(TestId::PeaP),
            "spep" => Ok(TestId::SpeP),
            "kenp" => Ok(TestId::KenP),
            "pea" => Ok(TestId::Pea),
            other => Err(Error::Config(format!("unknown test id '{other}'"))),
        }
    }
}

/// Configuration of one simulation experiment.
#[derive(Clone, Debug)]
pub struct ExperimentSpec {
    pub generator: Generator,
    pub n: usize,
    pub reps: usize,
    pub tests: Vec<TestId>,
    pub alpha: f64,
    pub permutations: usize,
    pub master_seed: u64,
}

/// One row of the rejection-rate table.
#[derive(Clone, Debug, PartialEq)]
pub struct RejectionRow {
    pub experiment: String,
    pub params: String,
    pub n: usize,
    pub test: TestId,
    pub reps: usize,
    pub rejections: usize,
    pub rate: f64,
    pub std_error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RejectionTable {
    pub rows: Vec<RejectionRow>,
}

impl RejectionTable {
    pub fn rate(&self, test: TestId) -> Option<f64> {
        self.rows.iter().find(|r| r.test == test).map(|r| r.rate)
    }

    /// CSV with header: experiment, generator-params, n, test, reps,
    /// rejections, rate, stderr.
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("experiment,generator-params,n,test,reps,rejections,rate,stderr\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.experiment,
                r.params,
                r.n,
                r.test.name(),
                r.reps,
                r.rejections,
                r.rate,
                r.std_error
            ));
        }
        out
    }
}

/// Per-replication seeds derived from the master seed by a splitmix64 step,
/// so replications are independent streams and the table is reproducible.
pub(crate) fn mix_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        ^ index
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(0x1234_5678_9ABC_DEF1);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn test_rejects(
    sample: &BivariateSample,
    test: TestId,
    rep_seed: u64,
    permutations: usize,
    alpha: f64,
) -> Result<bool> {
    let plan = |statistic| PermutationPlan {
        permutations,
        master_seed: rep_seed,
        statistic,
    };
    match test {
        TestId::Cdf => Ok(
            run_envelope_test(sample, &plan(StatisticId::cdf_default()), alpha)?
                .result
                .rejected(),
        ),
        TestId::Qq => Ok(
            run_envelope_test(sample, &plan(StatisticId::qq_default()), alpha)?
                .result
                .rejected(),
        ),
        TestId::DevS => {
            let out = run_scalar_permutation_test(
                sample,
                &plan(StatisticId::Scalar(ScalarKind::dev_s_default())),
            )?;
            Ok(out.p.value() <= alpha)
        }
        TestId::DevI => {
            let out = run_scalar_permutation_test(
                sample,
                &plan(StatisticId::Scalar(ScalarKind::dev_i_default())),
            )?;
            Ok(out.p.value() <= alpha)
        }
        TestId::PeaP => {
            let out = run_scalar_permutation_test(
                sample,
                &plan(StatisticId::Scalar(ScalarKind::Pearson)),
            )?;
            Ok(out.p.value() <= alpha)
        }
        TestId::SpeP => {
            let out = run_scalar_permutation_test(
                sample,
                &plan(StatisticId::Scalar(ScalarKind::Spearman)),
            )?;
            Ok(out.p.value() <= alpha)
        }
        TestId::KenP => {
            let out = run_scalar_permutation_test(
                sample,
                &plan(StatisticId::Scalar(ScalarKind::Kendall)),
            )?;
            Ok(out.p.value() <= alpha)
        }
        TestId::Pea => Ok(pearson_asymptotic_test(sample)?.p_value <= alpha),
    }
}

/// Runs the experiment: per replication, draw a fresh sample and record the
/// accept/reject decision of every requested test at level `alpha`.
///
/// All tests within a replication share the same permutation streams (they
/// run from the same per-replication seed), and replications parallelize
/// over a worker pool; the counts are identical for any thread count.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<RejectionTable> {
    if spec.reps < 1 {
        return Err(Error::Config("need at least one replication".into()));
    }
    if spec.tests.is_empty() {
        return Err(Error::Config("no tests requested".into()));
    }
    if spec.n < 3 {
        return Err(Error::Config("sample size must be at least 3".into()));
    }
    if !(spec.alpha > 0.0 && spec.alpha < 1.0) {
        return Err(Error::Config(format!(
            "alpha must be in (0, 1), got {}",
            spec.alpha
        )));
    }
    if (spec.permutations + 1) as f64 * spec.alpha < 1.0 {
        return Err(Error::Config(format!(
            "(s + 1) * alpha = {:.4} < 1: the permutation tests cannot reject",
            (spec.permutations + 1) as f64 * spec.alpha
        )));
    }
    spec.generator.validate()?;

    let per_rep: Result<Vec<Vec<bool>>> = (0..spec.reps)
        .into_par_iter()
        .map(|rep| {
            let rep_seed = mix_seed(spec.master_seed, rep as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(rep_seed);
            let sample = spec.generator.sample(spec.n, &mut rng);
            spec.tests
                .iter()
                .map(|&t| test_rejects(&sample, t, rep_seed, spec.permutations, spec.alpha))
                .collect()
        })
        .collect();
    let per_rep = per_rep?;

    let rows = spec
        .tests
        .iter()
        .enumerate()
        .map(|(ti, &test)| {
            let rejections = per_rep.iter().filter(|flags| flags[ti]).count();
            let rate = rejections as f64 / spec.reps as f64;
            RejectionRow {
                experiment: spec.generator.name().to_string(),
                params: spec.generator.params_string(),
                n: spec.n,
                test,
                reps: spec.reps,
                rejections,
                rate,
                std_error: (rate * (1.0 - rate) / spec.reps as f64).sqrt(),
            }
        })
        .collect();
    Ok(RejectionTable { rows })
}
