//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with the measured numbers.
//!
//! The statistical criteria run at desk scale with frozen seeds, so the
//! whole suite is deterministic. The heavy rejection-rate tables are shared
//! between the calibration tests and the thread-count determinism test
//! through lazies. Expect several minutes of runtime; `--nocapture` shows
//! the per-criterion lines.

use std::sync::LazyLock;
use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use envtest::{
    chi2_test, erl_measures, erl_p_value, global_envelope, intensity_bandwidth, kernel_intensity,
    pointwise_ranks, qq_intensity_statistic, run_envelope_test, run_experiment, BivariateSample,
    ContingencyTable, CurveSet, ExperimentSpec, Generator, GlobalEnvelopeResult, PermutationPlan,
    PixelGrid, StatisticId, TestId,
};

// ---------------------------------------------------------------------------
// shared fixtures

/// Road accidents recorded by the Czech police in 2018, cross-tabulated by
/// road type (rows: highway 0, first/second/third class 1-3, local road 6)
/// and weather conditions (columns: codes 0-7). n = 86079.
const ACCIDENT_COUNTS: [[u64; 8]; 5] = [
    [18, 3273, 37, 192, 342, 142, 45, 4],
    [51, 12485, 175, 691, 699, 313, 163, 41],
    [33, 13345, 193, 667, 590, 467, 236, 40],
    [32, 11554, 139, 489, 397, 355, 262, 15],
    [55, 35675, 97, 929, 966, 592, 267, 13],
];
const ROAD_LABELS: [&str; 5] = ["0", "1", "2", "3", "6"];
const WEATHER_LABELS: [&str; 8] = ["0", "1", "2", "3", "4", "5", "6", "7"];

/// Reference residuals for the accident table, as produced by R's
/// chisq.test (rounded to two decimals).
const ACCIDENT_RESIDUALS: [[f64; 8]; 5] = [
    [3.05, -5.36, 1.24, 4.42, 16.93, 5.76, -0.12, -0.57],
    [3.34, -4.20, 6.34, 8.33, 8.45, -0.25, -0.17, 4.98],
    [-0.20, -3.94, 7.16, 5.62, 2.08, 7.01, 4.52, 4.33],
    [0.54, -1.75, 4.07, 1.52, -2.96, 3.98, 9.18, -0.57],
    [-3.23, 7.84, -11.23, -11.01, -10.27, -8.50, -8.10, -5.29],
];

fn accident_table() -> ContingencyTable {
    ContingencyTable::from_counts(
        ACCIDENT_COUNTS.iter().flatten().copied().collect(),
        ROAD_LABELS.iter().map(|s| s.to_string()).collect(),
        WEATHER_LABELS.iter().map(|s| s.to_string()).collect(),
    )
    .unwrap()
}

fn pool(threads: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
}

const SIZE_TESTS: [TestId; 5] = [
    TestId::Cdf,
    TestId::Qq,
    TestId::DevS,
    TestId::DevI,
    TestId::PeaP,
];

fn size_spec(generator: Generator, master_seed: u64) -> ExperimentSpec {
    ExperimentSpec {
        generator,
        n: 100,
        reps: 1000,
        tests: SIZE_TESTS.to_vec(),
        alpha: 0.01,
        permutations: 999,
        master_seed,
    }
}

fn power_spec(
    generator: Generator,
    n: usize,
    tests: Vec<TestId>,
    master_seed: u64,
) -> ExperimentSpec {
    ExperimentSpec {
        generator,
        n,
        reps: 200,
        tests,
        alpha: 0.01,
        permutations: 999,
        master_seed,
    }
}

struct HeavyResults {
    size_normal: envtest::RejectionTable,
    size_pareto: envtest::RejectionTable,
    power_cross: envtest::RejectionTable,
    power_center: envtest::RejectionTable,
    power_distorted: envtest::RejectionTable,
    accident_runs: Vec<GlobalEnvelopeResult>,
}

fn compute_heavy(threads: usize) -> HeavyResults {
    let pool = pool(threads);
    pool.install(|| HeavyResults {
        size_normal: run_experiment(&size_spec(Generator::NormalIid, 1101)).unwrap(),
        size_pareto: run_experiment(&size_spec(Generator::ParetoIid { shape: 4.0 }, 1102)).unwrap(),
        power_cross: run_experiment(&power_spec(
            Generator::CrossMixture { rho: 0.9 },
            100,
            vec![TestId::Qq, TestId::PeaP],
            2201,
        ))
        .unwrap(),
        power_center: run_experiment(&power_spec(
            Generator::CenterMixture {
                rho: 0.9,
                outer_sd: 4.0,
            },
            100,
            vec![TestId::Qq, TestId::Pea],
            2202,
        ))
        .unwrap(),
        power_distorted: run_experiment(&power_spec(
            Generator::DistortedUniform,
            500,
            vec![TestId::Qq, TestId::Pea],
            2203,
        ))
        .unwrap(),
        accident_runs: {
            let sample = accident_table().expand().unwrap();
            (0..20)
                .map(|run| {
                    let plan = PermutationPlan {
                        permutations: 9999,
                        master_seed: 3300 + run,
                        statistic: StatisticId::Table,
                    };
                    run_envelope_test(&sample, &plan, 0.05).unwrap().result
                })
                .collect()
        },
    })
}

static HEAVY_8: LazyLock<HeavyResults> = LazyLock::new(|| compute_heavy(8));

// ---------------------------------------------------------------------------
// criterion 1: brute-force oracle equivalence of the ERL machinery

/// Definitional oracle: tie-averaged ranks by pairwise counting, two-sided
/// ranks, sorted-vector lexicographic comparison, and the envelope built
/// directly from the definitions.
mod oracle {
    pub struct Envelope {
        pub counts: Vec<u32>,
        pub p_num: u64,
        pub critical_count: u32,
        pub index_set: Vec<usize>,
        pub lower: Vec<f64>,
        pub upper: Vec<f64>,
    }

    pub fn erl_counts(values: &[Vec<f64>]) -> Vec<u32> {
        let rows = values.len();
        let cols = values[0].len();
        let s1 = rows as f64;
        let mut sorted_ranks: Vec<Vec<f64>> = Vec::with_capacity(rows);
        for i in 0..rows {
            let mut ranks = Vec::with_capacity(cols);
            for k in 0..cols {
                let v = values[i][k];
                let less = (0..rows).filter(|&j| values[j][k] < v).count() as f64;
                let equal = (0..rows).filter(|&j| values[j][k] == v).count() as f64;
                let raw = less + (equal + 1.0) / 2.0;
                ranks.push(raw.min(s1 - raw));
            }
            ranks.sort_by(|a, b| a.partial_cmp(b).unwrap());
            sorted_ranks.push(ranks);
        }
        let precedes = |a: &[f64], b: &[f64]| {
            a.iter()
                .zip(b)
                .find(|(x, y)| x != y)
                .is_some_and(|(x, y)| x < y)
        };
        (0..rows)
            .map(|i| {
                (0..rows)
                    .filter(|&j| precedes(&sorted_ranks[j], &sorted_ranks[i]))
                    .count() as u32
            })
            .collect()
    }

    pub fn envelope(values: &[Vec<f64>], alpha: f64) -> Envelope {
        let rows = values.len();
        let cols = values[0].len();
        let counts = erl_counts(values);
        let s = rows - 1;
        let p_num = counts.iter().filter(|&&c| c <= counts[0]).count() as u64;
        let critical_count = counts
            .iter()
            .copied()
            .filter(|&cand| {
                (counts.iter().filter(|&&c| c < cand).count() as f64) <= alpha * s as f64
            })
            .max()
            .unwrap();
        let index_set: Vec<usize> = (0..rows).filter(|&i| counts[i] >= critical_count).collect();
        let mut lower = vec![f64::INFINITY; cols];
        let mut upper = vec![f64::NEG_INFINITY; cols];
        for &i in &index_set {
            for k in 0..cols {
                lower[k] = lower[k].min(values[i][k]);
                upper[k] = upper[k].max(values[i][k]);
            }
        }
        Envelope {
            counts,
            p_num,
            critical_count,
            index_set,
            lower,
            upper,
        }
    }
}

#[test]
fn criterion_01_erl_oracle_equivalence() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(777);
    for case in 0..200 {
        let rows = rng.gen_range(2..=8);
        let cols = rng.gen_range(1..=6);
        // half the cases from a tiny integer support to exercise ties
        let values: Vec<Vec<f64>> = (0..rows)
            .map(|_| {
                (0..cols)
                    .map(|_| {
                        if case % 2 == 0 {
                            rng.gen_range(0..4) as f64
                        } else {
                            rng.gen::<f64>()
                        }
                    })
                    .collect()
            })
            .collect();
        let alpha = rng.gen_range(0.05..0.8);

        let curves = CurveSet::from_rows(values.clone()).unwrap();
        let erl = erl_measures(&pointwise_ranks(&curves));
        let p = erl_p_value(&erl);
        let env = global_envelope(&curves, &erl, alpha).unwrap();

        let oracle = oracle::envelope(&values, alpha);
        let counts: Vec<u32> = (0..rows).map(|i| erl.count(i)).collect();
        assert_eq!(counts, oracle.counts, "case {case}: ERL counts differ");
        assert_eq!(
            p.numerator, oracle.p_num,
            "case {case}: p numerator differs"
        );
        assert_eq!(p.denominator, rows as u64);
        assert_eq!(env.critical_count, oracle.critical_count, "case {case}");
        assert_eq!(env.index_set_size, oracle.index_set.len(), "case {case}");
        assert_eq!(
            env.lower, oracle.lower,
            "case {case}: lower envelope differs"
        );
        assert_eq!(
            env.upper, oracle.upper,
            "case {case}: upper envelope differs"
        );
    }
    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs_f64() < 1.0,
        "oracle comparison took {elapsed:?}"
    );
    println!("[acceptance] criterion 1 (ERL oracle equivalence, 200 cases): PASS in {elapsed:?}");
}

// ---------------------------------------------------------------------------
// criterion 2: intrinsic graphical interpretation

#[test]
fn criterion_02_igi_zero_violations() {
    let mut rng = ChaCha8Rng::seed_from_u64(888);
    let mut checked = 0usize;
    for _ in 0..500 {
        let rows = 100; // s = 99
        let d = 20;
        let values: Vec<f64> = (0..rows * d).map(|_| rng.gen::<f64>()).collect();
        let curves = CurveSet::from_flat(rows, d, values).unwrap();
        let erl = erl_measures(&pointwise_ranks(&curves));
        for &alpha in &[0.05, 0.10] {
            let env = global_envelope(&curves, &erl, alpha).unwrap();
            for i in 0..rows {
                let exits = curves
                    .row(i)
                    .iter()
                    .zip(env.lower.iter().zip(&env.upper))
                    .any(|(v, (lo, hi))| v < lo || v > hi);
                assert_eq!(
                    exits,
                    erl.count(i) < env.critical_count,
                    "IGI violation at curve {i}, alpha {alpha}"
                );
                checked += 1;
            }
        }
    }
    println!("[acceptance] criterion 2 (IGI, {checked} curve checks): PASS, zero violations");
}

// ---------------------------------------------------------------------------
// criterion 3: size calibration under the null

#[test]
fn criterion_03_size_calibration() {
    let started = Instant::now();
    let heavy = &*HEAVY_8;
    for (name, table) in [
        ("normal", &heavy.size_normal),
        ("pareto", &heavy.size_pareto),
    ] {
        for &test in &SIZE_TESTS {
            let rate = table.rate(test).unwrap();
            assert!(
                (0.002..=0.02).contains(&rate),
                "null-{name} {test:?} rejection rate {rate} outside [0.002, 0.02]"
            );
        }
    }
    let rates: Vec<String> = SIZE_TESTS
        .iter()
        .map(|&t| {
            format!(
                "{}={:.3}/{:.3}",
                t.name(),
                heavy.size_normal.rate(t).unwrap(),
                heavy.size_pareto.rate(t).unwrap()
            )
        })
        .collect();
    println!(
        "[acceptance] criterion 3 (size, normal/pareto at alpha=0.01): PASS, {} in {:?}",
        rates.join(" "),
        started.elapsed()
    );
}

// ---------------------------------------------------------------------------
// criteria 4-6: power against the three alternatives

#[test]
fn criterion_04_power_cross_mixture() {
    let table = &HEAVY_8.power_cross;
    let qq = table.rate(TestId::Qq).unwrap();
    let peap = table.rate(TestId::PeaP).unwrap();
    assert!(qq >= 0.95, "qq power {qq} below 0.95");
    assert!(peap <= 0.25, "permutation Pearson power {peap} above 0.25");
    println!(
        "[acceptance] criterion 4 (cross mixture rho=0.9, n=100): PASS, qq={qq:.3} peap={peap:.3}"
    );
}

#[test]
fn criterion_05_power_center_mixture() {
    let table = &HEAVY_8.power_center;
    let qq = table.rate(TestId::Qq).unwrap();
    let pea = table.rate(TestId::Pea).unwrap();
    assert!(qq >= 0.97, "qq power {qq} below 0.97");
    assert!(pea <= 0.2, "asymptotic Pearson power {pea} above 0.2");
    println!(
        "[acceptance] criterion 5 (center mixture rho=0.9, n=100): PASS, qq={qq:.3} pea={pea:.3}"
    );
}

#[test]
fn criterion_06_power_distorted_uniform() {
    let table = &HEAVY_8.power_distorted;
    let qq = table.rate(TestId::Qq).unwrap();
    let pea = table.rate(TestId::Pea).unwrap();
    assert!(
        (0.40..=0.70).contains(&qq),
        "qq power {qq} outside [0.40, 0.70]"
    );
    assert!(pea <= 0.03, "asymptotic Pearson power {pea} above 0.03");
    println!("[acceptance] criterion 6 (distorted uniform, n=500): PASS, qq={qq:.3} pea={pea:.3}");
}

// ---------------------------------------------------------------------------
// criterion 7: chi-square reference on the accident table

#[test]
fn criterion_07_chi2_accident_reference() {
    let table = accident_table();
    assert_eq!(table.n(), 86_079);
    let out = chi2_test(&table).unwrap();
    assert_eq!(out.result.df, Some(28));
    assert!(out.result.p_value < 1e-15, "p = {}", out.result.p_value);
    for r in 0..5 {
        for c in 0..8 {
            let got = out.residuals[r * 8 + c];
            let expect = ACCIDENT_RESIDUALS[r][c];
            assert!(
                (got - expect).abs() <= 0.01 + 1e-9,
                "residual ({r}, {c}): {got} vs {expect}"
            );
        }
    }
    println!(
        "[acceptance] criterion 7 (chi-square reference): PASS, statistic={:.2} df=28 p={:.3e}",
        out.result.statistic, out.result.p_value
    );
}

// ---------------------------------------------------------------------------
// criterion 8: contingency envelope on the expanded accident data

#[test]
fn criterion_08_contingency_envelope() {
    let heavy = &*HEAVY_8;
    // flat cell indices in the 5 x 8 table
    let above_cell = 4; // road "0" x weather "4"
    let below_cell = 4 * 8 + 2; // road "6" x weather "2"
    let mut successes = 0;
    for result in &heavy.accident_runs {
        let ok =
            result.p_erl.value() <= 0.001 && result.above[above_cell] && result.below[below_cell];
        if ok {
            successes += 1;
        }
    }
    assert!(
        successes >= 19,
        "only {successes}/20 seeded runs satisfied p <= 0.001 with both cells flagged"
    );
    println!(
        "[acceptance] criterion 8 (contingency envelope, s=9999): PASS, {successes}/20 runs, p={:.1e}",
        heavy.accident_runs[0].p_erl.value()
    );
}

// ---------------------------------------------------------------------------
// criterion 9: kernel field mass conservation and quadrature spot checks

mod quadrature {
    /// Independent error function: Maclaurin series for small arguments,
    /// Lentz continued fraction for the complement above.
    pub fn erf(z: f64) -> f64 {
        if z < 0.0 {
            return -erf(-z);
        }
        if z < 2.0 {
            let mut term = z;
            let mut sum = z;
            let mut n = 0usize;
            loop {
                n += 1;
                term *= -z * z / n as f64;
                let add = term / (2 * n + 1) as f64;
                sum += add;
                if add.abs() < 1e-17 {
                    break;
                }
            }
            sum * 2.0 / std::f64::consts::PI.sqrt()
        } else {
            1.0 - erfc_cf(z)
        }
    }

    fn erfc_cf(z: f64) -> f64 {
        // erfc(z) = exp(-z^2)/sqrt(pi) * 1/(z + (1/2)/(z + 1/(z + (3/2)/...)))
        let tiny = 1e-300;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / z;
        let mut h = d;
        for i in 1..200 {
            let a = i as f64 / 2.0;
            d = 1.0 / (z + a * d);
            c = z + a / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        (-z * z).exp() / std::f64::consts::PI.sqrt() * h
    }

    /// Gauss-Legendre nodes and weights on [0, 1].
    pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let mut p0 = 1.0f64;
                let mut p1 = 0.0f64;
                for j in 0..n {
                    let p2 = p1;
                    p1 = p0;
                    p0 = ((2 * j + 1) as f64 * x * p1 - j as f64 * p2) / (j + 1) as f64;
                }
                dp = n as f64 * (x * p0 - p1) / (x * x - 1.0);
                let dx = p0 / dp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = (1.0 - x) / 2.0;
            nodes[n - 1 - i] = (1.0 + x) / 2.0;
            weights[i] = w / 2.0;
            weights[n - 1 - i] = w / 2.0;
        }
        (nodes, weights)
    }

    pub fn gauss_density(u: f64, sigma: f64) -> f64 {
        (-0.5 * (u / sigma).powi(2)).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
    }

    /// 1D kernel mass inside [0, 1] via the independent erf.
    pub fn edge_1d(x: f64, sigma: f64) -> f64 {
        let phi = |z: f64| 0.5 * (1.0 + erf(z / 2.0f64.sqrt()));
        phi((1.0 - x) / sigma) - phi((0.0 - x) / sigma)
    }
}

#[test]
fn criterion_09_kernel_field_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(999);
    let grid = PixelGrid::new(32, 32).unwrap();

    // mass conservation over 100 random samples, atoms included
    for case in 0..100 {
        let n = rng.gen_range(20..200);
        let atom_x = case % 4 == 1 || case % 4 == 3;
        let atom_y = case % 4 == 2 || case % 4 == 3;
        let mut x: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let mut y: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        if atom_x {
            let m = rng.gen_range(n / 5..n / 2);
            for slot in x.iter_mut().take(m) {
                *slot = -1.0;
            }
        }
        if atom_y {
            let m = rng.gen_range(n / 5..n / 2);
            for slot in y.iter_mut().take(m) {
                *slot = -1.0;
            }
        }
        let sample = BivariateSample::continuous_with_atoms(
            x,
            y,
            if atom_x { vec![-1.0] } else { vec![] },
            if atom_y { vec![-1.0] } else { vec![] },
        )
        .unwrap();
        let field = qq_intensity_statistic(&sample, grid, intensity_bandwidth(n)).unwrap();
        let mass: f64 = field.values.iter().sum::<f64>() * grid.pixel_area();
        assert!(
            (mass - n as f64).abs() <= 1e-6 * n as f64,
            "case {case}: field mass {mass} vs n = {n}"
        );
    }

    // spot values against the quadrature oracle
    let n = 50;
    let points: Vec<(f64, f64)> = (0..n)
        .map(|_| (rng.gen::<f64>(), rng.gen::<f64>()))
        .collect();
    let sigma = intensity_bandwidth(n);
    let field = kernel_intensity(&points, grid, sigma).unwrap();

    // cross-check the oracle edge correction against 128-point quadrature
    let (nodes, weights) = quadrature::gauss_legendre_unit(128);
    let mut max_rel = 0.0f64;
    for _ in 0..5 {
        let row = rng.gen_range(0..32);
        let col = rng.gen_range(0..32);
        let px = (col as f64 + 0.5) / 32.0;
        let py = (row as f64 + 0.5) / 32.0;

        let ex = quadrature::edge_1d(px, sigma);
        let ey = quadrature::edge_1d(py, sigma);
        let ex_gl: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(&t, &w)| w * quadrature::gauss_density(px - t, sigma))
            .sum();
        let ey_gl: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(&t, &w)| w * quadrature::gauss_density(py - t, sigma))
            .sum();
        assert!((ex - ex_gl).abs() < 1e-10 && (ey - ey_gl).abs() < 1e-10);

        let direct: f64 = points
            .iter()
            .map(|&(qx, qy)| {
                let d2 = (px - qx) * (px - qx) + (py - qy) * (py - qy);
                (-0.5 * d2 / (sigma * sigma)).exp() / (2.0 * std::f64::consts::PI * sigma * sigma)
            })
            .sum();
        let oracle_value = direct / (ex * ey);
        let got = field.values[row * 32 + col];
        let rel = ((got - oracle_value) / oracle_value).abs();
        max_rel = max_rel.max(rel);
        assert!(
            rel < 1e-8,
            "pixel ({row},{col}): {got} vs oracle {oracle_value} (rel {rel:e})"
        );
    }
    println!(
        "[acceptance] criterion 9 (kernel mass + quadrature spots): PASS, max spot rel err {max_rel:.2e}"
    );
}

// ---------------------------------------------------------------------------
// criterion 10: bit-identical summaries across thread counts

#[test]
fn criterion_10_thread_count_determinism() {
    let eight = &*HEAVY_8;
    let one = compute_heavy(1);
    assert_eq!(
        eight.size_normal, one.size_normal,
        "size table (normal) differs across threads"
    );
    assert_eq!(
        eight.size_pareto, one.size_pareto,
        "size table (pareto) differs across threads"
    );
    assert_eq!(
        eight.power_cross, one.power_cross,
        "cross mixture table differs across threads"
    );
    assert_eq!(
        eight.power_center, one.power_center,
        "center mixture table differs across threads"
    );
    assert_eq!(
        eight.power_distorted, one.power_distorted,
        "distorted uniform table differs across threads"
    );
    assert_eq!(
        eight.accident_runs, one.accident_runs,
        "contingency envelope outcomes differ across threads"
    );
    // chi-square path is deterministic too
    let a = pool(8).install(|| chi2_test(&accident_table()).unwrap());
    let b = pool(1).install(|| chi2_test(&accident_table()).unwrap());
    assert_eq!(a, b);
    println!("[acceptance] criterion 10 (thread-count determinism, 1 vs 8): PASS");
}
