//! A small rejection-rate study: how often each test detects a cross-shaped
//! mixture alternative at level 0.01.
//!
//! Desk-scale settings (50 replications, 999 permutations); the harness
//! parallelizes replications and the table is reproducible from the seed.
//!
//! Run with: cargo run --release --example power_study

use envtest::{run_experiment, ExperimentSpec, Generator, TestId};

fn main() -> envtest::Result<()> {
    let spec = ExperimentSpec {
        generator: Generator::CrossMixture { rho: 0.9 },
        n: 100,
        reps: 50,
        tests: vec![
            TestId::Qq,
            TestId::Cdf,
            TestId::DevI,
            TestId::PeaP,
            TestId::Pea,
        ],
        alpha: 0.01,
        permutations: 999,
        master_seed: 404,
    };
    let table = run_experiment(&spec)?;
    print!("{}", table.to_csv());
    eprintln!("(the qq and cdf tests should dominate the correlation tests here)");
    Ok(())
}
