//! Global envelope test with the CDF statistic on correlated normal data.
//!
//! The joint ECDF is evaluated on a 20x20 quantile grid; the envelope marks
//! the quantile combinations where the observed CDF departs from what
//! independent marginals would produce.
//!
//! Run with: cargo run --example cdf_envelope

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use envtest::{run_envelope_test, sample_binormal, PermutationPlan, StatisticId};

fn main() -> envtest::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let sample = sample_binormal(200, 0.4, &mut rng);

    let plan = PermutationPlan {
        permutations: 999,
        master_seed: 7,
        statistic: StatisticId::cdf_default(),
    };
    let test = run_envelope_test(&sample, &plan, 0.05)?;

    println!(
        "p = {}/{} = {:.4}",
        test.result.p_erl.numerator,
        test.result.p_erl.denominator,
        test.result.p_erl.value()
    );
    println!("rejected: {}", test.result.rejected());

    let flagged: Vec<usize> = (0..test.result.observed.len())
        .filter(|&k| test.result.above[k] || test.result.below[k])
        .collect();
    println!(
        "{} of {} grid cells flagged",
        flagged.len(),
        test.result.observed.len()
    );
    if let envtest::FieldGeometry::Quantile(grid) = &test.field.geometry {
        if let Some(&k) = flagged.first() {
            let (u, v) = grid.point(k);
            println!(
                "first flagged cell: F({u:.3}, {v:.3}) = {:.3}, envelope [{:.3}, {:.3}]",
                test.result.observed[k], test.result.lower[k], test.result.upper[k]
            );
        }
    }
    Ok(())
}
