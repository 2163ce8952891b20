//! Mixed marginals: a continuous variable against a variable with a point
//! mass at zero (think daily temperature vs. daily precipitation, where most
//! days are dry).
//!
//! The atom is declared explicitly. The quantile grid counts the atom value
//! once, and in the qq intensity field the pixel rows covered by the atom
//! are replaced by a one-dimensional estimate over the co-variable.
//!
//! Run with: cargo run --example atom_handling

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use envtest::{
    detect_atoms, run_envelope_test, AtomRegion, BivariateSample, PermutationPlan, StatisticId,
};

fn main() -> envtest::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let n = 360;
    let mut temperature = Vec::with_capacity(n);
    let mut precipitation = Vec::with_capacity(n);
    for _ in 0..n {
        let t: f64 = rng.gen_range(-10.0..25.0);
        // colder days are rainy less often, and dry days dominate overall
        let dry = rng.gen::<f64>() < 0.5 + 0.01 * t.clamp(-10.0, 10.0);
        let r = if dry {
            0.0
        } else {
            rng.gen::<f64>() * (6.0 + 0.2 * t.max(0.0))
        };
        temperature.push(t);
        precipitation.push(r);
    }

    // opt-in detector agrees with the declared atom
    println!(
        "detected atoms in y: {:?}",
        detect_atoms(&precipitation, 0.05)
    );
    let sample =
        BivariateSample::continuous_with_atoms(temperature, precipitation, vec![], vec![0.0])?;

    let plan = PermutationPlan {
        permutations: 999,
        master_seed: 5,
        statistic: StatisticId::qq_default(),
    };
    let test = run_envelope_test(&sample, &plan, 0.05)?;
    println!(
        "qq envelope test with atom handling: p = {:.4}, rejected = {}",
        test.result.p_erl.value(),
        test.result.rejected()
    );
    for region in &test.field.atom_regions {
        if let AtomRegion::RowBand { start, count, atom } = region {
            println!(
                "pixel rows {start}..{} replaced by the 1D estimate for the atom at {atom}",
                start + count
            );
        }
    }

    // the field still integrates to the number of observations
    let mass: f64 = test.field.values.iter().sum::<f64>() / test.field.values.len() as f64;
    println!("field mass / n = {:.12}", mass / n as f64);
    Ok(())
}
