//! Categorical data: the envelope test on contingency-table cells, next to
//! the classical chi-square test with residuals.
//!
//! The envelope marks the significant cells directly; chi-square residuals
//! suggest the same structure but carry no per-cell significance statement.
//!
//! Run with: cargo run --example contingency_table

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use envtest::{
    chi2_test, run_envelope_test, BivariateSample, ContingencyTable, PermutationPlan, StatisticId,
};

fn main() -> envtest::Result<()> {
    // synthetic survey: region x preferred channel, with one region
    // over-using channel "web"
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let regions = ["north", "south", "east", "west"];
    let channels = ["phone", "web", "mail"];
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for _ in 0..2000 {
        let r = regions[rng.gen_range(0..regions.len())];
        let c = if r == "east" && rng.gen::<f64>() < 0.35 {
            "web"
        } else {
            channels[rng.gen_range(0..channels.len())]
        };
        xs.push(r.to_string());
        ys.push(c.to_string());
    }
    let sample = BivariateSample::categorical(xs, ys)?;

    let table = ContingencyTable::from_sample(&sample)?;
    let chi = chi2_test(&table)?;
    println!(
        "chi-square = {:.2}, df = {}, p = {:.3e}",
        chi.result.statistic,
        chi.result.df.unwrap(),
        chi.result.p_value
    );

    let plan = PermutationPlan {
        permutations: 9999,
        master_seed: 1,
        statistic: StatisticId::Table,
    };
    let test = run_envelope_test(&sample, &plan, 0.05)?;
    println!(
        "envelope test: p = {:.4}, rejected = {}",
        test.result.p_erl.value(),
        test.result.rejected()
    );

    println!("cell counts with envelope verdicts and chi-square residuals:");
    for (r, row_label) in table.row_labels.iter().enumerate() {
        for (c, col_label) in table.col_labels.iter().enumerate() {
            let k = r * table.k2 + c;
            let verdict = if test.result.above[k] {
                "ABOVE"
            } else if test.result.below[k] {
                "BELOW"
            } else {
                "inside"
            };
            println!(
                "  {row_label:>5} x {col_label:<5} count {:>4} in [{:>5.0}, {:>5.0}] {verdict:<6} residual {:+.2}",
                table.counts[k], test.result.lower[k], test.result.upper[k], chi.residuals[k]
            );
        }
    }
    Ok(())
}
