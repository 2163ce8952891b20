//! Machine-readable output: a JSON report and an SVG heatmap of one test.
//!
//! Run with: cargo run --example heatmap_report
//! Files land in the current directory.

use std::path::Path;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use envtest::{
    render_svg, run_envelope_test, sample_center_mixture, write_atomic, PermutationPlan,
    ReportMethod, StatisticId, TestReport,
};

fn main() -> envtest::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(60);
    let sample = sample_center_mixture(200, 0.9, 4.0, &mut rng);

    let plan = PermutationPlan {
        permutations: 1999,
        master_seed: 12,
        statistic: StatisticId::qq_default(),
    };
    let started = Instant::now();
    let test = run_envelope_test(&sample, &plan, 0.05)?;
    let report = TestReport::from_envelope_test(
        &test,
        &sample,
        ReportMethod::Qq,
        plan.permutations,
        plan.master_seed,
        started.elapsed().as_secs_f64(),
    );

    let json_path = Path::new("center_mixture_report.json");
    report.save(json_path)?;
    let svg_path = Path::new("center_mixture_heatmap.svg");
    write_atomic(svg_path, render_svg(&report).as_bytes())?;

    println!("p = {:.4}, rejected = {}", report.p_value, report.rejected);
    println!("wrote {} and {}", json_path.display(), svg_path.display());

    // reports round-trip losslessly
    let back = TestReport::load(json_path)?;
    assert_eq!(back, report);
    Ok(())
}
