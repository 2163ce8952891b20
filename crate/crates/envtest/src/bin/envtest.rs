//! Thin command-line front end for the envtest library.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use envtest::{
    render_svg, run_envelope_test, run_experiment, write_atomic, BivariateSample, Error,
    ExperimentSpec, Generator, PermutationPlan, ReportMethod, StatisticId, TestId, TestReport,
};

const EXIT_OK: u8 = 0;
const EXIT_ERROR: u8 = 1;
/// Null hypothesis rejected at the requested level (documented convention
/// for scripted pipelines).
const EXIT_REJECTED: u8 = 2;

#[derive(Parser)]
#[command(
    name = "envtest",
    about = "Permutation tests of independence with global rank envelopes",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test independence of the two columns of a CSV file.
    Test(TestArgs),
    /// Replicate a test battery over simulated data and report rejection rates.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct TestArgs {
    /// Input CSV with two columns (numeric, or category labels for --stat table).
    input: PathBuf,
    /// Test statistic: cdf | qq | table.
    #[arg(long)]
    stat: String,
    /// Number of permutations.
    #[arg(long, default_value_t = 9999)]
    perms: usize,
    /// Significance level.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Quantile grid for the cdf statistic, e.g. 20x20.
    #[arg(long, default_value = "20x20")]
    grid: String,
    /// Pixel grid for the qq statistic, e.g. 32x32.
    #[arg(long, default_value = "32x32")]
    pixels: String,
    /// Declared atom values in the x marginal (repeatable).
    #[arg(long = "atom-x", value_name = "VALUE")]
    atom_x: Vec<f64>,
    /// Declared atom values in the y marginal (repeatable).
    #[arg(long = "atom-y", value_name = "VALUE")]
    atom_y: Vec<f64>,
    /// Master seed for the permutation streams.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write a JSON report here.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Write an SVG heatmap here.
    #[arg(long, value_name = "FILE")]
    heatmap: Option<PathBuf>,
    /// Worker threads (defaults to ENVTEST_THREADS, then all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Treat the first CSV row as a header (numeric inputs are sniffed
    /// automatically; label inputs need this flag).
    #[arg(long)]
    header: bool,
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario: null-normal | null-pareto | exp1 | exp2 | exp3 | exp4.
    #[arg(long)]
    experiment: String,
    /// Correlation parameter for exp1/exp2/exp3.
    #[arg(long)]
    rho: Option<f64>,
    /// Sample size per replication.
    #[arg(long, default_value_t = 100)]
    n: usize,
    /// Number of replications.
    #[arg(long, default_value_t = 1000)]
    reps: usize,
    /// Number of permutations per test.
    #[arg(long, default_value_t = 999)]
    perms: usize,
    /// Significance level.
    #[arg(long, default_value_t = 0.01)]
    alpha: f64,
    /// Comma-separated test ids (cdf,qq,devs,devi,peap,spep,kenp,pea) or "all".
    #[arg(long, default_value = "all")]
    tests: String,
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the CSV table here (stdout when omitted).
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Worker threads (defaults to ENVTEST_THREADS, then all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn parse_dims(text: &str, what: &str) -> Result<(usize, usize), Error> {
    let parts: Vec<&str> = text.split(['x', 'X']).collect();
    let err = || Error::Config(format!("cannot parse {what} '{text}': expected ROWSxCOLS"));
    if parts.len() != 2 {
        return Err(err());
    }
    let a = parts[0].parse().map_err(|_| err())?;
    let b = parts[1].parse().map_err(|_| err())?;
    Ok((a, b))
}

fn thread_pool(threads: Option<usize>) -> Result<rayon::ThreadPool, Error> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    let configured = threads.or_else(|| {
        std::env::var("ENVTEST_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(t) = configured {
        if t == 0 {
            return Err(Error::Config("--threads must be positive".into()));
        }
        builder = builder.num_threads(t);
    }
    builder
        .build()
        .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))
}

fn run_test(args: &TestArgs) -> Result<u8, Error> {
    let pool = thread_pool(args.threads)?;
    let (sample, method, statistic) = match args.stat.as_str() {
        "cdf" | "qq" => {
            let (x, y) = envtest::read_numeric_pairs(
                &args.input,
                if args.header { Some(true) } else { None },
            )?;
            let sample = BivariateSample::continuous_with_atoms(
                x,
                y,
                args.atom_x.clone(),
                args.atom_y.clone(),
            )?;
            if args.stat == "cdf" {
                let (gx, gy) = parse_dims(&args.grid, "--grid")?;
                (
                    sample,
                    ReportMethod::Cdf,
                    StatisticId::Cdf {
                        levels_x: gx,
                        levels_y: gy,
                    },
                )
            } else {
                let (rows, cols) = parse_dims(&args.pixels, "--pixels")?;
                (
                    sample,
                    ReportMethod::Qq,
                    StatisticId::QqIntensity { rows, cols },
                )
            }
        }
        "table" => {
            if !args.atom_x.is_empty() || !args.atom_y.is_empty() {
                return Err(Error::Config(
                    "--atom-x/--atom-y do not apply to --stat table".into(),
                ));
            }
            let (x, y) = envtest::read_label_pairs(&args.input, args.header)?;
            (
                BivariateSample::categorical(x, y)?,
                ReportMethod::Table,
                StatisticId::Table,
            )
        }
        other => {
            return Err(Error::Config(format!(
                "unknown statistic '{other}': expected cdf, qq or table"
            )))
        }
    };

    let plan = PermutationPlan {
        permutations: args.perms,
        master_seed: args.seed,
        statistic,
    };
    let started = Instant::now();
    let test = pool.install(|| run_envelope_test(&sample, &plan, args.alpha))?;
    let wall = started.elapsed().as_secs_f64();
    let report =
        TestReport::from_envelope_test(&test, &sample, method, args.perms, args.seed, wall);

    println!(
        "method={} n={} s={} alpha={} p={}/{} ({:.3e}) rejected={} flagged={}",
        args.stat,
        report.n,
        report.s,
        report.alpha,
        report.p_erl.numerator,
        report.p_erl.denominator,
        report.p_value,
        report.rejected,
        report
            .above
            .iter()
            .zip(&report.below)
            .filter(|(a, b)| **a || **b)
            .count()
    );
    if let Some(path) = &args.out {
        report.save(path)?;
        println!("report written to {}", path.display());
    }
    if let Some(path) = &args.heatmap {
        write_atomic(path, render_svg(&report).as_bytes())?;
        println!("heatmap written to {}", path.display());
    }
    Ok(if report.rejected {
        EXIT_REJECTED
    } else {
        EXIT_OK
    })
}

fn run_simulate(args: &SimulateArgs) -> Result<u8, Error> {
    let pool = thread_pool(args.threads)?;
    let rho = |default: f64| args.rho.unwrap_or(default);
    let generator = match args.experiment.as_str() {
        "null-normal" => Generator::NormalIid,
        "null-pareto" => Generator::ParetoIid { shape: 4.0 },
        "exp1" => Generator::Binormal { rho: rho(0.3) },
        "exp2" => Generator::CrossMixture { rho: rho(0.9) },
        "exp3" => Generator::CenterMixture {
            rho: rho(0.9),
            outer_sd: 4.0,
        },
        "exp4" => Generator::DistortedUniform,
        other => {
            return Err(Error::Config(format!(
                "unknown experiment '{other}': expected null-normal, null-pareto, exp1..exp4"
            )))
        }
    };
    let tests = if args.tests == "all" {
        TestId::all()
    } else {
        args.tests
            .split(',')
            .map(TestId::parse)
            .collect::<Result<Vec<_>, _>>()?
    };
    let spec = ExperimentSpec {
        generator,
        n: args.n,
        reps: args.reps,
        tests,
        alpha: args.alpha,
        permutations: args.perms,
        master_seed: args.seed,
    };
    let table = pool.install(|| run_experiment(&spec))?;
    let csv = table.to_csv();
    match &args.out {
        Some(path) => {
            write_atomic(path, csv.as_bytes())?;
            println!("table written to {}", path.display());
        }
        None => print!("{csv}"),
    }
    Ok(EXIT_OK)
}

fn main() -> ExitCode {
    env_logger::init();
    // clap's own error exit code is 2, which this tool reserves for
    // "null hypothesis rejected"; map usage errors to 1 instead.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match &cli.command {
        Command::Test(args) => run_test(args),
        Command::Simulate(args) => run_simulate(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
