//! `richness` — unseen-class estimation from count histograms.
//!
//! Four subcommands: `estimate` fits the order-selected quadrature
//! estimator to a histogram, `bootstrap` adds a bagged estimate with a
//! variance decomposition and a percentile interval, `simulate` draws
//! synthetic data with known truth, and `bench` scores the estimators over
//! a named experiment family.
//!
//! Every run that consumes randomness takes `--seed`; when the flag is
//! absent a seed is drawn from entropy and reported, so any run can be
//! reproduced after the fact.

mod bench;
mod report;

use std::fmt::Write as _;
use std::fs;
use std::io::Read as _;

use anyhow::{ensure, Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::ThreadPoolBuilder;
use richness::bootstrap::{bagged_estimate, BootstrapConfig, DEFAULT_REPLICATES};
use richness::estimator::{DEFAULT_MAX_ORDER, DEFAULT_POINT_FLOOR};
use richness::simulate::{
    expected_unobserved, power_law_rates, sample_mixture, sample_power_law, sample_scrna,
    MixtureSpec, PowerLawSpec, ScrnaSpec, SimulatedSample,
};
use richness::{estimate, CountHistogram};

use bench::BenchArgs;
use report::{Format, Report};

#[derive(Parser)]
#[command(name = "richness", version, about = "Unseen-class estimation from count histograms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the unobserved-class count from a histogram
    Estimate(EstimateArgs),
    /// Bootstrap-bagged estimate with variance and a percentile interval
    Bootstrap(BootstrapArgs),
    /// Draw synthetic data sets with known truth
    #[command(subcommand)]
    Simulate(SimulateCommand),
    /// Score the estimators over a named experiment family
    Bench(BenchArgs),
}

#[derive(Args)]
struct EstimateArgs {
    /// Histogram file of "multiplicity frequency" lines; "-" reads standard input
    #[arg(long, value_name = "PATH")]
    hist: String,
    /// Largest quadrature order to consider
    #[arg(long, default_value_t = DEFAULT_MAX_ORDER)]
    max_order: usize,
    /// Smallest admissible quadrature point
    #[arg(long, default_value_t = DEFAULT_POINT_FLOOR)]
    point_floor: f64,
    /// Report format
    #[arg(long, value_enum, default_value_t = Format::Tsv)]
    format: Format,
}

#[derive(Args)]
struct BootstrapArgs {
    /// Histogram file of "multiplicity frequency" lines; "-" reads standard input
    #[arg(long, value_name = "PATH")]
    hist: String,
    /// Bootstrap replicates (at least 2)
    #[arg(long, default_value_t = DEFAULT_REPLICATES)]
    reps: usize,
    /// Largest quadrature order to consider
    #[arg(long, default_value_t = DEFAULT_MAX_ORDER)]
    max_order: usize,
    /// Smallest admissible quadrature point
    #[arg(long, default_value_t = DEFAULT_POINT_FLOOR)]
    point_floor: f64,
    /// Seed; drawn from entropy and reported when absent
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Report format
    #[arg(long, value_enum, default_value_t = Format::Tsv)]
    format: Format,
}

#[derive(Subcommand)]
enum SimulateCommand {
    /// Finite Poisson mixture: each class picks a component, then a count
    Mixture(MixtureArgs),
    /// Poisson rates proportional to rank^(-alpha)
    PowerLaw(PowerLawArgs),
    /// Sparse single-cell counts with logistic dropout
    Scrna(ScrnaArgs),
}

#[derive(Args)]
struct MixtureArgs {
    /// Component rates, comma separated
    #[arg(long, value_delimiter = ',', required = true)]
    lambdas: Vec<f64>,
    /// Component weights, comma separated, summing to 1
    #[arg(long, value_delimiter = ',', required = true)]
    weights: Vec<f64>,
    /// Classes in the population
    #[arg(long)]
    classes: u64,
    /// Seed; drawn from entropy and reported when absent
    #[arg(long)]
    seed: Option<u64>,
    /// Histogram destination; "-" writes standard output
    #[arg(long, default_value = "-")]
    hist_out: String,
    /// Truth table destination
    #[arg(long)]
    truth_out: Option<String>,
}

#[derive(Args)]
struct PowerLawArgs {
    /// Decay exponent of the rate ranking
    #[arg(long)]
    alpha: f64,
    /// Classes in the population
    #[arg(long)]
    classes: u64,
    /// Total rate mass; defaults to one unit per class
    #[arg(long)]
    total: Option<f64>,
    /// Seed; drawn from entropy and reported when absent
    #[arg(long)]
    seed: Option<u64>,
    /// Histogram destination; "-" writes standard output
    #[arg(long, default_value = "-")]
    hist_out: String,
    /// Truth table destination
    #[arg(long)]
    truth_out: Option<String>,
}

#[derive(Args)]
struct ScrnaArgs {
    /// Cells to simulate
    #[arg(long, default_value_t = 200)]
    cells: usize,
    /// Genes per cell
    #[arg(long, default_value_t = 2000)]
    genes: usize,
    /// Seed; drawn from entropy and reported when absent
    #[arg(long)]
    seed: Option<u64>,
    /// Sparse counts destination ("cell gene count" rows); "-" writes standard output
    #[arg(long, default_value = "-")]
    counts_out: String,
    /// Per-cell truth destination
    #[arg(long)]
    truth_out: Option<String>,
}

fn main() {
    let cli = Cli::parse();
    if let Err(error) = run(cli) {
        eprintln!("richness: {error:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Estimate(args) => run_estimate(args),
        Command::Bootstrap(args) => run_bootstrap(args),
        Command::Simulate(SimulateCommand::Mixture(args)) => run_simulate_mixture(args),
        Command::Simulate(SimulateCommand::PowerLaw(args)) => run_simulate_power_law(args),
        Command::Simulate(SimulateCommand::Scrna(args)) => run_simulate_scrna(args),
        Command::Bench(args) => {
            let seed = resolve_seed(args.seed);
            bench::run(&args, seed)
        }
    }
}

/// A missing seed is drawn from entropy; callers must surface it in their
/// report so the run stays reproducible.
fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(rand::random)
}

fn read_histogram(path: &str) -> Result<CountHistogram> {
    let text = if path == "-" {
        let mut buffer = String::new();
        std::io::stdin()
            .read_to_string(&mut buffer)
            .context("reading standard input")?;
        buffer
    } else {
        fs::read_to_string(path).with_context(|| format!("reading {path}"))?
    };
    CountHistogram::parse(&text).with_context(|| format!("parsing {path}"))
}

fn write_output(path: &str, content: &str) -> Result<()> {
    if path == "-" {
        print!("{content}");
        Ok(())
    } else {
        fs::write(path, content).with_context(|| format!("writing {path}"))
    }
}

fn run_estimate(args: EstimateArgs) -> Result<()> {
    ensure!(args.max_order >= 1, "--max-order must be at least 1");
    let h = read_histogram(&args.hist)?;
    let e = estimate(&h, args.max_order, args.point_floor)?;
    print!("{}", Report::from_estimate(&e).render(args.format));
    Ok(())
}

fn run_bootstrap(args: BootstrapArgs) -> Result<()> {
    ensure!(args.max_order >= 1, "--max-order must be at least 1");
    ensure!(args.reps >= 2, "--reps must be at least 2");
    ensure!(args.threads >= 1, "--threads must be at least 1");
    let h = read_histogram(&args.hist)?;
    let point = estimate(&h, args.max_order, args.point_floor)?;
    let seed = resolve_seed(args.seed);
    let mut config = BootstrapConfig::new(seed);
    config.replicates = args.reps;
    config.max_order = args.max_order;
    config.point_floor = args.point_floor;
    let pool = ThreadPoolBuilder::new()
        .num_threads(args.threads)
        .build()
        .context("building the worker pool")?;
    let summary = pool.install(|| bagged_estimate(&h, &config))?;
    print!("{}", Report::from_bootstrap(&point, &summary).render(args.format));
    Ok(())
}

/// Key/value truth rows shared by the survey simulators.
fn survey_truth(sample: &SimulatedSample, seed: u64, expected: f64) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "seed\t{seed}");
    let _ = writeln!(out, "classes\t{}", sample.classes);
    let _ = writeln!(out, "observed\t{}", sample.histogram.distinct());
    let _ = writeln!(out, "unobserved\t{}", sample.unobserved);
    let _ = writeln!(out, "expected_unobserved\t{expected}");
    out
}

fn run_simulate_mixture(args: MixtureArgs) -> Result<()> {
    let spec = MixtureSpec::new(args.lambdas, args.weights, args.classes)?;
    let seed = resolve_seed(args.seed);
    let sample = sample_mixture(&spec, seed)?;
    let mut hist = format!("# seed {seed}\n");
    hist.push_str(&sample.histogram.render());
    write_output(&args.hist_out, &hist)?;
    if let Some(path) = &args.truth_out {
        write_output(path, &survey_truth(&sample, seed, expected_unobserved(&spec)))?;
    }
    Ok(())
}

fn run_simulate_power_law(args: PowerLawArgs) -> Result<()> {
    let total = args.total.unwrap_or(args.classes as f64);
    let spec = PowerLawSpec::new(args.classes, args.alpha, total)?;
    let seed = resolve_seed(args.seed);
    let sample = sample_power_law(&spec, seed)?;
    let expected: f64 = power_law_rates(&spec).iter().map(|rate| (-rate).exp()).sum();
    let mut hist = format!("# seed {seed}\n");
    hist.push_str(&sample.histogram.render());
    write_output(&args.hist_out, &hist)?;
    if let Some(path) = &args.truth_out {
        write_output(path, &survey_truth(&sample, seed, expected))?;
    }
    Ok(())
}

fn run_simulate_scrna(args: ScrnaArgs) -> Result<()> {
    let spec = ScrnaSpec::new(args.cells, args.genes);
    let seed = resolve_seed(args.seed);
    let sample = sample_scrna(&spec, seed)?;

    let mut counts = format!("# seed {seed}\n# cell\tgene\tcount\n");
    for (cell, entries) in sample.cells.iter().enumerate() {
        for &(gene, count) in entries {
            let _ = writeln!(counts, "{cell}\t{gene}\t{count}");
        }
    }
    write_output(&args.counts_out, &counts)?;

    if let Some(path) = &args.truth_out {
        let mut truth = format!(
            "# seed {seed}\n# cell\tsubpop\tbatch\ttrue_dropout\tobserved_dropout\texpected_zero_fraction\n"
        );
        for cell in 0..spec.n_cells {
            let _ = writeln!(
                truth,
                "{cell}\t{}\t{}\t{}\t{}\t{}",
                sample.subpop[cell],
                sample.batch[cell],
                sample.true_dropout[cell],
                sample.observed_dropout[cell],
                sample.expected_zero_fraction[cell],
            );
        }
        write_output(path, &truth)?;
    }
    Ok(())
}
