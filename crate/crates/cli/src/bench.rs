//! Named experiment families: draw synthetic surveys with known truth,
//! estimate each one, and summarize how close the ratio estimator and the
//! order-selected estimator come.

use std::io::Write as _;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use rayon::prelude::*;
use richness::estimator::{DEFAULT_MAX_ORDER, DEFAULT_POINT_FLOOR};
use richness::seeding::derive_seed;
use richness::simulate::{
    dropout_rates, sample_mixture, sample_power_law, sample_scrna, MixtureSpec, PowerLawSpec,
    ScrnaSpec,
};
use richness::{chao_estimate, estimate, CountHistogram};

/// Stream tag separating bench replicate seeds from every other consumer of
/// the run seed.
const BENCH_STREAM: u64 = 0xBE4C;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    /// Two Poisson components, rates 1 and 0.1.
    TwoComp,
    /// Three Poisson components, rates 10, 1, and 0.1.
    ThreeComp,
    /// Rates proportional to rank^(-alpha).
    PowerLaw,
    /// Sparse single-cell counts; accuracy of per-cell dropout correction.
    Scrna,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Experiment family
    #[arg(value_enum)]
    pub family: Family,
    /// Which preset weight assignment to use (mixture families, 1-3)
    #[arg(long, default_value_t = 1)]
    pub case: usize,
    /// Number of classes in the population; accepts forms like 1e4
    #[arg(long, default_value = "1e4", value_parser = parse_scale)]
    pub scale: u64,
    /// Outer replicates
    #[arg(long, default_value_t = 50)]
    pub reps: usize,
    /// Seed; drawn from entropy and reported when absent
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// Largest quadrature order to consider
    #[arg(long, default_value_t = DEFAULT_MAX_ORDER)]
    pub max_order: usize,
    /// Power-law exponent (power-law family only)
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Cells to simulate (scrna family only)
    #[arg(long, default_value_t = 200)]
    pub cells: usize,
    /// Genes per cell (scrna family only)
    #[arg(long, default_value_t = 2000)]
    pub genes: usize,
}

/// Parses a class count that may be written in scientific notation.
fn parse_scale(text: &str) -> Result<u64, String> {
    let value: f64 = text.parse().map_err(|_| format!("{text:?} is not a number"))?;
    if !(value.is_finite() && value >= 1.0 && value <= 2f64.powi(53) && value.fract() == 0.0) {
        return Err(format!("{text:?} is not a whole number of classes"));
    }
    Ok(value as u64)
}

/// The preset two-component weight assignments.
fn two_comp_spec(case: usize, classes: u64) -> Result<MixtureSpec> {
    let weights = match case {
        1 => vec![0.9, 0.1],
        2 => vec![0.5, 0.5],
        3 => vec![0.1, 0.9],
        _ => bail!("two-comp defines cases 1-3, not {case}"),
    };
    Ok(MixtureSpec::new(vec![1.0, 0.1], weights, classes)?)
}

/// The preset three-component weight assignments.
fn three_comp_spec(case: usize, classes: u64) -> Result<MixtureSpec> {
    let weights = match case {
        1 => vec![0.1, 0.3, 0.6],
        2 => vec![0.3, 0.1, 0.6],
        3 => vec![0.1, 0.6, 0.3],
        _ => bail!("three-comp defines cases 1-3, not {case}"),
    };
    Ok(MixtureSpec::new(vec![10.0, 1.0, 0.1], weights, classes)?)
}

pub fn run(args: &BenchArgs, seed: u64) -> Result<()> {
    anyhow::ensure!(args.reps >= 1, "--reps must be at least 1");
    anyhow::ensure!(args.threads >= 1, "--threads must be at least 1");
    anyhow::ensure!(args.max_order >= 1, "--max-order must be at least 1");
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads)
        .build()
        .context("building the worker pool")?;

    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let family = match args.family {
        Family::TwoComp => "two-comp",
        Family::ThreeComp => "three-comp",
        Family::PowerLaw => "power-law",
        Family::Scrna => "scrna",
    };
    writeln!(
        out,
        "# family {family} case {case} scale {scale} reps {reps} seed {seed}",
        case = args.case,
        scale = args.scale,
        reps = args.reps,
    )?;

    match args.family {
        Family::TwoComp => {
            survey_bench(&mut out, &two_comp_spec(args.case, args.scale)?, args, seed, &pool)
        }
        Family::ThreeComp => {
            survey_bench(&mut out, &three_comp_spec(args.case, args.scale)?, args, seed, &pool)
        }
        Family::PowerLaw => {
            let spec = PowerLawSpec::new(args.scale, args.alpha, args.scale as f64)?;
            let truth = args.scale as f64;
            let rows = pool.install(|| {
                (0..args.reps)
                    .into_par_iter()
                    .map(|rep| {
                        let rep_seed = derive_seed(seed, BENCH_STREAM, rep as u64);
                        match sample_power_law(&spec, rep_seed) {
                            Ok(sample) => {
                                survey_row(rep, truth, &sample.histogram, args.max_order)
                            }
                            Err(_) => SurveyRow::failed(rep, truth),
                        }
                    })
                    .collect::<Vec<_>>()
            });
            print_survey(&mut out, &rows)
        }
        Family::Scrna => {
            let spec = ScrnaSpec::new(args.cells, args.genes);
            let rows = pool.install(|| {
                (0..args.reps)
                    .into_par_iter()
                    .map(|rep| {
                        let rep_seed = derive_seed(seed, BENCH_STREAM, rep as u64);
                        scrna_row(rep, &spec, rep_seed, args.max_order)
                    })
                    .collect::<Result<Vec<_>>>()
            })?;
            print_scrna(&mut out, &rows)
        }
    }
}

fn survey_bench(
    out: &mut impl std::io::Write,
    spec: &MixtureSpec,
    args: &BenchArgs,
    seed: u64,
    pool: &rayon::ThreadPool,
) -> Result<()> {
    let truth = spec.classes() as f64;
    let rows = pool.install(|| {
        (0..args.reps)
            .into_par_iter()
            .map(|rep| {
                let rep_seed = derive_seed(seed, BENCH_STREAM, rep as u64);
                match sample_mixture(spec, rep_seed) {
                    Ok(sample) => survey_row(rep, truth, &sample.histogram, args.max_order),
                    Err(_) => SurveyRow::failed(rep, truth),
                }
            })
            .collect::<Vec<_>>()
    });
    print_survey(out, &rows)
}

/// One simulated survey reduced to both estimates.
struct SurveyRow {
    rep: usize,
    truth: f64,
    distinct: u64,
    chao_s: f64,
    quad_s: f64,
    order: usize,
    fallback: bool,
}

impl SurveyRow {
    /// Sampling produced no usable histogram; estimates are absent.
    fn failed(rep: usize, truth: f64) -> Self {
        SurveyRow {
            rep,
            truth,
            distinct: 0,
            chao_s: f64::NAN,
            quad_s: f64::NAN,
            order: 0,
            fallback: true,
        }
    }
}

fn survey_row(rep: usize, truth: f64, h: &CountHistogram, max_order: usize) -> SurveyRow {
    let chao_s = chao_estimate(h).map_or(f64::NAN, |e| e.s_hat);
    let (quad_s, order, fallback) = estimate(h, max_order, DEFAULT_POINT_FLOOR)
        .map_or((f64::NAN, 0, true), |e| (e.s_hat, e.order, e.fallback));
    SurveyRow { rep, truth, distinct: h.distinct(), chao_s, quad_s, order, fallback }
}

fn print_survey(out: &mut impl std::io::Write, rows: &[SurveyRow]) -> Result<()> {
    writeln!(out, "# rep\ts_true\tdistinct\tchao_s\tquad_s\torder\tfallback")?;
    for r in rows {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.rep, r.truth, r.distinct, r.chao_s, r.quad_s, r.order, r.fallback
        )?;
        out.flush()?;
    }
    let truth = rows.first().map_or(f64::NAN, |r| r.truth);
    writeln!(out, "# estimator\tmedian_s\tmedian_abs_err\trmse")?;
    for (name, values) in [
        ("chao", rows.iter().map(|r| r.chao_s).collect::<Vec<_>>()),
        ("quadrature", rows.iter().map(|r| r.quad_s).collect::<Vec<_>>()),
    ] {
        let finite: Vec<f64> = values.into_iter().filter(|v| v.is_finite()).collect();
        let median_s = median(&finite);
        let median_err = median(&finite.iter().map(|s| (s - truth).abs()).collect::<Vec<_>>());
        let rmse = if finite.is_empty() {
            f64::NAN
        } else {
            (finite.iter().map(|s| (s - truth).powi(2)).sum::<f64>() / finite.len() as f64).sqrt()
        };
        writeln!(out, "# {name}\t{median_s}\t{median_err}\t{rmse}")?;
    }
    out.flush()?;
    Ok(())
}

/// One simulated experiment reduced to dropout-recovery accuracy.
struct ScrnaRow {
    rep: usize,
    corr_observed: f64,
    corr_corrected: f64,
    mae_observed: f64,
    mae_corrected: f64,
}

fn scrna_row(rep: usize, spec: &ScrnaSpec, seed: u64, max_order: usize) -> Result<ScrnaRow> {
    let sample = sample_scrna(spec, seed)?;
    let rates = dropout_rates(&sample, spec.n_genes as u64, max_order, DEFAULT_POINT_FLOOR);
    let truth: Vec<f64> = rates.iter().map(|r| r.true_rate).collect();
    let observed: Vec<f64> = rates.iter().map(|r| r.observed).collect();
    let corrected: Vec<f64> = rates.iter().map(|r| r.corrected).collect();
    Ok(ScrnaRow {
        rep,
        corr_observed: pearson(&observed, &truth),
        corr_corrected: pearson(&corrected, &truth),
        mae_observed: mean_abs_error(&observed, &truth),
        mae_corrected: mean_abs_error(&corrected, &truth),
    })
}

fn print_scrna(out: &mut impl std::io::Write, rows: &[ScrnaRow]) -> Result<()> {
    writeln!(out, "# rep\tcorr_observed\tcorr_corrected\tmae_observed\tmae_corrected")?;
    for r in rows {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            r.rep, r.corr_observed, r.corr_corrected, r.mae_observed, r.mae_corrected
        )?;
        out.flush()?;
    }
    let corr_observed = median(&rows.iter().map(|r| r.corr_observed).collect::<Vec<_>>());
    let corr_corrected = median(&rows.iter().map(|r| r.corr_corrected).collect::<Vec<_>>());
    let mae_observed = median(&rows.iter().map(|r| r.mae_observed).collect::<Vec<_>>());
    let mae_corrected = median(&rows.iter().map(|r| r.mae_corrected).collect::<Vec<_>>());
    writeln!(out, "# metric\tobserved\tcorrected")?;
    writeln!(out, "# median_corr\t{corr_observed}\t{corr_corrected}")?;
    writeln!(out, "# median_mae\t{mae_observed}\t{mae_corrected}")?;
    out.flush()?;
    Ok(())
}

fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        0.5 * (sorted[mid - 1] + sorted[mid])
    }
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let (va, vb): (f64, f64) = (
        a.iter().map(|x| (x - ma).powi(2)).sum(),
        b.iter().map(|y| (y - mb).powi(2)).sum(),
    );
    cov / (va * vb).sqrt()
}

fn mean_abs_error(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scale_parser_accepts_scientific_notation() {
        assert_eq!(parse_scale("1e4").unwrap(), 10_000);
        assert_eq!(parse_scale("250").unwrap(), 250);
        assert!(parse_scale("1e4.5").is_err());
        assert!(parse_scale("12.5").is_err());
        assert!(parse_scale("-3").is_err());
        assert!(parse_scale("inf").is_err());
    }

    #[test]
    fn case_tables_match_the_preset_assignments() {
        let two = two_comp_spec(2, 100).unwrap();
        assert_eq!(two.weights(), [0.5, 0.5]);
        assert_eq!(two.lambdas(), [1.0, 0.1]);
        let three = three_comp_spec(3, 100).unwrap();
        assert_eq!(three.weights(), [0.1, 0.6, 0.3]);
        assert_eq!(three.lambdas(), [10.0, 1.0, 0.1]);
        assert!(two_comp_spec(4, 100).is_err());
        assert!(three_comp_spec(0, 100).is_err());
    }

    #[test]
    fn median_interpolates_even_lengths() {
        assert_eq!(median(&[3.0, 1.0]), 2.0);
        assert_eq!(median(&[5.0, 1.0, 3.0]), 3.0);
        assert!(median(&[]).is_nan());
    }

    #[test]
    fn pearson_is_one_on_a_line() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let b = [2.0, 4.0, 6.0, 8.0];
        assert!((pearson(&a, &b) - 1.0).abs() < 1e-12);
        let c = [4.0, 3.0, 2.0, 1.0];
        assert!((pearson(&a, &c) + 1.0).abs() < 1e-12);
    }
}
