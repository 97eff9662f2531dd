//! Multinomial bootstrap with median bagging and a total-variance estimate.
//!
//! Conditional on the number of observed classes `D`, the histogram cells
//! are multinomial with probabilities `n_j / D`, so resampling draws new
//! cell counts from that multinomial and re-runs the estimator. The bagged
//! point estimate is the median of the replicate `n0` values — the raw
//! estimator is heavy-tailed and occasionally explodes, and the median
//! shrugs off up to half the replicates going wild. The variance estimate
//! follows the law of total variance: a within-sample term (the median of
//! the replicate binomial variances `S f0 (1 - f0)`) plus a between-sample
//! term (the sample variance of the replicate `n0` values).

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimator::{estimate, DEFAULT_MAX_ORDER, DEFAULT_POINT_FLOOR};
use crate::histogram::CountHistogram;
use crate::seeding;

/// Default number of bootstrap replicates.
pub const DEFAULT_REPLICATES: usize = 1000;

/// Stream tag separating bootstrap draws from every other consumer of the
/// same user seed.
const BOOTSTRAP_STREAM: u64 = 0xB007;

/// Settings for [`bagged_estimate`].
#[derive(Clone, Debug, PartialEq)]
pub struct BootstrapConfig {
    pub replicates: usize,
    pub max_order: usize,
    pub point_floor: f64,
    pub seed: u64,
}

impl BootstrapConfig {
    /// Default configuration under the given seed.
    #[must_use]
    pub fn new(seed: u64) -> Self {
        Self {
            replicates: DEFAULT_REPLICATES,
            max_order: DEFAULT_MAX_ORDER,
            point_floor: DEFAULT_POINT_FLOOR,
            seed,
        }
    }
}

/// Aggregated bootstrap output.
#[derive(Clone, Debug, PartialEq)]
pub struct BootstrapSummary {
    /// Median of the successful replicate `n0` estimates.
    pub bagged_n0: f64,
    /// Observed distinct classes plus `bagged_n0`.
    pub bagged_s: f64,
    /// Total-variance estimate: `var_within + var_between`.
    pub variance: f64,
    /// Median replicate binomial variance `S f0 (1 - f0)` — the estimate of
    /// the variance a fixed sampling fraction would induce.
    pub var_within: f64,
    /// Sample variance of the replicate `n0` values.
    pub var_between: f64,
    /// 2.5% percentile of the replicate `n0` values.
    pub ci_lower: f64,
    /// 97.5% percentile of the replicate `n0` values.
    pub ci_upper: f64,
    /// Replicates attempted.
    pub replicates: usize,
    /// Replicates whose estimation failed; excluded from every statistic.
    pub n_failed: usize,
    /// Seed the replicate streams were derived from.
    pub seed: u64,
}

/// One successful replicate, reduced to what the summary needs.
#[derive(Clone, Copy, Debug)]
struct Replicate {
    n0_hat: f64,
    conditional_variance: f64,
}

/// Redraws the histogram cells from `Multinomial(D; n_j / D)`.
///
/// The multinomial is factored into sequential binomials: each cell draws
/// `Binomial(remaining classes, n_j / remaining weight)`, so the final cell
/// absorbs the exact remainder and the total always equals `D`.
pub fn resample<R: Rng + ?Sized>(h: &CountHistogram, rng: &mut R) -> CountHistogram {
    let mut remaining = h.distinct();
    let mut remaining_weight = h.distinct();
    let mut cells: Vec<(u64, u64)> = Vec::new();
    for (multiplicity, frequency) in h.entries() {
        if remaining == 0 {
            break;
        }
        let drawn = if frequency >= remaining_weight {
            remaining
        } else {
            let p = (frequency as f64 / remaining_weight as f64).clamp(0.0, 1.0);
            Binomial::new(remaining, p).expect("probability is clamped to [0, 1]").sample(rng)
        };
        if drawn > 0 {
            cells.push((multiplicity, drawn));
        }
        remaining -= drawn;
        remaining_weight -= frequency;
    }
    CountHistogram::new(cells).expect("resample of a non-empty histogram keeps D classes")
}

/// Runs the estimator over bootstrap replicates and aggregates them.
///
/// Replicate `i` uses an independent generator derived from
/// `(config.seed, i)`, so results are identical for any thread count and
/// any scheduling order. Replicates where estimation fails (for example the
/// resample lost all its singletons) are dropped from the statistics and
/// surfaced through `n_failed`.
///
/// # Errors
/// `BootstrapExhausted` when every replicate fails.
///
/// # Panics
/// Panics when `config.replicates < 2`.
pub fn bagged_estimate(h: &CountHistogram, config: &BootstrapConfig) -> Result<BootstrapSummary> {
    assert!(config.replicates >= 2, "bagging needs at least two replicates");
    let outcomes: Vec<Option<Replicate>> = (0..config.replicates)
        .into_par_iter()
        .map(|index| {
            let mut rng = seeding::derive_rng(config.seed, BOOTSTRAP_STREAM, index as u64);
            let resampled = resample(h, &mut rng);
            estimate(&resampled, config.max_order, config.point_floor).ok().map(|e| Replicate {
                n0_hat: e.n0_hat,
                conditional_variance: e.s_hat * e.f0_hat * (1.0 - e.f0_hat),
            })
        })
        .collect();
    let n_failed = outcomes.iter().filter(|o| o.is_none()).count();
    let survivors: Vec<Replicate> = outcomes.into_iter().flatten().collect();
    if survivors.is_empty() {
        return Err(Error::BootstrapExhausted { replicates: config.replicates });
    }
    Ok(summarize(&survivors, h.distinct() as f64, config, n_failed))
}

fn summarize(
    survivors: &[Replicate],
    distinct: f64,
    config: &BootstrapConfig,
    n_failed: usize,
) -> BootstrapSummary {
    let n0_values = sorted(survivors.iter().map(|r| r.n0_hat));
    let conditional = sorted(survivors.iter().map(|r| r.conditional_variance));
    let bagged_n0 = quantile(&n0_values, 0.5);
    let var_within = quantile(&conditional, 0.5);
    let var_between = sample_variance(&n0_values);
    BootstrapSummary {
        bagged_n0,
        bagged_s: distinct + bagged_n0,
        variance: var_within + var_between,
        var_within,
        var_between,
        ci_lower: quantile(&n0_values, 0.025),
        ci_upper: quantile(&n0_values, 0.975),
        replicates: config.replicates,
        n_failed,
        seed: config.seed,
    }
}

fn sorted(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Linearly interpolated quantile of an ascending slice (the common
/// "type 7" definition: index `(n - 1) q`, interpolated).
fn quantile(ascending: &[f64], q: f64) -> f64 {
    let n = ascending.len();
    let position = (n - 1) as f64 * q;
    let low = position.floor() as usize;
    let fraction = position - low as f64;
    if low + 1 >= n {
        return ascending[n - 1];
    }
    ascending[low] + fraction * (ascending[low + 1] - ascending[low])
}

/// Unbiased sample variance; zero when fewer than two values.
fn sample_variance(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64
}
