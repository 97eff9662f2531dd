//! Synthetic populations with ground truth attached.
//!
//! Three generative families, each mirroring a benchmark regime for
//! unseen-class estimation:
//!
//! * [`MixtureSpec`] — classes draw a Poisson rate from a small discrete
//!   mixture; the workhorse for controlled bias/variance experiments, with
//!   closed-form expected frequencies available as noise-free oracles.
//! * [`PowerLawSpec`] — rates decay as `i^-alpha`, the long-tailed shape
//!   typical of immune-receptor repertoires.
//! * [`ScrnaSpec`] — a log-normal-Poisson single-cell RNA-seq model with
//!   batch-specific dropout, for testing dropout-rate correction.
//!
//! Every sampler takes an explicit seed and is deterministic given it.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma, LogNormal, Poisson};
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::estimator::estimate;
use crate::histogram::CountHistogram;
use crate::seeding;

const MIXTURE_STREAM: u64 = 0x4D17;
const POWER_LAW_STREAM: u64 = 0x907;
const SCRNA_STREAM: u64 = 0x5C2A;

/// A population whose per-class Poisson rates follow a discrete mixture.
#[derive(Clone, Debug, PartialEq)]
pub struct MixtureSpec {
    lambdas: Vec<f64>,
    weights: Vec<f64>,
    classes: u64,
}

impl MixtureSpec {
    /// Validates and stores a mixture: positive distinct rates, positive
    /// weights summing to one within `1e-12`. The stored weights are
    /// renormalized so downstream arithmetic sees an exact unit sum.
    pub fn new(lambdas: Vec<f64>, weights: Vec<f64>, classes: u64) -> Result<Self> {
        if lambdas.is_empty() || lambdas.len() != weights.len() {
            return Err(Error::InvalidSpec(
                "mixture needs matching, non-empty rate and weight lists".into(),
            ));
        }
        if !lambdas.iter().all(|l| l.is_finite() && *l > 0.0) {
            return Err(Error::InvalidSpec("mixture rates must be positive and finite".into()));
        }
        for (i, a) in lambdas.iter().enumerate() {
            if lambdas[i + 1..].contains(a) {
                return Err(Error::InvalidSpec(format!("mixture rates must be distinct; {a} repeats")));
            }
        }
        if !weights.iter().all(|w| w.is_finite() && *w > 0.0) {
            return Err(Error::InvalidSpec("mixture weights must be positive and finite".into()));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidSpec(format!("mixture weights sum to {sum}, not 1")));
        }
        let weights = weights.iter().map(|w| w / sum).collect();
        Ok(Self { lambdas, weights, classes })
    }

    #[must_use]
    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    #[must_use]
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Number of classes in the population.
    #[must_use]
    pub fn classes(&self) -> u64 {
        self.classes
    }
}

/// One synthetic draw: the observed histogram plus the ground truth that a
/// real survey never has.
#[derive(Clone, Debug, PartialEq)]
pub struct SimulatedSample {
    /// Histogram of the classes observed at least once.
    pub histogram: CountHistogram,
    /// True number of classes in the population.
    pub classes: u64,
    /// Classes that drew a zero count this time.
    pub unobserved: u64,
}

/// Draws one sample: each class picks a mixture component, then a Poisson
/// count with that component's rate.
///
/// # Errors
/// `EmptyHistogram` when every class drew zero (always for `classes = 0`).
pub fn sample_mixture(spec: &MixtureSpec, seed: u64) -> Result<SimulatedSample> {
    let mut rng = seeding::derive_rng(seed, MIXTURE_STREAM, 0);
    let poissons: Vec<Poisson<f64>> = spec
        .lambdas
        .iter()
        .map(|&l| Poisson::new(l).expect("spec validation keeps rates positive and finite"))
        .collect();
    let mut tally: BTreeMap<u64, u64> = BTreeMap::new();
    let mut unobserved = 0u64;
    for _ in 0..spec.classes {
        let mut u: f64 = rng.random();
        let mut component = spec.lambdas.len() - 1;
        for (k, &w) in spec.weights.iter().enumerate() {
            if u < w {
                component = k;
                break;
            }
            u -= w;
        }
        let count: f64 = poissons[component].sample(&mut rng);
        if count == 0.0 {
            unobserved += 1;
        } else {
            *tally.entry(count as u64).or_insert(0) += 1;
        }
    }
    Ok(SimulatedSample {
        histogram: CountHistogram::new(tally)?,
        classes: spec.classes,
        unobserved,
    })
}

/// Expected frequencies `E n_j` for `j = 1..=j_max` (index `j - 1`):
/// `E n_j = S * sum_k w_k e^{-lambda_k} lambda_k^j / j!`, computed with the
/// iterative Poisson pmf so no factorial is ever materialized.
#[must_use]
pub fn expected_frequencies(spec: &MixtureSpec, j_max: usize) -> Vec<f64> {
    assert!(j_max >= 1, "need at least the singleton expectation");
    let s = spec.classes as f64;
    let mut expected = vec![0.0; j_max];
    for (&lambda, &w) in spec.lambdas.iter().zip(&spec.weights) {
        let mut pmf = (-lambda).exp();
        for (j, slot) in expected.iter_mut().enumerate() {
            pmf *= lambda / (j + 1) as f64;
            *slot += s * w * pmf;
        }
    }
    expected
}

/// Expected number of unobserved classes, `S * sum_k w_k e^{-lambda_k}`.
#[must_use]
pub fn expected_unobserved(spec: &MixtureSpec) -> f64 {
    let zero_mass: f64 =
        spec.lambdas.iter().zip(&spec.weights).map(|(&l, &w)| w * (-l).exp()).sum();
    spec.classes as f64 * zero_mass
}

/// Expected frequencies rounded to whole classes — a noise-free stand-in
/// for an observed histogram.
///
/// # Errors
/// `EmptyHistogram` when every expectation rounds to zero.
pub fn expected_histogram(spec: &MixtureSpec, j_max: usize) -> Result<CountHistogram> {
    let entries = expected_frequencies(spec, j_max)
        .into_iter()
        .enumerate()
        .map(|(j, e)| (j as u64 + 1, e.round() as u64));
    CountHistogram::new(entries.filter(|&(_, n)| n > 0))
}

/// A population with power-law abundances `lambda_i = c * i^-alpha`,
/// normalized so the rates sum to `total`.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerLawSpec {
    classes: u64,
    alpha: f64,
    total: f64,
}

impl PowerLawSpec {
    /// Validates exponent `alpha >= 0`, expected sample size `total > 0`,
    /// and at least one class.
    pub fn new(classes: u64, alpha: f64, total: f64) -> Result<Self> {
        if classes == 0 {
            return Err(Error::InvalidSpec("power law needs at least one class".into()));
        }
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::InvalidSpec(format!("power-law exponent {alpha} must be >= 0")));
        }
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::InvalidSpec(format!("expected sample size {total} must be > 0")));
        }
        Ok(Self { classes, alpha, total })
    }

    #[must_use]
    pub fn classes(&self) -> u64 {
        self.classes
    }

    #[must_use]
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    #[must_use]
    pub fn total(&self) -> f64 {
        self.total
    }
}

/// Per-class rates `c * i^-alpha` with `c` chosen so the rates sum to
/// `spec.total`. The normalizer is accumulated with compensated summation
/// so the invariant holds to relative `1e-9` even for millions of classes.
#[must_use]
pub fn power_law_rates(spec: &PowerLawSpec) -> Vec<f64> {
    let raw: Vec<f64> = (1..=spec.classes).map(|i| (i as f64).powf(-spec.alpha)).collect();
    let mut sum = 0.0f64;
    let mut compensation = 0.0f64;
    for &x in &raw {
        let y = x - compensation;
        let t = sum + y;
        compensation = (t - sum) - y;
        sum = t;
    }
    let c = spec.total / sum;
    raw.into_iter().map(|x| c * x).collect()
}

/// Draws one sample from the power-law population.
///
/// # Errors
/// `EmptyHistogram` when every class drew zero.
pub fn sample_power_law(spec: &PowerLawSpec, seed: u64) -> Result<SimulatedSample> {
    let mut rng = seeding::derive_rng(seed, POWER_LAW_STREAM, 0);
    let mut tally: BTreeMap<u64, u64> = BTreeMap::new();
    let mut unobserved = 0u64;
    for rate in power_law_rates(spec) {
        let count: f64 = Poisson::new(rate).expect("rates are positive").sample(&mut rng);
        if count == 0.0 {
            unobserved += 1;
        } else {
            *tally.entry(count as u64).or_insert(0) += 1;
        }
    }
    Ok(SimulatedSample {
        histogram: CountHistogram::new(tally)?,
        classes: spec.classes,
        unobserved,
    })
}

/// Where each entry's baseline dropout probability comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum DropoutBaseline {
    /// Per-entry draws from batch-specific Beta distributions: cells in
    /// batch 1 use `first`, cells in batch 2 use `second`.
    BetaBatches { first: (f64, f64), second: (f64, f64) },
    /// Every entry shares one fixed baseline probability.
    Fixed(f64),
}

/// Dropout model: the baseline probability is logit-transformed and shifted
/// by `slope` times the centered expression signal, then squashed back.
#[derive(Clone, Debug, PartialEq)]
pub struct DropoutSpec {
    pub baseline: DropoutBaseline,
    pub slope: f64,
}

/// A two-subpopulation log-normal-Poisson scRNA-seq experiment.
///
/// Counts are `Poisson(d * theta_j * lambda_ij * LN_ij)` where `theta_j` is
/// the cell's size factor, `lambda_ij = lambda_i0 * phi_ij` the gene rate
/// (boosted `de_fold`-fold for differentially expressed genes in the second
/// subpopulation), and `LN_ij` per-entry log-normal noise. Nonzero counts
/// are then zeroed with probability
/// `p_ij = logistic(beta0_ij + slope * (theta_j lambda_ij - grand mean))`,
/// with the baseline `logistic(beta0_ij)` drawn per entry from a
/// batch-specific Beta distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct ScrnaSpec {
    pub n_cells: usize,
    pub n_genes: usize,
    /// Subpopulation proportions (majority, minority); the minority carries
    /// the differentially expressed genes.
    pub subpop_fracs: (f64, f64),
    /// Fraction of genes differentially expressed in the minority.
    pub de_frac: f64,
    /// Rate multiplier of differentially expressed genes.
    pub de_fold: f64,
    /// Capture efficiency multiplying every rate.
    pub d: f64,
    /// Log standard deviation of the cell size factor `theta_j`.
    pub theta_logsd: f64,
    /// Log standard deviation of the per-entry noise factor.
    pub ln_sigma: f64,
    /// Shape of the gamma prior on base gene rates.
    pub gamma_shape: f64,
    /// Rate of the gamma prior on base gene rates (mean = shape / rate).
    pub gamma_rate: f64,
    /// Dropout mechanism; `None` disables dropout entirely.
    pub dropout: Option<DropoutSpec>,
}

impl ScrnaSpec {
    /// The standard parameterization at a caller-chosen scale: 80/20
    /// subpopulations, 20% of genes five-fold up in the minority, capture
    /// 0.25, `theta ~ logN(0, 2^2)`, noise `logN(0, (1/3)^2)`, base rates
    /// `Gamma(shape 0.25, rate 0.1)`, and logistic dropout with slope 0.5
    /// over `Beta(2, 8)` / `Beta(2, 38)` batch baselines.
    #[must_use]
    pub fn new(n_cells: usize, n_genes: usize) -> Self {
        Self {
            n_cells,
            n_genes,
            subpop_fracs: (0.8, 0.2),
            de_frac: 0.2,
            de_fold: 5.0,
            d: 0.25,
            theta_logsd: 2.0,
            ln_sigma: 1.0 / 3.0,
            gamma_shape: 0.25,
            gamma_rate: 0.1,
            dropout: Some(DropoutSpec {
                baseline: DropoutBaseline::BetaBatches { first: (2.0, 8.0), second: (2.0, 38.0) },
                slope: 0.5,
            }),
        }
    }

    fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::InvalidSpec(msg.into()));
        if self.n_cells == 0 || self.n_genes == 0 {
            return fail("need at least one cell and one gene");
        }
        let (major, minor) = self.subpop_fracs;
        let open_unit = |x: f64| x.is_finite() && x > 0.0 && x < 1.0;
        if !open_unit(major) || !open_unit(minor) || (major + minor - 1.0).abs() > 1e-12 {
            return fail("subpopulation fractions must lie in (0, 1) and sum to 1");
        }
        if !open_unit(self.de_frac) {
            return fail("differential-expression fraction must lie in (0, 1)");
        }
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if ![self.de_fold, self.d, self.theta_logsd, self.ln_sigma, self.gamma_shape, self.gamma_rate]
            .iter()
            .all(|&x| positive(x))
        {
            return fail("scale and shape parameters must be positive and finite");
        }
        if let Some(dropout) = &self.dropout {
            if !(dropout.slope.is_finite() && dropout.slope >= 0.0) {
                return fail("dropout slope must be finite and >= 0");
            }
            match dropout.baseline {
                DropoutBaseline::BetaBatches { first, second } => {
                    if ![first.0, first.1, second.0, second.1].iter().all(|&x| positive(x)) {
                        return fail("Beta baseline parameters must be positive");
                    }
                }
                DropoutBaseline::Fixed(p) => {
                    if !(0.0..=1.0).contains(&p) {
                        return fail("fixed baseline probability must lie in [0, 1]");
                    }
                }
            }
        }
        Ok(())
    }
}

/// One simulated experiment: sparse counts and per-cell ground truth.
#[derive(Clone, Debug, PartialEq)]
pub struct ScrnaSample {
    /// Per cell, the observed `(gene index, count)` pairs with nonzero
    /// counts, gene indices ascending.
    pub cells: Vec<Vec<(u32, u32)>>,
    /// Subpopulation of each cell: 1 (majority) or 2 (minority).
    pub subpop: Vec<u8>,
    /// Processing batch of each cell: 1 or 2, assigned by a seeded shuffle
    /// independently of subpopulation.
    pub batch: Vec<u8>,
    /// Fraction of genes expressed before dropout but zeroed by it.
    pub true_dropout: Vec<f64>,
    /// Fraction of genes with a zero count in the final data.
    pub observed_dropout: Vec<f64>,
    /// Average pre-dropout zero probability over genes, given the realized
    /// rates: `mean_i exp(-rate_ij)`. With dropout disabled the observed
    /// zero fraction fluctuates around this value.
    pub expected_zero_fraction: Vec<f64>,
}

/// Grand mean of the dropout signal `theta_j * lambda_ij` over all
/// `(gene, cell)` pairs, computed from per-gene sums instead of the full
/// matrix: a minority cell's gene-rate total exceeds the base total by
/// `(de_fold - 1)` times the differentially expressed mass.
fn grand_signal_mean(
    theta: &[f64],
    minority: &[bool],
    base_sum: f64,
    de_sum: f64,
    de_fold: f64,
    n_genes: usize,
) -> f64 {
    let cell_totals: f64 = theta
        .iter()
        .zip(minority)
        .map(|(&t, &m)| t * if m { base_sum + (de_fold - 1.0) * de_sum } else { base_sum })
        .sum();
    cell_totals / (theta.len() as f64 * n_genes as f64)
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Runs the generative model once.
///
/// Draw order is fixed — base gene rates, the differentially expressed gene
/// subset, cell size factors, the batch shuffle, then per-entry noise,
/// counts, and dropout — so a seed pins the entire experiment.
///
/// # Errors
/// `InvalidSpec` when the parameters are out of range.
pub fn sample_scrna(spec: &ScrnaSpec, seed: u64) -> Result<ScrnaSample> {
    spec.validate()?;
    let mut rng = seeding::derive_rng(seed, SCRNA_STREAM, 0);
    let (n_cells, n_genes) = (spec.n_cells, spec.n_genes);

    let gamma = Gamma::new(spec.gamma_shape, 1.0 / spec.gamma_rate)
        .expect("validated shape and rate are positive");
    let lambda0: Vec<f64> = (0..n_genes).map(|_| gamma.sample(&mut rng)).collect();

    let n_de = (spec.de_frac * n_genes as f64).round() as usize;
    let mut gene_order: Vec<usize> = (0..n_genes).collect();
    gene_order.shuffle(&mut rng);
    let mut de = vec![false; n_genes];
    for &gene in &gene_order[..n_de] {
        de[gene] = true;
    }

    let theta_dist =
        LogNormal::new(0.0, spec.theta_logsd).expect("validated sigma is positive");
    let theta: Vec<f64> = (0..n_cells).map(|_| theta_dist.sample(&mut rng)).collect();

    let n_minority = (spec.subpop_fracs.1 * n_cells as f64).round() as usize;
    let minority: Vec<bool> = (0..n_cells).map(|j| j >= n_cells - n_minority).collect();

    let mut cell_order: Vec<usize> = (0..n_cells).collect();
    cell_order.shuffle(&mut rng);
    let mut batch = vec![1u8; n_cells];
    for (position, &cell) in cell_order.iter().enumerate() {
        batch[cell] = 1 + (position % 2) as u8;
    }

    let base_sum: f64 = lambda0.iter().sum();
    let de_sum: f64 = lambda0.iter().zip(&de).filter(|&(_, &d)| d).map(|(&l, _)| l).sum();
    let grand_mean =
        grand_signal_mean(&theta, &minority, base_sum, de_sum, spec.de_fold, n_genes);

    let noise = LogNormal::new(0.0, spec.ln_sigma).expect("validated sigma is positive");
    let betas = match spec.dropout.as_ref().map(|d| &d.baseline) {
        Some(DropoutBaseline::BetaBatches { first, second }) => Some((
            Beta::new(first.0, first.1).expect("validated Beta parameters"),
            Beta::new(second.0, second.1).expect("validated Beta parameters"),
        )),
        _ => None,
    };

    let mut sample = ScrnaSample {
        cells: Vec::with_capacity(n_cells),
        subpop: minority.iter().map(|&m| if m { 2 } else { 1 }).collect(),
        batch,
        true_dropout: Vec::with_capacity(n_cells),
        observed_dropout: Vec::with_capacity(n_cells),
        expected_zero_fraction: Vec::with_capacity(n_cells),
    };
    for j in 0..n_cells {
        let mut observed: Vec<(u32, u32)> = Vec::new();
        let mut dropped = 0u64;
        let mut zeros = 0u64;
        let mut zero_mass = 0.0f64;
        for (i, &l0) in lambda0.iter().enumerate() {
            let phi = if minority[j] && de[i] { spec.de_fold } else { 1.0 };
            let signal = theta[j] * l0 * phi;
            let rate = spec.d * signal * noise.sample(&mut rng);
            zero_mass += (-rate).exp();
            let count = if rate > 0.0 {
                let c: f64 = Poisson::new(rate).expect("rate is positive").sample(&mut rng);
                c as u64
            } else {
                0
            };
            if count == 0 {
                zeros += 1;
                continue;
            }
            if let Some(dropout) = &spec.dropout {
                let beta0 = match &dropout.baseline {
                    DropoutBaseline::BetaBatches { .. } => {
                        let (first, second) = betas.as_ref().expect("built alongside the spec");
                        let q = if sample.batch[j] == 1 { first } else { second }.sample(&mut rng);
                        logit(q)
                    }
                    DropoutBaseline::Fixed(p) => logit(*p),
                };
                let p = logistic(beta0 + dropout.slope * (signal - grand_mean));
                if rng.random_bool(p) {
                    dropped += 1;
                    zeros += 1;
                    continue;
                }
            }
            observed.push((i as u32, count as u32));
        }
        sample.cells.push(observed);
        sample.true_dropout.push(dropped as f64 / n_genes as f64);
        sample.observed_dropout.push(zeros as f64 / n_genes as f64);
        sample.expected_zero_fraction.push(zero_mass / n_genes as f64);
    }
    Ok(sample)
}

/// Histogram of one cell's nonzero transcript counts, with genes as the
/// classes.
///
/// # Errors
/// `EmptyHistogram` when the cell has no nonzero counts.
pub fn cell_histogram(cell: &[(u32, u32)]) -> Result<CountHistogram> {
    CountHistogram::from_counts(cell.iter().map(|&(_, count)| count as u64))
}

/// The corrected rate `max(0, (n_genes - s_hat) / n_genes)`, falling back
/// to the observed rate when the estimate exceeds the known gene count.
fn correct_rate(s_hat: f64, n_genes: u64, observed_rate: f64) -> f64 {
    let genes = n_genes as f64;
    if s_hat > genes {
        observed_rate
    } else {
        ((genes - s_hat) / genes).max(0.0)
    }
}

/// Dropout rate for one cell, corrected by a richness estimate of how many
/// genes the cell truly expresses: of the `n_genes - s_hat` genes believed
/// absent, only those are counted as dropped. Falls back to the observed
/// rate when estimation fails or claims more genes than exist.
#[must_use]
pub fn dropout_correction(
    cell: &[(u32, u32)],
    n_genes: u64,
    observed_rate: f64,
    max_order: usize,
    point_floor: f64,
) -> f64 {
    match cell_histogram(cell).and_then(|h| estimate(&h, max_order, point_floor)) {
        Ok(e) => correct_rate(e.s_hat, n_genes, observed_rate),
        Err(_) => observed_rate,
    }
}

/// Observed, corrected, and true dropout rates for one cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DropoutRates {
    pub observed: f64,
    pub corrected: f64,
    pub true_rate: f64,
}

/// Per-cell dropout rates across a whole experiment.
#[must_use]
pub fn dropout_rates(
    sample: &ScrnaSample,
    n_genes: u64,
    max_order: usize,
    point_floor: f64,
) -> Vec<DropoutRates> {
    sample
        .cells
        .iter()
        .zip(&sample.observed_dropout)
        .zip(&sample.true_dropout)
        .map(|((cell, &observed), &true_rate)| DropoutRates {
            observed,
            corrected: dropout_correction(cell, n_genes, observed, max_order, point_floor),
            true_rate,
        })
        .collect()
}
