//! End-to-end checks that chain the simulator, the moment pipeline, the
//! estimator, and the bootstrap together the way a caller would.

use approx::assert_relative_eq;
use richness::bootstrap::{bagged_estimate, BootstrapConfig};
use richness::estimator::{DEFAULT_MAX_ORDER, DEFAULT_POINT_FLOOR};
use richness::simulate::{
    expected_histogram, expected_unobserved, sample_mixture, MixtureSpec,
};
use richness::{chao_estimate, estimate};

/// At a huge class count the rounded expected histogram carries essentially
/// exact moments, so the estimator must hand back the mixture's true zero
/// mass to many digits, using exactly as many points as the mixture has
/// components.
#[test]
fn noise_free_mixtures_recover_the_expected_unobserved_count() {
    let cases: [(&[f64], &[f64]); 3] = [
        (&[2.0], &[1.0]),
        (&[1.0, 0.1], &[0.5, 0.5]),
        (&[10.0, 1.0, 0.1], &[0.1, 0.3, 0.6]),
    ];
    for (lambdas, weights) in cases {
        let components = lambdas.len();
        let spec =
            MixtureSpec::new(lambdas.to_vec(), weights.to_vec(), 1_000_000_000_000).unwrap();
        let h = expected_histogram(&spec, 80).unwrap();
        let e = estimate(&h, components, DEFAULT_POINT_FLOOR).unwrap();
        assert_eq!(e.order, components);
        assert_eq!(e.fallback, components == 1);
        assert_relative_eq!(e.n0_hat, expected_unobserved(&spec), max_relative = 1e-6);
    }
}

/// The same consistency at a realistic survey scale: rounding the expected
/// frequencies to integers costs accuracy, but well under half a percent.
#[test]
fn two_component_expectations_at_survey_scale() {
    let spec = MixtureSpec::new(vec![1.0, 0.1], vec![0.5, 0.5], 1_000_000).unwrap();
    let h = expected_histogram(&spec, 40).unwrap();
    let e = estimate(&h, 2, DEFAULT_POINT_FLOOR).unwrap();
    assert_eq!(e.order, 2);
    let truth = expected_unobserved(&spec);
    assert!(
        (e.n0_hat - truth).abs() / truth < 0.005,
        "n0_hat {} strayed more than 0.5% from {truth}",
        e.n0_hat
    );
}

/// One seeded draw pushed through every stage: the raw estimate, the Chao
/// fallback, and a bagged summary must all agree on the same sample and
/// satisfy their structural relations.
#[test]
fn simulated_survey_runs_through_every_stage() {
    let spec = MixtureSpec::new(vec![1.0, 0.1], vec![0.5, 0.5], 10_000).unwrap();
    let sample = sample_mixture(&spec, 41).unwrap();

    let quad = estimate(&sample.histogram, DEFAULT_MAX_ORDER, DEFAULT_POINT_FLOOR).unwrap();
    let chao = chao_estimate(&sample.histogram).unwrap();
    assert!(quad.n0_hat.is_finite() && quad.n0_hat > 0.0);
    assert!(quad.s_hat > sample.histogram.distinct() as f64);
    // Chao is the moment lower bound; the order-selected estimate may only
    // move the zero mass upward.
    assert!(quad.n0_hat >= chao.n0_hat * (1.0 - 1e-12));

    // A sane window around the truth for this pinned seed, wide enough to
    // describe the estimator rather than the draw.
    assert!(quad.s_hat > 4_000.0 && quad.s_hat < 40_000.0, "s_hat = {}", quad.s_hat);

    let mut config = BootstrapConfig::new(17);
    config.replicates = 80;
    let bag = bagged_estimate(&sample.histogram, &config).unwrap();
    assert!(bag.n_failed < bag.replicates);
    assert!(bag.ci_lower <= bag.bagged_n0 && bag.bagged_n0 <= bag.ci_upper);
    assert_relative_eq!(bag.variance, bag.var_within + bag.var_between);
    assert_relative_eq!(
        bag.bagged_s,
        sample.histogram.distinct() as f64 + bag.bagged_n0
    );
}
