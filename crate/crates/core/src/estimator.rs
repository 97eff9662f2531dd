//! Unseen-class estimation from a count histogram.
//!
//! The estimator fits a discrete measure to the histogram's rare-count
//! moments and plugs it into `n0 = n1 * sum_i w_i / x_i`, the quadrature
//! generalization of the classic singleton/doubleton ratio. Orders are tried
//! from the admissible maximum downward; each candidate must survive the
//! moment recurrence, the eigensolve, and a sanity check on its points and
//! weights. The one-point rule is accepted unconditionally, so estimation
//! succeeds whenever singletons and doubletons are both present.

use crate::error::{Error, Result};
use crate::histogram::CountHistogram;
use crate::moments::{self, MomentSequence};
use crate::quadrature::{chebyshev_recurrence, golub_welsch, validate_rule, QuadratureRule};

/// Default ceiling on the quadrature order.
pub const DEFAULT_MAX_ORDER: usize = 10;

/// Default lower bound for quadrature points. Rules placing mass closer to
/// zero than this would let a single point dominate `n0` numerically.
pub const DEFAULT_POINT_FLOOR: f64 = 1e-8;

/// A fitted richness estimate.
#[derive(Clone, Debug, PartialEq)]
pub struct RichnessEstimate {
    /// Estimated number of unobserved classes.
    pub n0_hat: f64,
    /// Estimated total number of classes: observed distinct plus `n0_hat`.
    pub s_hat: f64,
    /// Estimated fraction of classes that went unobserved, `n0_hat / s_hat`.
    pub f0_hat: f64,
    /// Number of quadrature points actually used.
    pub order: usize,
    /// True when the estimate comes from the one-point rule, which is
    /// algebraically the singleton/doubleton ratio estimator.
    pub fallback: bool,
    /// The fitted discrete measure.
    pub rule: QuadratureRule,
}

fn require_rare_classes(h: &CountHistogram) -> Result<()> {
    let (n1, n2) = (h.singletons(), h.doubletons());
    if n1 == 0 || n2 == 0 {
        return Err(Error::InsufficientRareClasses { n1, n2 });
    }
    Ok(())
}

/// The guaranteed order-1 rule: all mass at the first-moment ratio.
fn one_point_rule(nu: &MomentSequence) -> QuadratureRule {
    QuadratureRule { points: vec![nu.value(1) / nu.value(0)], weights: vec![1.0] }
}

/// Plugs a fitted measure into the unseen-class formula.
fn plug_in(h: &CountHistogram, rule: QuadratureRule) -> RichnessEstimate {
    let n1 = h.singletons() as f64;
    let inverse_mean: f64 = rule.points.iter().zip(&rule.weights).map(|(x, w)| w / x).sum();
    let n0_hat = n1 * inverse_mean;
    let s_hat = h.distinct() as f64 + n0_hat;
    let f0_hat = n0_hat / s_hat;
    let order = rule.order();
    RichnessEstimate { n0_hat, s_hat, f0_hat, order, fallback: order == 1, rule }
}

/// Estimates unseen classes with a quadrature rule of at most `max_order`
/// points.
///
/// The order ceiling is further capped by what the data can support (the
/// largest even multiplicity present) and by moment-existence checks, then
/// candidate orders descend until one yields a usable rule. `point_floor`
/// rejects rules whose points crowd zero; the order-1 fallback ignores it by
/// design so the estimator never fails on admissible input.
///
/// # Errors
/// `InsufficientRareClasses` when singletons or doubletons are absent.
pub fn estimate(
    h: &CountHistogram,
    max_order: usize,
    point_floor: f64,
) -> Result<RichnessEstimate> {
    require_rare_classes(h)?;
    let mut cap = max_order.max(1).min(moments::data_order_cap(h));
    let nu = loop {
        match moments::estimate_moments(h, 2 * cap - 1) {
            Ok(nu) => break nu,
            Err(Error::OrderTooLarge { .. }) if cap > 1 => cap -= 1,
            Err(e) => return Err(e),
        }
    };
    let selected = moments::select_order(&nu, cap);
    for p in (2..=selected).rev() {
        let Ok(rec) = chebyshev_recurrence(&nu, p) else { continue };
        let Ok(rule) = golub_welsch(&rec) else { continue };
        if validate_rule(&rule, point_floor).is_err() {
            continue;
        }
        return Ok(plug_in(h, rule));
    }
    Ok(plug_in(h, one_point_rule(&nu)))
}

/// The classic singleton/doubleton lower-bound estimator,
/// `n0 = n1^2 / (2 n2)`, expressed as the one-point quadrature rule so that
/// it is bit-for-bit the fallback path of [`estimate`].
///
/// # Errors
/// `InsufficientRareClasses` when singletons or doubletons are absent.
pub fn chao_estimate(h: &CountHistogram) -> Result<RichnessEstimate> {
    require_rare_classes(h)?;
    let nu = moments::estimate_moments(h, 1)?;
    Ok(plug_in(h, one_point_rule(&nu)))
}
