//! Gaussian quadrature rules for a measure known through its moments.
//!
//! The pipeline has two stages. [`chebyshev_recurrence`] turns a prefix of
//! moments `nu_0..nu_{2P-1}` into the three-term recurrence coefficients of
//! the measure's monic orthogonal polynomials, detecting along the way when
//! the measure cannot support `P` points. [`golub_welsch`] then diagonalizes
//! the symmetric tridiagonal Jacobi matrix built from those coefficients:
//! its eigenvalues are the quadrature points and the squared first
//! eigenvector components, scaled by the total mass, are the weights.

use std::fmt;

use crate::error::{Error, Result};
use crate::moments::MomentSequence;

/// Relative pivot threshold for the moment recurrence: row `k` has collapsed
/// when `|sigma_{k,k}|` falls to this fraction of `|sigma_{k-1,k-1}|`.
pub const PIVOT_COLLAPSE: f64 = 1e-14;

/// How far the weights of a valid rule may sum from unity.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-6;

/// Three-term recurrence `pi_{k+1}(x) = (x - alpha_k) pi_k(x) - beta_k pi_{k-1}(x)`
/// for the monic orthogonal polynomials of a positive measure, with the
/// convention that `beta_0` carries the total mass.
#[derive(Clone, Debug, PartialEq)]
pub struct ThreeTermRecurrence {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

impl ThreeTermRecurrence {
    /// Number of quadrature points the recurrence supports.
    #[must_use]
    pub fn order(&self) -> usize {
        self.alpha.len()
    }
}

/// Computes recurrence coefficients `alpha_0..alpha_{P-1}`,
/// `beta_0..beta_{P-1}` from the moments `nu_0..nu_{2P-1}`.
///
/// This is the Chebyshev algorithm run directly on power moments: mixed
/// quantities `sigma_{k,l} = integral of pi_k(x) x^l` satisfy
/// `sigma_{k,l} = sigma_{k-1,l+1} - alpha_{k-1} sigma_{k-1,l} - beta_{k-1} sigma_{k-2,l}`
/// and the diagonal entries `sigma_{k,k}` are the Gram pivots. A collapsed or
/// non-finite pivot means the moments do not define `p` distinct points, and
/// the caller should retry at a lower order.
///
/// # Panics
/// Panics when `p` is zero or `nu` holds fewer than `2p` moments.
pub fn chebyshev_recurrence(nu: &MomentSequence, p: usize) -> Result<ThreeTermRecurrence> {
    assert!(p >= 1, "order must be at least 1");
    assert!(nu.order() >= 2 * p - 1, "order {p} needs moments through {}", 2 * p - 1);
    let width = 2 * p;
    let mut alpha = vec![nu.value(1) / nu.value(0)];
    let mut beta = vec![nu.value(0)];
    let mut older = vec![0.0; width + 1];
    let mut prev = nu.values()[..width].to_vec();
    prev.push(0.0); // sigma_{0,2P} is never read; padding keeps rows uniform
    for k in 1..p {
        let mut cur = vec![0.0; width + 1];
        for l in k..width - k {
            cur[l] = prev[l + 1] - alpha[k - 1] * prev[l] - beta[k - 1] * older[l];
        }
        let pivot = cur[k];
        if !pivot.is_finite() || pivot.abs() <= PIVOT_COLLAPSE * prev[k - 1].abs() {
            return Err(Error::RecurrenceBreakdown { order: k });
        }
        let a = cur[k + 1] / pivot - prev[k] / prev[k - 1];
        let b = pivot / prev[k - 1];
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::RecurrenceBreakdown { order: k });
        }
        alpha.push(a);
        beta.push(b);
        older = prev;
        prev = cur;
    }
    Ok(ThreeTermRecurrence { alpha, beta })
}

/// A discrete measure: support points with matching weights, points sorted
/// ascending.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    /// Number of support points.
    #[must_use]
    pub fn order(&self) -> usize {
        self.points.len()
    }

    /// Power moment `sum_i w_i x_i^m` of the rule itself.
    #[must_use]
    pub fn moment(&self, m: usize) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * x.powi(m as i32))
            .sum()
    }
}

/// Converts a three-term recurrence into its Gaussian quadrature rule.
///
/// Builds the Jacobi matrix (diagonal `alpha`, off-diagonal `sqrt(beta_k)`)
/// and diagonalizes it by the implicit-shift QL method, accumulating only
/// the first row of the eigenvector matrix. That row starts as `e_1`, so its
/// squared entries are the first components needed for the weights and their
/// squares keep summing to one — the weights always total `beta_0` exactly.
pub fn golub_welsch(rec: &ThreeTermRecurrence) -> Result<QuadratureRule> {
    let n = rec.order();
    assert!(n >= 1 && rec.beta.len() == n, "recurrence arrays must match");
    let mass = rec.beta[0];
    if !(mass.is_finite() && mass > 0.0) {
        return Err(Error::NonPositiveBeta { index: 0, value: mass });
    }
    let mut diag = rec.alpha.clone();
    // One extra slot: the rotation chase writes one lag past the subdiagonal.
    let mut off = vec![0.0; n];
    for k in 1..n {
        let b = rec.beta[k];
        if !(b.is_finite() && b > 0.0) {
            return Err(Error::NonPositiveBeta { index: k, value: b });
        }
        off[k - 1] = b.sqrt();
    }
    let mut first = vec![0.0; n];
    first[0] = 1.0;
    tridiagonal_ql(&mut diag, &mut off, &mut first, 30 * n)?;

    let mut index: Vec<usize> = (0..n).collect();
    index.sort_by(|&a, &b| diag[a].total_cmp(&diag[b]));
    let points = index.iter().map(|&i| diag[i]).collect();
    let weights = index.iter().map(|&i| mass * first[i] * first[i]).collect();
    Ok(QuadratureRule { points, weights })
}

/// Implicit-shift QL iteration for a symmetric tridiagonal matrix.
///
/// `diag` holds the diagonal and is replaced by the eigenvalues (unsorted);
/// `off[i]` is the subdiagonal entry coupling rows `i` and `i + 1`, with
/// `off[n - 1]` used as scratch. `row` is one row of an orthogonal matrix to
/// which every plane rotation is applied — passing a unit vector yields that
/// row of the eigenvector matrix. `budget` bounds the total number of QL
/// sweeps across all eigenvalues.
fn tridiagonal_ql(diag: &mut [f64], off: &mut [f64], row: &mut [f64], budget: usize) -> Result<()> {
    let n = diag.len();
    assert!(off.len() == n && row.len() == n, "workspace arrays must match the matrix");
    let mut sweeps = 0;
    for l in 0..n {
        loop {
            // Look for a negligible subdiagonal entry splitting off a block.
            let mut m = l;
            while m + 1 < n {
                let scale = diag[m].abs() + diag[m + 1].abs();
                if off[m].abs() <= f64::EPSILON * scale {
                    break;
                }
                m += 1;
            }
            if m == l {
                break; // diag[l] has converged
            }
            if sweeps == budget {
                return Err(Error::EigenNoConvergence { sweeps });
            }
            sweeps += 1;

            // Wilkinson-style shift from the leading 2x2 block.
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + off[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * off[i];
                let b = c * off[i];
                r = f.hypot(g);
                off[i + 1] = r;
                if r == 0.0 {
                    // Lost the rotation to underflow: undo the last shift
                    // contribution and restart the scan on the same block.
                    diag[i + 1] -= p;
                    off[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;

                f = row[i + 1];
                row[i + 1] = s * row[i] + c * f;
                row[i] = c * row[i] - s * f;
            }
            if underflow {
                continue;
            }
            diag[l] -= p;
            off[l] = g;
            off[m] = 0.0;
        }
    }
    Ok(())
}

/// Why a candidate rule was rejected by [`validate_rule`].
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum RuleViolation {
    #[error("points {index} and {} are not strictly increasing", index + 1)]
    PointsNotDistinct { index: usize },
    #[error("point {index} = {point} lies below the floor {floor}")]
    PointBelowFloor { index: usize, point: f64, floor: f64 },
    #[error("weight {index} = {weight} is outside (0, 1]")]
    WeightOutOfRange { index: usize, weight: f64 },
    #[error("weights sum to {sum}, too far from 1")]
    WeightSumOffUnity { sum: f64 },
}

impl fmt::Display for QuadratureRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (x, w)) in self.points.iter().zip(&self.weights).enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{x} {w}")?;
        }
        Ok(())
    }
}

/// Checks that a rule is a plausible normalized measure on `[floor, inf)`:
/// strictly increasing points at or above the floor, weights in `(0, 1]`,
/// and a weight sum within [`WEIGHT_SUM_TOLERANCE`] of one. The comparisons
/// are written so that a NaN anywhere also fails.
pub fn validate_rule(rule: &QuadratureRule, floor: f64) -> std::result::Result<(), RuleViolation> {
    for (index, window) in rule.points.windows(2).enumerate() {
        if !(window[0] < window[1]) {
            return Err(RuleViolation::PointsNotDistinct { index });
        }
    }
    for (index, &point) in rule.points.iter().enumerate() {
        if !(point >= floor) {
            return Err(RuleViolation::PointBelowFloor { index, point, floor });
        }
    }
    for (index, &weight) in rule.weights.iter().enumerate() {
        if !(weight > 0.0 && weight <= 1.0) {
            return Err(RuleViolation::WeightOutOfRange { index, weight });
        }
    }
    let sum: f64 = rule.weights.iter().sum();
    if !((sum - 1.0).abs() <= WEIGHT_SUM_TOLERANCE) {
        return Err(RuleViolation::WeightSumOffUnity { sum });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Moments of a normalized discrete measure.
    fn atom_moments(points: &[f64], weights: &[f64], order: usize) -> MomentSequence {
        let values = (0..=order)
            .map(|m| points.iter().zip(weights).map(|(x, w)| w * x.powi(m as i32)).sum())
            .collect();
        MomentSequence::from_values(values)
    }

    /// Analytic recurrence for a gamma-distributed measure with shape `a`
    /// and scale `s`: `alpha_m = s (2m + a)`, `beta_m = s^2 m (m + a - 1)`,
    /// `beta_0 = 1`.
    fn gamma_recurrence(a: f64, s: f64, p: usize) -> ThreeTermRecurrence {
        let alpha = (0..p).map(|m| s * (2.0 * m as f64 + a)).collect();
        let beta = (0..p)
            .map(|m| if m == 0 { 1.0 } else { s * s * m as f64 * (m as f64 + a - 1.0) })
            .collect();
        ThreeTermRecurrence { alpha, beta }
    }

    /// Moments of the same gamma measure: `nu_m = s^m a (a+1) ... (a+m-1)`.
    fn gamma_moments(a: f64, s: f64, order: usize) -> MomentSequence {
        let mut values = vec![1.0];
        for m in 0..order {
            values.push(values[m] * s * (a + m as f64));
        }
        MomentSequence::from_values(values)
    }

    #[test]
    fn recurrence_matches_the_two_atom_hand_computation() {
        let nu = MomentSequence::from_values(vec![1.0, 1.5, 2.5, 4.5]);
        let rec = chebyshev_recurrence(&nu, 2).unwrap();
        assert_relative_eq!(rec.alpha[0], 1.5, max_relative = 1e-15);
        assert_relative_eq!(rec.alpha[1], 1.5, max_relative = 1e-12);
        assert_relative_eq!(rec.beta[0], 1.0, max_relative = 1e-15);
        assert_relative_eq!(rec.beta[1], 0.25, max_relative = 1e-12);
    }

    #[test]
    fn order_one_recurrence_is_the_moment_ratio() {
        let nu = MomentSequence::from_values(vec![2.0, 3.0]);
        let rec = chebyshev_recurrence(&nu, 1).unwrap();
        assert_eq!(rec.alpha, vec![1.5]);
        assert_eq!(rec.beta, vec![2.0]);
    }

    #[test]
    fn recurrence_reproduces_the_gamma_coefficients() {
        let (a, s, p) = (2.5, 0.7, 3);
        let rec = chebyshev_recurrence(&gamma_moments(a, s, 2 * p - 1), p).unwrap();
        let exact = gamma_recurrence(a, s, p);
        for k in 0..p {
            assert_relative_eq!(rec.alpha[k], exact.alpha[k], max_relative = 1e-8);
            assert_relative_eq!(rec.beta[k], exact.beta[k], max_relative = 1e-8);
        }
    }

    #[test]
    fn single_atom_moments_break_the_order_two_recurrence() {
        let nu = atom_moments(&[3.0], &[1.0], 3);
        assert_eq!(
            chebyshev_recurrence(&nu, 2).unwrap_err(),
            Error::RecurrenceBreakdown { order: 1 }
        );
    }

    #[test]
    fn golub_welsch_recovers_the_symmetric_pair() {
        let rec = ThreeTermRecurrence { alpha: vec![1.5, 1.5], beta: vec![1.0, 0.25] };
        let rule = golub_welsch(&rec).unwrap();
        assert_relative_eq!(rule.points[0], 1.0, max_relative = 1e-12);
        assert_relative_eq!(rule.points[1], 2.0, max_relative = 1e-12);
        assert_relative_eq!(rule.weights[0], 0.5, max_relative = 1e-12);
        assert_relative_eq!(rule.weights[1], 0.5, max_relative = 1e-12);
    }

    #[test]
    fn golub_welsch_handles_a_single_point() {
        let rec = ThreeTermRecurrence { alpha: vec![0.244], beta: vec![1.0] };
        let rule = golub_welsch(&rec).unwrap();
        assert_eq!(rule.points, vec![0.244]);
        assert_eq!(rule.weights, vec![1.0]);
    }

    #[test]
    fn pipeline_recovers_known_atoms() {
        let points = [0.5, 2.0, 5.0];
        let weights = [0.2, 0.5, 0.3];
        let nu = atom_moments(&points, &weights, 5);
        let rule = golub_welsch(&chebyshev_recurrence(&nu, 3).unwrap()).unwrap();
        for i in 0..3 {
            assert_relative_eq!(rule.points[i], points[i], max_relative = 1e-8);
            assert_relative_eq!(rule.weights[i], weights[i], max_relative = 1e-8);
        }
    }

    #[test]
    fn gaussian_rule_reproduces_the_defining_moments() {
        let (a, s, p) = (2.5, 0.7, 5);
        let rule = golub_welsch(&gamma_recurrence(a, s, p)).unwrap();
        let nu = gamma_moments(a, s, 2 * p - 1);
        for m in 0..2 * p {
            assert_relative_eq!(rule.moment(m), nu.value(m), max_relative = 1e-8);
        }
        assert!(rule.points.windows(2).all(|w| w[0] < w[1]));
        assert!(rule.points.iter().all(|&x| x > 0.0));
        let total: f64 = rule.weights.iter().sum();
        assert_relative_eq!(total, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn non_positive_beta_is_rejected() {
        let rec = ThreeTermRecurrence { alpha: vec![1.0, 2.0], beta: vec![1.0, 0.0] };
        assert_eq!(
            golub_welsch(&rec).unwrap_err(),
            Error::NonPositiveBeta { index: 1, value: 0.0 }
        );
        let rec = ThreeTermRecurrence { alpha: vec![1.0], beta: vec![-2.0] };
        assert_eq!(
            golub_welsch(&rec).unwrap_err(),
            Error::NonPositiveBeta { index: 0, value: -2.0 }
        );
    }

    #[test]
    fn validate_accepts_a_proper_rule() {
        let rule = QuadratureRule { points: vec![0.5, 2.0], weights: vec![0.4, 0.6] };
        assert_eq!(validate_rule(&rule, 1e-8), Ok(()));
        let one = QuadratureRule { points: vec![1.3], weights: vec![1.0] };
        assert_eq!(validate_rule(&one, 1e-8), Ok(()));
    }

    #[test]
    fn validate_rejects_each_defect() {
        let floor = 1e-8;
        let tied = QuadratureRule { points: vec![2.0, 2.0], weights: vec![0.5, 0.5] };
        assert_eq!(validate_rule(&tied, floor), Err(RuleViolation::PointsNotDistinct { index: 0 }));

        let low = QuadratureRule { points: vec![-0.5, 2.0], weights: vec![0.5, 0.5] };
        assert_eq!(
            validate_rule(&low, floor),
            Err(RuleViolation::PointBelowFloor { index: 0, point: -0.5, floor })
        );

        let heavy = QuadratureRule { points: vec![1.0, 2.0], weights: vec![1.5, -0.5] };
        assert_eq!(
            validate_rule(&heavy, floor),
            Err(RuleViolation::WeightOutOfRange { index: 0, weight: 1.5 })
        );

        let off = QuadratureRule { points: vec![1.0, 2.0], weights: vec![0.3, 0.3] };
        assert_eq!(validate_rule(&off, floor), Err(RuleViolation::WeightSumOffUnity { sum: 0.6 }));

        let nan = QuadratureRule { points: vec![f64::NAN], weights: vec![1.0] };
        assert!(matches!(
            validate_rule(&nan, floor),
            Err(RuleViolation::PointBelowFloor { .. })
        ));
    }
}
