//! Empirical moments of the tilted abundance measure and order selection.
//!
//! With `n_j` the number of classes seen exactly `j` times, the moment
//! estimates are `nu_m = (m+1)! * n_{m+1} / n_1`, so `nu_0` is identically 1
//! and missing frequencies contribute zeros. A quadrature order `P` is
//! admissible when the Hankel matrices built from `nu_0..nu_{2P-1}` are
//! positive definite, which by Sylvester's criterion reduces to positivity
//! of the leading principal minors of the plain and shifted moment matrices.

use crate::error::{Error, Result};
use crate::histogram::CountHistogram;

/// Scale of the positive-definiteness threshold: a Hankel minor must exceed
/// `DET_TOLERANCE_SCALE` times the product of its diagonal magnitudes to
/// count as positive. Guards against accepting orders whose determinants are
/// only rounding noise.
pub const DET_TOLERANCE_SCALE: f64 = 1e-12;

/// Moment estimates `nu_0..nu_M`, indexed by moment order.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentSequence {
    values: Vec<f64>,
}

impl MomentSequence {
    /// Wraps raw moment values; `values[m]` is the order-`m` moment.
    /// The leading value is the total mass and must be positive and finite.
    ///
    /// # Panics
    /// Panics when `values` is empty or `values[0]` is not a positive finite
    /// number.
    #[must_use]
    pub fn from_values(values: Vec<f64>) -> Self {
        assert!(
            !values.is_empty() && values[0].is_finite() && values[0] > 0.0,
            "moment sequence needs a positive finite mass nu_0"
        );
        Self { values }
    }

    /// Highest available moment order `M`.
    #[must_use]
    pub fn order(&self) -> usize {
        self.values.len() - 1
    }

    /// `nu_m`.
    #[must_use]
    pub fn value(&self, m: usize) -> f64 {
        self.values[m]
    }

    #[must_use]
    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Estimates `nu_0..nu_order` from a histogram.
///
/// The factorial is folded into the running value, so the computation only
/// fails (`OrderTooLarge`) when the moment itself leaves the finite f64
/// range; absent frequencies yield exact zeros regardless of the factorial.
pub fn estimate_moments(h: &CountHistogram, order: usize) -> Result<MomentSequence> {
    let singletons = h.singletons();
    if singletons == 0 {
        return Err(Error::NoSingletons);
    }
    let n1 = singletons as f64;
    let mut values = Vec::with_capacity(order + 1);
    let mut factorial = 1.0f64; // (m+1)! as m advances
    for m in 0..=order {
        if m > 0 {
            factorial *= (m + 1) as f64;
        }
        let frequency = h.frequency(m as u64 + 1);
        let value = if frequency == 0 { 0.0 } else { factorial * (frequency as f64 / n1) };
        if !value.is_finite() {
            return Err(Error::OrderTooLarge { order: m });
        }
        values.push(value);
    }
    Ok(MomentSequence { values })
}

/// Leading principal minors of the plain and shifted Hankel moment matrices,
/// as far as the available moments reach.
#[derive(Clone, Debug, PartialEq)]
pub struct HankelMinors {
    /// `plain[k] = det (nu_{i+j})_{i,j=0..k}` — uses moments through `2k`.
    pub plain: Vec<f64>,
    /// `shifted[k] = det (nu_{i+j+1})_{i,j=0..k}` — uses moments through `2k+1`.
    pub shifted: Vec<f64>,
}

/// Computes every leading principal minor the moment sequence supports.
#[must_use]
pub fn hankel_determinants(nu: &MomentSequence) -> HankelMinors {
    let m = nu.order();
    let plain = (0..=m / 2).map(|k| hankel_minor(nu.values(), k, 0)).collect();
    let shifted = if m >= 1 {
        (0..=(m - 1) / 2).map(|k| hankel_minor(nu.values(), k, 1)).collect()
    } else {
        Vec::new()
    };
    HankelMinors { plain, shifted }
}

/// Determinant of the `(k+1) x (k+1)` Hankel slice `(nu_{i+j+shift})` by
/// Gaussian elimination with partial pivoting.
fn hankel_minor(nu: &[f64], k: usize, shift: usize) -> f64 {
    let n = k + 1;
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| nu[i + shift..i + shift + n].to_vec()).collect();
    let mut det = 1.0f64;
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))
            .expect("non-empty pivot range");
        if a[pivot_row][col] == 0.0 {
            return 0.0;
        }
        if pivot_row != col {
            a.swap(pivot_row, col);
            det = -det;
        }
        let pivot = a[col].clone();
        det *= pivot[col];
        for row in a.iter_mut().skip(col + 1) {
            let factor = row[col] / pivot[col];
            for (value, &above) in row.iter_mut().zip(&pivot).skip(col + 1) {
                *value -= factor * above;
            }
        }
    }
    det
}

/// Picks the largest admissible quadrature order at most `max_order`.
///
/// Order `P` consumes moments `nu_0..nu_{2P-1}` and is admissible when every
/// minor `plain[k]` and `shifted[k]` for `k < P` clears the scaled
/// positive-definiteness threshold. Order 1 is always admissible: it is the
/// guaranteed fallback.
#[must_use]
pub fn select_order(nu: &MomentSequence, max_order: usize) -> usize {
    let by_moments = (nu.order() + 1) / 2;
    let cap = max_order.max(1).min(by_moments.max(1));
    if cap <= 1 {
        return 1;
    }
    let minors = hankel_determinants(nu);
    let mut admissible = 0;
    let mut plain_diagonal = 1.0f64;
    let mut shifted_diagonal = 1.0f64;
    for k in 0..cap {
        plain_diagonal *= nu.value(2 * k).abs();
        shifted_diagonal *= nu.value(2 * k + 1).abs();
        let ok = k < minors.plain.len()
            && k < minors.shifted.len()
            && minors.plain[k] > DET_TOLERANCE_SCALE * plain_diagonal
            && minors.shifted[k] > DET_TOLERANCE_SCALE * shifted_diagonal;
        if !ok {
            break;
        }
        admissible = k + 1;
    }
    admissible.max(1)
}

/// Largest order with any backing in the data: the largest `P` such that
/// `n_{2P}` is present (minimum 1). Orders beyond this have a zero top
/// moment and can never pass the existence checks.
#[must_use]
pub fn data_order_cap(h: &CountHistogram) -> usize {
    h.entries()
        .filter(|&(j, _)| j % 2 == 0)
        .map(|(j, _)| (j / 2) as usize)
        .max()
        .unwrap_or(1)
        .max(1)
}
