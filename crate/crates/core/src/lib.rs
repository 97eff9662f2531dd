//! Estimation of the number of unobserved classes from count-frequency data.
//!
//! The input is a histogram `n_j` = number of classes observed exactly `j`
//! times. Under a mixed-Poisson sampling model the expected unobserved count
//! is an integral against a tilted abundance measure whose moments are
//! estimable from the histogram alone: `nu_m = (m+1)! n_{m+1} / n_1`. This
//! crate turns those empirical moments into a Gaussian quadrature rule
//! (moments -> three-term recurrence -> Jacobi matrix eigenproblem) and plugs
//! it into `n0_hat = n_1 * sum(w_i / x_i)`. At quadrature order 1 the
//! pipeline reduces exactly to the classical `n_1^2 / (2 n_2)` estimator,
//! which also serves as the fallback when higher orders are not supported by
//! the data.
//!
//! Modules: [`histogram`] (input data), [`moments`] (empirical moments,
//! Hankel checks, order selection), [`quadrature`] (Chebyshev recurrence and
//! Golub-Welsch), [`estimator`] (plug-in estimate with order fallback),
//! [`bootstrap`] (bagging, variance decomposition, percentile intervals),
//! [`simulate`] (synthetic populations with ground truth).

pub mod bootstrap;
mod error;
pub mod estimator;
pub mod histogram;
pub mod moments;
pub mod quadrature;
pub mod seeding;
pub mod simulate;

pub use error::{Error, Result};
pub use estimator::{chao_estimate, estimate, RichnessEstimate};
pub use histogram::CountHistogram;
