//! Error type shared across the estimation pipeline.

/// Failures surfaced by histogram construction, moment estimation,
/// quadrature and resampling.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("line {line}: {detail}")]
    MalformedLine { line: usize, detail: String },
    #[error("multiplicity 0 is not observable")]
    ZeroMultiplicity,
    #[error("duplicate multiplicity {multiplicity}")]
    DuplicateMultiplicity { multiplicity: u64 },
    #[error("histogram has no observed classes")]
    EmptyHistogram,
    #[error("histogram totals exceed the 64-bit range")]
    TotalsOverflow,
    #[error("no singleton classes: moment estimates are undefined")]
    NoSingletons,
    #[error("moment of order {order} is not finite: order too large for this histogram")]
    OrderTooLarge { order: usize },
    #[error("estimator needs n_1 > 0 and n_2 > 0 (got n_1 = {n1}, n_2 = {n2})")]
    InsufficientRareClasses { n1: u64, n2: u64 },
    #[error("recurrence breakdown at order {order}")]
    RecurrenceBreakdown { order: usize },
    #[error("invalid recurrence: beta[{index}] = {value} must be positive")]
    NonPositiveBeta { index: usize, value: f64 },
    #[error("tridiagonal eigensolve did not converge within {sweeps} sweeps")]
    EigenNoConvergence { sweeps: usize },
    #[error("bootstrap exhausted: all {replicates} replicates failed")]
    BootstrapExhausted { replicates: usize },
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
