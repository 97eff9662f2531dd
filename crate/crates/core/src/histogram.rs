//! Count-frequency histograms: how many classes were seen exactly `j` times.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Frequency-of-frequencies data for one sample.
///
/// Entry `(j, n_j)` records that `n_j` distinct classes were observed exactly
/// `j` times. Multiplicities absent from the map are implicit zeros; stored
/// frequencies are always positive and at least one entry is present.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountHistogram {
    counts: BTreeMap<u64, u64>,
    distinct: u64,
    total: u64,
}

impl CountHistogram {
    /// Builds a histogram from `(multiplicity, frequency)` pairs. Zero
    /// frequencies are dropped; multiplicity zero, duplicate multiplicities
    /// and an empty result are rejected.
    pub fn new(entries: impl IntoIterator<Item = (u64, u64)>) -> Result<Self> {
        let mut counts = BTreeMap::new();
        for (multiplicity, frequency) in entries {
            if multiplicity == 0 {
                return Err(Error::ZeroMultiplicity);
            }
            if frequency == 0 {
                continue;
            }
            if counts.insert(multiplicity, frequency).is_some() {
                return Err(Error::DuplicateMultiplicity { multiplicity });
            }
        }
        Self::from_map(counts)
    }

    fn from_map(counts: BTreeMap<u64, u64>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::EmptyHistogram);
        }
        let mut distinct: u64 = 0;
        let mut total: u64 = 0;
        for (&j, &n) in &counts {
            distinct = distinct.checked_add(n).ok_or(Error::TotalsOverflow)?;
            total = j
                .checked_mul(n)
                .and_then(|jn| total.checked_add(jn))
                .ok_or(Error::TotalsOverflow)?;
        }
        Ok(Self { counts, distinct, total })
    }

    /// Parses the two-column text format: one `j n_j` pair per line,
    /// whitespace separated. Blank lines and `#` comment lines are skipped;
    /// zero frequencies are dropped. Errors carry the 1-based line number.
    pub fn parse(text: &str) -> Result<Self> {
        let mut counts = BTreeMap::new();
        for (index, raw) in text.lines().enumerate() {
            let line = index + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut fields = trimmed.split_whitespace();
            let (Some(first), Some(second), None) = (fields.next(), fields.next(), fields.next())
            else {
                return Err(Error::MalformedLine {
                    line,
                    detail: "expected two whitespace-separated columns".into(),
                });
            };
            let multiplicity: u64 = first.parse().map_err(|_| Error::MalformedLine {
                line,
                detail: format!("multiplicity {first:?} is not a non-negative integer"),
            })?;
            let frequency: u64 = second.parse().map_err(|_| Error::MalformedLine {
                line,
                detail: format!("frequency {second:?} is not a non-negative integer"),
            })?;
            if multiplicity == 0 {
                return Err(Error::MalformedLine {
                    line,
                    detail: "multiplicity 0 is not observable".into(),
                });
            }
            if frequency == 0 {
                continue;
            }
            if counts.insert(multiplicity, frequency).is_some() {
                return Err(Error::MalformedLine {
                    line,
                    detail: format!("duplicate multiplicity {multiplicity}"),
                });
            }
        }
        Self::from_map(counts)
    }

    /// Tallies raw per-class counts; zero counts (unobserved classes) are
    /// dropped. Errors if nothing was observed.
    pub fn from_counts(counts: impl IntoIterator<Item = u64>) -> Result<Self> {
        let mut map: BTreeMap<u64, u64> = BTreeMap::new();
        for count in counts {
            if count > 0 {
                *map.entry(count).or_insert(0) += 1;
            }
        }
        Self::from_map(map)
    }

    /// `n_j`; zero when the multiplicity is absent.
    #[must_use]
    pub fn frequency(&self, multiplicity: u64) -> u64 {
        self.counts.get(&multiplicity).copied().unwrap_or(0)
    }

    /// Number of singleton classes `n_1`.
    #[must_use]
    pub fn singletons(&self) -> u64 {
        self.frequency(1)
    }

    /// Number of doubleton classes `n_2`.
    #[must_use]
    pub fn doubletons(&self) -> u64 {
        self.frequency(2)
    }

    /// Observed distinct classes `D = sum n_j`.
    #[must_use]
    pub fn distinct(&self) -> u64 {
        self.distinct
    }

    /// Total observations `N = sum j * n_j`.
    #[must_use]
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Largest multiplicity present.
    #[must_use]
    pub fn max_multiplicity(&self) -> u64 {
        *self.counts.keys().next_back().expect("histogram is never empty")
    }

    /// `(multiplicity, frequency)` pairs in ascending multiplicity order.
    pub fn entries(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.counts.iter().map(|(&j, &n)| (j, n))
    }

    /// Renders the two-column text format accepted by [`CountHistogram::parse`].
    #[must_use]
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (j, n) in self.entries() {
            let _ = writeln!(out, "{j} {n}");
        }
        out
    }
}
