//! One report schema, two renderings.
//!
//! The JSON and TSV forms carry exactly the same values; only the framing
//! differs. Optional fields are filled by the bootstrap and skipped
//! entirely otherwise, in both formats.

use std::fmt::Write as _;

use richness::bootstrap::BootstrapSummary;
use richness::RichnessEstimate;
use serde::Serialize;

/// Output framing for reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    /// `key<TAB>value` lines; list values comma separated.
    Tsv,
    /// A single JSON object.
    Json,
}

/// Everything a run reports. Field order is the pinned schema.
#[derive(Debug, Serialize)]
pub struct Report {
    /// Estimated number of unobserved classes.
    pub n0_hat: f64,
    /// Estimated total classes: observed distinct plus `n0_hat`.
    pub s_hat: f64,
    /// Quadrature points used.
    pub order: usize,
    /// True when the answer degenerated to the one-point ratio rule.
    pub fallback: bool,
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    /// Median of the bootstrap replicate `n0_hat` values.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bagged: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bagged_s: Option<f64>,
    /// Within-replicate plus between-replicate variance.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub var_within: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub var_between: Option<f64>,
    /// 95% percentile interval for the unobserved count.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ci: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicates: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_failed: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Report {
    pub fn from_estimate(e: &RichnessEstimate) -> Self {
        Report {
            n0_hat: e.n0_hat,
            s_hat: e.s_hat,
            order: e.order,
            fallback: e.fallback,
            points: e.rule.points.clone(),
            weights: e.rule.weights.clone(),
            bagged: None,
            bagged_s: None,
            variance: None,
            var_within: None,
            var_between: None,
            ci: None,
            replicates: None,
            n_failed: None,
            seed: None,
        }
    }

    pub fn from_bootstrap(point: &RichnessEstimate, bag: &BootstrapSummary) -> Self {
        let mut report = Report::from_estimate(point);
        report.bagged = Some(bag.bagged_n0);
        report.bagged_s = Some(bag.bagged_s);
        report.variance = Some(bag.variance);
        report.var_within = Some(bag.var_within);
        report.var_between = Some(bag.var_between);
        report.ci = Some([bag.ci_lower, bag.ci_upper]);
        report.replicates = Some(bag.replicates);
        report.n_failed = Some(bag.n_failed);
        report.seed = Some(bag.seed);
        report
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Tsv => self.to_tsv(),
            Format::Json => {
                let mut text =
                    serde_json::to_string(self).expect("the report serializes infallibly");
                text.push('\n');
                text
            }
        }
    }

    fn to_tsv(&self) -> String {
        let mut out = String::new();
        let mut row = |key: &str, value: String| {
            let _ = writeln!(out, "{key}\t{value}");
        };
        row("n0_hat", self.n0_hat.to_string());
        row("s_hat", self.s_hat.to_string());
        row("order", self.order.to_string());
        row("fallback", self.fallback.to_string());
        row("points", join(&self.points));
        row("weights", join(&self.weights));
        if let Some(v) = self.bagged {
            row("bagged", v.to_string());
        }
        if let Some(v) = self.bagged_s {
            row("bagged_s", v.to_string());
        }
        if let Some(v) = self.variance {
            row("variance", v.to_string());
        }
        if let Some(v) = self.var_within {
            row("var_within", v.to_string());
        }
        if let Some(v) = self.var_between {
            row("var_between", v.to_string());
        }
        if let Some([lo, hi]) = self.ci {
            row("ci", format!("{lo},{hi}"));
        }
        if let Some(v) = self.replicates {
            row("replicates", v.to_string());
        }
        if let Some(v) = self.n_failed {
            row("n_failed", v.to_string());
        }
        if let Some(v) = self.seed {
            row("seed", v.to_string());
        }
        out
    }
}

fn join(values: &[f64]) -> String {
    values.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

#[cfg(test)]
mod tests {
    use super::*;
    use richness::{estimate, CountHistogram};

    fn fixture() -> RichnessEstimate {
        let h = CountHistogram::new([(1, 100), (2, 40), (3, 20), (4, 10)]).unwrap();
        estimate(&h, 10, 1e-8).unwrap()
    }

    #[test]
    fn estimate_report_skips_bootstrap_fields() {
        let report = Report::from_estimate(&fixture());
        let json = report.render(Format::Json);
        assert!(!json.contains("bagged"));
        assert!(!json.contains("seed"));
        let tsv = report.render(Format::Tsv);
        assert!(!tsv.contains("bagged"));
        assert!(tsv.starts_with("n0_hat\t"));
    }

    #[test]
    fn tsv_and_json_carry_the_same_values() {
        let report = Report::from_estimate(&fixture());
        let json: serde_json::Value = serde_json::from_str(&report.render(Format::Json)).unwrap();
        let tsv = report.render(Format::Tsv);
        let rows: std::collections::HashMap<&str, &str> = tsv
            .lines()
            .map(|line| line.split_once('\t').expect("every row is key<TAB>value"))
            .collect();
        assert_eq!(rows["n0_hat"].parse::<f64>().unwrap(), json["n0_hat"].as_f64().unwrap());
        assert_eq!(rows["order"].parse::<u64>().unwrap(), json["order"].as_u64().unwrap());
        assert_eq!(rows["fallback"], json["fallback"].to_string());
        let tsv_points: Vec<f64> =
            rows["points"].split(',').map(|v| v.parse().unwrap()).collect();
        let json_points: Vec<f64> =
            json["points"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
        assert_eq!(tsv_points, json_points);
    }

    #[test]
    fn json_rendering_is_stable_across_calls() {
        let report = Report::from_estimate(&fixture());
        assert_eq!(report.render(Format::Json), report.render(Format::Json));
    }
}
