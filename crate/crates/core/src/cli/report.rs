//! Experiment reports: a provenance header, a tidy table of statistic
//! rows, and an overall pass/fail verdict with one message per failed
//! assertion.
//!
//! Reports render to pretty JSON or to CSV. The CSV body is the tidy
//! `experiment,n,statistic,value` table (one row per observation, ready
//! for plotting tools); the provenance header travels as `#`-prefixed
//! comment lines. [`parse_csv`] reads that table back and is strict:
//! anything it cannot parse is an error, not a skipped line.

use serde::Serialize;

use crate::cli::config::{ExperimentConfig, Source};
use crate::cli::thresholds;
use crate::{Error, Result};

/// One observation in tidy form. The `n` column is the instance size
/// the statistic refers to (0 when size does not apply, e.g. pointwise
/// kernel checks).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub experiment: String,
    pub n: u64,
    pub statistic: String,
    pub value: f64,
}

/// A full experiment report.
#[derive(Debug, Clone)]
pub struct Report {
    pub experiment: String,
    /// (key, value, source) of every resolved configuration entry.
    pub provenance: Vec<(String, String, Source)>,
    pub rows: Vec<Row>,
    /// One human-readable message per failed assertion; empty means pass.
    pub failures: Vec<String>,
}

impl Report {
    pub fn new(cfg: &ExperimentConfig) -> Self {
        Report {
            experiment: cfg.experiment.clone(),
            provenance: cfg.provenance.clone(),
            rows: Vec::new(),
            failures: Vec::new(),
        }
    }

    /// Append one observation row. Statistic names must stay comma-free
    /// so the CSV rendering needs no quoting.
    pub fn push_row(&mut self, n: u64, statistic: impl Into<String>, value: f64) {
        let statistic = statistic.into();
        debug_assert!(
            !statistic.contains(',') && !statistic.contains('\n'),
            "statistic names must be comma-free: {statistic}"
        );
        self.rows.push(Row { experiment: self.experiment.clone(), n, statistic, value });
    }

    /// Record an assertion: when `ok` is false the description is added
    /// to the failure list and the report as a whole fails.
    pub fn check(&mut self, ok: bool, description: impl Into<String>) {
        if !ok {
            self.failures.push(description.into());
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn to_json(&self) -> String {
        let provenance: Vec<_> = self
            .provenance
            .iter()
            .map(|(k, v, s)| {
                serde_json::json!({"key": k, "value": v, "source": s.to_string()})
            })
            .collect();
        let doc = serde_json::json!({
            "experiment": self.experiment,
            "provenance": provenance,
            "passed": self.passed(),
            "failures": self.failures,
            "rows": self.rows,
        });
        let mut text = serde_json::to_string_pretty(&doc).expect("report serialization");
        text.push('\n');
        text
    }

    pub fn to_csv(&self) -> String {
        let mut text = String::new();
        text.push_str(&format!("# experiment: {}\n", self.experiment));
        for (key, value, source) in &self.provenance {
            text.push_str(&format!("# config {key} = {value} ({source})\n"));
        }
        text.push_str(&format!("# passed: {}\n", self.passed()));
        for failure in &self.failures {
            text.push_str(&format!("# failure: {failure}\n"));
        }
        text.push_str(&emit_plot_data(&self.rows));
        text
    }

    pub fn render(&self, format: crate::cli::config::OutputFormat) -> String {
        match format {
            crate::cli::config::OutputFormat::Json => self.to_json(),
            crate::cli::config::OutputFormat::Csv => self.to_csv(),
        }
    }
}

/// Render rows as a tidy CSV table with the fixed header
/// `experiment,n,statistic,value`. No rows yields just the header line,
/// so downstream tooling always sees a well-formed (possibly empty)
/// table.
pub fn emit_plot_data(rows: &[Row]) -> String {
    let mut text = String::from("experiment,n,statistic,value\n");
    for row in rows {
        text.push_str(&format!("{},{},{},{}\n", row.experiment, row.n, row.statistic, row.value));
    }
    text
}

/// Strict inverse of [`emit_plot_data`]: `#` comment lines and blank
/// lines are ignored, the header must be present verbatim, and every
/// data line must have exactly four fields with numeric n and value.
pub fn parse_csv(text: &str) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    let mut saw_header = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        let lineno = idx + 1;
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        if !saw_header {
            if line != "experiment,n,statistic,value" {
                return Err(Error::Parse(format!(
                    "line {lineno}: expected header 'experiment,n,statistic,value', got '{line}'"
                )));
            }
            saw_header = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::Parse(format!(
                "line {lineno}: expected 4 comma-separated fields, got {}",
                fields.len()
            )));
        }
        let n: u64 = fields[1]
            .parse()
            .map_err(|_| Error::Parse(format!("line {lineno}: invalid n '{}'", fields[1])))?;
        let value: f64 = fields[3]
            .parse()
            .map_err(|_| Error::Parse(format!("line {lineno}: invalid value '{}'", fields[3])))?;
        rows.push(Row {
            experiment: fields[0].to_string(),
            n,
            statistic: fields[2].to_string(),
            value,
        });
    }
    if !saw_header {
        return Err(Error::Parse("missing CSV header 'experiment,n,statistic,value'".into()));
    }
    Ok(rows)
}

/// Extract the values of every row whose statistic matches, in emission
/// order. Convenience for tests and for assertions over report content.
pub fn values_for(rows: &[Row], statistic: &str) -> Vec<f64> {
    rows.iter().filter(|r| r.statistic == statistic).map(|r| r.value).collect()
}

/// Helper shared by experiments that sweep sizes: median of a slice.
pub fn median_of(values: &[f64]) -> f64 {
    crate::stats::median(values)
}

/// The pass count required for fraction-based gates (e.g. 8 of 10
/// goodness-of-fit pairs).
pub fn required_passes(total: usize) -> usize {
    (thresholds::GOF_PASS_FRACTION * total as f64).ceil() as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::config::{resolve, OutputFormat, Overlay};

    fn sample_report() -> Report {
        let cfg = resolve("degree-gamma", &Overlay::default(), &Overlay::default()).unwrap();
        let mut report = Report::new(&cfg);
        report.push_row(100, "ks", 0.0625);
        report.push_row(200, "ks", 0.05);
        report.push_row(400, "ks_median", 0.041);
        report
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let mut report = sample_report();
        report.push_row(0, "tiny", 1.25e-13);
        report.push_row(7, "negative", -3.5);
        let text = report.to_csv();
        let rows = parse_csv(&text).unwrap();
        assert_eq!(rows, report.rows);
    }

    #[test]
    fn empty_report_is_header_only_table() {
        let cfg = resolve("exact-small", &Overlay::default(), &Overlay::default()).unwrap();
        let report = Report::new(&cfg);
        let text = emit_plot_data(&report.rows);
        assert_eq!(text, "experiment,n,statistic,value\n");
        assert_eq!(parse_csv(&text).unwrap(), Vec::<Row>::new());
    }

    #[test]
    fn csv_parser_is_strict() {
        assert!(parse_csv("").is_err());
        assert!(parse_csv("wrong,header,line\n").is_err());
        assert!(parse_csv("experiment,n,statistic,value\na,b,c,d\n").is_err());
        assert!(parse_csv("experiment,n,statistic,value\na,1,c\n").is_err());
        assert!(parse_csv("experiment,n,statistic,value\na,1,c,1,extra\n").is_err());
        assert!(parse_csv("experiment,n,statistic,value\na,1,c,nope\n").is_err());
        // Comments and blank lines are fine anywhere.
        let rows =
            parse_csv("# hi\n\nexperiment,n,statistic,value\n# mid\nx,3,s,0.5\n\n").unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].n, 3);
        assert_eq!(rows[0].value, 0.5);
    }

    #[test]
    fn json_report_carries_verdict_and_provenance() {
        let mut report = sample_report();
        report.check(false, "demo failure");
        let doc: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(doc["experiment"], "degree-gamma");
        assert_eq!(doc["passed"], false);
        assert_eq!(doc["failures"][0], "demo failure");
        assert_eq!(doc["rows"][0]["statistic"], "ks");
        assert_eq!(doc["rows"][0]["n"], 100);
        let provenance = doc["provenance"].as_array().unwrap();
        assert!(provenance.iter().any(|p| p["key"] == "seed" && p["source"] == "default"));
    }

    #[test]
    fn csv_header_carries_provenance_and_verdict() {
        let report = sample_report();
        let text = report.render(OutputFormat::Csv);
        assert!(text.contains("# experiment: degree-gamma"));
        assert!(text.contains("# config n = 400 (default)"));
        assert!(text.contains("# passed: true"));
        assert!(text.lines().any(|l| l == "experiment,n,statistic,value"));
    }

    #[test]
    fn pass_fraction_rounds_up() {
        assert_eq!(required_passes(10), 8);
        assert_eq!(required_passes(5), 4);
        assert_eq!(required_passes(1), 1);
    }
}
