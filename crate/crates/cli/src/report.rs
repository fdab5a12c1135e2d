//! Report assembly and emission.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::config::{Level, TrialConfig};
use crate::suite::TrialRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub config: TrialConfig,
    pub level: Level,
    pub seed_derivation: String,
    pub trials: Vec<TrialRecord>,
    pub summary: Summary,
}

/// Aggregate over every verdict with the same id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalitySummary {
    pub count: usize,
    pub failures: usize,
    /// Smallest margin among evaluated verdicts.
    pub min_margin: Option<f64>,
    /// Smallest `margin / max(scale, 1)`.
    pub min_scaled_margin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureRef {
    pub trial: usize,
    pub seed: u64,
    pub id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub trials: usize,
    pub verdicts: usize,
    pub failures: usize,
    /// Equality verdicts (dyadic weights) that were confirmed.
    pub equality_cases: usize,
    pub by_inequality: BTreeMap<String, InequalitySummary>,
    pub failed: Vec<FailureRef>,
}

fn fmin(acc: Option<f64>, x: f64) -> Option<f64> {
    Some(acc.map_or(x, |a| a.min(x)))
}

impl Summary {
    pub fn from_trials(trials: &[TrialRecord]) -> Self {
        let mut by_inequality: BTreeMap<String, InequalitySummary> = BTreeMap::new();
        let mut failed = Vec::new();
        let mut verdicts = 0;
        let mut equality_cases = 0;
        for t in trials {
            for v in &t.verdicts {
                verdicts += 1;
                equality_cases += v.is_equality_case() as usize;
                let entry = by_inequality
                    .entry(v.id.clone())
                    .or_insert(InequalitySummary {
                        count: 0,
                        failures: 0,
                        min_margin: None,
                        min_scaled_margin: None,
                    });
                entry.count += 1;
                if let (Some(m), Some(s)) = (v.margin, v.scale) {
                    entry.min_margin = fmin(entry.min_margin, m);
                    entry.min_scaled_margin = fmin(entry.min_scaled_margin, m / s.max(1.0));
                }
                if !v.holds {
                    entry.failures += 1;
                    failed.push(FailureRef {
                        trial: t.trial,
                        seed: t.seed,
                        id: v.id.clone(),
                    });
                }
            }
        }
        Self {
            trials: trials.len(),
            verdicts,
            failures: failed.len(),
            equality_cases,
            by_inequality,
            failed,
        }
    }
}

fn csv_float(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Writes the report as one JSON document or as CSV rows
/// `trial, inequality_id, lhs_scale, margin, holds`.
pub fn write_report(
    report: &TrialReport,
    format: Format,
    out: &mut dyn Write,
) -> std::io::Result<()> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, report)?;
            writeln!(out)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["trial", "inequality_id", "lhs_scale", "margin", "holds"])?;
            for t in &report.trials {
                for v in &t.verdicts {
                    w.write_record([
                        t.trial.to_string(),
                        v.id.clone(),
                        csv_float(v.scale),
                        csv_float(v.margin),
                        v.holds.to_string(),
                    ])?;
                }
            }
            w.flush()
        }
    }
}

pub fn render_report(report: &TrialReport, format: Format) -> Vec<u8> {
    let mut buf = Vec::new();
    write_report(report, format, &mut buf).expect("writing to memory cannot fail");
    buf
}

/// Writes the report to `path`, replacing any existing file.
pub fn emit_report(report: &TrialReport, path: &Path, format: Format) -> std::io::Result<()> {
    std::fs::write(path, render_report(report, format))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::suite::run_suite;

    fn report(trials: usize) -> TrialReport {
        let config = TrialConfig {
            trials,
            depth: 16,
            ..TrialConfig::default()
        };
        run_suite(&config, Level::Scalar).unwrap()
    }

    #[test]
    fn empty_report_is_valid() {
        let r = report(0);
        let json: serde_json::Value =
            serde_json::from_slice(&render_report(&r, Format::Json)).unwrap();
        assert_eq!(json["trials"].as_array().unwrap().len(), 0);
        assert_eq!(json["summary"]["failures"], 0);
        let csv = String::from_utf8(render_report(&r, Format::Csv)).unwrap();
        assert_eq!(csv.trim(), "trial,inequality_id,lhs_scale,margin,holds");
    }

    #[test]
    fn json_round_trip() {
        let r = report(5);
        let back: TrialReport = serde_json::from_slice(&render_report(&r, Format::Json)).unwrap();
        assert_eq!(back.summary, r.summary);
        assert_eq!(Summary::from_trials(&back.trials), r.summary);
    }

    #[test]
    fn csv_rows_per_verdict() {
        let r = report(1);
        let text = render_report(&r, Format::Csv);
        let mut rd = csv::Reader::from_reader(text.as_slice());
        let rows: Vec<csv::StringRecord> = rd.records().map(|x| x.unwrap()).collect();
        assert_eq!(rows.len(), r.trials[0].verdicts.len());
        let ids: Vec<&str> = rows.iter().map(|row| row.get(1).unwrap()).collect();
        for id in [
            "y1",
            "y2",
            "y3",
            "y4",
            "y5",
            "y6",
            "re1-lower",
            "re2-lower",
            "e10-lower",
            "heinz-lower",
            "heinz-upper",
        ] {
            assert!(ids.contains(&id));
        }
    }

    #[test]
    fn emits_to_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.json");
        emit_report(&report(2), &path, Format::Json).unwrap();
        assert!(std::fs::read(&path).unwrap().ends_with(b"}\n"));
        assert!(emit_report(&report(0), &dir.path().join("missing/r.json"), Format::Json).is_err());
    }
}
