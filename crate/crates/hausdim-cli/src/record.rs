//! Result records and their lossless serialization.
//!
//! Every real number is rendered in scientific notation with 17
//! significant digits, which round-trips any finite double exactly, so
//! serialize, parse, serialize is a fixed point.

use std::fs::OpenOptions;
use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use hausdim::DimensionBracket;

use crate::config::RunConfig;

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("serialization failed: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv writing failed: {0}")]
    Csv(#[from] csv::Error),
}

/// One certified endpoint as recorded on disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertificateRecord {
    pub s: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatsRecord {
    pub assemblies: usize,
    pub power_iterations: usize,
    pub certify_calls: usize,
}

/// Serializable mirror of a certified bracket.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketRecord {
    pub s_lower: f64,
    pub s_upper: f64,
    pub width: f64,
    pub cert_lower: CertificateRecord,
    pub cert_upper: CertificateRecord,
    pub h: f64,
    pub truncation_radius: Option<f64>,
    pub tail_constant: Option<f64>,
    pub stats: StatsRecord,
}

impl From<&DimensionBracket> for BracketRecord {
    fn from(bracket: &DimensionBracket) -> Self {
        BracketRecord {
            s_lower: bracket.s_lower,
            s_upper: bracket.s_upper,
            width: bracket.width(),
            cert_lower: CertificateRecord {
                s: bracket.cert_lower.s,
                value: bracket.cert_lower.value,
            },
            cert_upper: CertificateRecord {
                s: bracket.cert_upper.s,
                value: bracket.cert_upper.value,
            },
            h: bracket.h,
            truncation_radius: bracket.truncation_radius,
            tail_constant: bracket.tail_constant,
            stats: StatsRecord {
                assemblies: bracket.stats.assemblies,
                power_iterations: bracket.stats.power_iterations,
                certify_calls: bracket.stats.certify_calls,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub total_ms: f64,
}

/// Everything needed to audit or replay one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub config: RunConfig,
    pub bracket: BracketRecord,
    pub timings: Timings,
    pub version: String,
    pub timestamp: String,
}

impl ResultRecord {
    pub fn new(config: RunConfig, bracket: &DimensionBracket, total_ms: f64) -> Self {
        ResultRecord {
            config,
            bracket: BracketRecord::from(bracket),
            timings: Timings { total_ms },
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: now_rfc3339(),
        }
    }
}

fn now_rfc3339() -> String {
    time::OffsetDateTime::now_utc()
        .format(&time::format_description::well_known::Rfc3339)
        .unwrap_or_else(|_| "unknown".to_string())
}

/// Renders a real with 17 significant digits.
pub fn format_f64(value: f64) -> String {
    format!("{value:.16e}")
}

struct SciFormatter;

impl serde_json::ser::Formatter for SciFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.16e}")
    }
}

/// Serializes a record to a single JSON line (no trailing newline).
pub fn to_json_line(record: &ResultRecord) -> Result<String, RecordError> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SciFormatter);
    record.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

pub fn parse_json_line(line: &str) -> Result<ResultRecord, RecordError> {
    Ok(serde_json::from_str(line)?)
}

/// Appends one JSON record line to the results ledger.
pub fn append_ndjson(path: &Path, record: &ResultRecord) -> Result<(), RecordError> {
    let line = to_json_line(record)?;
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|source| RecordError::Io {
            path: path.display().to_string(),
            source,
        })?;
    writeln!(file, "{line}").map_err(|source| RecordError::Io {
        path: path.display().to_string(),
        source,
    })
}

const CSV_HEADER: [&str; 17] = [
    "problem",
    "h",
    "truncation_radius",
    "tol_s",
    "tol_eig",
    "safety_factor",
    "s_lower",
    "s_upper",
    "width",
    "cert_lower_value",
    "cert_upper_value",
    "tail_constant",
    "assemblies",
    "power_iterations",
    "certify_calls",
    "total_ms",
    "timestamp",
];

/// Appends one row to a CSV ledger, writing the header only when the
/// file is new or empty. CSV output is write-only by design.
pub fn append_csv(path: &Path, record: &ResultRecord) -> Result<(), RecordError> {
    let fresh = std::fs::metadata(path)
        .map(|m| m.len() == 0)
        .unwrap_or(true);
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|source| RecordError::Io {
            path: path.display().to_string(),
            source,
        })?;
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(file);
    if fresh {
        writer.write_record(CSV_HEADER)?;
    }
    let opt = |v: Option<f64>| v.map(format_f64).unwrap_or_default();
    writer.write_record([
        record.config.problem.to_string(),
        format_f64(record.config.h),
        format_f64(record.config.truncation_radius),
        format_f64(record.config.tol_s),
        format_f64(record.config.tol_eig),
        format_f64(record.config.safety_factor),
        format_f64(record.bracket.s_lower),
        format_f64(record.bracket.s_upper),
        format_f64(record.bracket.width),
        format_f64(record.bracket.cert_lower.value),
        format_f64(record.bracket.cert_upper.value),
        opt(record.bracket.tail_constant),
        record.bracket.stats.assemblies.to_string(),
        record.bracket.stats.power_iterations.to_string(),
        record.bracket.stats.certify_calls.to_string(),
        format_f64(record.timings.total_ms),
        record.timestamp.clone(),
    ])?;
    writer.flush().map_err(|source| RecordError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{OutputFormat, ProblemSpec, RunConfig};

    fn sample_record() -> ResultRecord {
        let config = RunConfig {
            problem: ProblemSpec::Cantor { digits: vec![1, 2] },
            h: 1e-3,
            truncation_radius: 100.0,
            tol_s: 1e-12,
            tol_eig: 1e-12,
            margin_rings: 1,
            refine_depth: 2,
            safety_factor: 1.0 + 1e-12,
            jobs: None,
            out: None,
            format: OutputFormat::Json,
            dump_matrix: None,
        };
        ResultRecord {
            config,
            bracket: BracketRecord {
                s_lower: 0.5312805055,
                s_upper: 0.5312805066,
                width: 1.1e-9,
                cert_lower: CertificateRecord {
                    s: 0.5312805055,
                    value: 1.0000000001,
                },
                cert_upper: CertificateRecord {
                    s: 0.5312805066,
                    value: 0.9999999999,
                },
                h: 1e-3,
                truncation_radius: None,
                tail_constant: None,
                stats: StatsRecord {
                    assemblies: 31,
                    power_iterations: 4200,
                    certify_calls: 29,
                },
            },
            timings: Timings { total_ms: 123.456 },
            version: "0.1.0".to_string(),
            timestamp: "2024-01-01T00:00:00Z".to_string(),
        }
    }

    #[test]
    fn json_round_trip_is_a_fixed_point() {
        let record = sample_record();
        let line = to_json_line(&record).unwrap();
        let parsed = parse_json_line(&line).unwrap();
        assert_eq!(parsed, record);
        let line2 = to_json_line(&parsed).unwrap();
        assert_eq!(line, line2);
    }

    #[test]
    fn seventeen_digit_rendering_is_lossless() {
        for &x in &[
            0.1,
            2.0f64.ln() / 3.0f64.ln(),
            5.2246592638659e-2,
            1.0 + 1e-12,
            6.02e23,
            -3.7e-300,
        ] {
            let text = format_f64(x);
            let back: f64 = text.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{text} failed to round-trip");
        }
    }

    #[test]
    fn ndjson_appends_one_line_per_record() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ledger.ndjson");
        let record = sample_record();
        append_ndjson(&path, &record).unwrap();
        append_ndjson(&path, &record).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(parse_json_line(lines[0]).unwrap(), record);
        assert_eq!(parse_json_line(lines[1]).unwrap(), record);
    }

    #[test]
    fn csv_writes_a_single_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ledger.csv");
        let record = sample_record();
        append_csv(&path, &record).unwrap();
        append_csv(&path, &record).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("problem,h,"));
        assert!(lines[1].starts_with("\"E[1,2]\","));
        assert_eq!(lines[1], lines[2]);
    }
}
