//! Result tables and their serialized forms. Emission is deterministic:
//! fixed column order, insertion-ordered rows, shortest round-trip number
//! formatting, and no timestamps. Wall-time columns are opt-in so default
//! outputs depend only on the seed.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RateKind {
    /// Fraction of no-drift trials flagged; only on `scenario = "none"` rows.
    Fpr,
    /// Fraction of drifted trials missed; only on drift rows.
    Fnr,
}

impl RateKind {
    fn as_str(self) -> &'static str {
        match self {
            RateKind::Fpr => "fpr",
            RateKind::Fnr => "fnr",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        match s {
            "fpr" => Ok(RateKind::Fpr),
            "fnr" => Ok(RateKind::Fnr),
            other => Err(HarnessError::Invalid {
                what: "rate kind",
                detail: format!("expected fpr or fnr, got {other:?}"),
            }),
        }
    }
}

/// One (approach, scenario, ζ) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub approach: String,
    /// "none", "mean", "var", or "cov".
    pub scenario: String,
    pub zeta: f64,
    pub kind: RateKind,
    pub rate: f64,
    pub trials: usize,
    /// Mean per-trial detector wall time; written only with timings enabled.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mean_wall_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    /// "default", or a note naming the budget substitutions in effect.
    pub profile: String,
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn new(profile: impl Into<String>) -> Self {
        ResultTable {
            profile: profile.into(),
            rows: Vec::new(),
        }
    }

    /// The table with wall times dropped, for comparisons across runs.
    pub fn without_timings(&self) -> ResultTable {
        ResultTable {
            profile: self.profile.clone(),
            rows: self
                .rows
                .iter()
                .map(|r| ResultRow {
                    mean_wall_ms: None,
                    ..r.clone()
                })
                .collect(),
        }
    }
}

/// Pooled decision accuracy per approach (correct / total across all cells).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyTable {
    pub rows: Vec<AccuracyRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyRow {
    pub approach: String,
    pub correct: usize,
    pub total: usize,
    pub accuracy: f64,
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| HarnessError::io(parent, e))?;
        }
    }
    std::fs::write(path, contents).map_err(|e| HarnessError::io(path, e))
}

pub fn table_to_csv(table: &ResultTable, timings: bool) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# driftwatch results");
    let _ = writeln!(out, "# profile: {}", table.profile);
    let header = if timings {
        "approach,scenario,zeta,kind,rate,trials,mean_wall_ms"
    } else {
        "approach,scenario,zeta,kind,rate,trials"
    };
    let _ = writeln!(out, "{header}");
    for row in &table.rows {
        let _ = write!(
            out,
            "{},{},{},{},{},{}",
            row.approach,
            row.scenario,
            row.zeta,
            row.kind.as_str(),
            row.rate,
            row.trials
        );
        if timings {
            let _ = write!(out, ",{}", row.mean_wall_ms.unwrap_or(0.0));
        }
        out.push('\n');
    }
    out
}

/// Reads a table written by [`table_to_csv`]. Timing columns, when present,
/// are restored; otherwise rows come back with no wall time.
pub fn load_result_table(path: &Path) -> Result<ResultTable> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    let mut profile = String::from("default");
    let mut rows = Vec::new();
    let mut saw_header = false;
    for (line_no, line) in text.lines().enumerate() {
        if let Some(rest) = line.strip_prefix("# profile: ") {
            profile = rest.to_string();
            continue;
        }
        if line.starts_with('#') || line.is_empty() {
            continue;
        }
        if !saw_header {
            saw_header = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 && fields.len() != 7 {
            return Err(HarnessError::Parse {
                path: path.into(),
                row: line_no + 1,
                col: 0,
                detail: format!("expected 6 or 7 fields, found {}", fields.len()),
            });
        }
        let field = |idx: usize, what: &'static str| -> Result<f64> {
            fields[idx].parse::<f64>().map_err(|_| HarnessError::Parse {
                path: path.into(),
                row: line_no + 1,
                col: idx + 1,
                detail: format!("bad {what}: {:?}", fields[idx]),
            })
        };
        rows.push(ResultRow {
            approach: fields[0].to_string(),
            scenario: fields[1].to_string(),
            zeta: field(2, "zeta")?,
            kind: RateKind::parse(fields[3])?,
            rate: field(4, "rate")?,
            trials: field(5, "trial count")? as usize,
            mean_wall_ms: if fields.len() == 7 {
                Some(field(6, "wall time")?)
            } else {
                None
            },
        });
    }
    Ok(ResultTable { profile, rows })
}

pub fn table_to_json(table: &ResultTable, timings: bool) -> String {
    let view = if timings {
        table.clone()
    } else {
        table.without_timings()
    };
    let mut s = serde_json::to_string_pretty(&view).expect("table serialization is infallible");
    s.push('\n');
    s
}

/// One gnuplot-style series per (approach, drift scenario): ζ then rate.
pub fn table_to_plotdata(table: &ResultTable) -> Vec<(String, String)> {
    let mut series: Vec<(String, String)> = Vec::new();
    for row in &table.rows {
        if row.scenario == "none" {
            continue;
        }
        let name = format!("{}_{}", row.approach, row.scenario);
        let idx = match series.iter().position(|(n, _)| *n == name) {
            Some(i) => i,
            None => {
                let header = format!(
                    "# series: {} / {} (profile: {})\n# zeta rate\n",
                    row.approach, row.scenario, table.profile
                );
                series.push((name, header));
                series.len() - 1
            }
        };
        let _ = writeln!(series[idx].1, "{} {}", row.zeta, row.rate);
    }
    series
}

/// Writes the table in each requested format under `dir`; returns the paths.
pub fn emit_report(
    table: &ResultTable,
    formats: &[crate::OutputFormat],
    dir: &Path,
    basename: &str,
    timings: bool,
) -> Result<Vec<PathBuf>> {
    if table.rows.is_empty() {
        return Err(HarnessError::Invalid {
            what: "table",
            detail: "refusing to emit an empty table".into(),
        });
    }
    let mut written = Vec::new();
    for format in formats {
        match format {
            crate::OutputFormat::Csv => {
                let path = dir.join(format!("{basename}.csv"));
                write_file(&path, &table_to_csv(table, timings))?;
                written.push(path);
            }
            crate::OutputFormat::Json => {
                let path = dir.join(format!("{basename}.json"));
                write_file(&path, &table_to_json(table, timings))?;
                written.push(path);
            }
            crate::OutputFormat::Plotdata => {
                for (name, body) in table_to_plotdata(table) {
                    let path = dir.join(format!("{basename}_{name}.dat"));
                    write_file(&path, &body)?;
                    written.push(path);
                }
            }
        }
    }
    Ok(written)
}

pub fn accuracy_to_csv(table: &AccuracyTable) -> String {
    let mut out = String::from("approach,correct,total,accuracy\n");
    for row in &table.rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            row.approach, row.correct, row.total, row.accuracy
        );
    }
    out
}

pub fn emit_accuracy(
    table: &AccuracyTable,
    formats: &[crate::OutputFormat],
    dir: &Path,
    basename: &str,
) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for format in formats {
        match format {
            crate::OutputFormat::Csv => {
                let path = dir.join(format!("{basename}.csv"));
                write_file(&path, &accuracy_to_csv(table))?;
                written.push(path);
            }
            crate::OutputFormat::Json => {
                let path = dir.join(format!("{basename}.json"));
                let mut body =
                    serde_json::to_string_pretty(table).expect("accuracy serialization");
                body.push('\n');
                write_file(&path, &body)?;
                written.push(path);
            }
            // Accuracy is a single number per approach; nothing to plot.
            crate::OutputFormat::Plotdata => {}
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_table() -> ResultTable {
        ResultTable {
            profile: "default".into(),
            rows: vec![
                ResultRow {
                    approach: "emd-bd".into(),
                    scenario: "none".into(),
                    zeta: 0.0,
                    kind: RateKind::Fpr,
                    rate: 0.04,
                    trials: 100,
                    mean_wall_ms: Some(12.5),
                },
                ResultRow {
                    approach: "emd-bd".into(),
                    scenario: "var".into(),
                    zeta: 1.05,
                    kind: RateKind::Fnr,
                    rate: 0.0,
                    trials: 100,
                    mean_wall_ms: Some(13.25),
                },
                ResultRow {
                    approach: "emd-bd".into(),
                    scenario: "var".into(),
                    zeta: 1.1,
                    kind: RateKind::Fnr,
                    rate: 0.01,
                    trials: 100,
                    mean_wall_ms: Some(13.0),
                },
            ],
        }
    }

    #[test]
    fn csv_round_trips() {
        let table = sample_table();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");

        write_file(&path, &table_to_csv(&table, false)).unwrap();
        let reloaded = load_result_table(&path).unwrap();
        assert_eq!(reloaded, table.without_timings());

        write_file(&path, &table_to_csv(&table, true)).unwrap();
        let with_times = load_result_table(&path).unwrap();
        assert_eq!(with_times, table, "timing columns round-trip bit-exactly");
    }

    #[test]
    fn emission_is_deterministic_and_timing_free_by_default() {
        let table = sample_table();
        assert_eq!(
            table_to_csv(&table, false),
            table_to_csv(&table, false)
        );
        assert!(!table_to_csv(&table, false).contains("12.5"));
        assert!(table_to_csv(&table, true).contains("12.5"));
        assert!(!table_to_json(&table, false).contains("mean_wall_ms"));
    }

    #[test]
    fn plotdata_groups_series_and_skips_the_null_cell() {
        let series = table_to_plotdata(&sample_table());
        assert_eq!(series.len(), 1);
        let (name, body) = &series[0];
        assert_eq!(name, "emd-bd_var");
        let data_lines: Vec<&str> =
            body.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(data_lines, vec!["1.05 0", "1.1 0.01"]);
    }

    #[test]
    fn emit_writes_requested_formats() {
        let dir = tempfile::tempdir().unwrap();
        let paths = emit_report(
            &sample_table(),
            &[
                crate::OutputFormat::Csv,
                crate::OutputFormat::Json,
                crate::OutputFormat::Plotdata,
            ],
            dir.path(),
            "grid",
            false,
        )
        .unwrap();
        assert_eq!(paths.len(), 3);
        for p in &paths {
            assert!(p.exists(), "{} missing", p.display());
        }
        let empty = ResultTable::new("default");
        assert!(emit_report(&empty, &[crate::OutputFormat::Csv], dir.path(), "x", false).is_err());
    }
}
