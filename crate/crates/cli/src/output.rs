//! Flat result rows and the CSV/JSON writers.
//!
//! Every command flattens its findings into the same record shape so
//! downstream tooling can concatenate runs. Fields that do not apply to a
//! row stay empty in CSV and null in JSON.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;

pub const SCHEMA_VERSION: u32 = 1;
#[cfg(test)]
pub const CSV_HEADER: &str =
    "experiment,field_family,marking,lambda,n,s,mu,p,value,ci_low,ci_high,reps,seed,leakage_budget";

/// One measured (or derived) number with its provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    pub field_family: String,
    pub marking: String,
    pub lambda: Option<f64>,
    pub n: Option<f64>,
    pub s: Option<f64>,
    pub mu: Option<f64>,
    pub p: Option<f64>,
    pub value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Zero for closed-form rows.
    pub reps: u64,
    pub seed: u64,
    pub leakage_budget: f64,
}

/// Everything a JSON report carries. `timing` is wall-clock and is the one
/// field excluded when comparing runs for reproducibility.
#[derive(Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub results: Vec<ResultRow>,
    pub timing: Timing,
}

#[derive(Serialize, Deserialize)]
pub struct Timing {
    pub wall_seconds: f64,
}

pub fn write_csv<W: Write>(writer: W, rows: &[ResultRow]) -> std::io::Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    for row in rows {
        out.serialize(row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_json<W: Write>(
    mut writer: W,
    config: &ExperimentConfig,
    rows: &[ResultRow],
    wall_seconds: f64,
) -> std::io::Result<()> {
    let report = Report {
        schema_version: SCHEMA_VERSION,
        config: config.clone(),
        results: rows.to_vec(),
        timing: Timing { wall_seconds },
    };
    serde_json::to_writer_pretty(&mut writer, &report)?;
    writeln!(writer)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_row() -> ResultRow {
        ResultRow {
            experiment: "point_coverage".into(),
            field_family: "point_mass".into(),
            marking: "iid".into(),
            lambda: Some(0.25),
            n: None,
            s: None,
            mu: None,
            p: None,
            value: 0.5,
            ci_low: 0.4,
            ci_high: 0.6,
            reps: 100,
            seed: 7,
            leakage_budget: 0.0,
        }
    }

    #[test]
    fn csv_header_is_pinned() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &[sample_row()]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        let record = lines.next().unwrap();
        assert!(record.starts_with("point_coverage,point_mass,iid,0.25,,,,,0.5,"));
    }

    #[test]
    fn empty_cells_stay_empty() {
        let mut row = sample_row();
        row.lambda = None;
        row.mu = Some(4.0);
        row.p = Some(0.5);
        let mut buf = Vec::new();
        write_csv(&mut buf, &[row]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let record = text.lines().nth(1).unwrap();
        let cells: Vec<&str> = record.split(',').collect();
        assert_eq!(cells[3], "");
        assert_eq!(cells[6], "4.0");
        assert_eq!(cells[7], "0.5");
    }
}
