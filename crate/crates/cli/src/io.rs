//! CSV input (one observation per row, comma separated, optional header)
//! and report output.

use crate::runner::ExperimentReport;
use gofmult_core::{Dataset, Error, Result};
use std::path::Path;

/// Read a numeric CSV into a dataset. The dimension is the column count; a
/// single non-numeric first row is treated as a header.
pub fn read_csv(path: &Path) -> std::io::Result<Result<Dataset>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut dim = 0usize;
    for (idx, record) in reader.records().enumerate() {
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                return Ok(Err(Error::InvalidInput(format!(
                    "CSV parse error at row {}: {e}",
                    idx + 1
                ))))
            }
        };
        if record.is_empty() || (record.len() == 1 && record[0].is_empty()) {
            continue;
        }
        let mut row = Vec::with_capacity(record.len());
        let mut bad: Option<(usize, String)> = None;
        for (col, field) in record.iter().enumerate() {
            match field.parse::<f64>() {
                Ok(v) => row.push(v),
                Err(_) => {
                    bad = Some((col, field.to_string()));
                    break;
                }
            }
        }
        match bad {
            None => {
                if dim == 0 {
                    dim = row.len();
                } else if row.len() != dim {
                    return Ok(Err(Error::InvalidInput(format!(
                        "row {} has {} columns, expected {dim}",
                        idx + 1,
                        row.len()
                    ))));
                }
                rows.push(row);
            }
            Some((col, field)) => {
                // a non-numeric first row is a header; anywhere else it is an
                // error with its location
                if idx == 0 && rows.is_empty() {
                    continue;
                }
                return Ok(Err(Error::InvalidInput(format!(
                    "non-numeric value `{field}` at row {}, column {}",
                    idx + 1,
                    col + 1
                ))));
            }
        }
    }
    if rows.is_empty() {
        return Ok(Err(Error::InvalidInput("no data rows in CSV".into())));
    }
    Ok(Dataset::from_rows(rows))
}

/// One CSV line per experiment cell.
pub fn write_report_csv(path: &Path, report: &ExperimentReport) -> std::io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "true_family",
        "n",
        "hypothesis",
        "statistic",
        "method",
        "reps",
        "rejections",
        "rate",
        "se",
        "mean_time_s",
        "failures",
    ])?;
    for c in &report.cells {
        w.write_record([
            report.config.true_model.family.clone(),
            c.n.to_string(),
            c.hypothesis.clone(),
            c.statistic.label().to_string(),
            c.method.label().to_string(),
            c.reps_used.to_string(),
            c.rejections.to_string(),
            format!("{:.6}", c.rate),
            format!("{:.6}", c.se),
            format!("{:.6}", c.mean_wall_time),
            c.failures.to_string(),
        ])?;
    }
    w.flush()
}

pub fn write_manifest_json(path: &Path, report: &ExperimentReport) -> std::io::Result<()> {
    let manifest = serde_json::json!({
        "version": env!("CARGO_PKG_VERSION"),
        "config": report.config,
        "cells": report.cells,
    });
    std::fs::write(path, serde_json::to_string_pretty(&manifest).unwrap())
}
