//! File formats: CSV datasets, value tables and curves, JSON reports and flat
//! `key = value` config files.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::apps::Curve;
use crate::error::{Error, Result};
use crate::model::Dataset;
use crate::run::ValuationReport;

/// Reads a CSV file with a header row. The `label` column holds integer class
/// ids; every other column is a numeric feature. Ids follow row order.
pub fn load_csv_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file);
    let headers = reader.headers()?.clone();
    let label_col = headers
        .iter()
        .position(|h| h == "label")
        .ok_or_else(|| Error::Format {
            path: path.to_owned(),
            message: "no `label` column in the header".into(),
        })?;
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Format {
            path: path.to_owned(),
            message: format!("row {}: {e}", row + 1),
        })?;
        let bad = |column: usize, message: String| Error::Parse {
            path: path.to_owned(),
            row: row + 1,
            column: headers.get(column).unwrap_or("?").to_owned(),
            message,
        };
        let mut point = Vec::with_capacity(headers.len() - 1);
        for (c, cell) in record.iter().enumerate() {
            if c == label_col {
                labels.push(
                    cell.parse::<usize>()
                        .map_err(|_| bad(c, format!("`{cell}` is not a class id")))?,
                );
            } else {
                let x = cell
                    .parse::<f64>()
                    .map_err(|_| bad(c, format!("`{cell}` is not a number")))?;
                if !x.is_finite() {
                    return Err(bad(c, format!("`{cell}` is not finite")));
                }
                point.push(x);
            }
        }
        features.push(point);
    }
    if labels.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Dataset::from_rows(features, labels)
}

/// Writes a dataset in the format read by [`load_csv_dataset`].
pub fn write_csv_dataset(path: impl AsRef<Path>, data: &Dataset) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    let mut header: Vec<String> = (0..data.dim()).map(|j| format!("x{j}")).collect();
    header.push("label".into());
    writer.write_record(&header)?;
    for p in data.points() {
        let mut row: Vec<String> = p.features.iter().map(|x| x.to_string()).collect();
        row.push(p.label.to_string());
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

/// `(id, value)` rows.
pub fn write_values_csv(path: impl AsRef<Path>, values: &[f64]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["id", "value"])?;
    for (id, v) in values.iter().enumerate() {
        writer.write_record([id.to_string(), v.to_string()])?;
    }
    writer.flush()?;
    Ok(())
}

/// `(step, accuracy)` rows.
pub fn write_curve_csv(path: impl AsRef<Path>, curve: &Curve) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["step", "accuracy"])?;
    for (x, y) in curve.x.iter().zip(&curve.y) {
        writer.write_record([x.to_string(), y.to_string()])?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_json<T: serde::Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn write_report(path: impl AsRef<Path>, report: &ValuationReport) -> Result<()> {
    write_json(path, report)
}

pub fn read_report(path: impl AsRef<Path>) -> Result<ValuationReport> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

/// Parses `key = value` lines. Blank lines and `#` comments are skipped; keys
/// may be written with or without leading dashes.
pub fn parse_config_text(text: &str, path: &Path) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Format {
            path: path.to_owned(),
            message: format!("line {}: expected `key = value`", i + 1),
        })?;
        let key = key.trim().trim_start_matches('-').replace('_', "-");
        out.insert(key, value.trim().to_owned());
    }
    Ok(out)
}

pub fn load_config_file(path: impl AsRef<Path>) -> Result<BTreeMap<String, String>> {
    let path = path.as_ref();
    parse_config_text(&fs::read_to_string(path)?, path)
}
