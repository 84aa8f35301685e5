//! `sample_id,uncertainty,correct[,<parent>...]` records.

use std::collections::BTreeMap;

use super::ParseError;
use crate::bn::State;
use crate::calibration::{CalibrationRecord, CalibrationRecordSet};

const FIXED: [&str; 3] = ["sample_id", "uncertainty", "correct"];

fn csv_error(row: usize, column: &str, message: impl Into<String>) -> ParseError {
    ParseError::Csv {
        row,
        column: column.to_string(),
        message: message.into(),
    }
}

pub fn parse_calibration_csv(text: &str) -> Result<CalibrationRecordSet, ParseError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut records = reader.records();

    let header = match records.next() {
        None => return Err(csv_error(1, "sample_id", "missing header row")),
        Some(Err(e)) => return Err(from_csv(e)),
        Some(Ok(h)) => h,
    };
    let header_row = row_of(&header);
    let names: Vec<&str> = header.iter().collect();
    if names.len() < FIXED.len() || names[..FIXED.len()] != FIXED {
        return Err(csv_error(
            header_row,
            names.first().copied().unwrap_or("sample_id"),
            format!("header must start with {}", FIXED.join(",")),
        ));
    }
    let parent_columns: Vec<String> = names[FIXED.len()..].iter().map(|s| s.to_string()).collect();
    for (i, p) in parent_columns.iter().enumerate() {
        if p.is_empty() || parent_columns[..i].contains(p) || FIXED.contains(&p.as_str()) {
            return Err(csv_error(
                header_row,
                p,
                "parent column names must be unique and non-empty",
            ));
        }
    }

    let mut out = Vec::new();
    for rec in records {
        let rec = rec.map_err(from_csv)?;
        let row = row_of(&rec);
        if rec.len() != names.len() {
            return Err(csv_error(
                row,
                names
                    .get(rec.len())
                    .copied()
                    .unwrap_or(names[names.len() - 1]),
                format!("expected {} fields, found {}", names.len(), rec.len()),
            ));
        }
        let sample_id = rec[0].to_string();
        if sample_id.is_empty() {
            return Err(csv_error(row, "sample_id", "empty sample id"));
        }
        let uncertainty: f64 = rec[1]
            .parse()
            .map_err(|_| csv_error(row, "uncertainty", format!("`{}` is not a number", &rec[1])))?;
        if !uncertainty.is_finite() || uncertainty < 0.0 {
            return Err(csv_error(
                row,
                "uncertainty",
                format!("uncertainty must be finite and >= 0, got `{}`", &rec[1]),
            ));
        }
        let correct = match &rec[2] {
            "true" => true,
            "false" => false,
            other => {
                return Err(csv_error(
                    row,
                    "correct",
                    format!("`{other}` is not true or false"),
                ))
            }
        };
        let parent_states = if parent_columns.is_empty() {
            None
        } else {
            let mut states = BTreeMap::new();
            for (col, value) in parent_columns.iter().zip(rec.iter().skip(FIXED.len())) {
                let state = match value {
                    "L" => State::Low,
                    "H" => State::High,
                    other => return Err(csv_error(row, col, format!("`{other}` is not L or H"))),
                };
                states.insert(col.clone(), state);
            }
            Some(states)
        };
        out.push(CalibrationRecord {
            sample_id,
            uncertainty,
            correct,
            parent_states,
        });
    }
    Ok(CalibrationRecordSet {
        parent_columns,
        records: out,
    })
}

fn row_of(rec: &csv::StringRecord) -> usize {
    rec.position().map_or(1, |p| p.line() as usize)
}

fn from_csv(e: csv::Error) -> ParseError {
    let row = e.position().map_or(1, |p| p.line() as usize);
    csv_error(row, "", e.to_string())
}
