//! Per-image criteria spreadsheet (`image_id,c1..c7,total,accepted`).

use std::collections::BTreeSet;

use crate::criteria::{is_accepted, CriteriaReport, CRITERIA_COUNT};
use crate::error::{Error, Result};

pub const HEADER: [&str; 10] = [
    "image_id", "c1", "c2", "c3", "c4", "c5", "c6", "c7", "total", "accepted",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpreadsheetRow {
    pub image_id: String,
    pub criteria: [bool; CRITERIA_COUNT],
    pub total: u8,
    pub accepted: bool,
}

pub fn validate_image_id(id: &str) -> Result<()> {
    if id.is_empty() || id.contains([',', '\n', '\r', '"']) {
        return Err(Error::InvalidReport(format!(
            "image_id {id:?} must be non-empty without commas, quotes or newlines"
        )));
    }
    Ok(())
}

impl SpreadsheetRow {
    /// Row with total and verdict derived from the criteria.
    pub fn new(image_id: impl Into<String>, criteria: [bool; CRITERIA_COUNT]) -> Result<Self> {
        let image_id = image_id.into();
        validate_image_id(&image_id)?;
        let total = criteria.iter().filter(|&&c| c).count() as u8;
        Ok(Self {
            image_id,
            criteria,
            total,
            accepted: is_accepted(total),
        })
    }

    pub fn from_report(image_id: impl Into<String>, report: &CriteriaReport) -> Result<Self> {
        Self::new(image_id, report.vector())
    }

    fn check(&self) -> std::result::Result<(), String> {
        let sum = self.criteria.iter().filter(|&&c| c).count() as u8;
        if self.total != sum {
            return Err(format!("total is {} but criteria sum to {sum}", self.total));
        }
        if self.accepted != is_accepted(self.total) {
            return Err(format!(
                "accepted is {} but total {} implies {}",
                self.accepted as u8,
                self.total,
                is_accepted(self.total) as u8
            ));
        }
        Ok(())
    }
}

/// Serializes rows sorted by `image_id` (byte order) with LF line endings.
pub fn write_spreadsheet(rows: &[SpreadsheetRow]) -> Result<String> {
    let mut sorted: Vec<&SpreadsheetRow> = rows.iter().collect();
    sorted.sort_by(|a, b| a.image_id.as_bytes().cmp(b.image_id.as_bytes()));
    for pair in sorted.windows(2) {
        if pair[0].image_id == pair[1].image_id {
            return Err(Error::DuplicateKey(pair[0].image_id.clone()));
        }
    }
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::InvalidReport(e.to_string());
    writer.write_record(HEADER).map_err(csv_err)?;
    for row in sorted {
        validate_image_id(&row.image_id)?;
        row.check().map_err(Error::InvalidReport)?;
        let mut record = vec![row.image_id.clone()];
        record.extend(row.criteria.iter().map(|&c| (c as u8).to_string()));
        record.push(row.total.to_string());
        record.push((row.accepted as u8).to_string());
        writer.write_record(&record).map_err(csv_err)?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::InvalidReport(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output of utf-8 fields"))
}

fn parse_bit(field: &str, line: u64, column: &str) -> Result<bool> {
    match field {
        "0" => Ok(false),
        "1" => Ok(true),
        other => Err(Error::Parse {
            line,
            message: format!("column {column}: expected 0 or 1, got {other:?}"),
        }),
    }
}

/// Parses a spreadsheet, validating the header, binary cells and the
/// total/accepted invariants of every row.
pub fn read_spreadsheet(payload: &str) -> Result<Vec<SpreadsheetRow>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(payload.as_bytes());
    let mut rows = Vec::new();
    let mut seen = BTreeSet::new();
    let mut saw_header = false;
    for (index, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(index as u64 + 1, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(index as u64 + 1, |p| p.line());
        if index == 0 {
            if record.iter().ne(HEADER) {
                return Err(Error::Parse {
                    line,
                    message: format!("expected header `{}`", HEADER.join(",")),
                });
            }
            saw_header = true;
            continue;
        }
        if record.len() != HEADER.len() {
            return Err(Error::Parse {
                line,
                message: format!("expected {} fields, got {}", HEADER.len(), record.len()),
            });
        }
        let image_id = record[0].to_string();
        validate_image_id(&image_id).map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        let mut criteria = [false; CRITERIA_COUNT];
        for (i, c) in criteria.iter_mut().enumerate() {
            *c = parse_bit(&record[i + 1], line, HEADER[i + 1])?;
        }
        let total: u8 = record[8].parse().map_err(|_| Error::Parse {
            line,
            message: format!("column total: expected an integer 0..=7, got {:?}", &record[8]),
        })?;
        let accepted = parse_bit(&record[9], line, "accepted")?;
        let row = SpreadsheetRow {
            image_id,
            criteria,
            total,
            accepted,
        };
        row.check().map_err(|message| Error::Parse { line, message })?;
        if !seen.insert(row.image_id.clone()) {
            return Err(Error::Parse {
                line,
                message: format!("duplicate image_id {:?}", row.image_id),
            });
        }
        rows.push(row);
    }
    if !saw_header {
        return Err(Error::Parse {
            line: 1,
            message: "missing header".to_string(),
        });
    }
    Ok(rows)
}
