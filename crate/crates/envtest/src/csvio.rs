//! CSV ingestion: two-column numeric or categorical data files
//! (RFC 4180 subset, UTF-8), with optional header.

use std::path::Path;

use crate::error::{Error, Result};

fn open_reader(path: &Path, has_headers: bool) -> Result<csv::Reader<std::fs::File>> {
    csv::ReaderBuilder::new()
        .has_headers(has_headers)
        .flexible(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Csv {
            line: 0,
            message: format!("cannot open {}: {e}", path.display()),
        })
}

fn record_line(record: &csv::StringRecord) -> u64 {
    record.position().map_or(0, |p| p.line())
}

/// Reads two numeric columns. With `header = None` the first row is sniffed:
/// if both cells parse as numbers it is data, otherwise it is a header.
pub fn read_numeric_pairs(path: &Path, header: Option<bool>) -> Result<(Vec<f64>, Vec<f64>)> {
    // Sniff on a raw (headerless) reader so the first record is visible.
    let mut reader = open_reader(path, false)?;
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut first = true;
    for record in reader.records() {
        let record = record.map_err(|e| Error::Csv {
            line: 0,
            message: format!("malformed csv: {e}"),
        })?;
        let line = record_line(&record);
        if record.len() != 2 {
            return Err(Error::Csv {
                line,
                message: format!("expected 2 columns, found {}", record.len()),
            });
        }
        let parsed = (record[0].parse::<f64>(), record[1].parse::<f64>());
        if first {
            first = false;
            let is_header = match header {
                Some(h) => h,
                None => parsed.0.is_err() || parsed.1.is_err(),
            };
            if is_header {
                continue;
            }
        }
        match parsed {
            (Ok(a), Ok(b)) => {
                if !a.is_finite() || !b.is_finite() {
                    return Err(Error::Csv {
                        line,
                        message: "non-finite value".into(),
                    });
                }
                x.push(a);
                y.push(b);
            }
            (Err(_), _) => {
                return Err(Error::Csv {
                    line,
                    message: format!("cannot parse '{}' as a number", &record[0]),
                })
            }
            (_, Err(_)) => {
                return Err(Error::Csv {
                    line,
                    message: format!("cannot parse '{}' as a number", &record[1]),
                })
            }
        }
    }
    if x.is_empty() {
        return Err(Error::Csv {
            line: 0,
            message: "no data rows".into(),
        });
    }
    Ok((x, y))
}

/// Reads two categorical (label) columns. Headers cannot be sniffed for
/// label data, so the flag is explicit.
pub fn read_label_pairs(path: &Path, header: bool) -> Result<(Vec<String>, Vec<String>)> {
    let mut reader = open_reader(path, header)?;
    let mut x = Vec::new();
    let mut y = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Csv {
            line: 0,
            message: format!("malformed csv: {e}"),
        })?;
        let line = record_line(&record);
        if record.len() != 2 {
            return Err(Error::Csv {
                line,
                message: format!("expected 2 columns, found {}", record.len()),
            });
        }
        if record[0].is_empty() || record[1].is_empty() {
            return Err(Error::Csv {
                line,
                message: "empty label".into(),
            });
        }
        x.push(record[0].to_string());
        y.push(record[1].to_string());
    }
    if x.is_empty() {
        return Err(Error::Csv {
            line: 0,
            message: "no data rows".into(),
        });
    }
    Ok((x, y))
}
