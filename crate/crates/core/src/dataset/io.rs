use std::io::{BufRead, Write};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::features::{LabeledSample, COLUMNS};
use super::DatasetError;
use crate::agents::{Archetype, OrderRecord};

/// First line of a sample file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleHeader {
    pub columns: Vec<String>,
    pub labels: Vec<String>,
}

impl Default for SampleHeader {
    fn default() -> Self {
        SampleHeader {
            columns: COLUMNS.iter().map(|c| c.to_string()).collect(),
            labels: Archetype::ALL
                .iter()
                .map(|a| a.name().to_string())
                .collect(),
        }
    }
}

/// One JSON document per line.
pub fn write_jsonl<W: Write, T: Serialize>(mut w: W, items: &[T]) -> Result<(), DatasetError> {
    for item in items {
        serde_json::to_writer(&mut w, item).map_err(std::io::Error::from)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Reads one JSON document per non-blank line, starting at `skip` lines in.
/// Errors carry 1-based line numbers.
pub fn read_jsonl<R: BufRead, T: DeserializeOwned>(
    r: R,
    skip: usize,
) -> Result<Vec<T>, DatasetError> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate().skip(skip) {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(&line).map_err(|e| DatasetError::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(item);
    }
    Ok(out)
}

pub fn write_records_jsonl<W: Write>(w: W, records: &[OrderRecord]) -> Result<(), DatasetError> {
    write_jsonl(w, records)
}

pub fn read_records_jsonl<R: BufRead>(r: R) -> Result<Vec<OrderRecord>, DatasetError> {
    read_jsonl(r, 0)
}

/// Header line followed by one sample per line.
pub fn write_samples_jsonl<W: Write>(
    mut w: W,
    samples: &[LabeledSample],
) -> Result<(), DatasetError> {
    write_jsonl(&mut w, &[SampleHeader::default()])?;
    write_jsonl(w, samples)
}

/// Inverse of [`write_samples_jsonl`]. An empty file is an empty set.
pub fn read_samples_jsonl<R: BufRead>(mut r: R) -> Result<Vec<LabeledSample>, DatasetError> {
    let mut first = String::new();
    if r.read_line(&mut first)? == 0 || first.trim().is_empty() {
        return Ok(Vec::new());
    }
    let header: SampleHeader = serde_json::from_str(&first).map_err(|e| DatasetError::Parse {
        line: 1,
        message: format!("bad header: {e}"),
    })?;
    if header.columns != SampleHeader::default().columns {
        return Err(DatasetError::Columns {
            expected: COLUMNS.len(),
            found: header.columns,
        });
    }
    let mut samples: Vec<LabeledSample> = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let lineno = i + 2;
        let s: LabeledSample = serde_json::from_str(&line).map_err(|e| DatasetError::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
        if s.features.len() != COLUMNS.len() {
            return Err(DatasetError::Parse {
                line: lineno,
                message: format!(
                    "expected {} features, found {}",
                    COLUMNS.len(),
                    s.features.len()
                ),
            });
        }
        samples.push(s);
    }
    Ok(samples)
}
