//! Line-delimited JSON exchange format for externally computed conditionals.
//!
//! Each line is one record:
//!
//! ```json
//! {"fingerprint": "1ABC:AB|A:38,B:12", "order": ["B:12", "A:38"],
//!  "steps": [[...20 log-probs...], [...]], "realized": "KT"}
//! ```
//!
//! `steps[t]` and `realized[t]` refer to `order[t]`; vectors use the
//! alphabetical order `ACDEFGHIKLMNPQRSTVWY` in natural-log space. An optional
//! first line `{"format": "bacycle-logprob", "version": 1}` is a header.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::amino::{self, AminoAcid, NUM_AMINO_ACIDS};
use crate::error::{Error, Result};
use crate::structure::SiteRef;

use super::table::{probability_mass, LogProbTable, LogProbVector};

pub const FORMAT_NAME: &str = "bacycle-logprob";
pub const FORMAT_VERSION: u32 = 1;
/// Allowed deviation of each step's probability mass from 1.
pub const LOAD_SUM_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    fingerprint: String,
    order: Vec<String>,
    steps: Vec<Vec<f64>>,
    realized: String,
}

type TableKey = (String, String, String);

/// Tables indexed by (fingerprint, order, realized sequence).
#[derive(Debug, Clone, Default)]
pub struct LogProbArchive {
    tables: HashMap<TableKey, LogProbTable>,
    by_fingerprint: HashMap<String, Vec<(String, String)>>,
}

impl LogProbArchive {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }

    pub fn insert(&mut self, table: LogProbTable) -> Result<()> {
        let key = (table.fingerprint.clone(), table.order_key(), table.realized_key());
        if self.tables.contains_key(&key) {
            return Err(Error::InvalidArgument(format!(
                "duplicate table for {} order {}",
                key.0, key.1
            )));
        }
        self.by_fingerprint
            .entry(key.0.clone())
            .or_default()
            .push((key.1.clone(), key.2.clone()));
        self.tables.insert(key, table);
        Ok(())
    }

    pub fn get(&self, fingerprint: &str, order: &str, realized: &str) -> Option<&LogProbTable> {
        self.tables
            .get(&(fingerprint.to_string(), order.to_string(), realized.to_string()))
    }

    /// `(order, realized)` keys archived for a fingerprint, in insertion order.
    /// Both strings list sites in decoding order.
    pub fn entries_for(&self, fingerprint: &str) -> &[(String, String)] {
        self.by_fingerprint.get(fingerprint).map(Vec::as_slice).unwrap_or(&[])
    }

    /// All tables sorted by key.
    pub fn tables(&self) -> Vec<&LogProbTable> {
        let mut keys: Vec<_> = self.tables.keys().collect();
        keys.sort();
        keys.into_iter().map(|k| &self.tables[k]).collect()
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_reader(BufReader::new(File::open(path)?))
    }

    pub fn from_reader(reader: impl BufRead) -> Result<Self> {
        let mut archive = Self::new();
        for (i, line) in reader.lines().enumerate() {
            let record_no = i + 1;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let schema = |message: String| Error::Archive {
                record: record_no,
                message,
            };
            let value: serde_json::Value = serde_json::from_str(&line).map_err(|e| schema(e.to_string()))?;
            if value.get("format").is_some() && value.get("fingerprint").is_none() {
                let header: Header = serde_json::from_value(value).map_err(|e| schema(e.to_string()))?;
                if header.format != FORMAT_NAME || header.version != FORMAT_VERSION {
                    return Err(schema(format!(
                        "unsupported format {} v{}",
                        header.format, header.version
                    )));
                }
                continue;
            }
            let record: Record = serde_json::from_value(value).map_err(|e| schema(e.to_string()))?;
            let table = validate(record, record_no)?;
            archive.insert(table).map_err(|e| schema(e.to_string()))?;
        }
        Ok(archive)
    }

    /// Writes a header then every table, sorted by key.
    pub fn write(&self, mut out: impl Write) -> Result<()> {
        write_tables(&mut out, self.tables())
    }
}

pub fn write_tables<'a>(mut out: impl Write, tables: impl IntoIterator<Item = &'a LogProbTable>) -> Result<()> {
    let header = Header {
        format: FORMAT_NAME.to_string(),
        version: FORMAT_VERSION,
    };
    serde_json::to_writer(&mut out, &header)?;
    out.write_all(b"\n")?;
    for table in tables {
        let record = Record {
            fingerprint: table.fingerprint.clone(),
            order: table.order.iter().map(SiteRef::to_string).collect(),
            steps: table.steps.iter().map(|s| s.to_vec()).collect(),
            realized: table.realized_key(),
        };
        serde_json::to_writer(&mut out, &record)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

fn validate(record: Record, record_no: usize) -> Result<LogProbTable> {
    let schema = |message: String| Error::Archive {
        record: record_no,
        message,
    };
    let order: Vec<SiteRef> = record
        .order
        .iter()
        .map(|s| s.parse::<SiteRef>().map_err(&schema))
        .collect::<Result<_>>()?;
    for (i, site) in order.iter().enumerate() {
        if order[..i].contains(site) {
            return Err(schema(format!("site {site} repeated in order")));
        }
    }
    let realized: Vec<AminoAcid> = amino::parse_sequence(&record.realized)
        .ok_or_else(|| schema(format!("realized `{}` has non-canonical letters", record.realized)))?;
    if record.steps.len() != order.len() || realized.len() != order.len() {
        return Err(schema(format!(
            "order has {} sites, steps {}, realized {}",
            order.len(),
            record.steps.len(),
            realized.len()
        )));
    }
    let mut steps = Vec::with_capacity(record.steps.len());
    for (t, step) in record.steps.iter().enumerate() {
        let vector: LogProbVector = step.as_slice().try_into().map_err(|_| {
            schema(format!(
                "step {t} has {} entries, expected {NUM_AMINO_ACIDS}",
                step.len()
            ))
        })?;
        if let Some(v) = vector.iter().find(|v| !v.is_finite() || **v > LOAD_SUM_TOLERANCE) {
            return Err(schema(format!("step {t} has invalid log-probability {v}")));
        }
        let sum = probability_mass(&vector);
        if (sum - 1.0).abs() > LOAD_SUM_TOLERANCE {
            return Err(Error::Normalization {
                record: record_no,
                step: t,
                sum,
            });
        }
        steps.push(vector);
    }
    Ok(LogProbTable {
        fingerprint: record.fingerprint,
        order,
        steps,
        realized,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform_line(entries: usize, value: f64) -> String {
        let step: Vec<String> = (0..entries).map(|_| format!("{value}")).collect();
        format!(
            r#"{{"fingerprint":"x:A|A:1","order":["A:1"],"steps":[[{}]],"realized":"A"}}"#,
            step.join(",")
        )
    }

    #[test]
    fn loads_uniform_record() {
        let line = uniform_line(20, (0.05f64).ln());
        let archive = LogProbArchive::from_reader(line.as_bytes()).unwrap();
        assert_eq!(archive.len(), 1);
        assert!(archive.get("x:A|A:1", "A:1", "A").is_some());
    }

    #[test]
    fn nineteen_entries_is_schema_error() {
        let line = uniform_line(19, (0.05f64).ln());
        let err = LogProbArchive::from_reader(line.as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Archive { record: 1, .. }), "{err}");
    }

    #[test]
    fn sum_of_1_01_is_normalization_error() {
        let line = uniform_line(20, (1.01f64 / 20.0).ln());
        let text = format!("{{\"format\":\"bacycle-logprob\",\"version\":1}}\n{line}\n");
        let err = LogProbArchive::from_reader(text.as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Normalization { record: 2, step: 0, .. }), "{err}");
    }

    #[test]
    fn rejects_unknown_header_version() {
        let text = "{\"format\":\"bacycle-logprob\",\"version\":9}\n";
        assert!(LogProbArchive::from_reader(text.as_bytes()).is_err());
    }

    #[test]
    fn empty_archive_with_header_loads() {
        let mut buf = Vec::new();
        LogProbArchive::new().write(&mut buf).unwrap();
        let archive = LogProbArchive::from_reader(buf.as_slice()).unwrap();
        assert!(archive.is_empty());
    }
}
