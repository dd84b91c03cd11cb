//! Labeled mutation datasets and batch manifests in CSV form.
//!
//! Columns: `complex_id, pdb_path, group_a, group_b, mutations, ddg_label`.
//! `ddg_label` may be omitted for prediction-only batches. Relative
//! `pdb_path`s resolve against the CSV's directory; lines starting with `#`
//! are comments.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::structure::{read_pdb_file, MutationSet, PartitionSpec, StructureModel};

pub const REQUIRED_COLUMNS: [&str; 5] = ["complex_id", "pdb_path", "group_a", "group_b", "mutations"];
pub const LABEL_COLUMN: &str = "ddg_label";

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetRecord {
    /// 0-based position among retained records, in file order.
    pub index: usize,
    /// 1-based CSV line number (header is line 1).
    pub line: usize,
    pub complex_id: String,
    pub pdb_path: PathBuf,
    pub partition: PartitionSpec,
    pub mutations: MutationSet,
    pub ddg_label: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Rejected {
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub records: Vec<DatasetRecord>,
    pub rejected: Vec<Rejected>,
}

pub fn csv_reader<R: std::io::Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader)
}

/// Loads a dataset; with `require_label`, the label column must exist and
/// every row needs a finite label.
pub fn load_dataset(path: &Path, require_label: bool) -> Result<Dataset> {
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let file = std::fs::File::open(path)?;
    parse_dataset(file, &base, require_label)
}

pub fn parse_dataset(reader: impl std::io::Read, base: &Path, require_label: bool) -> Result<Dataset> {
    let mut rdr = csv_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let mut idx = [0usize; 5];
    for (slot, name) in idx.iter_mut().zip(REQUIRED_COLUMNS) {
        *slot = col(name).ok_or_else(|| Error::Dataset(format!("missing column `{name}`")))?;
    }
    let label_col = col(LABEL_COLUMN);
    if require_label && label_col.is_none() {
        return Err(Error::Dataset(format!("missing column `{LABEL_COLUMN}`")));
    }

    let mut records = Vec::new();
    let mut rejected = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        let field = |i: usize| row.get(i).unwrap_or("");
        let parsed = (|| -> Result<DatasetRecord> {
            let complex_id = field(idx[0]).to_string();
            if complex_id.is_empty() {
                return Err(Error::Dataset("empty complex_id".into()));
            }
            let pdb = PathBuf::from(field(idx[1]));
            let pdb_path = if pdb.is_absolute() { pdb } else { base.join(pdb) };
            let partition = PartitionSpec::parse(field(idx[2]), field(idx[3]))?;
            let mutations: MutationSet = field(idx[4]).parse()?;
            let ddg_label = match label_col.map(field).filter(|s| !s.is_empty()) {
                Some(s) => {
                    let v: f64 = s.parse().map_err(|_| Error::Dataset(format!("bad ddg_label `{s}`")))?;
                    if !v.is_finite() {
                        return Err(Error::Dataset(format!("non-finite ddg_label `{s}`")));
                    }
                    Some(v)
                }
                None if require_label => return Err(Error::Dataset("missing ddg_label".into())),
                None => None,
            };
            Ok(DatasetRecord {
                index: 0,
                line,
                complex_id,
                pdb_path,
                partition,
                mutations,
                ddg_label,
            })
        })();
        match parsed {
            Ok(mut record) => {
                record.index = records.len();
                records.push(record);
            }
            Err(e) => {
                log::warn!("line {line}: skipped ({e})");
                rejected.push(Rejected {
                    line,
                    reason: e.to_string(),
                });
            }
        }
    }
    Ok(Dataset { records, rejected })
}

/// Parsed structures keyed by path, loaded once each.
#[derive(Debug, Clone, Default)]
pub struct StructureStore {
    models: HashMap<PathBuf, Arc<StructureModel>>,
    failures: HashMap<PathBuf, String>,
}

impl StructureStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn load_all<'a>(paths: impl IntoIterator<Item = &'a Path>) -> Self {
        let mut unique: Vec<PathBuf> = paths.into_iter().map(Path::to_path_buf).collect();
        unique.sort();
        unique.dedup();
        let loaded: Vec<_> = unique
            .into_par_iter()
            .map(|p| {
                let result = read_pdb_file(&p);
                (p, result)
            })
            .collect();
        let mut store = Self::new();
        for (path, result) in loaded {
            match result {
                Ok(model) => {
                    store.models.insert(path, Arc::new(model));
                }
                Err(e) => {
                    store.failures.insert(path, e.to_string());
                }
            }
        }
        store
    }

    pub fn insert(&mut self, path: impl Into<PathBuf>, model: StructureModel) {
        self.models.insert(path.into(), Arc::new(model));
    }

    pub fn get(&self, path: &Path) -> Result<&Arc<StructureModel>> {
        self.models.get(path).ok_or_else(|| match self.failures.get(path) {
            Some(reason) => Error::Dataset(format!("{}: {reason}", path.display())),
            None => Error::Dataset(format!("{}: structure not loaded", path.display())),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CSV: &str = "complex_id,pdb_path,group_a,group_b,mutations,ddg_label
1ABC,1abc.pdb,A,B,TA38I,1.2
1ABC,1abc.pdb,A,B,\"TA38I,KB12E\",0.4
2XYZ,/abs/2xyz.pdb,HL,G,YH100aW,-0.3
";

    #[test]
    fn loads_three_rows() {
        let ds = parse_dataset(CSV.as_bytes(), Path::new("/data"), true).unwrap();
        assert_eq!(ds.records.len(), 3);
        assert!(ds.rejected.is_empty());
        assert_eq!(ds.records[0].pdb_path, PathBuf::from("/data/1abc.pdb"));
        assert_eq!(ds.records[1].mutations.len(), 2);
        assert_eq!(ds.records[2].pdb_path, PathBuf::from("/abs/2xyz.pdb"));
        assert_eq!(ds.records[2].partition.group_a(), &['H', 'L']);
    }

    #[test]
    fn malformed_mutation_is_skipped() {
        let text = CSV.replace("TA38I,1.2", "T38,1.2");
        let ds = parse_dataset(text.as_bytes(), Path::new(""), true).unwrap();
        assert_eq!(ds.records.len(), 2);
        assert_eq!(ds.rejected.len(), 1);
        assert_eq!(ds.rejected[0].line, 2);
        assert_eq!(ds.records[0].index, 0);
    }

    #[test]
    fn duplicates_are_retained() {
        let text = format!("{CSV}1ABC,1abc.pdb,A,B,TA38I,1.5\n");
        let ds = parse_dataset(text.as_bytes(), Path::new(""), true).unwrap();
        assert_eq!(ds.records.len(), 4);
    }

    #[test]
    fn missing_column_is_error() {
        let text = "complex_id,pdb_path,group_a,mutations\n";
        assert!(matches!(
            parse_dataset(text.as_bytes(), Path::new(""), false),
            Err(Error::Dataset(_))
        ));
        let text = "complex_id,pdb_path,group_a,group_b,mutations\nX,x.pdb,A,B,TA1I\n";
        assert!(parse_dataset(text.as_bytes(), Path::new(""), true).is_err());
        assert_eq!(
            parse_dataset(text.as_bytes(), Path::new(""), false)
                .unwrap()
                .records
                .len(),
            1
        );
    }
}
