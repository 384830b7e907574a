use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::labels::{HeadLabels, Label};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Which CSV columns are features and which are per-head labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsvSchema {
    pub features: Vec<String>,
    pub heads: Vec<String>,
}

impl CsvSchema {
    pub fn of<T>(ds: &Dataset<T>) -> Self {
        Self {
            features: ds.feature_names.clone(),
            heads: ds.head_names.clone(),
        }
    }
}

fn parse_label(s: &str) -> Option<Label> {
    match s.trim() {
        "" => Some(None),
        "0" => Some(Some(false)),
        "1" => Some(Some(true)),
        _ => None,
    }
}

fn open(path: &Path) -> Result<(csv::Reader<std::fs::File>, csv::StringRecord)> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let header = reader
        .headers()
        .map_err(|e| Error::MalformedRow {
            line: 1,
            detail: e.to_string(),
        })?
        .clone();
    Ok((reader, header))
}

/// Column names of a headed CSV file.
pub fn csv_header(path: impl AsRef<Path>) -> Result<Vec<String>> {
    Ok(open(path.as_ref())?.1.iter().map(str::to_string).collect())
}

fn read_columns<T: Scalar>(path: &Path, features: &[String], heads: &[String]) -> Result<(Matrix<T>, Vec<Label>)> {
    let (mut reader, header) = open(path)?;
    let index: HashMap<&str, usize> = header.iter().enumerate().map(|(i, h)| (h, i)).collect();
    let lookup = |name: &String| index.get(name.as_str()).copied().ok_or_else(|| Error::UnknownColumn(name.clone()));
    let feature_cols = features.iter().map(lookup).collect::<Result<Vec<_>>>()?;
    let head_cols = heads.iter().map(lookup).collect::<Result<Vec<_>>>()?;

    let mut data = Vec::new();
    let mut labels = Vec::new();
    let mut n_rows = 0;
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::MalformedRow {
            line: e.position().map_or(row as u64 + 2, |p| p.line()),
            detail: e.to_string(),
        })?;
        for (&c, name) in feature_cols.iter().zip(features) {
            let cell = record.get(c).unwrap_or("");
            let v = cell.trim().parse::<T>().ok().filter(|v| v.is_finite()).ok_or_else(|| Error::Parse {
                row,
                column: name.clone(),
                value: cell.to_string(),
            })?;
            data.push(v);
        }
        for (&c, name) in head_cols.iter().zip(heads) {
            let cell = record.get(c).unwrap_or("");
            labels.push(parse_label(cell).ok_or_else(|| Error::Parse {
                row,
                column: name.clone(),
                value: cell.to_string(),
            })?);
        }
        n_rows += 1;
    }
    Ok((Matrix::from_vec(n_rows, feature_cols.len(), data)?, labels))
}

/// Reads a headed, comma-separated file. Label cells are `0`, `1`, or empty
/// for "not measured". Columns outside the schema are ignored.
pub fn load_csv<T: Scalar>(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<Dataset<T>> {
    let (features, labels) = read_columns(path.as_ref(), &schema.features, &schema.heads)?;
    let labels = HeadLabels::new(schema.heads.len(), labels).map_err(|e| match e {
        Error::InsufficientData(detail) => Error::MalformedRow { line: 0, detail },
        other => other,
    })?;
    Dataset::new(features, labels, schema.features.clone(), schema.heads.clone())
}

/// Reads the named label columns, row-major, without requiring any row
/// to be observed.
pub fn load_labels(path: impl AsRef<Path>, heads: &[String]) -> Result<Vec<Label>> {
    Ok(read_columns::<f64>(path.as_ref(), &[], heads)?.1)
}

/// Reads only the named feature columns.
pub fn load_features<T: Scalar>(path: impl AsRef<Path>, features: &[String]) -> Result<Matrix<T>> {
    Ok(read_columns(path.as_ref(), features, &[])?.0)
}

/// Writes features then labels with the shortest round-trip float text.
pub fn save_csv<T: Scalar>(path: impl AsRef<Path>, ds: &Dataset<T>) -> Result<()> {
    let path = path.as_ref();
    let mut writer = csv::Writer::from_path(path).map_err(|e| Error::io(path, std::io::Error::other(e)))?;
    let io = |e: csv::Error| Error::io(path, std::io::Error::other(e));
    writer
        .write_record(ds.feature_names.iter().chain(&ds.head_names))
        .map_err(io)?;
    let mut record = Vec::with_capacity(ds.n_features() + ds.n_heads());
    for i in 0..ds.n_samples() {
        record.clear();
        record.extend(ds.features.row(i).iter().map(|v| v.to_string()));
        record.extend(ds.labels.row(i).iter().map(|l| match l {
            None => String::new(),
            Some(false) => "0".into(),
            Some(true) => "1".into(),
        }));
        writer.write_record(&record).map_err(io)?;
    }
    writer.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}
