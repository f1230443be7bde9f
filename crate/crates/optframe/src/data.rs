//! CSV datasets for logistic regression: one row per point, features first
//! and the `0`/`1` label in the last column.

use std::io::Read;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: String, source: csv::Error },
    #[error("{path}, record {record}: `{value}` is not a number")]
    NotANumber { path: String, record: usize, value: String },
    #[error("{path}, record {record}: need at least one feature and a label")]
    TooFewColumns { path: String, record: usize },
    #[error("{path}: no data rows")]
    Empty { path: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<f64>,
}

impl Dataset {
    pub fn features(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn load(path: &Path, header: bool) -> Result<Self, DataError> {
        let name = path.display().to_string();
        let file = std::fs::File::open(path).map_err(|source| DataError::Io { path: name.clone(), source })?;
        Self::from_reader(file, header, &name)
    }

    /// Parses CSV text. Row-length consistency and label values are checked
    /// when the problem is built.
    pub fn from_reader<R: Read>(reader: R, header: bool, name: &str) -> Result<Self, DataError> {
        let mut csv = csv::ReaderBuilder::new()
            .has_headers(header)
            .flexible(true)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (i, record) in csv.records().enumerate() {
            let record = record.map_err(|source| DataError::Csv { path: name.to_string(), source })?;
            let record_no = i + 1;
            let mut values = record
                .iter()
                .map(|field| {
                    field.parse::<f64>().map_err(|_| DataError::NotANumber {
                        path: name.to_string(),
                        record: record_no,
                        value: field.to_string(),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            if values.len() < 2 {
                return Err(DataError::TooFewColumns { path: name.to_string(), record: record_no });
            }
            labels.push(values.pop().expect("at least two columns"));
            rows.push(values);
        }
        if rows.is_empty() {
            return Err(DataError::Empty { path: name.to_string() });
        }
        Ok(Self { rows, labels })
    }
}
