//! CSV loading with optional equal-width binning of numeric columns.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{self, Read};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::table::{CategoricalTable, CategoricalValue, TableError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MissingPolicy {
    #[default]
    Error,
    DropRow,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IngestOptions {
    pub missing_policy: MissingPolicy,
    /// Column name to number of equal-width bins.
    pub bin_spec: BTreeMap<String, usize>,
    pub delimiter: u8,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            missing_policy: MissingPolicy::Error,
            bin_spec: BTreeMap::new(),
            delimiter: b',',
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BinError {
    #[error("cannot bin an empty column")]
    EmptyInput,
    #[error("bin count must be at least 2, got {0}")]
    InvalidBinCount(usize),
    #[error("column is constant; equal-width bins are undefined")]
    ConstantColumn,
    #[error("column contains a non-finite value")]
    NonFinite,
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("line {line}: expected {expected} fields, found {found}")]
    RaggedRow {
        line: u64,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: missing value in column {column:?}")]
    MissingValue { line: u64, column: String },
    #[error("binning requested for unknown column {0:?}")]
    UnknownBinColumn(String),
    #[error("column {0:?} is not numeric and cannot be binned")]
    NonNumericColumn(String),
    #[error("column {column:?}: {source}")]
    Bin { column: String, source: BinError },
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Table(#[from] TableError),
}

/// Reads a CSV file with a mandatory header row.
pub fn read_csv(path: impl AsRef<Path>, opts: &IngestOptions) -> Result<CategoricalTable, IngestError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => IngestError::FileNotFound(path.to_path_buf()),
        _ => IngestError::Io(e),
    })?;
    read_csv_from_reader(file, opts)
}

pub fn read_csv_from_str(text: &str, opts: &IngestOptions) -> Result<CategoricalTable, IngestError> {
    read_csv_from_reader(text.as_bytes(), opts)
}

/// Parses CSV from any reader.
///
/// A column becomes integer-typed only when every retained cell parses as an
/// integer; otherwise all of its cells stay text. Empty cells are missing.
pub fn read_csv_from_reader<R: Read>(reader: R, opts: &IngestOptions) -> Result<CategoricalTable, IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(opts.delimiter)
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);

    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    check_header(&header)?;
    for name in opts.bin_spec.keys() {
        if !header.contains(name) {
            return Err(IngestError::UnknownBinColumn(name.clone()));
        }
    }

    let mut cells: Vec<Vec<String>> = Vec::new();
    'rows: for result in rdr.records() {
        let record = result?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != header.len() {
            return Err(IngestError::RaggedRow {
                line,
                expected: header.len(),
                found: record.len(),
            });
        }
        for (c, field) in record.iter().enumerate() {
            if field.is_empty() {
                match opts.missing_policy {
                    MissingPolicy::Error => {
                        return Err(IngestError::MissingValue {
                            line,
                            column: header[c].clone(),
                        })
                    }
                    MissingPolicy::DropRow => continue 'rows,
                }
            }
        }
        cells.push(record.iter().map(str::to_string).collect());
    }

    let mut typed: Vec<Vec<CategoricalValue>> = vec![Vec::with_capacity(header.len()); cells.len()];
    for (c, name) in header.iter().enumerate() {
        let column = type_column(name, cells.iter().map(|r| r[c].as_str()), opts)?;
        for (row, value) in typed.iter_mut().zip(column) {
            row.push(value);
        }
    }
    Ok(CategoricalTable::new(header, typed)?)
}

fn check_header(header: &[String]) -> Result<(), IngestError> {
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(IngestError::MalformedHeader("no columns".into()));
    }
    let mut seen = HashSet::new();
    for (i, name) in header.iter().enumerate() {
        if name.is_empty() {
            return Err(IngestError::MalformedHeader(format!("column {} has an empty name", i + 1)));
        }
        if !seen.insert(name) {
            return Err(IngestError::MalformedHeader(format!("duplicate column name {name:?}")));
        }
    }
    Ok(())
}

fn type_column<'a>(
    name: &str,
    cells: impl Iterator<Item = &'a str> + Clone,
    opts: &IngestOptions,
) -> Result<Vec<CategoricalValue>, IngestError> {
    if let Some(&k) = opts.bin_spec.get(name) {
        let values = cells
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| IngestError::NonNumericColumn(name.to_string()))?;
        if values.is_empty() {
            return Ok(Vec::new());
        }
        let codes = bin_numeric(&values, k).map_err(|source| IngestError::Bin {
            column: name.to_string(),
            source,
        })?;
        return Ok(codes.into_iter().map(CategoricalValue::Int).collect());
    }
    let ints: Option<Vec<i64>> = cells.clone().map(|s| s.trim().parse().ok()).collect();
    Ok(match ints {
        Some(ints) => ints.into_iter().map(CategoricalValue::Int).collect(),
        None => cells.map(|s| CategoricalValue::Text(s.to_string())).collect(),
    })
}

/// Equal-width binning over `[min, max]` into codes `0..k`.
///
/// Bins are half-open `[e_i, e_{i+1})` with `e_i = min + i * (max - min) / k`;
/// `max` itself lands in the top bin.
pub fn bin_numeric(values: &[f64], k: usize) -> Result<Vec<i64>, BinError> {
    if k < 2 {
        return Err(BinError::InvalidBinCount(k));
    }
    if values.is_empty() {
        return Err(BinError::EmptyInput);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(BinError::NonFinite);
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if min >= max {
        return Err(BinError::ConstantColumn);
    }
    let width = (max - min) / k as f64;
    let top = k as i64 - 1;
    Ok(values
        .iter()
        .map(|&v| (((v - min) / width).floor() as i64).clamp(0, top))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<CategoricalValue> {
        v.iter().map(|&x| x.into()).collect()
    }

    #[test]
    fn smallest_integer_file() {
        let t = read_csv_from_str("A,B\n1,2\n1,3", &IngestOptions::default()).unwrap();
        assert_eq!(t.columns(), ["A", "B"]);
        assert_eq!(t.rows(), &[ints(&[1, 2]), ints(&[1, 3])]);
    }

    #[test]
    fn column_with_any_non_integer_stays_text() {
        let t = read_csv_from_str("A\n1\nx", &IngestOptions::default()).unwrap();
        assert_eq!(t.rows(), &[vec!["1".into()], vec!["x".into()]]);
    }

    #[test]
    fn drop_row_policy() {
        let opts = IngestOptions {
            missing_policy: MissingPolicy::DropRow,
            ..Default::default()
        };
        let t = read_csv_from_str("A,B\n1,\n2,3", &opts).unwrap();
        assert_eq!(t.rows(), &[ints(&[2, 3])]);
    }

    #[test]
    fn missing_value_is_an_error_by_default() {
        let err = read_csv_from_str("A,B\n1,\n2,3", &IngestOptions::default()).unwrap_err();
        assert!(matches!(err, IngestError::MissingValue { line: 2, ref column } if column == "B"));
    }

    #[test]
    fn header_problems() {
        let opts = IngestOptions::default();
        assert!(matches!(
            read_csv_from_str("A,A\n1,2", &opts),
            Err(IngestError::MalformedHeader(_))
        ));
        assert!(matches!(
            read_csv_from_str("A,,C\n1,2,3", &opts),
            Err(IngestError::MalformedHeader(_))
        ));
        assert!(matches!(read_csv_from_str("", &opts), Err(IngestError::MalformedHeader(_))));
    }

    #[test]
    fn ragged_row() {
        let err = read_csv_from_str("A,B\n1,2\n3", &IngestOptions::default()).unwrap_err();
        assert!(matches!(
            err,
            IngestError::RaggedRow {
                line: 3,
                expected: 2,
                found: 1
            }
        ));
    }

    #[test]
    fn quoted_text_cells() {
        let t = read_csv_from_str("name,n\n\"a,b\",1\n\"say \"\"hi\"\"\",2\n", &IngestOptions::default()).unwrap();
        assert_eq!(t.rows()[0][0], "a,b".into());
        assert_eq!(t.rows()[1][0], "say \"hi\"".into());
    }

    #[test]
    fn custom_delimiter() {
        let opts = IngestOptions {
            delimiter: b';',
            ..Default::default()
        };
        let t = read_csv_from_str("A;B\n1;x\n", &opts).unwrap();
        assert_eq!(t.rows(), &[vec![1.into(), "x".into()]]);
    }

    #[test]
    fn missing_file() {
        let err = read_csv("/nonexistent/definitely/missing.csv", &IngestOptions::default()).unwrap_err();
        assert!(matches!(err, IngestError::FileNotFound(_)));
    }

    #[test]
    fn bin_examples() {
        assert_eq!(bin_numeric(&[0.0, 5.0, 10.0], 2).unwrap(), vec![0, 1, 1]);
        assert_eq!(bin_numeric(&[1.0, 1.0, 2.0], 2).unwrap(), vec![0, 0, 1]);
        assert_eq!(bin_numeric(&[1.0, 2.0], 1), Err(BinError::InvalidBinCount(1)));
        assert_eq!(bin_numeric(&[3.0, 3.0], 2), Err(BinError::ConstantColumn));
        assert_eq!(bin_numeric(&[], 2), Err(BinError::EmptyInput));
        assert_eq!(bin_numeric(&[0.0, f64::NAN], 2), Err(BinError::NonFinite));
    }

    #[test]
    fn binning_during_ingest() {
        let mut opts = IngestOptions::default();
        opts.bin_spec.insert("age".into(), 3);
        let t = read_csv_from_str("age,g\n18,a\n30.5,b\n60,a\n45,b\n", &opts).unwrap();
        // width 14: edges 18, 32, 46, 60
        assert_eq!(t.column_values(0), ints(&[0, 0, 2, 1]));

        opts.bin_spec.insert("g".into(), 2);
        let err = read_csv_from_str("age,g\n18,a\n60,b\n", &opts).unwrap_err();
        assert!(matches!(err, IngestError::NonNumericColumn(ref c) if c == "g"));

        let mut opts = IngestOptions::default();
        opts.bin_spec.insert("nope".into(), 2);
        assert!(matches!(
            read_csv_from_str("A\n1\n", &opts),
            Err(IngestError::UnknownBinColumn(_))
        ));
    }

    #[test]
    fn header_only_file_yields_zero_rows() {
        let t = read_csv_from_str("A,B\n", &IngestOptions::default()).unwrap();
        assert_eq!(t.n_rows(), 0);
        assert_eq!(t.n_columns(), 2);
    }
}
