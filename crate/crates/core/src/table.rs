//! Categorical values and the in-memory table they live in.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A single categorical cell.
///
/// Integer codes order numerically, text labels order by their bytes. A column
/// never mixes the two kinds, so the cross-kind ordering (integers first) only
/// matters for containers that hold values from several columns.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CategoricalValue {
    Int(i64),
    Text(String),
}

/// Which of the two value kinds a column holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueKind {
    Int,
    Text,
}

impl CategoricalValue {
    pub fn kind(&self) -> ValueKind {
        match self {
            CategoricalValue::Int(_) => ValueKind::Int,
            CategoricalValue::Text(_) => ValueKind::Text,
        }
    }

    /// Parses `token` as a value of the given kind. Integer parsing ignores
    /// surrounding whitespace; anything else is an error.
    pub fn parse_as(token: &str, kind: ValueKind) -> Option<Self> {
        match kind {
            ValueKind::Int => token.trim().parse().ok().map(CategoricalValue::Int),
            ValueKind::Text => Some(CategoricalValue::Text(token.to_string())),
        }
    }
}

impl fmt::Display for CategoricalValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CategoricalValue::Int(v) => write!(f, "{v}"),
            CategoricalValue::Text(s) => f.write_str(s),
        }
    }
}

impl From<i64> for CategoricalValue {
    fn from(v: i64) -> Self {
        CategoricalValue::Int(v)
    }
}

impl From<i32> for CategoricalValue {
    fn from(v: i32) -> Self {
        CategoricalValue::Int(v.into())
    }
}

impl From<&str> for CategoricalValue {
    fn from(v: &str) -> Self {
        CategoricalValue::Text(v.to_string())
    }
}

impl From<String> for CategoricalValue {
    fn from(v: String) -> Self {
        CategoricalValue::Text(v)
    }
}

/// An ordered list of values, position `i` belonging to column `i`. May be a
/// prefix of a full row.
pub type Record = Vec<CategoricalValue>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TableError {
    #[error("table must have at least one column")]
    NoColumns,
    #[error("column name at position {0} is empty")]
    EmptyColumnName(usize),
    #[error("duplicate column name {0:?}")]
    DuplicateColumnName(String),
    #[error("row {row} has {found} values, expected {expected}")]
    RowLength {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("column {0:?} mixes integer and text values")]
    MixedKinds(String),
}

/// Named columns of categorical values, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoricalTable {
    columns: Vec<String>,
    rows: Vec<Record>,
}

impl CategoricalTable {
    /// Validates and assembles a table. Zero rows is allowed here; building a
    /// tree from such a table is what fails.
    pub fn new(columns: Vec<String>, rows: Vec<Record>) -> Result<Self, TableError> {
        validate_columns(&columns)?;
        let mut kinds: Vec<Option<ValueKind>> = vec![None; columns.len()];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != columns.len() {
                return Err(TableError::RowLength {
                    row: i,
                    expected: columns.len(),
                    found: row.len(),
                });
            }
            for (c, value) in row.iter().enumerate() {
                match kinds[c] {
                    None => kinds[c] = Some(value.kind()),
                    Some(k) if k != value.kind() => {
                        return Err(TableError::MixedKinds(columns[c].clone()))
                    }
                    Some(_) => {}
                }
            }
        }
        Ok(CategoricalTable { columns, rows })
    }

    /// Convenience constructor for literal tables.
    pub fn from_rows<S, V>(columns: &[S], rows: Vec<Vec<V>>) -> Result<Self, TableError>
    where
        S: AsRef<str>,
        V: Into<CategoricalValue>,
    {
        let columns = columns.iter().map(|c| c.as_ref().to_string()).collect();
        let rows = rows
            .into_iter()
            .map(|r| r.into_iter().map(Into::into).collect())
            .collect();
        Self::new(columns, rows)
    }

    /// Skips validation; callers guarantee the table invariants.
    pub(crate) fn from_trusted(columns: Vec<String>, rows: Vec<Record>) -> Self {
        CategoricalTable { columns, rows }
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Record] {
        &self.rows
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Values of one column, in row order.
    pub fn column_values(&self, index: usize) -> Vec<CategoricalValue> {
        self.rows.iter().map(|r| r[index].clone()).collect()
    }
}

pub(crate) fn validate_columns(columns: &[String]) -> Result<(), TableError> {
    if columns.is_empty() {
        return Err(TableError::NoColumns);
    }
    let mut seen = HashSet::new();
    for (i, name) in columns.iter().enumerate() {
        if name.is_empty() {
            return Err(TableError::EmptyColumnName(i));
        }
        if !seen.insert(name.as_str()) {
            return Err(TableError::DuplicateColumnName(name.clone()));
        }
    }
    Ok(())
}
