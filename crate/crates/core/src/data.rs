//! Typed columnar tables and datasets.
//!
//! Columns are dense `Vec<Option<_>>` arrays — NULL is first-class and is
//! represented as `None`, never as a sentinel value. Tables validate their
//! shape invariants at construction so the rest of the pipeline can assume
//! rectangular, finite, de-duplicated data.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Column type tags. The wire names (`INT`/`FLOAT`/`STRING`) appear in schema
/// descriptors and statistics records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ColumnType {
    #[serde(rename = "INT")]
    Int,
    #[serde(rename = "FLOAT")]
    Float,
    #[serde(rename = "STRING")]
    Str,
}

impl ColumnType {
    pub fn is_numeric(self) -> bool {
        matches!(self, ColumnType::Int | ColumnType::Float)
    }

    pub fn wire_name(self) -> &'static str {
        match self {
            ColumnType::Int => "INT",
            ColumnType::Float => "FLOAT",
            ColumnType::Str => "STRING",
        }
    }
}

/// Column payload: one dense nullable vector per type.
#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData {
    Int(Vec<Option<i64>>),
    Float(Vec<Option<f64>>),
    Str(Vec<Option<String>>),
}

impl ColumnData {
    pub fn len(&self) -> usize {
        match self {
            ColumnData::Int(v) => v.len(),
            ColumnData::Float(v) => v.len(),
            ColumnData::Str(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn column_type(&self) -> ColumnType {
        match self {
            ColumnData::Int(_) => ColumnType::Int,
            ColumnData::Float(_) => ColumnType::Float,
            ColumnData::Str(_) => ColumnType::Str,
        }
    }

    pub fn is_null(&self, row: usize) -> bool {
        match self {
            ColumnData::Int(v) => v[row].is_none(),
            ColumnData::Float(v) => v[row].is_none(),
            ColumnData::Str(v) => v[row].is_none(),
        }
    }

    pub fn null_count(&self) -> usize {
        match self {
            ColumnData::Int(v) => v.iter().filter(|x| x.is_none()).count(),
            ColumnData::Float(v) => v.iter().filter(|x| x.is_none()).count(),
            ColumnData::Str(v) => v.iter().filter(|x| x.is_none()).count(),
        }
    }
}

/// A named column.
#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub data: ColumnData,
}

impl Column {
    pub fn new(name: impl Into<String>, data: ColumnData) -> Self {
        Column {
            name: name.into(),
            data,
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn column_type(&self) -> ColumnType {
        self.data.column_type()
    }
}

/// A rectangular table: every column has the same length and a unique name.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    name: String,
    row_count: usize,
    columns: Vec<Column>,
}

impl Table {
    /// Build a table, validating shape invariants: at least one column, all
    /// columns equally long, column names unique, float values finite.
    pub fn new(name: impl Into<String>, columns: Vec<Column>) -> Result<Self> {
        let name = name.into();
        if columns.is_empty() {
            return Err(Error::NoColumns(name));
        }
        let row_count = columns[0].len();
        let mut seen = BTreeSet::new();
        for col in &columns {
            if col.len() != row_count {
                return Err(Error::ColumnLength {
                    table: name,
                    column: col.name.clone(),
                    expected: row_count,
                    actual: col.len(),
                });
            }
            if !seen.insert(col.name.clone()) {
                return Err(Error::DuplicateColumn {
                    table: name,
                    column: col.name.clone(),
                });
            }
            if let ColumnData::Float(values) = &col.data {
                if let Some(bad) = values.iter().flatten().find(|v| !v.is_finite()) {
                    return Err(Error::ValueParse {
                        table: name,
                        column: col.name.clone(),
                        row: 0,
                        value: bad.to_string(),
                        expected: "finite float",
                    });
                }
            }
        }
        Ok(Table {
            name,
            row_count,
            columns,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn row_count(&self) -> usize {
        self.row_count
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, name: &str) -> Result<&Column> {
        self.columns
            .iter()
            .find(|c| c.name == name)
            .ok_or_else(|| Error::UnknownColumn {
                table: self.name.clone(),
                column: name.to_string(),
            })
    }
}

/// A named collection of tables with unique table names.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    tables: Vec<Table>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, tables: Vec<Table>) -> Result<Self> {
        let name = name.into();
        let mut seen = BTreeSet::new();
        for t in &tables {
            if !seen.insert(t.name().to_string()) {
                return Err(Error::DuplicateTable(t.name().to_string()));
            }
        }
        Ok(Dataset { name, tables })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn tables(&self) -> &[Table] {
        &self.tables
    }

    pub fn table(&self, name: &str) -> Result<&Table> {
        self.tables
            .iter()
            .find(|t| t.name() == name)
            .ok_or_else(|| Error::UnknownTable(name.to_string()))
    }
}

/// A typed literal constant as it appears in predicates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "t", content = "v")]
pub enum Literal {
    #[serde(rename = "int")]
    Int(i64),
    #[serde(rename = "float")]
    Float(f64),
    #[serde(rename = "str")]
    Str(String),
}

impl Literal {
    /// Total-order key used for canonicalizing predicate lists. Floats are
    /// ordered by their IEEE bit pattern after sign folding, which is a total
    /// order consistent with `<` on the finite values we allow.
    pub fn sort_key(&self) -> (u8, i64, u64, &str) {
        match self {
            Literal::Int(v) => (0, *v, 0, ""),
            Literal::Float(v) => (1, 0, float_order_key(*v), ""),
            Literal::Str(s) => (2, 0, 0, s.as_str()),
        }
    }

    pub fn type_tag(&self) -> ColumnType {
        match self {
            Literal::Int(_) => ColumnType::Int,
            Literal::Float(_) => ColumnType::Float,
            Literal::Str(_) => ColumnType::Str,
        }
    }
}

/// Map a finite f64 to a u64 whose natural order matches the float order.
pub fn float_order_key(v: f64) -> u64 {
    let bits = v.to_bits();
    if bits >> 63 == 0 {
        bits | (1 << 63)
    } else {
        !bits
    }
}
