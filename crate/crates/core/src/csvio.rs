//! Delimited-text dataset storage.
//!
//! One file per table plus a JSON schema descriptor mapping table -> column
//! -> type. The codec is written by hand because the NULL convention needs
//! per-field quoting information: an *unquoted* empty field is NULL, while a
//! *quoted* empty field (`""`) is the empty string. Stock CSV readers erase
//! that distinction.
//!
//! Quoting rules on write: a field is quoted iff it is an empty string or
//! contains a comma, double quote, CR, or LF; embedded quotes are doubled.
//! NULL is written as a bare empty field. Rows end in `\n`; `\r\n` is
//! accepted on read.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::data::{Column, ColumnData, ColumnType, Dataset, Table};
use crate::{Error, Result};

/// Dataset schema descriptor: dataset name plus table -> column -> type.
/// Column *order* within a table comes from the CSV header, not from here.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SchemaDescriptor {
    pub name: String,
    pub tables: BTreeMap<String, BTreeMap<String, ColumnType>>,
}

/// One parsed field with the quoting information the NULL rule depends on.
#[derive(Debug, Clone, PartialEq)]
struct RawField {
    text: String,
    quoted: bool,
}

impl RawField {
    fn is_null(&self) -> bool {
        !self.quoted && self.text.is_empty()
    }
}

/// Parse a full delimited-text document into rows of raw fields.
fn parse_rows(input: &str, path: &str) -> Result<Vec<Vec<RawField>>> {
    let mut rows = Vec::new();
    let mut row = Vec::new();
    let mut field = RawField {
        text: String::new(),
        quoted: false,
    };
    let mut chars = input.chars().peekable();
    let mut line = 1usize;
    // Tracks whether anything (even an empty field) was seen on this row.
    let mut row_started = false;

    let err = |line: usize, message: String| Error::Csv {
        path: path.to_string(),
        row: line,
        message,
    };

    while let Some(c) = chars.next() {
        match c {
            '"' if field.text.is_empty() && !field.quoted => {
                // Opening quote of a quoted field.
                field.quoted = true;
                row_started = true;
                loop {
                    match chars.next() {
                        Some('"') => {
                            if chars.peek() == Some(&'"') {
                                chars.next();
                                field.text.push('"');
                            } else {
                                break; // closing quote
                            }
                        }
                        Some('\n') => {
                            line += 1;
                            field.text.push('\n');
                        }
                        Some(ch) => field.text.push(ch),
                        None => {
                            return Err(err(line, "unterminated quoted field".to_string()));
                        }
                    }
                }
                // The character after the closing quote must be a separator.
                match chars.peek() {
                    Some(',') | Some('\n') | Some('\r') | None => {}
                    Some(ch) => {
                        return Err(err(
                            line,
                            format!("unexpected `{ch}` after closing quote"),
                        ));
                    }
                }
            }
            '"' => {
                return Err(err(line, "bare quote inside unquoted field".to_string()));
            }
            ',' => {
                row.push(std::mem::replace(
                    &mut field,
                    RawField {
                        text: String::new(),
                        quoted: false,
                    },
                ));
                row_started = true;
            }
            '\r' => {
                if chars.peek() == Some(&'\n') {
                    chars.next();
                } else {
                    return Err(err(line, "bare carriage return".to_string()));
                }
                row.push(std::mem::replace(
                    &mut field,
                    RawField {
                        text: String::new(),
                        quoted: false,
                    },
                ));
                rows.push(std::mem::take(&mut row));
                row_started = false;
                line += 1;
            }
            '\n' => {
                row.push(std::mem::replace(
                    &mut field,
                    RawField {
                        text: String::new(),
                        quoted: false,
                    },
                ));
                rows.push(std::mem::take(&mut row));
                row_started = false;
                line += 1;
            }
            ch => {
                field.text.push(ch);
                row_started = true;
            }
        }
    }
    // Final row without trailing newline.
    if row_started || !row.is_empty() {
        row.push(field);
        rows.push(row);
    }
    Ok(rows)
}

/// Render one field according to the quoting rules.
fn write_field(out: &mut String, field: Option<&str>) {
    match field {
        None => {} // NULL: bare empty field
        Some(s) => {
            let needs_quotes =
                s.is_empty() || s.contains(',') || s.contains('"') || s.contains('\n') || s.contains('\r');
            if needs_quotes {
                out.push('"');
                for ch in s.chars() {
                    if ch == '"' {
                        out.push('"');
                    }
                    out.push(ch);
                }
                out.push('"');
            } else {
                out.push_str(s);
            }
        }
    }
}

/// Serialize one table to delimited text (header row first).
pub fn table_to_csv(table: &Table) -> String {
    let mut out = String::new();
    for (i, col) in table.columns().iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        write_field(&mut out, Some(&col.name));
    }
    out.push('\n');
    let mut buf = String::new();
    for row in 0..table.row_count() {
        for (i, col) in table.columns().iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            match &col.data {
                ColumnData::Int(v) => match v[row] {
                    Some(x) => {
                        buf.clear();
                        let _ = write!(buf, "{x}");
                        write_field(&mut out, Some(&buf));
                    }
                    None => write_field(&mut out, None),
                },
                ColumnData::Float(v) => match v[row] {
                    Some(x) => {
                        buf.clear();
                        // `{}` on f64 prints the shortest round-tripping form.
                        let _ = write!(buf, "{x}");
                        write_field(&mut out, Some(&buf));
                    }
                    None => write_field(&mut out, None),
                },
                ColumnData::Str(v) => write_field(&mut out, v[row].as_deref()),
            }
        }
        out.push('\n');
    }
    out
}

/// Parse one table from delimited text given its declared column types.
pub fn table_from_csv(
    name: &str,
    input: &str,
    types: &BTreeMap<String, ColumnType>,
    path: &str,
) -> Result<Table> {
    let rows = parse_rows(input, path)?;
    let Some((header, body)) = rows.split_first() else {
        return Err(Error::Csv {
            path: path.to_string(),
            row: 0,
            message: "missing header row".to_string(),
        });
    };
    let mut columns: Vec<(String, ColumnType)> = Vec::with_capacity(header.len());
    for field in header {
        let col_name = field.text.clone();
        let ty = types.get(&col_name).copied().ok_or_else(|| {
            Error::SchemaDescriptor(format!(
                "table `{name}`: column `{col_name}` in header is not declared"
            ))
        })?;
        columns.push((col_name, ty));
    }
    for declared in types.keys() {
        if !columns.iter().any(|(n, _)| n == declared) {
            return Err(Error::SchemaDescriptor(format!(
                "table `{name}`: declared column `{declared}` missing from header"
            )));
        }
    }

    let mut data: Vec<ColumnData> = columns
        .iter()
        .map(|(_, ty)| match ty {
            ColumnType::Int => ColumnData::Int(Vec::with_capacity(body.len())),
            ColumnType::Float => ColumnData::Float(Vec::with_capacity(body.len())),
            ColumnType::Str => ColumnData::Str(Vec::with_capacity(body.len())),
        })
        .collect();

    for (row_idx, row) in body.iter().enumerate() {
        if row.len() != columns.len() {
            return Err(Error::RowShape {
                table: name.to_string(),
                row: row_idx + 2, // 1-based, after header
                expected: columns.len(),
                found: row.len(),
            });
        }
        for (col_idx, field) in row.iter().enumerate() {
            let (col_name, _) = &columns[col_idx];
            let parse_err = |expected: &'static str| Error::ValueParse {
                table: name.to_string(),
                column: col_name.clone(),
                row: row_idx + 2,
                value: field.text.clone(),
                expected,
            };
            match &mut data[col_idx] {
                ColumnData::Int(v) => {
                    if field.is_null() {
                        v.push(None);
                    } else {
                        let x: i64 = field.text.parse().map_err(|_| parse_err("INT"))?;
                        v.push(Some(x));
                    }
                }
                ColumnData::Float(v) => {
                    if field.is_null() {
                        v.push(None);
                    } else {
                        let x: f64 = field.text.parse().map_err(|_| parse_err("FLOAT"))?;
                        if !x.is_finite() {
                            return Err(parse_err("finite FLOAT"));
                        }
                        v.push(Some(x));
                    }
                }
                ColumnData::Str(v) => {
                    if field.is_null() {
                        v.push(None);
                    } else {
                        v.push(Some(field.text.clone()));
                    }
                }
            }
        }
    }

    let columns = columns
        .into_iter()
        .zip(data)
        .map(|((n, _), d)| Column::new(n, d))
        .collect();
    Table::new(name, columns)
}

/// Load a dataset from a directory: `<dir>/schema.json` plus one
/// `<table>.csv` per table declared in the descriptor.
pub fn load_dataset(dir: &Path) -> Result<Dataset> {
    let has_csv = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .flatten()
        .any(|e| e.path().extension().is_some_and(|x| x == "csv"));
    if !has_csv {
        return Err(Error::NoTables(dir.to_path_buf()));
    }
    let schema_path = dir.join("schema.json");
    let schema_text =
        std::fs::read_to_string(&schema_path).map_err(|e| Error::io(&schema_path, e))?;
    let schema: SchemaDescriptor = serde_json::from_str(&schema_text)?;
    if schema.tables.is_empty() {
        return Err(Error::NoTables(dir.to_path_buf()));
    }
    let mut tables = Vec::with_capacity(schema.tables.len());
    for (table_name, types) in &schema.tables {
        let path = dir.join(format!("{table_name}.csv"));
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        tables.push(table_from_csv(
            table_name,
            &text,
            types,
            &path.display().to_string(),
        )?);
    }
    Dataset::new(schema.name.clone(), tables)
}

/// Write a dataset to a directory: one CSV per table plus `schema.json`.
pub fn write_dataset(dataset: &Dataset, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tables = BTreeMap::new();
    for table in dataset.tables() {
        let mut cols = BTreeMap::new();
        for col in table.columns() {
            cols.insert(col.name.clone(), col.column_type());
        }
        tables.insert(table.name().to_string(), cols);
        let path = dir.join(format!("{}.csv", table.name()));
        std::fs::write(&path, table_to_csv(table)).map_err(|e| Error::io(&path, e))?;
    }
    let schema = SchemaDescriptor {
        name: dataset.name().to_string(),
        tables,
    };
    let path = dir.join("schema.json");
    let text = serde_json::to_string_pretty(&schema)?;
    std::fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))
}
