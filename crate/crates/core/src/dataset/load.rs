use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Column roles for a flow CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Schema {
    /// Binary ground-truth column. `None` loads an unlabeled table.
    pub label_column: Option<String>,
    /// Literal marking benign rows in the label column; anything else is an attack.
    pub benign_value: String,
    /// Multiclass attack category, used by the by-class partition.
    pub class_column: Option<String>,
    /// Partition key such as the destination IP.
    pub key_column: Option<String>,
    /// Columns dropped before preprocessing (identifiers, timestamps, ...).
    pub ignore_columns: Vec<String>,
    pub delimiter: char,
}

impl Default for Schema {
    fn default() -> Self {
        Self {
            label_column: Some("label".into()),
            benign_value: "0".into(),
            class_column: None,
            key_column: None,
            ignore_columns: Vec::new(),
            delimiter: ',',
        }
    }
}

impl Schema {
    pub(crate) fn is_role_column(&self, name: &str) -> bool {
        [&self.label_column, &self.class_column, &self.key_column]
            .iter()
            .any(|c| c.as_deref() == Some(name))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Number(f64),
    Text(String),
    Missing,
    PosInf,
    NegInf,
}

impl Cell {
    /// Parses a feature cell. Empty strings and NaN are missing values.
    pub fn parse(raw: &str) -> Cell {
        let s = raw.trim();
        if s.is_empty() {
            return Cell::Missing;
        }
        match s.parse::<f64>() {
            Ok(v) if v.is_nan() => Cell::Missing,
            Ok(v) if v == f64::INFINITY => Cell::PosInf,
            Ok(v) if v == f64::NEG_INFINITY => Cell::NegInf,
            Ok(v) => Cell::Number(v),
            Err(_) => Cell::Text(s.to_string()),
        }
    }

    fn role(raw: &str) -> Cell {
        let s = raw.trim();
        if s.is_empty() {
            Cell::Missing
        } else {
            Cell::Text(s.to_string())
        }
    }
}

/// Parsed delimited text with resolved column roles.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub schema: Schema,
}

impl RawTable {
    pub fn new(columns: Vec<String>, rows: Vec<Vec<Cell>>, schema: Schema) -> Result<Self> {
        for (i, r) in rows.iter().enumerate() {
            if r.len() != columns.len() {
                return Err(Error::Malformed {
                    line: i as u64 + 2,
                    message: format!("expected {} fields, found {}", columns.len(), r.len()),
                });
            }
        }
        for c in [
            &schema.label_column,
            &schema.class_column,
            &schema.key_column,
        ]
        .into_iter()
        .flatten()
        .chain(&schema.ignore_columns)
        {
            if !columns.iter().any(|h| h == c) {
                return Err(Error::Schema(format!(
                    "declared column {c:?} not in header"
                )));
            }
        }
        Ok(Self {
            columns,
            rows,
            schema,
        })
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

/// Reads a headed CSV. Role columns (label, class, key) are kept verbatim as
/// text; every other cell goes through [`Cell::parse`].
pub fn load_csv(path: &Path, schema: &Schema) -> Result<RawTable> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_table(file, schema)
}

pub(crate) fn read_table<R: std::io::Read>(reader: R, schema: &Schema) -> Result<RawTable> {
    let delimiter = u8::try_from(schema.delimiter)
        .map_err(|_| Error::Config(format!("delimiter {:?} is not ASCII", schema.delimiter)))?;
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .flexible(true)
        .from_reader(reader);
    let columns: Vec<String> = rdr
        .headers()
        .map_err(|e| malformed(&e, 1))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let roles: Vec<bool> = columns.iter().map(|c| schema.is_role_column(c)).collect();

    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| malformed(&e, 0))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.len() != columns.len() {
            return Err(Error::Malformed {
                line,
                message: format!("expected {} fields, found {}", columns.len(), rec.len()),
            });
        }
        rows.push(
            rec.iter()
                .zip(&roles)
                .map(|(f, &role)| if role { Cell::role(f) } else { Cell::parse(f) })
                .collect(),
        );
    }
    RawTable::new(columns, rows, schema.clone())
}

fn malformed(e: &csv::Error, fallback_line: u64) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(fallback_line);
    Error::Malformed {
        line,
        message: e.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema() -> Schema {
        Schema::default()
    }

    #[test]
    fn three_row_fixture() {
        let t = read_table(
            "dur,proto,label\n0.1,tcp,0\n0.2,udp,1\n0.3,tcp,0\n".as_bytes(),
            &schema(),
        )
        .unwrap();
        assert_eq!(t.columns, vec!["dur", "proto", "label"]);
        assert_eq!(t.rows.len(), 3);
        assert_eq!(t.rows[1][0], Cell::Number(0.2));
        assert_eq!(t.rows[1][1], Cell::Text("udp".into()));
        assert_eq!(t.rows[1][2], Cell::Text("1".into()));
    }

    #[test]
    fn wrong_arity_reports_line() {
        let err = read_table("a,label\n1,0\n2\n3,0\n".as_bytes(), &schema()).unwrap_err();
        assert!(matches!(err, Error::Malformed { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn infinity_and_missing_tags() {
        assert_eq!(Cell::parse("Infinity"), Cell::PosInf);
        assert_eq!(Cell::parse("inf"), Cell::PosInf);
        assert_eq!(Cell::parse("-Infinity"), Cell::NegInf);
        assert_eq!(Cell::parse(" "), Cell::Missing);
        assert_eq!(Cell::parse("NaN"), Cell::Missing);
        let t = read_table("a,label\nInfinity,0\n".as_bytes(), &schema()).unwrap();
        assert_eq!(t.rows[0][0], Cell::PosInf);
    }

    #[test]
    fn missing_declared_column() {
        let s = Schema {
            class_column: Some("attack_cat".into()),
            ..schema()
        };
        let err = read_table("a,label\n1,0\n".as_bytes(), &s).unwrap_err();
        assert!(matches!(err, Error::Schema(_)));
    }

    #[test]
    fn custom_delimiter() {
        let s = Schema {
            delimiter: ';',
            ..schema()
        };
        let t = read_table("a;label\n1;0\n".as_bytes(), &s).unwrap();
        assert_eq!(t.rows[0][0], Cell::Number(1.0));
    }
}
