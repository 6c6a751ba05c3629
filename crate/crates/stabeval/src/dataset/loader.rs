//! CSV loading with a plain-text schema sidecar.
//!
//! Schema files list one `column_name: role` pair per line, where role is
//! `numeric`, `categorical`, or `class` (exactly one class column). Blank
//! lines and `#` comments are ignored. In the CSV itself, `?` and empty
//! cells are missing values: numeric missing becomes NaN (filled later from
//! training-split means), categorical missing becomes the dedicated
//! `__missing__` category.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use crate::dataset::{Column, Dataset, FeatureSpec, MISSING_CATEGORY};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnRole {
    Numeric,
    Categorical,
    Class,
}

/// Per-column role declarations for a CSV file.
#[derive(Debug, Clone)]
pub struct Schema {
    entries: Vec<(String, ColumnRole)>,
}

impl Schema {
    pub fn new(entries: Vec<(String, ColumnRole)>) -> Self {
        Schema { entries }
    }

    pub fn role_of(&self, column: &str) -> Option<ColumnRole> {
        self.entries
            .iter()
            .find(|(name, _)| name == column)
            .map(|(_, role)| *role)
    }

    pub fn entries(&self) -> &[(String, ColumnRole)] {
        &self.entries
    }

    /// Sidecar text form, parseable by [`load_schema`].
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (name, role) in &self.entries {
            let role = match role {
                ColumnRole::Numeric => "numeric",
                ColumnRole::Categorical => "categorical",
                ColumnRole::Class => "class",
            };
            out.push_str(name);
            out.push_str(": ");
            out.push_str(role);
            out.push('\n');
        }
        out
    }
}

pub fn load_schema(path: impl AsRef<Path>) -> Result<Schema> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_schema(&text)
}

pub(crate) fn parse_schema(text: &str) -> Result<Schema> {
    let mut entries = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (name, role) = line.split_once(':').ok_or_else(|| {
            Error::Schema(format!("line {}: expected `name: role`", lineno + 1))
        })?;
        let role = match role.trim() {
            "numeric" => ColumnRole::Numeric,
            "categorical" => ColumnRole::Categorical,
            "class" => ColumnRole::Class,
            other => {
                return Err(Error::Schema(format!(
                    "line {}: unknown role {:?}",
                    lineno + 1,
                    other
                )))
            }
        };
        entries.push((name.trim().to_string(), role));
    }
    let class_count = entries
        .iter()
        .filter(|(_, r)| *r == ColumnRole::Class)
        .count();
    if class_count != 1 {
        return Err(Error::Schema(format!(
            "expected exactly one class column, found {}",
            class_count
        )));
    }
    Ok(Schema { entries })
}

fn is_missing(cell: &str) -> bool {
    let t = cell.trim();
    t.is_empty() || t == "?"
}

/// Load a headered CSV into a typed [`Dataset`] according to `schema`.
///
/// Rows keep file order. Class labels are integer-coded in lexicographic
/// class-name order so repeated loads agree byte for byte.
pub fn load_csv(path: impl AsRef<Path>, schema: &Schema) -> Result<Dataset> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)
        .map_err(|e| Error::Csv {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;

    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Csv {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();

    let mut roles = Vec::with_capacity(headers.len());
    let mut class_col = None;
    for (idx, name) in headers.iter().enumerate() {
        let role = schema
            .role_of(name)
            .ok_or_else(|| Error::Schema(format!("column {:?} not covered by schema", name)))?;
        if role == ColumnRole::Class {
            class_col = Some(idx);
        }
        roles.push(role);
    }
    let class_col = class_col
        .ok_or_else(|| Error::Schema("schema class column absent from csv header".into()))?;

    // Read everything as strings first so category vocabularies can be
    // sorted canonically before cells are coded.
    let mut raw_rows: Vec<Vec<String>> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Csv {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        if record.len() != headers.len() {
            return Err(Error::RaggedRow {
                row: i + 1,
                got: record.len(),
                expected: headers.len(),
            });
        }
        raw_rows.push(record.iter().map(|c| c.trim().to_string()).collect());
    }
    if raw_rows.is_empty() {
        return Err(Error::EmptyDataset);
    }

    let mut class_values = BTreeSet::new();
    for row in &raw_rows {
        let cell = &row[class_col];
        if is_missing(cell) {
            return Err(Error::Schema(format!("missing class label: {:?}", cell)));
        }
        class_values.insert(cell.clone());
    }
    if class_values.len() < 2 {
        return Err(Error::SingleClass(
            class_values.into_iter().next().unwrap_or_default(),
        ));
    }
    let class_names: Vec<String> = class_values.into_iter().collect();
    let class_id = |s: &str| class_names.iter().position(|c| c == s).unwrap() as u32;

    let mut features = Vec::new();
    let mut columns = Vec::new();
    for (idx, name) in headers.iter().enumerate() {
        match roles[idx] {
            ColumnRole::Class => continue,
            ColumnRole::Numeric => {
                let mut values = Vec::with_capacity(raw_rows.len());
                for (i, row) in raw_rows.iter().enumerate() {
                    let cell = &row[idx];
                    if is_missing(cell) {
                        values.push(f64::NAN);
                    } else {
                        let v: f64 = cell.parse().map_err(|_| Error::BadNumeric {
                            row: i + 1,
                            column: name.clone(),
                            value: cell.clone(),
                        })?;
                        values.push(v);
                    }
                }
                features.push(FeatureSpec::numeric(name.clone()));
                columns.push(Column::Numeric(values));
            }
            ColumnRole::Categorical => {
                let mut vocab = BTreeSet::new();
                for row in &raw_rows {
                    let cell = &row[idx];
                    if is_missing(cell) {
                        vocab.insert(MISSING_CATEGORY.to_string());
                    } else {
                        vocab.insert(cell.clone());
                    }
                }
                let categories: Vec<String> = vocab.into_iter().collect();
                let code = |s: &str| categories.iter().position(|c| c == s).unwrap() as u32;
                let values = raw_rows
                    .iter()
                    .map(|row| {
                        let cell = &row[idx];
                        if is_missing(cell) {
                            code(MISSING_CATEGORY)
                        } else {
                            code(cell)
                        }
                    })
                    .collect();
                features.push(FeatureSpec::categorical(name.clone(), categories));
                columns.push(Column::Categorical(values));
            }
        }
    }

    let labels = raw_rows
        .iter()
        .map(|row| class_id(&row[class_col]))
        .collect();
    Dataset::new(features, columns, labels, class_names)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    const SCHEMA: &str = "x: numeric\ncolor: categorical\nlabel: class\n";

    #[test]
    fn loads_small_file() {
        let csv = write_temp("x,color,label\n1.5,red,A\n2.0,blue,B\n3.5,red,A\n0.5,blue,B\n");
        let schema = parse_schema(SCHEMA).unwrap();
        let d = load_csv(csv.path(), &schema).unwrap();
        assert_eq!(d.n_rows(), 4);
        assert_eq!(d.n_features(), 2);
        assert_eq!(d.n_classes(), 2);
        assert_eq!(d.class_names(), &["A".to_string(), "B".to_string()]);
        // categories sorted lexicographically
        assert_eq!(d.feature(1).categories, vec!["blue", "red"]);
    }

    #[test]
    fn missing_cells_become_nan_and_missing_category() {
        let csv = write_temp("x,color,label\n?,red,A\n2.0,?,B\n");
        let schema = parse_schema(SCHEMA).unwrap();
        let d = load_csv(csv.path(), &schema).unwrap();
        match d.column(0) {
            Column::Numeric(v) => assert!(v[0].is_nan()),
            _ => unreachable!(),
        }
        assert!(d
            .feature(1)
            .categories
            .contains(&MISSING_CATEGORY.to_string()));
    }

    #[test]
    fn rejects_unparsable_numeric() {
        let csv = write_temp("x,color,label\nnope,red,A\n2.0,blue,B\n");
        let schema = parse_schema(SCHEMA).unwrap();
        assert!(matches!(
            load_csv(csv.path(), &schema),
            Err(Error::BadNumeric { .. })
        ));
    }

    #[test]
    fn rejects_single_class_file() {
        let csv = write_temp("x,color,label\n1.0,red,A\n2.0,blue,A\n");
        let schema = parse_schema(SCHEMA).unwrap();
        assert!(matches!(
            load_csv(csv.path(), &schema),
            Err(Error::SingleClass(_))
        ));
    }

    #[test]
    fn rejects_ragged_row() {
        let csv = write_temp("x,color,label\n1.0,red,A\n2.0,blue\n");
        let schema = parse_schema(SCHEMA).unwrap();
        assert!(matches!(
            load_csv(csv.path(), &schema),
            Err(Error::RaggedRow { .. })
        ));
    }

    #[test]
    fn missing_file_is_io_error() {
        let schema = parse_schema(SCHEMA).unwrap();
        assert!(matches!(
            load_csv("/nonexistent/file.csv", &schema),
            Err(Error::Csv { .. })
        ));
    }

    #[test]
    fn schema_round_trip() {
        let schema = parse_schema(SCHEMA).unwrap();
        let again = parse_schema(&schema.render()).unwrap();
        assert_eq!(schema.entries(), again.entries());
    }
}
