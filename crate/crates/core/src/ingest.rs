//! Delimited-text ingestion into typed columnar tables.
//!
//! Every column is one of three kinds. Numeric and datetime columns are both
//! held as `f64` (datetimes as seconds since the Unix epoch); categorical
//! columns are dictionary encoded. Missing cells are `None` in either form.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Numeric,
    Categorical,
    Datetime,
}

impl ColumnKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ColumnKind::Numeric => "numeric",
            ColumnKind::Categorical => "categorical",
            ColumnKind::Datetime => "datetime",
        }
    }

    pub fn is_ordered(self) -> bool {
        !matches!(self, ColumnKind::Categorical)
    }
}

impl fmt::Display for ColumnKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSchema {
    pub name: String,
    pub kind: ColumnKind,
    /// Tokens read as missing for this column. `None` uses the run-wide list.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub missing_tokens: Option<Vec<String>>,
}

impl ColumnSchema {
    pub fn new(name: impl Into<String>, kind: ColumnKind) -> Self {
        ColumnSchema {
            name: name.into(),
            kind,
            missing_tokens: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData {
    /// Numeric or datetime values.
    Numeric(Vec<Option<f64>>),
    Categorical {
        levels: Vec<String>,
        values: Vec<Option<u32>>,
    },
}

impl ColumnData {
    pub fn len(&self) -> usize {
        match self {
            ColumnData::Numeric(v) => v.len(),
            ColumnData::Categorical { values, .. } => values.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_missing(&self, row: usize) -> bool {
        match self {
            ColumnData::Numeric(v) => v[row].is_none(),
            ColumnData::Categorical { values, .. } => values[row].is_none(),
        }
    }

    pub fn missing_count(&self) -> usize {
        (0..self.len()).filter(|&r| self.is_missing(r)).count()
    }

    pub fn value(&self, row: usize) -> Value<'_> {
        match self {
            ColumnData::Numeric(v) => v[row].map_or(Value::Missing, Value::Number),
            ColumnData::Categorical { levels, values } => {
                values[row].map_or(Value::Missing, |code| Value::Text(&levels[code as usize]))
            }
        }
    }

    fn take(&self, rows: &[usize]) -> ColumnData {
        match self {
            ColumnData::Numeric(v) => ColumnData::Numeric(rows.iter().map(|&r| v[r]).collect()),
            ColumnData::Categorical { levels, values } => ColumnData::Categorical {
                levels: levels.clone(),
                values: rows.iter().map(|&r| values[r]).collect(),
            },
        }
    }
}

/// A borrowed view of one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value<'a> {
    Missing,
    Number(f64),
    Text(&'a str),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    schema: Vec<ColumnSchema>,
    columns: Vec<ColumnData>,
    row_count: usize,
}

impl Table {
    pub fn new(schema: Vec<ColumnSchema>, columns: Vec<ColumnData>) -> Result<Self> {
        if schema.len() != columns.len() {
            return Err(Error::SchemaMismatch(format!(
                "{} schema entries for {} columns",
                schema.len(),
                columns.len()
            )));
        }
        let mut seen = HashSet::new();
        for col in &schema {
            if !seen.insert(col.name.as_str()) {
                return Err(Error::DuplicateColumn(col.name.clone()));
            }
        }
        let row_count = columns.first().map_or(0, ColumnData::len);
        for (col, data) in schema.iter().zip(&columns) {
            if data.len() != row_count {
                return Err(Error::SchemaMismatch(format!(
                    "column `{}` has {} rows, expected {row_count}",
                    col.name,
                    data.len()
                )));
            }
            match (col.kind, data) {
                (ColumnKind::Categorical, ColumnData::Categorical { levels, values }) => {
                    if let Some(bad) = values.iter().flatten().find(|&&c| c as usize >= levels.len()) {
                        return Err(Error::SchemaMismatch(format!(
                            "column `{}` references level {bad} of {}",
                            col.name,
                            levels.len()
                        )));
                    }
                }
                (ColumnKind::Numeric | ColumnKind::Datetime, ColumnData::Numeric(values)) => {
                    if values.iter().flatten().any(|v| !v.is_finite()) {
                        return Err(Error::SchemaMismatch(format!(
                            "column `{}` holds a non-finite value",
                            col.name
                        )));
                    }
                }
                _ => {
                    return Err(Error::SchemaMismatch(format!(
                        "column `{}` is {} but its data has the wrong representation",
                        col.name, col.kind
                    )))
                }
            }
        }
        Ok(Table {
            schema,
            columns,
            row_count,
        })
    }

    pub fn schema(&self) -> &[ColumnSchema] {
        &self.schema
    }

    pub fn columns(&self) -> &[ColumnData] {
        &self.columns
    }

    pub fn column(&self, index: usize) -> &ColumnData {
        &self.columns[index]
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.schema.iter().position(|c| c.name == name)
    }

    pub fn column_names(&self) -> impl Iterator<Item = &str> {
        self.schema.iter().map(|c| c.name.as_str())
    }

    pub fn row_count(&self) -> usize {
        self.row_count
    }

    pub fn column_count(&self) -> usize {
        self.schema.len()
    }

    pub fn is_empty(&self) -> bool {
        self.row_count == 0
    }

    pub fn value(&self, row: usize, col: usize) -> Value<'_> {
        self.columns[col].value(row)
    }

    /// New table holding the given rows (repeats allowed) in the given order.
    pub fn take_rows(&self, rows: &[usize]) -> Table {
        Table {
            schema: self.schema.clone(),
            columns: self.columns.iter().map(|c| c.take(rows)).collect(),
            row_count: rows.len(),
        }
    }

    /// Builds a table whose column `j` is gathered from `self` using `rows[j]`.
    pub(crate) fn gather_columns(&self, rows: &[Vec<usize>]) -> Table {
        debug_assert_eq!(rows.len(), self.column_count());
        let row_count = rows.first().map_or(0, Vec::len);
        Table {
            schema: self.schema.clone(),
            columns: self.columns.iter().zip(rows).map(|(c, r)| c.take(r)).collect(),
            row_count,
        }
    }

    /// Cell-by-cell equality, independent of the categorical level order.
    pub fn same_values(&self, other: &Table) -> bool {
        self.schema.len() == other.schema.len()
            && self
                .schema
                .iter()
                .zip(&other.schema)
                .all(|(a, b)| a.name == b.name && a.kind == b.kind)
            && self.row_count == other.row_count
            && (0..self.column_count()).all(|c| (0..self.row_count).all(|r| self.value(r, c) == other.value(r, c)))
    }

    /// Checks that `other` has the same column names and kinds, in order.
    pub fn check_same_schema(&self, other: &Table) -> Result<()> {
        if self.schema.len() != other.schema.len() {
            return Err(Error::SchemaMismatch(format!(
                "expected {} columns, found {}",
                self.schema.len(),
                other.schema.len()
            )));
        }
        for (a, b) in self.schema.iter().zip(&other.schema) {
            if a.name != b.name {
                return Err(Error::SchemaMismatch(format!(
                    "expected column `{}`, found `{}`",
                    a.name, b.name
                )));
            }
            if a.kind != b.kind {
                return Err(Error::SchemaMismatch(format!(
                    "column `{}` is {} here but {} there",
                    a.name, a.kind, b.kind
                )));
            }
        }
        Ok(())
    }

    /// Reorders `other`'s columns to follow this table's column order.
    pub fn align_columns(&self, other: &Table) -> Result<Table> {
        let mut schema = Vec::with_capacity(self.column_count());
        let mut columns = Vec::with_capacity(self.column_count());
        for col in &self.schema {
            let j = other
                .column_index(&col.name)
                .ok_or_else(|| Error::SchemaMismatch(format!("column `{}` is missing", col.name)))?;
            schema.push(other.schema[j].clone());
            columns.push(other.columns[j].clone());
        }
        if other.column_count() != self.column_count() {
            let extra: Vec<_> = other
                .column_names()
                .filter(|n| self.column_index(n).is_none())
                .collect();
            return Err(Error::SchemaMismatch(format!(
                "unexpected columns: {}",
                extra.join(", ")
            )));
        }
        let aligned = Table::new(schema, columns)?;
        self.check_same_schema(&aligned)?;
        Ok(aligned)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IngestOptions {
    pub delimiter: u8,
    pub missing_tokens: Vec<String>,
    /// `chrono` format strings tried in order after RFC 3339.
    pub datetime_formats: Vec<String>,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            delimiter: b',',
            missing_tokens: vec![String::new(), "?".to_string()],
            datetime_formats: vec![
                "%Y-%m-%dT%H:%M:%S%.f".to_string(),
                "%Y-%m-%d %H:%M:%S%.f".to_string(),
                "%Y-%m-%d".to_string(),
            ],
        }
    }
}

impl IngestOptions {
    fn parse_datetime(&self, token: &str) -> Option<f64> {
        if let Ok(dt) = DateTime::parse_from_rfc3339(token) {
            return Some(epoch_seconds(&dt.naive_utc()));
        }
        for fmt in &self.datetime_formats {
            if let Ok(dt) = NaiveDateTime::parse_from_str(token, fmt) {
                return Some(epoch_seconds(&dt));
            }
            if let Ok(d) = NaiveDate::parse_from_str(token, fmt) {
                return Some(epoch_seconds(&d.and_hms_opt(0, 0, 0)?));
            }
        }
        None
    }
}

fn epoch_seconds(dt: &NaiveDateTime) -> f64 {
    let utc = dt.and_utc();
    utc.timestamp() as f64 + f64::from(utc.timestamp_subsec_nanos()) * 1e-9
}

fn format_datetime(seconds: f64) -> String {
    let whole = seconds.floor();
    let nanos = ((seconds - whole) * 1e9).round() as u32;
    let (whole, nanos) = if nanos >= 1_000_000_000 {
        (whole + 1.0, 0)
    } else {
        (whole, nanos)
    };
    match DateTime::from_timestamp(whole as i64, nanos) {
        Some(dt) if nanos == 0 => dt.naive_utc().format("%Y-%m-%dT%H:%M:%S").to_string(),
        Some(dt) => dt.naive_utc().format("%Y-%m-%dT%H:%M:%S%.f").to_string(),
        None => seconds.to_string(),
    }
}

fn parse_number(token: &str) -> Option<f64> {
    token.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Loads a delimited text file with a header row.
pub fn load_table(
    path: impl AsRef<Path>,
    schema_override: Option<&[ColumnSchema]>,
    opts: &IngestOptions,
) -> Result<Table> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_table(file, schema_override, opts)
}

pub fn read_table<R: Read>(reader: R, schema_override: Option<&[ColumnSchema]>, opts: &IngestOptions) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(opts.delimiter)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();

    let mut seen = HashSet::new();
    for name in &header {
        if !seen.insert(name.as_str()) {
            return Err(Error::DuplicateColumn(name.clone()));
        }
    }
    let declared: HashMap<&str, &ColumnSchema> = match schema_override {
        Some(cols) => {
            let mut map = HashMap::new();
            for col in cols {
                if !seen.contains(col.name.as_str()) {
                    return Err(Error::UnknownColumn(col.name.clone()));
                }
                map.insert(col.name.as_str(), col);
            }
            map
        }
        None => HashMap::new(),
    };

    let mut raw: Vec<Vec<String>> = vec![Vec::new(); header.len()];
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        if record.len() != header.len() {
            return Err(Error::RaggedRow {
                // 1-based data row, header excluded
                row: i + 1,
                expected: header.len(),
                found: record.len(),
            });
        }
        for (col, field) in raw.iter_mut().zip(record.iter()) {
            col.push(field.to_string());
        }
    }

    let mut schema = Vec::with_capacity(header.len());
    let mut columns = Vec::with_capacity(header.len());
    for (name, tokens) in header.into_iter().zip(raw) {
        let decl = declared.get(name.as_str()).copied();
        let missing: &[String] = decl
            .and_then(|d| d.missing_tokens.as_deref())
            .unwrap_or(&opts.missing_tokens);
        let is_missing = |t: &str| missing.iter().any(|m| m == t);

        let kind = match decl {
            Some(d) => d.kind,
            None => infer_kind(&tokens, &is_missing, opts),
        };
        let data = match kind {
            ColumnKind::Numeric | ColumnKind::Datetime => {
                let parse = |t: &str| match kind {
                    ColumnKind::Numeric => parse_number(t),
                    _ => opts.parse_datetime(t),
                };
                let mut values = Vec::with_capacity(tokens.len());
                for (row, token) in tokens.iter().enumerate() {
                    if is_missing(token) {
                        values.push(None);
                        continue;
                    }
                    match parse(token) {
                        Some(v) => values.push(Some(v)),
                        None => {
                            return Err(Error::TypeConflict {
                                column: name,
                                kind: kind.as_str(),
                                row: row + 1,
                                token: token.clone(),
                            })
                        }
                    }
                }
                ColumnData::Numeric(values)
            }
            ColumnKind::Categorical => {
                let mut levels = Vec::new();
                let mut index: HashMap<String, u32> = HashMap::new();
                let values = tokens
                    .into_iter()
                    .map(|t| {
                        if is_missing(&t) {
                            return None;
                        }
                        let next = index.len() as u32;
                        Some(*index.entry(t).or_insert_with_key(|k| {
                            levels.push(k.clone());
                            next
                        }))
                    })
                    .collect();
                ColumnData::Categorical { levels, values }
            }
        };
        schema.push(ColumnSchema {
            name,
            kind,
            missing_tokens: decl.and_then(|d| d.missing_tokens.clone()),
        });
        columns.push(data);
    }
    Table::new(schema, columns)
}

fn infer_kind(tokens: &[String], is_missing: &dyn Fn(&str) -> bool, opts: &IngestOptions) -> ColumnKind {
    let mut present = tokens.iter().filter(|t| !is_missing(t)).peekable();
    if present.peek().is_none() {
        return ColumnKind::Categorical;
    }
    let present: Vec<&String> = present.collect();
    if present.iter().all(|t| parse_number(t).is_some()) {
        ColumnKind::Numeric
    } else if present.iter().all(|t| opts.parse_datetime(t).is_some()) {
        ColumnKind::Datetime
    } else {
        ColumnKind::Categorical
    }
}

/// Writes a table as delimited text. Missing cells are written as empty fields.
pub fn write_table(table: &Table, path: impl AsRef<Path>, delimiter: u8) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_table_to(table, file, delimiter)
}

pub fn write_table_to<W: Write>(table: &Table, writer: W, delimiter: u8) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().delimiter(delimiter).from_writer(writer);
    if table.column_count() > 0 {
        wtr.write_record(table.column_names())?;
    }
    let mut record: Vec<String> = vec![String::new(); table.column_count()];
    for row in 0..table.row_count() {
        for (col, (field, schema)) in record.iter_mut().zip(table.schema()).enumerate() {
            *field = match table.value(row, col) {
                Value::Missing => String::new(),
                Value::Number(v) if schema.kind == ColumnKind::Datetime => format_datetime(v),
                Value::Number(v) => v.to_string(),
                Value::Text(s) => s.to_string(),
            };
        }
        wtr.write_record(&record)?;
    }
    wtr.flush().map_err(|e| Error::io("<output>", e))?;
    Ok(())
}

#[derive(Deserialize)]
struct SchemaFile {
    columns: BTreeMap<String, ColumnKind>,
    #[serde(default)]
    missing_tokens: BTreeMap<String, Vec<String>>,
}

/// Parses a schema override file: a TOML table mapping column names to kinds.
///
/// ```toml
/// [columns]
/// age = "numeric"
/// joined = "datetime"
///
/// [missing_tokens]
/// age = ["", "NA"]
/// ```
pub fn parse_schema_override(text: &str) -> Result<Vec<ColumnSchema>> {
    let file: SchemaFile = toml::from_str(text).map_err(|e| Error::SchemaFile(e.to_string()))?;
    for name in file.missing_tokens.keys() {
        if !file.columns.contains_key(name) {
            return Err(Error::SchemaFile(format!(
                "missing_tokens names `{name}`, which has no declared kind"
            )));
        }
    }
    let mut tokens = file.missing_tokens;
    Ok(file
        .columns
        .into_iter()
        .map(|(name, kind)| ColumnSchema {
            missing_tokens: tokens.remove(&name),
            name,
            kind,
        })
        .collect())
}

pub fn load_schema_override(path: impl AsRef<Path>) -> Result<Vec<ColumnSchema>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_schema_override(&text)
}

/// Randomly partitions rows into two halves. Odd counts give the extra row to
/// the first (training) half. Rows keep their original relative order.
pub fn split_train_holdout(table: &Table, seed: u64) -> Result<(Table, Table)> {
    let n = table.row_count();
    if n < 2 {
        return Err(Error::TooFewRows { needed: 2, found: n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (train, holdout) = order.split_at_mut(n.div_ceil(2));
    train.sort_unstable();
    holdout.sort_unstable();
    Ok((table.take_rows(train), table.take_rows(holdout)))
}

/// Draws `n` distinct rows uniformly at random, keeping their original order.
pub fn subsample(table: &Table, n: usize, seed: u64) -> Result<Table> {
    if n > table.row_count() {
        return Err(Error::TooFewRows {
            needed: n,
            found: table.row_count(),
        });
    }
    let mut order: Vec<usize> = (0..table.row_count()).collect();
    let (picked, _) = order.partial_shuffle(&mut ChaCha8Rng::seed_from_u64(seed), n);
    picked.sort_unstable();
    Ok(table.take_rows(picked))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(text: &str) -> Table {
        read_table(text.as_bytes(), None, &IngestOptions::default()).unwrap()
    }

    #[test]
    fn missing_question_mark_in_numeric_column() {
        let t = read("x\n1\n2\n?\n");
        assert_eq!(t.schema()[0].kind, ColumnKind::Numeric);
        assert_eq!(t.row_count(), 3);
        assert_eq!(t.column(0), &ColumnData::Numeric(vec![Some(1.0), Some(2.0), None]));
    }

    #[test]
    fn header_only_is_empty_categorical() {
        let t = read("a,b,c\n");
        assert_eq!(t.row_count(), 0);
        assert!(t.schema().iter().all(|c| c.kind == ColumnKind::Categorical));
    }

    #[test]
    fn single_bad_token_demotes_to_categorical() {
        let t = read("x,y\n1,a\n2,b\nthree,c\n");
        assert_eq!(t.schema()[0].kind, ColumnKind::Categorical);
        assert_eq!(t.value(2, 0), Value::Text("three"));
    }

    #[test]
    fn non_finite_tokens_are_not_numeric() {
        let t = read("x\n1\nNaN\n");
        assert_eq!(t.schema()[0].kind, ColumnKind::Categorical);
    }

    #[test]
    fn datetimes_become_epoch_seconds() {
        let t = read("d,i\n1970-01-02,1\n1970-01-01T00:01:00,2\n,3\n");
        assert_eq!(t.schema()[0].kind, ColumnKind::Datetime);
        assert_eq!(
            t.column(0),
            &ColumnData::Numeric(vec![Some(86_400.0), Some(60.0), None])
        );
    }

    #[test]
    fn ragged_row_is_an_error() {
        let err = read_table("a,b\n1,2\n3\n".as_bytes(), None, &IngestOptions::default()).unwrap_err();
        assert!(
            matches!(
                err,
                Error::RaggedRow {
                    row: 2,
                    expected: 2,
                    found: 1
                }
            ),
            "{err}"
        );
    }

    #[test]
    fn declared_numeric_with_text_conflicts() {
        let schema = [ColumnSchema::new("x", ColumnKind::Numeric)];
        let err = read_table("x\n1\nabc\n".as_bytes(), Some(&schema), &IngestOptions::default()).unwrap_err();
        assert!(matches!(err, Error::TypeConflict { row: 2, .. }), "{err}");
    }

    #[test]
    fn override_must_name_header_columns() {
        let schema = [ColumnSchema::new("nope", ColumnKind::Numeric)];
        let err = read_table("x\n1\n".as_bytes(), Some(&schema), &IngestOptions::default()).unwrap_err();
        assert!(matches!(err, Error::UnknownColumn(_)));
    }

    #[test]
    fn override_forces_categorical() {
        let schema = [ColumnSchema::new("zip", ColumnKind::Categorical)];
        let t = read_table("zip\n8001\n8002\n".as_bytes(), Some(&schema), &IngestOptions::default()).unwrap();
        assert_eq!(t.schema()[0].kind, ColumnKind::Categorical);
    }

    #[test]
    fn per_column_missing_tokens() {
        let schema = parse_schema_override("[columns]\nx = \"numeric\"\n[missing_tokens]\nx = [\"NA\"]\n").unwrap();
        let t = read_table("x,y\nNA,?\n2,b\n".as_bytes(), Some(&schema), &IngestOptions::default()).unwrap();
        assert!(t.column(0).is_missing(0));
        assert!(t.column(1).is_missing(0));
    }

    #[test]
    fn schema_file_rejects_unknown_kind() {
        assert!(parse_schema_override("[columns]\nx = \"integer\"\n").is_err());
    }

    #[test]
    fn duplicate_header_rejected() {
        let err = read_table("a,a\n1,2\n".as_bytes(), None, &IngestOptions::default()).unwrap_err();
        assert!(matches!(err, Error::DuplicateColumn(_)));
    }

    #[test]
    fn custom_delimiter() {
        let opts = IngestOptions {
            delimiter: b';',
            ..IngestOptions::default()
        };
        let t = read_table("a;b\n1;x\n".as_bytes(), None, &opts).unwrap();
        assert_eq!(t.column_count(), 2);
    }

    #[test]
    fn odd_split_gives_extra_row_to_training() {
        let t = read("x\n1\n2\n3\n4\n5\n");
        let (train, holdout) = split_train_holdout(&t, 3).unwrap();
        assert_eq!((train.row_count(), holdout.row_count()), (3, 2));
    }

    #[test]
    fn split_needs_two_rows() {
        let t = read("x\n1\n");
        assert!(matches!(split_train_holdout(&t, 0), Err(Error::TooFewRows { .. })));
    }

    #[test]
    fn split_is_deterministic() {
        let t = read("x\n1\n2\n3\n4\n5\n6\n7\n8\n");
        let a = split_train_holdout(&t, 11).unwrap();
        let b = split_train_holdout(&t, 11).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn datetime_round_trip() {
        let t = read("d,x\n2021-03-04T05:06:07,1\n2021-03-04,2\n,3\n");
        let mut buf = Vec::new();
        write_table_to(&t, &mut buf, b',').unwrap();
        let back = read_table(buf.as_slice(), None, &IngestOptions::default()).unwrap();
        assert!(t.same_values(&back));
    }

    #[test]
    fn align_columns_reorders() {
        let a = read("x,y\n1,a\n");
        let b = read("y,x\nb,2\n");
        let aligned = a.align_columns(&b).unwrap();
        assert_eq!(aligned.value(0, 0), Value::Number(2.0));
        let c = read("x\n1\n");
        assert!(a.align_columns(&c).is_err());
    }
}
