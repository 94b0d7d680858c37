//! Tabular data model: attribute schema with roles, typed cells, CSV I/O.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttributeKind {
    Numeric,
    Categorical,
    Text,
}

impl AttributeKind {
    fn as_str(self) -> &'static str {
        match self {
            AttributeKind::Numeric => "numeric",
            AttributeKind::Categorical => "categorical",
            AttributeKind::Text => "text",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttributeRole {
    Identifier,
    QuasiIdentifier,
    Sensitive,
    Insensitive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeSchema {
    pub name: String,
    pub kind: AttributeKind,
    pub role: AttributeRole,
}

impl AttributeSchema {
    pub fn new(name: impl Into<String>, kind: AttributeKind, role: AttributeRole) -> Self {
        Self {
            name: name.into(),
            kind,
            role,
        }
    }
}

/// Closed numeric interval, rendered `[lo;hi]` (or `[lo]` when degenerate).
#[derive(Debug, Clone, Copy)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self {
            lo: normalize_zero(lo),
            hi: normalize_zero(hi),
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lo == self.hi {
            write!(f, "[{}]", format_number(self.lo))
        } else {
            write!(f, "[{};{}]", format_number(self.lo), format_number(self.hi))
        }
    }
}

/// A single parsed cell.
///
/// Equality, hashing and ordering are exact: numbers compare by value
/// (`-0.0` is normalized to `0.0`), text compares bytewise. Across
/// variants the order is numbers, then intervals, then text.
#[derive(Debug, Clone)]
pub enum Value {
    Number(f64),
    Interval(Interval),
    Text(String),
}

impl Value {
    pub fn number(x: f64) -> Self {
        Value::Number(normalize_zero(x))
    }

    pub fn text(s: impl Into<String>) -> Self {
        Value::Text(s.into())
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            Value::Number(x) => Some(*x),
            _ => None,
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Value::Number(_) => 0,
            Value::Interval(_) => 1,
            Value::Text(_) => 2,
        }
    }
}

fn normalize_zero(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x
    }
}

/// Renders integral values without a fractional part (`35`, not `35.0`).
pub fn format_number(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Value {}

impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Value::Number(a), Value::Number(b)) => a.total_cmp(b),
            (Value::Interval(a), Value::Interval(b)) => {
                a.lo.total_cmp(&b.lo).then(a.hi.total_cmp(&b.hi))
            }
            (Value::Text(a), Value::Text(b)) => a.cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Hash for Value {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.rank().hash(state);
        match self {
            Value::Number(x) => x.to_bits().hash(state),
            Value::Interval(i) => {
                i.lo.to_bits().hash(state);
                i.hi.to_bits().hash(state);
            }
            Value::Text(s) => s.hash(state),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Number(x) => f.write_str(&format_number(*x)),
            Value::Interval(i) => i.fmt(f),
            Value::Text(s) => f.write_str(s),
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Value::Number(x) if x.fract() == 0.0 && x.abs() < 1e15 => s.serialize_i64(*x as i64),
            Value::Number(x) => s.serialize_f64(*x),
            other => s.serialize_str(&other.to_string()),
        }
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::number(x)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Text(s.to_string())
    }
}

/// Label used for the single root of every hierarchy.
pub const ROOT_LABEL: &str = "*";

/// Parses one trimmed cell under `kind`. Numeric attributes also accept
/// interval labels (`[30;39]`, `[32]`) and the root label `*`, so
/// generalized output re-ingests under the same schema.
pub fn parse_cell(raw: &str, kind: AttributeKind) -> Option<Value> {
    let s = raw.trim();
    match kind {
        AttributeKind::Categorical | AttributeKind::Text => Some(Value::Text(s.to_string())),
        AttributeKind::Numeric => {
            if s == ROOT_LABEL {
                return Some(Value::Text(ROOT_LABEL.to_string()));
            }
            if let Some(inner) = s.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
                let mut parts = inner.split(';');
                let lo = parse_finite(parts.next()?)?;
                let hi = match parts.next() {
                    Some(p) => parse_finite(p)?,
                    None => lo,
                };
                if parts.next().is_some() || lo > hi {
                    return None;
                }
                return Some(Value::Interval(Interval::new(lo, hi)));
            }
            parse_finite(s).map(Value::number)
        }
    }
}

fn parse_finite(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|x| x.is_finite())
}

/// A rectangular table: one cell per schema attribute in every row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    schema: Vec<AttributeSchema>,
    rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(schema: Vec<AttributeSchema>, rows: Vec<Vec<Value>>) -> Result<Self> {
        check_unique(&schema)?;
        for (i, row) in rows.iter().enumerate() {
            if row.len() != schema.len() {
                return Err(Error::RowArity {
                    line: i as u64 + 2,
                    expected: schema.len(),
                    found: row.len(),
                });
            }
        }
        Ok(Self { schema, rows })
    }

    /// Parses CSV with a header row whose names must equal the schema order.
    pub fn from_csv(bytes: &[u8], schema: Vec<AttributeSchema>) -> Result<Self> {
        check_unique(&schema)?;
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .from_reader(bytes);
        let header: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
        let expected: Vec<String> = schema.iter().map(|a| a.name.clone()).collect();
        if header != expected {
            return Err(Error::HeaderMismatch {
                expected,
                found: header,
            });
        }
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record?;
            let line = record.position().map(|p| p.line()).unwrap_or(0);
            if record.len() != schema.len() {
                return Err(Error::RowArity {
                    line,
                    expected: schema.len(),
                    found: record.len(),
                });
            }
            let row = record
                .iter()
                .zip(&schema)
                .enumerate()
                .map(|(col, (raw, attr))| {
                    parse_cell(raw, attr.kind).ok_or_else(|| Error::ParseCell {
                        line,
                        column: col + 1,
                        attribute: attr.name.clone(),
                        value: raw.to_string(),
                        kind: attr.kind.as_str(),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Ok(Self { schema, rows })
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut writer = csv::WriterBuilder::new().from_writer(Vec::new());
        writer.write_record(self.schema.iter().map(|a| a.name.as_str()))?;
        for row in &self.rows {
            writer.write_record(row.iter().map(|v| v.to_string()))?;
        }
        writer
            .into_inner()
            .map_err(|e| Error::Io(e.into_error()))
    }

    pub fn schema(&self) -> &[AttributeSchema] {
        &self.schema
    }

    pub fn rows(&self) -> &[Vec<Value>] {
        &self.rows
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.schema
            .iter()
            .position(|a| a.name == name)
            .ok_or_else(|| Error::UnknownAttribute(name.to_string()))
    }

    pub fn column_indices<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<usize>> {
        names.iter().map(|n| self.column_index(n.as_ref())).collect()
    }

    pub fn attribute(&self, name: &str) -> Result<&AttributeSchema> {
        Ok(&self.schema[self.column_index(name)?])
    }

    pub fn cell(&self, row: usize, col: usize) -> &Value {
        &self.rows[row][col]
    }

    /// Keeps only the listed rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        Self {
            schema: self.schema.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }

    /// Drops every identifier-role column.
    pub fn without_identifiers(&self) -> Self {
        let keep: Vec<usize> = (0..self.schema.len())
            .filter(|&i| self.schema[i].role != AttributeRole::Identifier)
            .collect();
        Self {
            schema: keep.iter().map(|&i| self.schema[i].clone()).collect(),
            rows: self
                .rows
                .iter()
                .map(|r| keep.iter().map(|&i| r[i].clone()).collect())
                .collect(),
        }
    }

    pub(crate) fn map_column(&self, col: usize, kind: AttributeKind, f: impl Fn(&Value) -> Value) -> Self {
        let mut out = self.clone();
        out.schema[col].kind = kind;
        for row in &mut out.rows {
            row[col] = f(&row[col]);
        }
        out
    }

    pub(crate) fn rows_mut(&mut self) -> &mut Vec<Vec<Value>> {
        &mut self.rows
    }
}

/// Schema with identifier columns removed, as published by the anonymizer.
pub fn published_schema(schema: &[AttributeSchema]) -> Vec<AttributeSchema> {
    schema
        .iter()
        .filter(|a| a.role != AttributeRole::Identifier)
        .cloned()
        .collect()
}

fn check_unique(schema: &[AttributeSchema]) -> Result<()> {
    let mut seen = HashSet::new();
    for a in schema {
        if !seen.insert(a.name.as_str()) {
            return Err(Error::DuplicateAttribute(a.name.clone()));
        }
    }
    Ok(())
}
