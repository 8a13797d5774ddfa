use serde::{Deserialize, Serialize};

use super::ScenarioSpec;
use crate::Result;

/// A table cell: a number or a label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Number(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Number(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Number(v as f64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cell::Number(v) => write!(f, "{v:e}"),
            Cell::Text(s) => write!(f, "{s}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Numeric column by name, skipping text cells.
    pub fn column(&self, name: &str) -> Vec<f64> {
        let Some(k) = self.columns.iter().position(|c| c == name) else { return Vec::new() };
        self.rows
            .iter()
            .filter_map(|r| match r[k] {
                Cell::Number(v) => Some(v),
                Cell::Text(_) => None,
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = csv::Writer::from_writer(Vec::new());
        out.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            out.write_record(row.iter().map(|c| c.to_string())).expect("in-memory write");
        }
        String::from_utf8(out.into_inner().expect("in-memory flush")).expect("utf-8 output")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparison {
    AtMost,
    AtLeast,
    LessThan,
    GreaterThan,
}

/// One named check of a tabulated value against a threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    /// Acceptance criterion this verdict belongs to, e.g. `"sphere-identity-convergence"`.
    pub criterion: String,
    pub quantity: String,
    pub value: f64,
    pub comparison: Comparison,
    pub threshold: f64,
    pub passed: bool,
}

impl Verdict {
    pub fn new(criterion: &str, quantity: &str, value: f64, comparison: Comparison, threshold: f64) -> Self {
        let passed = match comparison {
            Comparison::AtMost => value <= threshold,
            Comparison::AtLeast => value >= threshold,
            Comparison::LessThan => value < threshold,
            Comparison::GreaterThan => value > threshold,
        };
        Self { criterion: criterion.into(), quantity: quantity.into(), value, comparison, threshold, passed }
    }

    pub fn at_most(criterion: &str, quantity: &str, value: f64, threshold: f64) -> Self {
        Self::new(criterion, quantity, value, Comparison::AtMost, threshold)
    }

    pub fn at_least(criterion: &str, quantity: &str, value: f64, threshold: f64) -> Self {
        Self::new(criterion, quantity, value, Comparison::AtLeast, threshold)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub scenario: String,
    pub spec_hash: String,
    /// The parameters that determine this report.
    pub spec: serde_json::Value,
    /// Seconds since the Unix epoch; `None` for reproducible output.
    pub timestamp: Option<u64>,
    pub tables: Vec<Table>,
    pub verdicts: Vec<Verdict>,
    pub notes: Vec<String>,
}

impl ScenarioReport {
    pub fn new(spec: &ScenarioSpec) -> Self {
        let value = serde_json::to_value(spec).expect("scenario specs serialize");
        Self::custom(spec.id.name(), value)
    }

    /// Report for an ad-hoc run described by arbitrary JSON parameters.
    pub fn custom(name: &str, spec: serde_json::Value) -> Self {
        Self {
            scenario: name.into(),
            spec_hash: super::short_hash(spec.to_string().as_bytes()),
            spec,
            timestamp: None,
            tables: Vec::new(),
            verdicts: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn verdicts_for(&self, criterion: &str) -> Vec<&Verdict> {
        self.verdicts.iter().filter(|v| v.criterion == criterion).collect()
    }

    pub fn stamp_now(&mut self) {
        self.timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .ok()
            .map(|d| d.as_secs());
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}
