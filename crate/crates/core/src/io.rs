//! File formats: CSV matrices, plan files, and the key/value block shared
//! with run reports.
//!
//! CSV schema: header `model_id,t1,..,tT`, one row per model, UTF-8, LF
//! line endings, `.` decimal separator. Real values are written with 17
//! significant digits so a save/load round trip is bit-exact. Plan and
//! report files are `key: value` lines; list values are space-separated.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::types::{BinaryTrustMatrix, ModelOutputs, SelectionPlan, TrustMatrix};

/// Current version stamped into plan and report files.
pub const SCHEMA_VERSION: u32 = 1;

fn fmt_value(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_header(slots: usize) -> String {
    let mut header = String::from("model_id");
    for j in 1..=slots {
        header.push_str(&format!(",t{j}"));
    }
    header
}

/// Serializes an output matrix to the CSV schema.
pub fn outputs_to_csv(outputs: &ModelOutputs) -> String {
    let mut text = csv_header(outputs.slot_count());
    text.push('\n');
    for (i, id) in outputs.model_ids().iter().enumerate() {
        text.push_str(id);
        for j in 0..outputs.slot_count() {
            text.push(',');
            text.push_str(&fmt_value(outputs.value(i, j)));
        }
        text.push('\n');
    }
    text
}

/// Serializes a trust matrix; model ids must match the matrix rows.
pub fn trust_to_csv(trust: &TrustMatrix, model_ids: &[String]) -> String {
    let mut text = csv_header(trust.slot_count());
    text.push('\n');
    for i in 0..trust.model_count() {
        text.push_str(model_ids.get(i).map_or("?", |s| s.as_str()));
        for j in 0..trust.slot_count() {
            text.push(',');
            text.push_str(&fmt_value(trust.value(i, j)));
        }
        text.push('\n');
    }
    text
}

/// Serializes a binary matrix with plain 0/1 cells.
pub fn binary_to_csv(matrix: &BinaryTrustMatrix, model_ids: &[String]) -> String {
    let mut text = csv_header(matrix.slot_count());
    text.push('\n');
    for i in 0..matrix.model_count() {
        text.push_str(model_ids.get(i).map_or("?", |s| s.as_str()));
        for j in 0..matrix.slot_count() {
            text.push(',');
            text.push(if matrix.trusted(i, j) { '1' } else { '0' });
        }
        text.push('\n');
    }
    text
}

/// Parsed CSV payload before domain validation.
struct RawCsv {
    ids: Vec<String>,
    rows: Vec<Vec<f64>>,
}

fn parse_numeric_csv(text: &str) -> Result<RawCsv> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Parse { line: 1, message: "empty file".into() })?;
    let header_cells: Vec<&str> = header.split(',').collect();
    if header_cells.first() != Some(&"model_id") || header_cells.len() < 2 {
        return Err(Error::Parse {
            line: 1,
            message: "header must be model_id,t1,..,tT".into(),
        });
    }
    let slots = header_cells.len() - 1;

    let mut ids = Vec::new();
    let mut rows = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != slots + 1 {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected {} cells, found {}", slots + 1, cells.len()),
            });
        }
        let mut row = Vec::with_capacity(slots);
        for (c, cell) in cells[1..].iter().enumerate() {
            let v: f64 = cell.trim().parse().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("column t{}: {cell:?} is not a number", c + 1),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("column t{}: {cell:?} is not finite", c + 1),
                });
            }
            row.push(v);
        }
        ids.push(cells[0].trim().to_string());
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse { line: 1, message: "no data rows".into() });
    }
    Ok(RawCsv { ids, rows })
}

/// Parses the CSV schema into a validated output matrix.
pub fn outputs_from_csv(text: &str) -> Result<ModelOutputs> {
    let raw = parse_numeric_csv(text)?;
    ModelOutputs::new(raw.ids, raw.rows)
}

/// Parses the CSV schema into a validated binary matrix. Cells must be
/// exactly 0 or 1.
pub fn binary_from_csv(text: &str) -> Result<BinaryTrustMatrix> {
    let raw = parse_numeric_csv(text)?;
    let mut rows = Vec::with_capacity(raw.rows.len());
    for (i, row) in raw.rows.iter().enumerate() {
        let mut brow = Vec::with_capacity(row.len());
        for (j, &v) in row.iter().enumerate() {
            if v == 0.0 {
                brow.push(0u8);
            } else if v == 1.0 {
                brow.push(1u8);
            } else {
                return Err(Error::Parse {
                    line: i + 2,
                    message: format!("column t{}: value {v} is not binary", j + 1),
                });
            }
        }
        rows.push(brow);
    }
    BinaryTrustMatrix::from_rows(rows)
}

pub fn load_outputs(path: &Path) -> Result<ModelOutputs> {
    outputs_from_csv(&fs::read_to_string(path)?)
}

pub fn load_binary(path: &Path) -> Result<BinaryTrustMatrix> {
    binary_from_csv(&fs::read_to_string(path)?)
}

pub fn save_outputs(path: &Path, outputs: &ModelOutputs) -> Result<()> {
    Ok(fs::write(path, outputs_to_csv(outputs))?)
}

pub fn save_binary(path: &Path, matrix: &BinaryTrustMatrix, ids: &[String]) -> Result<()> {
    Ok(fs::write(path, binary_to_csv(matrix, ids))?)
}

pub fn save_trust(path: &Path, trust: &TrustMatrix, ids: &[String]) -> Result<()> {
    Ok(fs::write(path, trust_to_csv(trust, ids))?)
}

/// A plan file's raw fields, round-tripped verbatim so reports stay
/// re-derivable from the plan plus the matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanFile {
    pub solver: String,
    pub assignment: Vec<usize>,
    pub switch_count: usize,
    pub trust_score: usize,
    pub failsafe_slots: BTreeSet<usize>,
}

/// Renders a plan to the key/value format.
pub fn plan_to_text(solver: &str, plan: &SelectionPlan) -> String {
    let mut kv = KvBlock::new("plan");
    kv.push("solver", solver);
    kv.push("slots", plan.slot_count());
    kv.push_list("assignment", plan.assignment().iter());
    kv.push("switch_count", plan.switch_count());
    kv.push("trust_score", plan.trust_score());
    kv.push_list("failsafe_slots", plan.failsafe_slots().iter());
    kv.into_text()
}

pub fn save_plan(path: &Path, solver: &str, plan: &SelectionPlan) -> Result<()> {
    Ok(fs::write(path, plan_to_text(solver, plan))?)
}

/// Parses a plan file.
pub fn plan_from_text(text: &str) -> Result<PlanFile> {
    let kv = parse_kv(text)?;
    if kv.get("kind") != Some("plan") {
        return Err(Error::Parse { line: 2, message: "kind must be plan".into() });
    }
    let assignment = kv.parse_list::<usize>("assignment")?;
    let failsafe = kv.parse_list::<usize>("failsafe_slots")?;
    let slots: usize = kv.parse_scalar("slots")?;
    if slots != assignment.len() {
        return Err(Error::Parse {
            line: 1,
            message: format!("slots says {slots}, assignment has {}", assignment.len()),
        });
    }
    Ok(PlanFile {
        solver: kv.get("solver").unwrap_or("?").to_string(),
        assignment,
        switch_count: kv.parse_scalar("switch_count")?,
        trust_score: kv.parse_scalar("trust_score")?,
        failsafe_slots: failsafe.into_iter().collect(),
    })
}

pub fn load_plan(path: &Path) -> Result<PlanFile> {
    plan_from_text(&fs::read_to_string(path)?)
}

/// Builder for the `key: value` block format.
pub struct KvBlock {
    lines: Vec<String>,
}

impl KvBlock {
    pub fn new(kind: &str) -> Self {
        let mut kv = KvBlock { lines: Vec::new() };
        kv.push("schema_version", SCHEMA_VERSION);
        kv.push("kind", kind);
        kv
    }

    pub fn push(&mut self, key: &str, value: impl std::fmt::Display) {
        self.lines.push(format!("{key}: {value}"));
    }

    pub fn push_list<T: std::fmt::Display>(&mut self, key: &str, items: impl Iterator<Item = T>) {
        let joined = items.map(|v| v.to_string()).collect::<Vec<_>>().join(" ");
        self.lines.push(format!("{key}: {joined}"));
    }

    pub fn into_text(self) -> String {
        let mut text = self.lines.join("\n");
        text.push('\n');
        text
    }
}

/// Parsed key/value block with ordered keys.
#[derive(Debug, Clone, Default)]
pub struct KvMap {
    entries: Vec<(String, String)>,
}

impl KvMap {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn parse_scalar<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let raw = self.get(key).ok_or_else(|| Error::Parse {
            line: 1,
            message: format!("missing key {key:?}"),
        })?;
        raw.trim().parse().map_err(|_| Error::Parse {
            line: 1,
            message: format!("key {key:?}: cannot parse {raw:?}"),
        })
    }

    pub fn parse_list<T: std::str::FromStr>(&self, key: &str) -> Result<Vec<T>> {
        let raw = self.get(key).ok_or_else(|| Error::Parse {
            line: 1,
            message: format!("missing key {key:?}"),
        })?;
        raw.split_whitespace()
            .map(|tok| {
                tok.parse().map_err(|_| Error::Parse {
                    line: 1,
                    message: format!("key {key:?}: cannot parse item {tok:?}"),
                })
            })
            .collect()
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }
}

/// Parses `key: value` lines; blank lines are skipped.
pub fn parse_kv(text: &str) -> Result<KvMap> {
    let mut entries = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (key, value) = line.split_once(':').ok_or_else(|| Error::Parse {
            line: idx + 1,
            message: format!("expected key: value, found {line:?}"),
        })?;
        entries.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(KvMap { entries })
}
