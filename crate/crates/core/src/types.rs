//! Shared domain types: output/trust matrices, selection plans, and the
//! configuration knobs consumed by every solver.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// Dense M x T matrix of raw model outputs, one row per model.
///
/// Entries are real-valued model predictions (vehicle counts, remaining
/// useful life, ...). Construction validates shape and finiteness; the
/// matrix is immutable afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelOutputs {
    values: Vec<f64>,
    model_ids: Vec<String>,
    slots: usize,
}

impl ModelOutputs {
    /// Builds a validated output matrix from per-model rows.
    pub fn new(model_ids: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::input("output matrix needs at least one model row"));
        }
        if model_ids.len() != rows.len() {
            return Err(Error::dims(format!(
                "{} model ids for {} rows",
                model_ids.len(),
                rows.len()
            )));
        }
        let slots = rows[0].len();
        if slots == 0 {
            return Err(Error::input("output matrix needs at least one time slot"));
        }
        let mut values = Vec::with_capacity(rows.len() * slots);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != slots {
                return Err(Error::dims(format!(
                    "row {} has {} slots, expected {}",
                    i,
                    row.len(),
                    slots
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::input(format!(
                        "non-finite output at model {i}, slot {j}"
                    )));
                }
                values.push(v);
            }
        }
        let mut seen = BTreeSet::new();
        for id in &model_ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::input(format!("duplicate model id {id:?}")));
            }
        }
        Ok(Self { values, model_ids, slots })
    }

    /// Same as [`ModelOutputs::new`] with synthetic ids `m1..mM`.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let ids = (1..=rows.len()).map(|i| format!("m{i}")).collect();
        Self::new(ids, rows)
    }

    pub fn model_count(&self) -> usize {
        self.model_ids.len()
    }

    pub fn slot_count(&self) -> usize {
        self.slots
    }

    pub fn value(&self, model: usize, slot: usize) -> f64 {
        self.values[model * self.slots + slot]
    }

    /// All outputs of one model, in slot order.
    pub fn row(&self, model: usize) -> &[f64] {
        &self.values[model * self.slots..(model + 1) * self.slots]
    }

    /// All model outputs at one slot, in row order.
    pub fn column(&self, slot: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.model_count()).map(move |i| self.value(i, slot))
    }

    pub fn model_ids(&self) -> &[String] {
        &self.model_ids
    }
}

/// M x T matrix of trust levels, each in `[0, p_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrustMatrix {
    values: Vec<f64>,
    models: usize,
    slots: usize,
    p_max: f64,
}

impl TrustMatrix {
    pub(crate) fn from_raw(values: Vec<f64>, models: usize, slots: usize, p_max: f64) -> Result<Self> {
        if !p_max.is_finite() || p_max <= 0.0 {
            return Err(Error::config(format!("p_max must be positive, got {p_max}")));
        }
        if values.len() != models * slots || models == 0 || slots == 0 {
            return Err(Error::dims("trust matrix shape"));
        }
        for &v in &values {
            if !v.is_finite() || v < 0.0 || v > p_max {
                return Err(Error::input(format!(
                    "trust level {v} outside [0, {p_max}]"
                )));
            }
        }
        Ok(Self { values, models, slots, p_max })
    }

    /// Builds a validated trust matrix from per-model rows.
    pub fn new(rows: Vec<Vec<f64>>, p_max: f64) -> Result<Self> {
        let models = rows.len();
        let slots = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != slots) {
            return Err(Error::dims("ragged trust matrix"));
        }
        let values = rows.into_iter().flatten().collect();
        Self::from_raw(values, models, slots, p_max)
    }

    pub fn model_count(&self) -> usize {
        self.models
    }

    pub fn slot_count(&self) -> usize {
        self.slots
    }

    pub fn p_max(&self) -> f64 {
        self.p_max
    }

    pub fn value(&self, model: usize, slot: usize) -> f64 {
        self.values[model * self.slots + slot]
    }

    pub fn row(&self, model: usize) -> &[f64] {
        &self.values[model * self.slots..(model + 1) * self.slots]
    }
}

/// M x T matrix over {0,1}: which models pass the exclusion test at each
/// slot. This is the payoff matrix consumed by all solvers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryTrustMatrix {
    values: Vec<u8>,
    models: usize,
    slots: usize,
}

impl BinaryTrustMatrix {
    /// Builds a validated binary matrix; entries must be exactly 0 or 1.
    pub fn from_rows(rows: Vec<Vec<u8>>) -> Result<Self> {
        let models = rows.len();
        let slots = rows.first().map_or(0, |r| r.len());
        if models == 0 || slots == 0 {
            return Err(Error::input("binary matrix must be non-empty"));
        }
        let mut values = Vec::with_capacity(models * slots);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != slots {
                return Err(Error::dims(format!(
                    "row {} has {} slots, expected {}",
                    i,
                    row.len(),
                    slots
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                if v > 1 {
                    return Err(Error::input(format!(
                        "entry at model {i}, slot {j} is {v}, expected 0 or 1"
                    )));
                }
                values.push(v);
            }
        }
        Ok(Self { values, models, slots })
    }

    pub fn model_count(&self) -> usize {
        self.models
    }

    pub fn slot_count(&self) -> usize {
        self.slots
    }

    pub fn entry(&self, model: usize, slot: usize) -> u8 {
        self.values[model * self.slots + slot]
    }

    pub fn trusted(&self, model: usize, slot: usize) -> bool {
        self.entry(model, slot) == 1
    }

    pub fn row(&self, model: usize) -> &[u8] {
        &self.values[model * self.slots..(model + 1) * self.slots]
    }

    /// Sum of one model's entries over `slots` (clamped to the matrix).
    pub fn row_sum(&self, model: usize, slots: std::ops::Range<usize>) -> usize {
        let end = slots.end.min(self.slots);
        self.row(model)[slots.start..end]
            .iter()
            .map(|&v| v as usize)
            .sum()
    }

    /// Slots where no model at all is trusted; these trigger the fail-safe
    /// execution state downstream.
    pub fn failsafe_slots(&self) -> BTreeSet<usize> {
        (0..self.slots)
            .filter(|&j| (0..self.models).all(|i| !self.trusted(i, j)))
            .collect()
    }
}

pub(crate) fn count_switches(assignment: &[usize]) -> usize {
    assignment.windows(2).filter(|w| w[0] != w[1]).count()
}

/// One model per time slot, plus the derived bookkeeping every solver
/// reports: switch count, trust score, and fail-safe slots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectionPlan {
    assignment: Vec<usize>,
    switch_count: usize,
    trust_score: usize,
    failsafe_slots: BTreeSet<usize>,
}

impl SelectionPlan {
    /// Builds a plan and scores it against the binary matrix it selects from.
    pub fn from_assignment(assignment: Vec<usize>, matrix: &BinaryTrustMatrix) -> Result<Self> {
        if assignment.len() != matrix.slot_count() {
            return Err(Error::dims(format!(
                "plan has {} slots, matrix has {}",
                assignment.len(),
                matrix.slot_count()
            )));
        }
        if let Some(&m) = assignment.iter().find(|&&m| m >= matrix.model_count()) {
            return Err(Error::input(format!(
                "plan selects model {m}, matrix has {}",
                matrix.model_count()
            )));
        }
        let switch_count = count_switches(&assignment);
        let trust_score = assignment
            .iter()
            .enumerate()
            .map(|(j, &m)| matrix.entry(m, j) as usize)
            .sum();
        Ok(Self {
            assignment,
            switch_count,
            trust_score,
            failsafe_slots: matrix.failsafe_slots(),
        })
    }

    /// Builds a plan without a matrix; trust score and fail-safe slots stay
    /// empty until the plan is rescored with [`SelectionPlan::rescored`].
    pub fn from_assignment_unscored(assignment: Vec<usize>) -> Result<Self> {
        if assignment.is_empty() {
            return Err(Error::input("plan must cover at least one slot"));
        }
        let switch_count = count_switches(&assignment);
        Ok(Self {
            assignment,
            switch_count,
            trust_score: 0,
            failsafe_slots: BTreeSet::new(),
        })
    }

    /// Re-derives score and fail-safe slots against `matrix`.
    pub fn rescored(&self, matrix: &BinaryTrustMatrix) -> Result<Self> {
        Self::from_assignment(self.assignment.clone(), matrix)
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn slot_count(&self) -> usize {
        self.assignment.len()
    }

    pub fn switch_count(&self) -> usize {
        self.switch_count
    }

    pub fn trust_score(&self) -> usize {
        self.trust_score
    }

    pub fn failsafe_slots(&self) -> &BTreeSet<usize> {
        &self.failsafe_slots
    }
}

/// The knobs governing every solver.
///
/// `budget` is the maximum number of reconfigurations B; `rate` is the
/// minimum dwell R in slots. The remaining fields parameterize trust
/// computation (`p_max`), exclusion (`lambda`) and the rounding sweep
/// (`h0`, `eps`).
#[derive(Debug, Clone, PartialEq)]
pub struct BudgetConfig {
    pub budget: usize,
    pub rate: usize,
    pub p_max: f64,
    pub lambda: f64,
    pub h0: f64,
    pub eps: f64,
}

impl Default for BudgetConfig {
    fn default() -> Self {
        Self {
            budget: 7,
            rate: 4,
            p_max: 10.0,
            lambda: 0.85,
            h0: 0.9,
            eps: 0.05,
        }
    }
}

impl BudgetConfig {
    pub fn new(budget: usize, rate: usize) -> Self {
        Self { budget, rate, ..Self::default() }
    }

    /// Checks every field against its documented domain.
    pub fn validate(&self) -> Result<()> {
        if self.rate == 0 {
            return Err(Error::config("rate R must be at least 1"));
        }
        if !self.p_max.is_finite() || self.p_max <= 0.0 {
            return Err(Error::config(format!("p_max must be positive, got {}", self.p_max)));
        }
        if !self.lambda.is_finite() || self.lambda <= 0.0 {
            return Err(Error::config(format!("lambda must be positive, got {}", self.lambda)));
        }
        if !(self.h0 > 0.0 && self.h0 < 1.0) {
            return Err(Error::config(format!("h0 must lie in (0, 1), got {}", self.h0)));
        }
        if !(self.eps > 0.0 && self.eps < 0.1) {
            return Err(Error::config(format!("eps must lie in (0, 0.1), got {}", self.eps)));
        }
        Ok(())
    }

    /// Validates the config and the feasibility condition (B+1)*R <= T for
    /// a horizon of `slots` time slots.
    pub fn validate_for_horizon(&self, slots: usize) -> Result<()> {
        self.validate()?;
        let needed = (self.budget + 1).saturating_mul(self.rate);
        if needed > slots {
            return Err(Error::config(format!(
                "(B+1)*R = {} exceeds horizon T = {}",
                needed, slots
            )));
        }
        Ok(())
    }
}

/// A single constraint violation found by plan validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// More switches than the budget B allows.
    BudgetExceeded { switches: usize, budget: usize },
    /// A non-final run shorter than the minimum dwell R.
    DwellTooShort { run_start: usize, run_len: usize, required: usize },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::BudgetExceeded { switches, budget } => {
                write!(f, "budget exceeded: {switches} switches > B = {budget}")
            }
            Violation::DwellTooShort { run_start, run_len, required } => {
                write!(
                    f,
                    "dwell too short: run at slot {run_start} spans {run_len} < R = {required}"
                )
            }
        }
    }
}

/// Outcome of validating a plan against a config. Empty means feasible;
/// infeasibility is data, not an error.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}
