//! Agreement-based trust scoring and the lambda-standard-deviations
//! exclusion strategy.
//!
//! A model's trust level at a slot is the reciprocal of its mean absolute
//! distance to every ensemble output at that slot, capped at `p_max`.
//! Exclusion marks a model untrusted at a slot when its output falls
//! outside `mean +/- lambda * stddev` of the column.

use crate::error::{Error, Result};
use crate::types::{
    BinaryTrustMatrix, BudgetConfig, ModelOutputs, SelectionPlan, TrustMatrix, ValidationReport,
    Violation,
};

/// Computes the M x T trust matrix from raw outputs.
///
/// For each entry, the mean absolute distance D to all M outputs of the
/// column (self included) is inverted and capped: `p = min(p_max, 1/D)`.
/// A zero deviation saturates at the cap.
pub fn compute_trust_matrix(outputs: &ModelOutputs, p_max: f64) -> Result<TrustMatrix> {
    if !p_max.is_finite() || p_max <= 0.0 {
        return Err(Error::config(format!("p_max must be positive, got {p_max}")));
    }
    let m = outputs.model_count();
    let t = outputs.slot_count();
    let mut values = Vec::with_capacity(m * t);
    for i in 0..m {
        for j in 0..t {
            let o_ij = outputs.value(i, j);
            let total: f64 = (0..m).map(|k| (o_ij - outputs.value(k, j)).abs()).sum();
            let deviation = total / m as f64;
            let trust = if deviation == 0.0 {
                p_max
            } else {
                (1.0 / deviation).min(p_max)
            };
            values.push(trust);
        }
    }
    TrustMatrix::from_raw(values, m, t, p_max)
}

/// Per-column mean and population standard deviation.
fn column_stats(outputs: &ModelOutputs, slot: usize) -> (f64, f64) {
    let m = outputs.model_count() as f64;
    let mean = outputs.column(slot).sum::<f64>() / m;
    let var = outputs
        .column(slot)
        .map(|v| (v - mean) * (v - mean))
        .sum::<f64>()
        / m;
    (mean, var.sqrt())
}

/// Binarizes outputs by excluding, per slot, every model whose output lies
/// outside `mean +/- lambda * stddev` of that slot's column.
///
/// Columns with zero spread exclude nothing. A column that excludes every
/// model marks the slot fail-safe downstream.
pub fn exclude_outliers(outputs: &ModelOutputs, lambda: f64) -> Result<BinaryTrustMatrix> {
    if !lambda.is_finite() || lambda <= 0.0 {
        return Err(Error::config(format!("lambda must be positive, got {lambda}")));
    }
    let m = outputs.model_count();
    let t = outputs.slot_count();
    let mut rows = vec![vec![0u8; t]; m];
    for j in 0..t {
        let (mean, sd) = column_stats(outputs, j);
        let upper = mean + lambda * sd;
        let lower = mean - lambda * sd;
        for (i, row) in rows.iter_mut().enumerate() {
            let v = outputs.value(i, j);
            row[j] = u8::from(v <= upper && v >= lower);
        }
    }
    BinaryTrustMatrix::from_rows(rows)
}

/// Number of slots where the plan's deployed model is trusted.
pub fn plan_trust_score(plan: &SelectionPlan, matrix: &BinaryTrustMatrix) -> Result<usize> {
    if plan.slot_count() != matrix.slot_count() {
        return Err(Error::dims(format!(
            "plan covers {} slots, matrix has {}",
            plan.slot_count(),
            matrix.slot_count()
        )));
    }
    if let Some(&m) = plan.assignment().iter().find(|&&m| m >= matrix.model_count()) {
        return Err(Error::input(format!(
            "plan selects model {m}, matrix has {}",
            matrix.model_count()
        )));
    }
    Ok(plan
        .assignment()
        .iter()
        .enumerate()
        .map(|(j, &m)| matrix.entry(m, j) as usize)
        .sum())
}

/// Maximal same-model runs of an assignment as `(start, len)` pairs.
pub(crate) fn runs(assignment: &[usize]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = 0;
    for j in 1..=assignment.len() {
        if j == assignment.len() || assignment[j] != assignment[j - 1] {
            out.push((start, j - start));
            start = j;
        }
    }
    out
}

/// Checks a plan against the budget B and the minimum dwell R.
///
/// The final run is exempt from the dwell check (it may be truncated by
/// the horizon). An empty report means the plan is feasible.
pub fn validate_plan(plan: &SelectionPlan, config: &BudgetConfig) -> ValidationReport {
    let mut violations = Vec::new();
    let switches = plan.switch_count();
    if switches > config.budget {
        violations.push(Violation::BudgetExceeded {
            switches,
            budget: config.budget,
        });
    }
    let runs = runs(plan.assignment());
    for (idx, &(start, len)) in runs.iter().enumerate() {
        let is_final = idx + 1 == runs.len();
        if !is_final && len < config.rate {
            violations.push(Violation::DwellTooShort {
                run_start: start,
                run_len: len,
                required: config.rate,
            });
        }
    }
    ValidationReport { violations }
}
