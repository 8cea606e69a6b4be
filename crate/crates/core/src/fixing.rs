//! Fixing heuristic: threshold-rounds the LP fractional solution with a
//! carried row, sweeping the threshold H downward by eps while the feasible
//! rounded score keeps improving. The splice plan is always a candidate, so
//! the result never scores below the lower bound.

use crate::error::Result;
use crate::relax::{FractionalSolution, build_lp, solve_lp};
use crate::splice::splice_select;
use crate::trust::validate_plan;
use crate::types::{BinaryTrustMatrix, BudgetConfig, SelectionPlan};

/// Rounds a fractional solution at threshold `h`, scanning columns left to
/// right with a carried row.
///
/// A column whose maximum clears `h` selects that row and updates the
/// carry; otherwise the carried row is kept. The first column, lacking a
/// carry, selects its maximum either way. Ties pick the lowest row.
pub fn round_fractional(frac: &FractionalSolution, h: f64) -> SelectionPlan {
    let mut assignment = Vec::with_capacity(frac.slots());
    let mut carry: Option<usize> = None;
    for j in 0..frac.slots() {
        let mut max_row = 0;
        let mut max_val = frac.value(0, j);
        for i in 1..frac.models() {
            let v = frac.value(i, j);
            if v > max_val {
                max_val = v;
                max_row = i;
            }
        }
        let pick = if max_val >= h {
            carry = Some(max_row);
            max_row
        } else {
            match carry {
                Some(c) => c,
                None => {
                    carry = Some(max_row);
                    max_row
                }
            }
        };
        assignment.push(pick);
    }
    SelectionPlan::from_assignment_unscored(assignment)
        .expect("fractional solution has at least one slot")
}

/// Runs the fixing heuristic end to end: splice baseline, one LP solve,
/// then the rounding sweep.
pub fn fixing_select(
    matrix: &BinaryTrustMatrix,
    config: &BudgetConfig,
) -> Result<SelectionPlan> {
    let lp = build_lp(matrix, config, false)?;
    let frac = solve_lp(&lp)?;
    fixing_select_with_fraction(matrix, config, &frac)
}

/// Same as [`fixing_select`] but reuses an already-solved fractional
/// solution, so callers that also want the LP bound pay for one solve.
pub fn fixing_select_with_fraction(
    matrix: &BinaryTrustMatrix,
    config: &BudgetConfig,
    frac: &FractionalSolution,
) -> Result<SelectionPlan> {
    config.validate_for_horizon(matrix.slot_count())?;
    let mut best = splice_select(matrix, config)?;

    // Sweep H downward; infeasible roundings are discarded, and the sweep
    // stops once a feasible rounding fails to strictly improve on the
    // previous feasible one. The iteration cap bounds the sweep for
    // absurdly small eps values; sane decrements never reach it.
    let mut prev_feasible: Option<usize> = None;
    let mut remaining = 1_000_000u64;
    let mut h = config.h0;
    while h > 1e-12 && remaining > 0 {
        remaining -= 1;
        let candidate = round_fractional(frac, h).rescored(matrix)?;
        if validate_plan(&candidate, config).is_feasible() {
            let score = candidate.trust_score();
            if score > best.trust_score() {
                best = candidate;
            }
            match prev_feasible {
                Some(prev) if score <= prev => break,
                _ => prev_feasible = Some(score),
            }
        }
        h -= config.eps;
    }
    Ok(best)
}
