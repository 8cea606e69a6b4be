//! Exact solver for the canonical feasible set (budget B, minimum dwell R)
//! via dynamic programming, plus competitive-ratio diagnostics for the
//! splice lower bound.
//!
//! DP state: (slot, current model, switches used, dwell capped at R). A
//! switch is allowed only once the dwell cap is reached; any end state is
//! accepted, which exempts the final truncated run from the dwell check.

use crate::error::{Error, Result};
use crate::fixing::fixing_select_with_fraction;
use crate::relax::{build_lp, solve_lp};
use crate::splice::splice_select;
use crate::types::{BinaryTrustMatrix, BudgetConfig, SelectionPlan};

/// State-space guard: M * T * (B+1) * R may not exceed this.
pub const MAX_DP_STATES: usize = 10_000_000;

const UNREACHED: i32 = -1;

// Parent encoding for plan reconstruction.
const STAY_FROM_BELOW: u16 = 0; // previous dwell d-1
const STAY_AT_CAP: u16 = 1; // previous dwell R (only valid when d == R)
const SWITCH_BASE: u16 = 2; // 2 + previous model index

struct DpTable {
    value: Vec<i32>,
    parent: Vec<u16>,
    models: usize,
    budgets: usize, // B + 1
    rate: usize,
}

impl DpTable {
    fn idx(&self, slot: usize, model: usize, used: usize, dwell: usize) -> usize {
        (((slot * self.models) + model) * self.budgets + used) * self.rate + (dwell - 1)
    }
}

/// Maximizes the number of trusted deployed slots over all plans with at
/// most B switches and minimum dwell R (final run exempt).
pub fn exact_select(
    matrix: &BinaryTrustMatrix,
    config: &BudgetConfig,
) -> Result<SelectionPlan> {
    let m = matrix.model_count();
    let t = matrix.slot_count();
    config.validate_for_horizon(t)?;
    let budgets = config.budget + 1;
    let states = m
        .checked_mul(t)
        .and_then(|v| v.checked_mul(budgets))
        .and_then(|v| v.checked_mul(config.rate))
        .ok_or_else(|| Error::TooLarge("DP state count overflows".into()))?;
    if states > MAX_DP_STATES {
        return Err(Error::TooLarge(format!(
            "DP needs {states} states, guard is {MAX_DP_STATES}"
        )));
    }
    if m >= usize::from(u16::MAX - SWITCH_BASE) {
        return Err(Error::TooLarge(format!("too many models for the DP: {m}")));
    }

    let rate = config.rate;
    let mut dp = DpTable {
        value: vec![UNREACHED; states],
        parent: vec![0; states],
        models: m,
        budgets,
        rate,
    };

    for model in 0..m {
        let i = dp.idx(0, model, 0, 1);
        dp.value[i] = matrix.entry(model, 0) as i32;
    }

    for slot in 0..t - 1 {
        for model in 0..m {
            for used in 0..budgets {
                for dwell in 1..=rate {
                    let cur = dp.value[dp.idx(slot, model, used, dwell)];
                    if cur == UNREACHED {
                        continue;
                    }
                    // Stay on the same model.
                    let next_dwell = (dwell + 1).min(rate);
                    let stay = dp.idx(slot + 1, model, used, next_dwell);
                    let gain = cur + matrix.entry(model, slot + 1) as i32;
                    if gain > dp.value[stay] {
                        dp.value[stay] = gain;
                        dp.parent[stay] = if dwell == rate && next_dwell == rate {
                            STAY_AT_CAP
                        } else {
                            STAY_FROM_BELOW
                        };
                    }
                    // Switch, allowed only after a full dwell.
                    if dwell == rate && used + 1 < budgets {
                        for next_model in 0..m {
                            if next_model == model {
                                continue;
                            }
                            let target = dp.idx(slot + 1, next_model, used + 1, 1);
                            let gain = cur + matrix.entry(next_model, slot + 1) as i32;
                            if gain > dp.value[target] {
                                dp.value[target] = gain;
                                dp.parent[target] = SWITCH_BASE + model as u16;
                            }
                        }
                    }
                }
            }
        }
    }

    // Any end state is acceptable: the final run may be shorter than R.
    let mut best: Option<(i32, usize, usize, usize)> = None;
    for used in 0..budgets {
        for model in 0..m {
            for dwell in 1..=rate {
                let v = dp.value[dp.idx(t - 1, model, used, dwell)];
                if v != UNREACHED && best.is_none_or(|(bv, _, _, _)| v > bv) {
                    best = Some((v, model, used, dwell));
                }
            }
        }
    }
    let (_, mut model, mut used, mut dwell) =
        best.ok_or_else(|| Error::internal("DP reached no end state"))?;

    let mut assignment = vec![0usize; t];
    for slot in (0..t).rev() {
        assignment[slot] = model;
        if slot == 0 {
            break;
        }
        let action = dp.parent[dp.idx(slot, model, used, dwell)];
        if action == STAY_FROM_BELOW {
            dwell -= 1;
        } else if action == STAY_AT_CAP {
            dwell = rate;
        } else {
            model = usize::from(action - SWITCH_BASE);
            used -= 1;
            dwell = rate;
        }
    }

    SelectionPlan::from_assignment(assignment, matrix)
}

/// Competitive-ratio diagnostics for one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioReport {
    pub splice_score: usize,
    pub fixing_score: usize,
    pub oracle_score: usize,
    pub lp_bound: f64,
    /// `splice / oracle`; undefined when the oracle scores zero.
    pub ratio: Option<f64>,
    /// The worst-case bound `(T + R(B+1)) / (2T)`.
    pub worst_case_bound: f64,
    /// True when the observed ratio falls below the bound; surfaced as a
    /// warning, not an error, since the bound's preconditions are informal.
    pub below_bound: bool,
}

/// Runs all four solvers on one instance and compares the splice/oracle
/// ratio against the worst-case bound.
pub fn competitive_ratio_report(
    matrix: &BinaryTrustMatrix,
    config: &BudgetConfig,
) -> Result<RatioReport> {
    let t = matrix.slot_count();
    let splice = splice_select(matrix, config)?;
    let lp = build_lp(matrix, config, false)?;
    let frac = solve_lp(&lp)?;
    let fixing = fixing_select_with_fraction(matrix, config, &frac)?;
    let oracle = exact_select(matrix, config)?;

    let worst_case_bound =
        (t as f64 + config.rate as f64 * (config.budget as f64 + 1.0)) / (2.0 * t as f64);
    let ratio = if oracle.trust_score() > 0 {
        Some(splice.trust_score() as f64 / oracle.trust_score() as f64)
    } else {
        None
    };
    Ok(RatioReport {
        splice_score: splice.trust_score(),
        fixing_score: fixing.trust_score(),
        oracle_score: oracle.trust_score(),
        lp_bound: frac.objective(),
        ratio,
        worst_case_bound,
        below_bound: ratio.is_some_and(|r| r < worst_case_bound),
    })
}
