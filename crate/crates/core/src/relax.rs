//! LP relaxation of the selection ILP.
//!
//! Assignment variables are relaxed from {0,1} to `[0,1]`; the absolute
//! switch terms of the budget constraint are linearized through auxiliary
//! variables `s(i,j) >= |a(i,j) - a(i,j-1)|`. Solving the relaxation gives
//! the upper bound on every feasible integral plan, plus the fractional
//! solution consumed by the rounding heuristic.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::simplex;
use crate::types::{BinaryTrustMatrix, BudgetConfig};

/// Constraint relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
}

/// What a constraint row encodes; used for dumps and shape assertions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    /// One-model-per-slot equality for a column.
    ColumnSum(usize),
    /// The reconfiguration budget row.
    Budget,
    /// `a(i,j) - a(i,j-1) - s(i,j) <= 0`
    SwitchUp { model: usize, slot: usize },
    /// `a(i,j-1) - a(i,j) - s(i,j) <= 0`
    SwitchDown { model: usize, slot: usize },
    /// Optional sliding-window rate row, identified by its window start.
    RateWindow(usize),
}

/// One constraint row in sparse form.
#[derive(Debug, Clone)]
pub struct LpRow {
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
    pub kind: RowKind,
}

/// Canonical-form container: maximize `objective . x` subject to the rows,
/// with per-variable bounds `[lo, hi]` (hi may be infinite).
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub rows: Vec<LpRow>,
    pub bounds: Vec<(f64, f64)>,
    models: usize,
    slots: usize,
}

/// Named variable/row counts of a built LP.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LpShape {
    pub assignment_vars: usize,
    pub switch_vars: usize,
    pub column_rows: usize,
    pub budget_rows: usize,
    pub linearization_rows: usize,
    pub window_rows: usize,
}

impl LinearProgram {
    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn models(&self) -> usize {
        self.models
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    fn assignment_var(&self, model: usize, slot: usize) -> usize {
        model * self.slots + slot
    }

    /// Index of `s(model, slot)`, the auxiliary for the transition into
    /// `slot` (valid for `slot >= 1`).
    fn switch_var(&self, model: usize, slot: usize) -> usize {
        debug_assert!(slot >= 1);
        self.models * self.slots + model * (self.slots - 1) + (slot - 1)
    }

    /// Human-readable variable name used by the text dump.
    pub fn var_name(&self, var: usize) -> String {
        let mt = self.models * self.slots;
        if var < mt {
            format!("a_{}_{}", var / self.slots, var % self.slots)
        } else {
            let k = var - mt;
            let transitions = self.slots - 1;
            format!("s_{}_{}", k / transitions, k % transitions + 1)
        }
    }

    pub fn shape(&self) -> LpShape {
        let mut shape = LpShape {
            assignment_vars: self.models * self.slots,
            switch_vars: self.models * (self.slots - 1),
            column_rows: 0,
            budget_rows: 0,
            linearization_rows: 0,
            window_rows: 0,
        };
        for row in &self.rows {
            match row.kind {
                RowKind::ColumnSum(_) => shape.column_rows += 1,
                RowKind::Budget => shape.budget_rows += 1,
                RowKind::SwitchUp { .. } | RowKind::SwitchDown { .. } => {
                    shape.linearization_rows += 1
                }
                RowKind::RateWindow(_) => shape.window_rows += 1,
            }
        }
        shape
    }

    /// Renders the LP in CPLEX LP text format (0-based index names) so it
    /// can be cross-checked with external solvers.
    pub fn to_lp_format(&self) -> String {
        let mut out = String::new();
        out.push_str("Maximize\n obj:");
        let mut any = false;
        for (var, &c) in self.objective.iter().enumerate() {
            if c != 0.0 {
                let _ = write!(out, " {}{} {}", if any { "+ " } else { "" }, fmt_coef(c), self.var_name(var));
                any = true;
            }
        }
        if !any {
            let _ = write!(out, " 0 {}", self.var_name(0));
        }
        out.push_str("\nSubject To\n");
        for row in &self.rows {
            let name = match row.kind {
                RowKind::ColumnSum(j) => format!("col_{j}"),
                RowKind::Budget => "budget".to_string(),
                RowKind::SwitchUp { model, slot } => format!("up_{model}_{slot}"),
                RowKind::SwitchDown { model, slot } => format!("dn_{model}_{slot}"),
                RowKind::RateWindow(k) => format!("win_{k}"),
            };
            let _ = write!(out, " {name}:");
            if row.coeffs.is_empty() {
                let _ = write!(out, " 0 {}", self.var_name(0));
            }
            for (pos, &(var, c)) in row.coeffs.iter().enumerate() {
                if pos == 0 {
                    let _ = write!(out, " {} {}", fmt_coef(c), self.var_name(var));
                } else if c < 0.0 {
                    let _ = write!(out, " - {} {}", fmt_coef(-c), self.var_name(var));
                } else {
                    let _ = write!(out, " + {} {}", fmt_coef(c), self.var_name(var));
                }
            }
            let rel = match row.relation {
                Relation::Le => "<=",
                Relation::Eq => "=",
            };
            let _ = writeln!(out, " {rel} {}", row.rhs);
        }
        out.push_str("Bounds\n");
        for (var, &(lo, hi)) in self.bounds.iter().enumerate() {
            if hi.is_finite() {
                let _ = writeln!(out, " {lo} <= {} <= {hi}", self.var_name(var));
            } else {
                let _ = writeln!(out, " {} >= {lo}", self.var_name(var));
            }
        }
        out.push_str("End\n");
        out
    }
}

fn fmt_coef(c: f64) -> String {
    if c == c.trunc() && c.abs() < 1e15 {
        format!("{}", c as i64)
    } else {
        format!("{c}")
    }
}

/// Builds the relaxed LP for a binary trust matrix.
///
/// The budget row is always present. The optional sliding-window rate rows
/// are off by default: the canonical feasible set uses minimum dwell, which
/// the budget-only LP already relaxes, while the windowed rows can cut off
/// integral-feasible plans. They stay available for fidelity experiments.
pub fn build_lp(
    matrix: &BinaryTrustMatrix,
    config: &BudgetConfig,
    include_rate_windows: bool,
) -> Result<LinearProgram> {
    config.validate()?;
    let m = matrix.model_count();
    let t = matrix.slot_count();
    if include_rate_windows && config.budget == 0 {
        return Err(Error::config(
            "rate windows are undefined for B = 0 (window width T/B)",
        ));
    }

    let n_assign = m * t;
    let n_switch = m * (t - 1);
    let mut objective = vec![0.0; n_assign + n_switch];
    let mut bounds = Vec::with_capacity(n_assign + n_switch);
    for i in 0..m {
        for j in 0..t {
            objective[i * t + j] = matrix.entry(i, j) as f64;
            bounds.push((0.0, 1.0));
        }
    }
    bounds.resize(n_assign + n_switch, (0.0, f64::INFINITY));

    let mut lp = LinearProgram {
        objective,
        rows: Vec::new(),
        bounds,
        models: m,
        slots: t,
    };

    for j in 0..t {
        lp.rows.push(LpRow {
            coeffs: (0..m).map(|i| (lp.assignment_var(i, j), 1.0)).collect(),
            relation: Relation::Eq,
            rhs: 1.0,
            kind: RowKind::ColumnSum(j),
        });
    }

    let mut budget_coeffs = Vec::with_capacity(n_switch);
    for i in 0..m {
        for j in 1..t {
            budget_coeffs.push((lp.switch_var(i, j), 0.5));
        }
    }
    lp.rows.push(LpRow {
        coeffs: budget_coeffs,
        relation: Relation::Le,
        rhs: config.budget as f64,
        kind: RowKind::Budget,
    });

    for i in 0..m {
        for j in 1..t {
            let a_cur = lp.assignment_var(i, j);
            let a_prev = lp.assignment_var(i, j - 1);
            let s = lp.switch_var(i, j);
            lp.rows.push(LpRow {
                coeffs: vec![(a_cur, 1.0), (a_prev, -1.0), (s, -1.0)],
                relation: Relation::Le,
                rhs: 0.0,
                kind: RowKind::SwitchUp { model: i, slot: j },
            });
            lp.rows.push(LpRow {
                coeffs: vec![(a_prev, 1.0), (a_cur, -1.0), (s, -1.0)],
                relation: Relation::Le,
                rhs: 0.0,
                kind: RowKind::SwitchDown { model: i, slot: j },
            });
        }
    }

    if include_rate_windows {
        // Window width ceil(T/B); starts k = 1 .. T - width in 1-based slot
        // terms. The j = 1 term of a window has no predecessor and is
        // dropped, matching the budget sum's j >= 2 range.
        let width = t.div_ceil(config.budget);
        let mut k = 1usize;
        while k + width <= t {
            let lo = k.max(2) - 1; // 0-based transition index
            let hi = k + width - 1;
            let mut coeffs = Vec::new();
            for i in 0..m {
                for j in lo..=hi {
                    coeffs.push((lp.switch_var(i, j), 0.5));
                }
            }
            lp.rows.push(LpRow {
                coeffs,
                relation: Relation::Le,
                rhs: config.rate as f64,
                kind: RowKind::RateWindow(k),
            });
            k += 1;
        }
    }

    Ok(lp)
}

/// Optimal fractional solution of the relaxation.
#[derive(Debug, Clone)]
pub struct FractionalSolution {
    values: Vec<f64>,
    switch_values: Vec<f64>,
    models: usize,
    slots: usize,
    objective: f64,
}

impl FractionalSolution {
    pub fn models(&self) -> usize {
        self.models
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    /// Relaxed assignment value `a(model, slot)` in [0, 1].
    pub fn value(&self, model: usize, slot: usize) -> f64 {
        self.values[model * self.slots + slot]
    }

    /// Auxiliary switch value for the transition into `slot` (slot >= 1).
    pub fn switch_value(&self, model: usize, slot: usize) -> f64 {
        self.switch_values[model * (self.slots - 1) + slot - 1]
    }

    /// The relaxation's objective: the upper bound on every feasible plan.
    pub fn objective(&self) -> f64 {
        self.objective
    }

    pub fn column_sum(&self, slot: usize) -> f64 {
        (0..self.models).map(|i| self.value(i, slot)).sum()
    }

    #[cfg(test)]
    pub(crate) fn for_tests(rows: Vec<Vec<f64>>) -> Self {
        let models = rows.len();
        let slots = rows[0].len();
        FractionalSolution {
            values: rows.into_iter().flatten().collect(),
            switch_values: vec![0.0; models * (slots - 1)],
            models,
            slots,
            objective: 0.0,
        }
    }
}

/// Solves the relaxation with the embedded simplex.
pub fn solve_lp(lp: &LinearProgram) -> Result<FractionalSolution> {
    let solution = simplex::solve(lp)?;
    let m = lp.models();
    let t = lp.slots();
    let mut values = Vec::with_capacity(m * t);
    for i in 0..m {
        for j in 0..t {
            let v = solution.x[i * t + j];
            if !(-1e-6..=1.0 + 1e-6).contains(&v) {
                return Err(Error::internal(format!(
                    "assignment value {v} outside [0,1] at ({i},{j})"
                )));
            }
            values.push(v.clamp(0.0, 1.0));
        }
    }
    let switch_values = solution.x[m * t..].to_vec();
    let frac = FractionalSolution {
        values,
        switch_values,
        models: m,
        slots: t,
        objective: solution.objective,
    };
    for j in 0..t {
        let s = frac.column_sum(j);
        if (s - 1.0).abs() > 1e-6 {
            return Err(Error::internal(format!(
                "fractional column {j} sums to {s}, expected 1"
            )));
        }
    }
    Ok(frac)
}
