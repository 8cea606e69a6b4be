//! Dense-tableau primal simplex for the relaxation LPs.
//!
//! Two-phase, with bounded variables handled directly: a nonbasic variable
//! may sit at either of its bounds, and a step can end in a bound flip
//! instead of a basis change. Entering variables follow Dantzig's rule
//! until a stretch of degenerate steps, after which Bland's rule takes over
//! so termination stays guaranteed. Instances are small, so robustness is
//! preferred over speed: pivot tolerance 1e-9, feasibility tolerance 1e-6.
//!
//! Restrictions (all satisfied by the LPs built in this crate): every
//! variable has lower bound 0, and every right-hand side is nonnegative.

use crate::error::{Error, Result};
use crate::relax::{LinearProgram, Relation};

const PIVOT_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-6;
const RATIO_TIE_TOL: f64 = 1e-9;
const DEGENERATE_STEP: f64 = 1e-10;
const BLAND_AFTER: usize = 64;

/// Optimal basic feasible solution of a [`LinearProgram`].
#[derive(Debug, Clone)]
pub struct SimplexSolution {
    /// Structural variable values, in the LP's variable order.
    pub x: Vec<f64>,
    /// Objective value `c . x`.
    pub objective: f64,
    /// Total pivot/flip steps over both phases.
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarStatus {
    Basic,
    Lower,
    Upper,
}

struct Tableau {
    m: usize,
    n_struct: usize,
    n_total: usize,
    width: usize, // n_total + 1, last column holds basic variable values
    tab: Vec<f64>, // (m + 1) x width, row m is the reduced-cost row
    basis: Vec<usize>,
    status: Vec<VarStatus>,
    hi: Vec<f64>,
    artificial: Vec<bool>,
    scratch: Vec<f64>,
    iterations: usize,
    max_iterations: usize,
}

impl Tableau {
    fn new(lp: &LinearProgram) -> Result<Self> {
        let n_struct = lp.num_vars();
        let m = lp.rows.len();
        if m == 0 || n_struct == 0 {
            return Err(Error::input("empty linear program"));
        }
        for (j, &(lo, hi)) in lp.bounds.iter().enumerate() {
            if lo != 0.0 || hi.is_nan() || hi <= 0.0 {
                return Err(Error::input(format!(
                    "variable {j} has bounds [{lo}, {hi}]; solver expects lo = 0, hi > 0"
                )));
            }
        }
        let n_total = n_struct + m;
        let width = n_total + 1;
        let mut tab = vec![0.0; (m + 1) * width];
        let mut hi = Vec::with_capacity(n_total);
        hi.extend(lp.bounds.iter().map(|&(_, h)| h));
        let mut artificial = vec![false; n_total];
        for (r, row) in lp.rows.iter().enumerate() {
            if row.rhs < 0.0 {
                return Err(Error::input(format!(
                    "row {r} has negative right-hand side {}",
                    row.rhs
                )));
            }
            for &(col, coef) in &row.coeffs {
                tab[r * width + col] += coef;
            }
            let logical = n_struct + r;
            tab[r * width + logical] = 1.0;
            tab[r * width + n_total] = row.rhs;
            hi.push(f64::INFINITY);
            if row.relation == Relation::Eq {
                artificial[logical] = true;
            }
        }
        let basis: Vec<usize> = (0..m).map(|r| n_struct + r).collect();
        let mut status = vec![VarStatus::Lower; n_total];
        for &b in &basis {
            status[b] = VarStatus::Basic;
        }
        let max_iterations = 20_000 + 50 * (m + n_total);
        Ok(Tableau {
            m,
            n_struct,
            n_total,
            width,
            tab,
            basis,
            status,
            hi,
            artificial,
            scratch: vec![0.0; n_total],
            iterations: 0,
            max_iterations,
        })
    }

    fn value(&self, r: usize) -> f64 {
        self.tab[r * self.width + self.n_total]
    }

    fn coef(&self, r: usize, col: usize) -> f64 {
        self.tab[r * self.width + col]
    }

    /// Rebuilds the reduced-cost row for the given per-variable costs.
    fn price(&mut self, costs: &[f64]) {
        let z = self.m * self.width;
        self.tab[z..z + self.n_total].copy_from_slice(costs);
        for r in 0..self.m {
            let cb = costs[self.basis[r]];
            if cb != 0.0 {
                let row = r * self.width;
                for col in 0..self.n_total {
                    self.tab[z + col] -= cb * self.tab[row + col];
                }
            }
        }
        let mut obj: f64 = (0..self.m).map(|r| costs[self.basis[r]] * self.value(r)).sum();
        for (j, &cost) in costs.iter().enumerate() {
            if self.status[j] == VarStatus::Upper {
                obj += cost * self.hi[j];
            }
        }
        self.tab[z + self.n_total] = obj;
    }

    /// Runs pivots until the current costs admit no improving step.
    fn iterate(&mut self) -> Result<()> {
        let z = self.m * self.width;
        let mut stall = 0usize;
        loop {
            self.iterations += 1;
            if self.iterations > self.max_iterations {
                return Err(Error::internal("simplex iteration limit exceeded"));
            }
            let bland = stall > BLAND_AFTER;

            // Entering variable.
            let mut entering: Option<usize> = None;
            let mut best = PIVOT_TOL;
            for j in 0..self.n_total {
                if self.status[j] == VarStatus::Basic || self.hi[j] <= 0.0 {
                    continue;
                }
                let d = self.tab[z + j];
                let improving = match self.status[j] {
                    VarStatus::Lower => d > PIVOT_TOL,
                    VarStatus::Upper => d < -PIVOT_TOL,
                    VarStatus::Basic => false,
                };
                if !improving {
                    continue;
                }
                if bland {
                    entering = Some(j);
                    break;
                }
                if d.abs() > best {
                    best = d.abs();
                    entering = Some(j);
                }
            }
            let Some(j) = entering else {
                return Ok(()); // optimal for these costs
            };
            let dir = if self.status[j] == VarStatus::Lower { 1.0 } else { -1.0 };

            // Ratio test over basic variables.
            let mut t_row = f64::INFINITY;
            let mut leave: Option<usize> = None;
            for r in 0..self.m {
                let alpha = self.coef(r, j);
                if alpha.abs() <= PIVOT_TOL {
                    continue;
                }
                let rate = -dir * alpha; // change of value(r) per unit step
                let limit = if rate < 0.0 {
                    self.value(r) / -rate
                } else {
                    let h = self.hi[self.basis[r]];
                    if h.is_infinite() {
                        continue;
                    }
                    (h - self.value(r)) / rate
                };
                let limit = limit.max(0.0);
                if limit < t_row - RATIO_TIE_TOL {
                    t_row = limit;
                    leave = Some(r);
                } else if limit <= t_row + RATIO_TIE_TOL {
                    if let Some(cur) = leave {
                        let better = if bland {
                            self.basis[r] < self.basis[cur]
                        } else {
                            alpha.abs() > self.coef(cur, j).abs()
                        };
                        if better {
                            t_row = t_row.min(limit);
                            leave = Some(r);
                        }
                    }
                }
            }

            // Bound flip beats a pivot when the variable's own span binds.
            let flip = self.hi[j].is_finite() && self.hi[j] <= t_row;
            let step = if flip { self.hi[j] } else { t_row };
            if step.is_infinite() {
                return Err(Error::internal(
                    "unbounded direction in simplex; LP variables should be bounded",
                ));
            }
            if step <= DEGENERATE_STEP {
                stall += 1;
            } else {
                stall = 0;
            }

            let delta = dir * step;
            self.tab[z + self.n_total] += self.tab[z + j] * delta;
            for r in 0..self.m {
                let a = self.coef(r, j);
                if a != 0.0 {
                    self.tab[r * self.width + self.n_total] -= delta * a;
                }
            }

            if flip {
                self.status[j] = if dir > 0.0 { VarStatus::Upper } else { VarStatus::Lower };
                continue;
            }

            let r = leave.expect("finite ratio without a blocking row");
            let alpha = self.coef(r, j);
            let leaving = self.basis[r];
            self.status[leaving] = if -dir * alpha < 0.0 {
                VarStatus::Lower
            } else {
                VarStatus::Upper
            };
            let entering_base = if dir > 0.0 { 0.0 } else { self.hi[j] };
            self.basis[r] = j;
            self.status[j] = VarStatus::Basic;
            self.tab[r * self.width + self.n_total] = entering_base + delta;

            // Eliminate column j everywhere else (coefficient columns only;
            // the value column is maintained explicitly above).
            let row_off = r * self.width;
            let inv = 1.0 / alpha;
            for col in 0..self.n_total {
                self.tab[row_off + col] *= inv;
            }
            self.scratch.copy_from_slice(&self.tab[row_off..row_off + self.n_total]);
            for rr in 0..=self.m {
                if rr == r {
                    continue;
                }
                let f = self.tab[rr * self.width + j];
                if f.abs() <= 1e-13 {
                    continue;
                }
                let off = rr * self.width;
                for col in 0..self.n_total {
                    self.tab[off + col] -= f * self.scratch[col];
                }
                // kill residual noise in the pivot column
                self.tab[off + j] = 0.0;
            }
        }
    }

    fn solution(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.n_total];
        for (j, v) in x.iter_mut().enumerate() {
            if self.status[j] == VarStatus::Upper {
                *v = self.hi[j];
            }
        }
        for r in 0..self.m {
            x[self.basis[r]] = self.value(r);
        }
        x.truncate(self.n_struct);
        x
    }
}

/// Solves an LP built by [`crate::relax::build_lp`] (or any LP meeting the
/// module's restrictions) to optimality.
pub fn solve(lp: &LinearProgram) -> Result<SimplexSolution> {
    let mut t = Tableau::new(lp)?;

    // Phase 1: drive the equality-row artificials to zero.
    if t.artificial.iter().any(|&a| a) {
        let costs: Vec<f64> = t.artificial.iter().map(|&a| if a { -1.0 } else { 0.0 }).collect();
        t.price(&costs);
        t.iterate()?;
        let infeasibility: f64 = (0..t.m)
            .filter(|&r| t.artificial[t.basis[r]])
            .map(|r| t.value(r).max(0.0))
            .sum();
        if infeasibility > FEAS_TOL {
            return Err(Error::config(format!(
                "LP infeasible: residual {infeasibility:.3e} after phase 1"
            )));
        }
        for j in 0..t.n_total {
            if t.artificial[j] {
                t.hi[j] = 0.0;
            }
        }
    }

    // Phase 2: the real objective.
    let mut costs = vec![0.0; t.n_total];
    costs[..t.n_struct].copy_from_slice(&lp.objective);
    t.price(&costs);
    t.iterate()?;

    let x = t.solution();
    verify_feasible(lp, &x)?;
    let objective = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(SimplexSolution { x, objective, iterations: t.iterations })
}

/// Defensive post-check: the reported point must satisfy every row and
/// bound within the feasibility tolerance.
fn verify_feasible(lp: &LinearProgram, x: &[f64]) -> Result<()> {
    for (j, &(lo, hi)) in lp.bounds.iter().enumerate() {
        if x[j] < lo - FEAS_TOL || x[j] > hi + FEAS_TOL {
            return Err(Error::internal(format!(
                "solution value {} violates bounds [{lo}, {hi}] of variable {j}",
                x[j]
            )));
        }
    }
    for (r, row) in lp.rows.iter().enumerate() {
        let lhs: f64 = row.coeffs.iter().map(|&(col, c)| c * x[col]).sum();
        let tol = FEAS_TOL * (1.0 + row.rhs.abs());
        let ok = match row.relation {
            Relation::Le => lhs <= row.rhs + tol,
            Relation::Eq => (lhs - row.rhs).abs() <= tol,
        };
        if !ok {
            return Err(Error::internal(format!(
                "solution violates row {r}: lhs {lhs}, rhs {}",
                row.rhs
            )));
        }
    }
    Ok(())
}
