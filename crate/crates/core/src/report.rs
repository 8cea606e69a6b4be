//! Run reports: per-solver scores, gaps, timings, and optional RMSE
//! against a known ground truth.

use std::collections::BTreeSet;

use crate::error::Result;
use crate::io::KvBlock;
use crate::types::{BudgetConfig, SelectionPlan};

/// Result of one solver run inside a pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverResult {
    pub solver: String,
    pub plan: SelectionPlan,
    pub elapsed_ms: f64,
}

/// Everything the `report` pipeline emits for one instance.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunReport {
    pub instance: String,
    pub models: usize,
    pub slots: usize,
    pub config: Option<BudgetConfig>,
    pub failsafe_slots: BTreeSet<usize>,
    pub solver_results: Vec<SolverResult>,
    pub lp_bound: Option<f64>,
    pub lp_time_ms: Option<f64>,
    /// RMSE of the plan-selected outputs per solver, when truth is known.
    pub plan_rmse: Vec<(String, f64)>,
    pub per_model_rmse: Vec<f64>,
}

impl RunReport {
    pub fn score_of(&self, solver: &str) -> Option<usize> {
        self.solver_results
            .iter()
            .find(|r| r.solver == solver)
            .map(|r| r.plan.trust_score())
    }

    /// `(reference - score) / reference` in percent, `None` when the
    /// reference is missing or zero. Sub-tolerance negatives from LP
    /// round-off clamp to zero so the gap stays nonnegative.
    fn gap_pct(score: usize, reference: f64) -> Option<f64> {
        (reference > 0.0).then(|| {
            let gap = 100.0 * (reference - score as f64) / reference;
            if (-1e-6..0.0).contains(&gap) { 0.0 } else { gap }
        })
    }

    pub fn gap_fixing_vs_oracle_pct(&self) -> Option<f64> {
        let fixing = self.score_of("fixing")?;
        let oracle = self.score_of("oracle")?;
        Self::gap_pct(fixing, oracle as f64)
    }

    pub fn gap_fixing_vs_lp_pct(&self) -> Option<f64> {
        let fixing = self.score_of("fixing")?;
        Self::gap_pct(fixing, self.lp_bound?)
    }

    /// Renders the versioned key/value report document.
    pub fn to_text(&self) -> String {
        let mut kv = KvBlock::new("run_report");
        kv.push("instance", &self.instance);
        kv.push("models", self.models);
        kv.push("slots", self.slots);
        if let Some(cfg) = &self.config {
            kv.push("budget", cfg.budget);
            kv.push("rate", cfg.rate);
            kv.push("p_max", cfg.p_max);
            kv.push("lambda", cfg.lambda);
            kv.push("h0", cfg.h0);
            kv.push("eps", cfg.eps);
        }
        kv.push_list("failsafe_slots", self.failsafe_slots.iter());
        kv.push_list("solvers", self.solver_results.iter().map(|r| r.solver.clone()));
        for r in &self.solver_results {
            kv.push(&format!("{}_score", r.solver), r.plan.trust_score());
            kv.push(&format!("{}_switches", r.solver), r.plan.switch_count());
            kv.push(&format!("{}_time_ms", r.solver), format!("{:.3}", r.elapsed_ms));
        }
        if let Some(bound) = self.lp_bound {
            kv.push("lp_bound", format!("{bound:.9}"));
        }
        if let Some(ms) = self.lp_time_ms {
            kv.push("lp_time_ms", format!("{ms:.3}"));
        }
        if let Some(gap) = self.gap_fixing_vs_oracle_pct() {
            kv.push("gap_fixing_vs_oracle_pct", format!("{gap:.4}"));
        }
        if let Some(gap) = self.gap_fixing_vs_lp_pct() {
            kv.push("gap_fixing_vs_lp_pct", format!("{gap:.4}"));
        }
        for (solver, rmse) in &self.plan_rmse {
            kv.push(&format!("rmse_{solver}"), format!("{rmse:.6}"));
        }
        if !self.per_model_rmse.is_empty() {
            kv.push_list(
                "rmse_per_model",
                self.per_model_rmse.iter().map(|v| format!("{v:.6}")),
            );
        }
        kv.into_text()
    }
}

/// Root mean square error between two equal-length series.
pub fn rmse(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.is_empty() {
        return Err(crate::error::Error::dims(format!(
            "rmse over series of lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    let sum: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok((sum / a.len() as f64).sqrt())
}

/// RMSE of the plan-selected outputs against the ground truth.
pub fn plan_rmse(
    outputs: &crate::types::ModelOutputs,
    plan: &SelectionPlan,
    truth: &[f64],
) -> Result<f64> {
    let selected: Vec<f64> = plan
        .assignment()
        .iter()
        .enumerate()
        .map(|(j, &m)| outputs.value(m, j))
        .collect();
    rmse(&selected, truth)
}

/// Per-model RMSE against the ground truth.
pub fn per_model_rmse(outputs: &crate::types::ModelOutputs, truth: &[f64]) -> Result<Vec<f64>> {
    (0..outputs.model_count())
        .map(|i| rmse(outputs.row(i), truth))
        .collect()
}
