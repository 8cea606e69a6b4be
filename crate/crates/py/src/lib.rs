//! Python module exposing the selection engine: trust scoring, outlier
//! exclusion, the four solvers, and the attack simulator.
//!
//! Matrices cross the boundary as plain lists of per-model rows.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use trustsel_core::attack;
use trustsel_core::fixing;
use trustsel_core::oracle;
use trustsel_core::relax;
use trustsel_core::splice;
use trustsel_core::trust;
use trustsel_core::types::{BinaryTrustMatrix, BudgetConfig, ModelOutputs, SelectionPlan};

fn err(e: trustsel_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn outputs_from(rows: Vec<Vec<f64>>) -> PyResult<ModelOutputs> {
    ModelOutputs::from_rows(rows).map_err(err)
}

fn binary_from(rows: Vec<Vec<u8>>) -> PyResult<BinaryTrustMatrix> {
    BinaryTrustMatrix::from_rows(rows).map_err(err)
}

fn config_from(budget: usize, rate: usize, h0: f64, eps: f64) -> BudgetConfig {
    BudgetConfig { budget, rate, h0, eps, ..BudgetConfig::default() }
}

/// A solved selection plan.
#[pyclass(get_all, frozen, skip_from_py_object)]
#[derive(Clone)]
struct Plan {
    assignment: Vec<usize>,
    switch_count: usize,
    trust_score: usize,
    failsafe_slots: Vec<usize>,
}

#[pymethods]
impl Plan {
    fn __repr__(&self) -> String {
        format!(
            "Plan(score={}, switches={}, slots={}, failsafe={:?})",
            self.trust_score,
            self.switch_count,
            self.assignment.len(),
            self.failsafe_slots
        )
    }
}

impl From<SelectionPlan> for Plan {
    fn from(plan: SelectionPlan) -> Self {
        Plan {
            assignment: plan.assignment().to_vec(),
            switch_count: plan.switch_count(),
            trust_score: plan.trust_score(),
            failsafe_slots: plan.failsafe_slots().iter().copied().collect(),
        }
    }
}

/// Trust matrix from raw outputs: reciprocal mean absolute deviation per
/// entry, capped at p_max.
#[pyfunction]
#[pyo3(signature = (outputs, p_max = 10.0))]
fn compute_trust_matrix(outputs: Vec<Vec<f64>>, p_max: f64) -> PyResult<Vec<Vec<f64>>> {
    let outputs = outputs_from(outputs)?;
    let trust = trust::compute_trust_matrix(&outputs, p_max).map_err(err)?;
    Ok((0..trust.model_count()).map(|i| trust.row(i).to_vec()).collect())
}

/// Binary trust matrix via the lambda-standard-deviations exclusion.
#[pyfunction]
#[pyo3(signature = (outputs, lambda_ = 0.85))]
fn exclude_outliers(outputs: Vec<Vec<f64>>, lambda_: f64) -> PyResult<Vec<Vec<u8>>> {
    let outputs = outputs_from(outputs)?;
    let matrix = trust::exclude_outliers(&outputs, lambda_).map_err(err)?;
    Ok((0..matrix.model_count()).map(|i| matrix.row(i).to_vec()).collect())
}

/// Number of slots where the assignment picks a trusted model.
#[pyfunction]
fn plan_trust_score(assignment: Vec<usize>, binary: Vec<Vec<u8>>) -> PyResult<usize> {
    let matrix = binary_from(binary)?;
    let plan = SelectionPlan::from_assignment(assignment, &matrix).map_err(err)?;
    trust::plan_trust_score(&plan, &matrix).map_err(err)
}

/// Human-readable constraint violations; empty means feasible.
#[pyfunction]
fn validate_plan(assignment: Vec<usize>, budget: usize, rate: usize) -> PyResult<Vec<String>> {
    let plan = SelectionPlan::from_assignment_unscored(assignment).map_err(err)?;
    let report = trust::validate_plan(&plan, &config_from(budget, rate, 0.9, 0.05));
    Ok(report.violations.iter().map(|v| v.to_string()).collect())
}

/// Greedy lower-bound solver.
#[pyfunction]
fn splice_select(binary: Vec<Vec<u8>>, budget: usize, rate: usize) -> PyResult<Plan> {
    let matrix = binary_from(binary)?;
    let plan = splice::splice_select(&matrix, &config_from(budget, rate, 0.9, 0.05))
        .map_err(err)?;
    Ok(plan.into())
}

/// LP-rounding competitive solver.
#[pyfunction]
#[pyo3(signature = (binary, budget, rate, h0 = 0.9, eps = 0.05))]
fn fixing_select(
    binary: Vec<Vec<u8>>,
    budget: usize,
    rate: usize,
    h0: f64,
    eps: f64,
) -> PyResult<Plan> {
    let matrix = binary_from(binary)?;
    let plan = fixing::fixing_select(&matrix, &config_from(budget, rate, h0, eps))
        .map_err(err)?;
    Ok(plan.into())
}

/// Exact dynamic-programming solver.
#[pyfunction]
fn exact_select(binary: Vec<Vec<u8>>, budget: usize, rate: usize) -> PyResult<Plan> {
    let matrix = binary_from(binary)?;
    let plan = oracle::exact_select(&matrix, &config_from(budget, rate, 0.9, 0.05))
        .map_err(err)?;
    Ok(plan.into())
}

/// Objective of the LP relaxation: the upper bound on every feasible plan.
#[pyfunction]
#[pyo3(signature = (binary, budget, rate, rate_windows = false))]
fn lp_bound(binary: Vec<Vec<u8>>, budget: usize, rate: usize, rate_windows: bool) -> PyResult<f64> {
    let matrix = binary_from(binary)?;
    let lp = relax::build_lp(&matrix, &config_from(budget, rate, 0.9, 0.05), rate_windows)
        .map_err(err)?;
    Ok(relax::solve_lp(&lp).map_err(err)?.objective())
}

/// The relaxation rendered in LP text format.
#[pyfunction]
#[pyo3(signature = (binary, budget, rate, rate_windows = false))]
fn lp_format(binary: Vec<Vec<u8>>, budget: usize, rate: usize, rate_windows: bool) -> PyResult<String> {
    let matrix = binary_from(binary)?;
    let lp = relax::build_lp(&matrix, &config_from(budget, rate, 0.9, 0.05), rate_windows)
        .map_err(err)?;
    Ok(lp.to_lp_format())
}

/// Percentile by the sort-and-index method (1-based rank, round half up).
#[pyfunction]
fn percentile_value(data: Vec<f64>, x: f64) -> PyResult<f64> {
    attack::percentile_value(&data, x).map_err(err)
}

/// Swap x/(100-x) percentile attack over `series[start..end]`.
/// Returns (poisoned_series, exact_swaps, reflections, degenerate).
#[pyfunction]
fn swap_percentile_attack(
    series: Vec<f64>,
    x: f64,
    start: usize,
    end: usize,
) -> PyResult<(Vec<f64>, usize, usize, bool)> {
    let out = attack::swap_percentile_attack(&series, x, start..end).map_err(err)?;
    Ok((out.series, out.exact_swaps, out.reflections, out.degenerate))
}

type Instance = (Vec<Vec<f64>>, Vec<f64>, Vec<usize>);

/// Deterministic synthetic ensemble with C poisoned models.
/// Returns (outputs, ground_truth, malicious_ids).
#[pyfunction]
#[pyo3(signature = (models, slots, malicious, seed, noise = 5.0, x = 5.0, poison_fraction = 0.2, signal = "sinusoid"))]
#[allow(clippy::too_many_arguments)]
fn generate_instance(
    models: usize,
    slots: usize,
    malicious: usize,
    seed: u64,
    noise: f64,
    x: f64,
    poison_fraction: f64,
    signal: &str,
) -> PyResult<Instance> {
    let base_signal = match signal {
        "sinusoid" => attack::BaseSignal::traffic_proxy(),
        "trend" => attack::BaseSignal::turbofan_proxy(slots),
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown signal {other:?}; expected sinusoid or trend"
            )));
        }
    };
    let spec = attack::InstanceSpec {
        models,
        slots,
        malicious,
        base_signal,
        benign_noise: noise,
        attack_percentile: x,
        poison_fraction,
        seed,
    };
    let instance = attack::generate_instance(&spec).map_err(err)?;
    let rows = (0..instance.outputs.model_count())
        .map(|i| instance.outputs.row(i).to_vec())
        .collect();
    Ok((
        rows,
        instance.ground_truth,
        instance.malicious_ids.into_iter().collect(),
    ))
}

#[pymodule]
fn trustsel(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Plan>()?;
    m.add_function(wrap_pyfunction!(compute_trust_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(exclude_outliers, m)?)?;
    m.add_function(wrap_pyfunction!(plan_trust_score, m)?)?;
    m.add_function(wrap_pyfunction!(validate_plan, m)?)?;
    m.add_function(wrap_pyfunction!(splice_select, m)?)?;
    m.add_function(wrap_pyfunction!(fixing_select, m)?)?;
    m.add_function(wrap_pyfunction!(exact_select, m)?)?;
    m.add_function(wrap_pyfunction!(lp_bound, m)?)?;
    m.add_function(wrap_pyfunction!(lp_format, m)?)?;
    m.add_function(wrap_pyfunction!(percentile_value, m)?)?;
    m.add_function(wrap_pyfunction!(swap_percentile_attack, m)?)?;
    m.add_function(wrap_pyfunction!(generate_instance, m)?)?;
    Ok(())
}
