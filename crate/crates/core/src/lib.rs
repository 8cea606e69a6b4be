//! Trust-based selection of prediction models over time slots.
//!
//! An ensemble of M models emits outputs over T slots. Each model gets an
//! agreement-based trust level per slot; a lambda-standard-deviations rule
//! binarizes the matrix; and four solvers compute which single model to
//! deploy per slot under a reconfiguration budget B and minimum dwell R:
//!
//! - [`splice::splice_select`] — greedy lower bound,
//! - [`fixing::fixing_select`] — LP rounding, the competitive solver,
//! - [`oracle::exact_select`] — exact dynamic program,
//! - [`relax::solve_lp`] — fractional upper bound.
//!
//! A slot where no model is trusted is a fail-safe slot; plans still assign
//! a model there, but callers are expected to raise the fail-safe alert.
//! [`attack`] generates synthetic ensembles with percentile-swap poisoning
//! for end-to-end evaluation, and [`io`]/[`report`] define the on-disk
//! formats.
//!
//! ```
//! use trustsel_core::attack::{InstanceSpec, generate_instance};
//! use trustsel_core::fixing::fixing_select;
//! use trustsel_core::trust::{exclude_outliers, validate_plan};
//! use trustsel_core::types::BudgetConfig;
//!
//! // 7 models over 48 slots, one of them poisoned.
//! let instance = generate_instance(&InstanceSpec::new(7, 48, 1, 42)).unwrap();
//! let matrix = exclude_outliers(&instance.outputs, 0.85).unwrap();
//!
//! let config = BudgetConfig::new(7, 4); // at most 7 switches, dwell 4
//! let plan = fixing_select(&matrix, &config).unwrap();
//! assert!(validate_plan(&plan, &config).is_feasible());
//! assert!(plan.trust_score() > 0);
//! ```

pub mod attack;
pub mod error;
pub mod fixing;
pub mod io;
pub mod oracle;
pub mod relax;
pub mod report;
pub mod simplex;
pub mod splice;
pub mod trust;
pub mod types;

pub use error::{Error, Result};
pub use types::{
    BinaryTrustMatrix, BudgetConfig, ModelOutputs, SelectionPlan, TrustMatrix, ValidationReport,
    Violation,
};
