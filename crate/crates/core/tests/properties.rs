//! Property tests for the trust/exclusion invariants and solver contracts.

mod common;

use proptest::collection::vec;
use proptest::prelude::*;
use trustsel_core::attack::swap_percentile_attack;
use trustsel_core::fixing::fixing_select;
use trustsel_core::io::{outputs_from_csv, outputs_to_csv};
use trustsel_core::splice::splice_select;
use trustsel_core::trust::{compute_trust_matrix, exclude_outliers, plan_trust_score, validate_plan};
use trustsel_core::types::{BinaryTrustMatrix, BudgetConfig, ModelOutputs, SelectionPlan};

fn column(len: usize) -> impl Strategy<Value = Vec<f64>> {
    vec(-1000..=1000i32, len..=len).prop_map(|v| v.into_iter().map(f64::from).collect())
}

fn single_column_outputs(values: Vec<f64>) -> ModelOutputs {
    ModelOutputs::from_rows(values.into_iter().map(|v| vec![v]).collect()).unwrap()
}

proptest! {
    #[test]
    fn trust_levels_respect_cap(values in column(6), p_max in 0.1..100.0f64) {
        let outputs = single_column_outputs(values);
        let trust = compute_trust_matrix(&outputs, p_max).unwrap();
        for i in 0..trust.model_count() {
            let v = trust.value(i, 0);
            prop_assert!(v >= 0.0 && v <= p_max);
        }
    }

    #[test]
    fn identical_columns_saturate(v in -1000..=1000i32, m in 2usize..7, p_max in 0.1..50.0f64) {
        let outputs = single_column_outputs(vec![f64::from(v); m]);
        let trust = compute_trust_matrix(&outputs, p_max).unwrap();
        for i in 0..m {
            prop_assert_eq!(trust.value(i, 0), p_max);
        }
    }

    #[test]
    fn exclusion_translation_invariant(values in column(6), shift in -1000..=1000i32, lambda in 0.1..3.0f64) {
        let base = single_column_outputs(values.clone());
        let shifted = single_column_outputs(
            values.iter().map(|v| v + f64::from(shift)).collect(),
        );
        let a = exclude_outliers(&base, lambda).unwrap();
        let b = exclude_outliers(&shifted, lambda).unwrap();
        prop_assert_eq!(a.row(0).len(), 1);
        for i in 0..a.model_count() {
            prop_assert_eq!(a.entry(i, 0), b.entry(i, 0));
        }
    }

    #[test]
    fn exclusion_scale_covariant(values in column(6), pow in -3..=3i32, lambda in 0.1..3.0f64) {
        // Powers of two keep the scaling exact in floating point.
        let factor = 2.0f64.powi(pow);
        let base = single_column_outputs(values.clone());
        let scaled = single_column_outputs(values.iter().map(|v| v * factor).collect());
        let a = exclude_outliers(&base, lambda).unwrap();
        let b = exclude_outliers(&scaled, lambda).unwrap();
        for i in 0..a.model_count() {
            prop_assert_eq!(a.entry(i, 0), b.entry(i, 0));
        }
    }

    #[test]
    fn exclusion_monotone_in_lambda(values in column(6), l1 in 0.1..3.0f64, l2 in 0.1..3.0f64) {
        let (lo, hi) = if l1 <= l2 { (l1, l2) } else { (l2, l1) };
        let outputs = single_column_outputs(values);
        let tight = exclude_outliers(&outputs, lo).unwrap();
        let loose = exclude_outliers(&outputs, hi).unwrap();
        for i in 0..tight.model_count() {
            prop_assert!(tight.entry(i, 0) <= loose.entry(i, 0));
        }
    }

    #[test]
    fn score_invariant_under_row_permutation(
        rows in vec(vec(0..=1u8, 8..=8), 3..=5),
        assignment_seed in vec(0usize..100, 8..=8),
        rotate in 0usize..5,
    ) {
        let m = rows.len();
        let matrix = BinaryTrustMatrix::from_rows(rows.clone()).unwrap();
        let assignment: Vec<usize> = assignment_seed.iter().map(|&v| v % m).collect();
        let plan = SelectionPlan::from_assignment(assignment.clone(), &matrix).unwrap();
        let base = plan_trust_score(&plan, &matrix).unwrap();

        // Rotate the rows and relabel the plan consistently.
        let perm: Vec<usize> = (0..m).map(|i| (i + rotate) % m).collect();
        let mut permuted_rows = vec![Vec::new(); m];
        for (i, row) in rows.into_iter().enumerate() {
            permuted_rows[perm[i]] = row;
        }
        let permuted = BinaryTrustMatrix::from_rows(permuted_rows).unwrap();
        let relabeled: Vec<usize> = assignment.iter().map(|&mdl| perm[mdl]).collect();
        let plan2 = SelectionPlan::from_assignment(relabeled, &permuted).unwrap();
        prop_assert_eq!(plan_trust_score(&plan2, &permuted).unwrap(), base);
    }

    #[test]
    fn splice_is_feasible_and_within_budget(
        rows in vec(vec(0..=1u8, 12..=12), 2..=5),
        budget in 1usize..4,
        rate in 2usize..4,
    ) {
        prop_assume!((budget + 1) * rate <= 12);
        let matrix = BinaryTrustMatrix::from_rows(rows).unwrap();
        let config = BudgetConfig::new(budget, rate);
        let plan = splice_select(&matrix, &config).unwrap();
        prop_assert!(plan.switch_count() <= budget);
        prop_assert!(validate_plan(&plan, &config).is_feasible());
    }

    #[test]
    fn fixing_dominates_splice(
        rows in vec(vec(0..=1u8, 12..=12), 2..=4),
        budget in 1usize..4,
        rate in 2usize..4,
    ) {
        prop_assume!((budget + 1) * rate <= 12);
        let matrix = BinaryTrustMatrix::from_rows(rows).unwrap();
        let config = BudgetConfig::new(budget, rate);
        let splice = splice_select(&matrix, &config).unwrap();
        let fixing = fixing_select(&matrix, &config).unwrap();
        prop_assert!(fixing.trust_score() >= splice.trust_score());
        prop_assert!(validate_plan(&fixing, &config).is_feasible());
    }

    #[test]
    fn full_region_swap_is_involutive(series in vec(0..=5i32, 4..16), x in 1.0..49.0f64) {
        // Integer-valued series contain their percentile values, so the
        // full-region swap takes the exact-match path both times. The swap
        // preserves the multiset (hence the percentiles) only when the two
        // percentile values occur equally often.
        let series: Vec<f64> = series.into_iter().map(f64::from).collect();
        let len = series.len();
        let v_lo = trustsel_core::attack::percentile_value(&series, x).unwrap();
        let v_hi = trustsel_core::attack::percentile_value(&series, 100.0 - x).unwrap();
        let count = |v: f64| series.iter().filter(|&&s| s == v).count();
        prop_assume!(count(v_lo) == count(v_hi));
        let once = swap_percentile_attack(&series, x, 0..len).unwrap();
        let twice = swap_percentile_attack(&once.series, x, 0..len).unwrap();
        prop_assert_eq!(twice.series, series);
    }

    #[test]
    fn outputs_csv_round_trip(rows in vec(vec(-1e12..1e12f64, 1..6), 1..5)) {
        let widest = rows.iter().map(Vec::len).max().unwrap();
        let rows: Vec<Vec<f64>> = rows.into_iter()
            .map(|mut r| { r.resize(widest, 0.5); r })
            .collect();
        let outputs = ModelOutputs::from_rows(rows).unwrap();
        let back = outputs_from_csv(&outputs_to_csv(&outputs)).unwrap();
        prop_assert_eq!(outputs, back);
    }
}
