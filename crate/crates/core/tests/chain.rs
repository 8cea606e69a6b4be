//! Cross-solver ordering and exactness checks on randomized instances.

mod common;

use common::{brute_force_score, random_instance, random_matrix, rng};
use trustsel_core::fixing::fixing_select_with_fraction;
use trustsel_core::oracle::exact_select;
use trustsel_core::relax::{build_lp, solve_lp};
use trustsel_core::splice::splice_select;
use trustsel_core::trust::validate_plan;
use trustsel_core::types::BudgetConfig;

/// splice <= fixing <= oracle <= LP bound, with feasible plans throughout.
#[test]
fn solver_chain_is_ordered() {
    let mut rng = rng(0xC0FFEE);
    for case in 0..200 {
        let (matrix, config) = random_instance(&mut rng);
        let splice = splice_select(&matrix, &config).unwrap();
        let lp = build_lp(&matrix, &config, false).unwrap();
        let frac = solve_lp(&lp).unwrap();
        let fixing = fixing_select_with_fraction(&matrix, &config, &frac).unwrap();
        let oracle = exact_select(&matrix, &config).unwrap();

        for (name, plan) in [("splice", &splice), ("fixing", &fixing), ("oracle", &oracle)] {
            let report = validate_plan(plan, &config);
            assert!(
                report.is_feasible(),
                "case {case}: {name} infeasible: {:?}",
                report.violations
            );
        }
        assert!(
            splice.trust_score() <= fixing.trust_score(),
            "case {case}: splice {} > fixing {}",
            splice.trust_score(),
            fixing.trust_score()
        );
        assert!(
            fixing.trust_score() <= oracle.trust_score(),
            "case {case}: fixing {} > oracle {}",
            fixing.trust_score(),
            oracle.trust_score()
        );
        assert!(
            oracle.trust_score() as f64 <= frac.objective() + 1e-6,
            "case {case}: oracle {} > lp bound {}",
            oracle.trust_score(),
            frac.objective()
        );
    }
}

/// The DP agrees with the exhaustive composition oracle on small instances.
#[test]
fn dp_matches_brute_force() {
    let mut rng = rng(0xDEAD);
    for case in 0..100 {
        let models = rng.random_range(2..=5);
        let slots = rng.random_range(4..=12);
        let (budget, rate) = loop {
            let b = rng.random_range(1..=5);
            let r = rng.random_range(2..=5);
            if (b + 1) * r <= slots {
                break (b, r);
            }
        };
        let density = rng.random_range(0.2..0.9);
        let matrix = random_matrix(&mut rng, models, slots, density);
        let config = BudgetConfig::new(budget, rate);
        let dp = exact_select(&matrix, &config).unwrap();
        let brute = brute_force_score(&matrix, &config);
        assert_eq!(
            dp.trust_score(),
            brute,
            "case {case}: M={models} T={slots} B={budget} R={rate}"
        );
    }
}

use rand::Rng;

/// Randomized 7x24 instances with B = 3, R = 4: the fixing score stays
/// between splice and the oracle.
#[test]
fn fixing_bracketed_on_seven_by_twentyfour() {
    let mut rng = rng(0x7B24);
    let config = BudgetConfig::new(3, 4);
    for _ in 0..30 {
        let density = rng.random_range(0.2..0.9);
        let matrix = random_matrix(&mut rng, 7, 24, density);
        let splice = splice_select(&matrix, &config).unwrap();
        let fixing =
            trustsel_core::fixing::fixing_select(&matrix, &config).unwrap();
        let oracle = exact_select(&matrix, &config).unwrap();
        assert!(splice.trust_score() <= fixing.trust_score());
        assert!(fixing.trust_score() <= oracle.trust_score());
        assert!(validate_plan(&fixing, &config).is_feasible());
    }
}

/// Oracle score never decreases with more budget, never increases with a
/// longer dwell.
#[test]
fn oracle_monotone_in_budget_and_rate() {
    let mut rng = rng(0xBEEF);
    for _ in 0..20 {
        let matrix = random_matrix(&mut rng, 4, 24, 0.5);
        let mut prev = None;
        for budget in 0..=5 {
            let score = exact_select(&matrix, &BudgetConfig::new(budget, 3))
                .unwrap()
                .trust_score();
            if let Some(p) = prev {
                assert!(score >= p, "budget sweep decreased: {p} -> {score}");
            }
            prev = Some(score);
        }
        let mut prev = None;
        for rate in 1..=6 {
            let score = exact_select(&matrix, &BudgetConfig::new(3, rate))
                .unwrap()
                .trust_score();
            if let Some(p) = prev {
                assert!(score <= p, "rate sweep increased: {p} -> {score}");
            }
            prev = Some(score);
        }
    }
}

/// When the fractional optimum happens to be integral, it is a feasible
/// plan of the budget-only problem, so it must match the R = 1 oracle.
#[test]
fn integral_lp_matches_budget_only_oracle() {
    let mut rng = rng(0xFACE);
    let mut integral_seen = 0;
    for _ in 0..60 {
        let models = rng.random_range(2..=4);
        let slots = rng.random_range(6..=14);
        let budget = rng.random_range(1..=3);
        let matrix = random_matrix(&mut rng, models, slots, 0.55);
        let config = BudgetConfig::new(budget, 1);
        let frac = solve_lp(&build_lp(&matrix, &config, false).unwrap()).unwrap();
        let integral = (0..models)
            .all(|i| (0..slots).all(|j| !(1e-6..=1.0 - 1e-6).contains(&frac.value(i, j))));
        if integral {
            integral_seen += 1;
            let oracle = exact_select(&matrix, &config).unwrap();
            assert!(
                (frac.objective() - oracle.trust_score() as f64).abs() < 1e-6,
                "integral LP {} != oracle {}",
                frac.objective(),
                oracle.trust_score()
            );
        }
    }
    assert!(integral_seen > 0, "no integral optima sampled");
}
