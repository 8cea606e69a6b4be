//! Shared test support: seeded random instances and independent oracles.
//!
//! Both oracles here deliberately avoid the library's solver code paths:
//! the plan oracle enumerates run-length compositions directly, and the LP
//! oracle enumerates basic solutions of the standard-form program.
#![allow(dead_code)] // each test target uses a different subset

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trustsel_core::relax::{LinearProgram, Relation};
use trustsel_core::types::{BinaryTrustMatrix, BudgetConfig};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(
    rng: &mut ChaCha8Rng,
    models: usize,
    slots: usize,
    density: f64,
) -> BinaryTrustMatrix {
    let rows: Vec<Vec<u8>> = (0..models)
        .map(|_| {
            (0..slots)
                .map(|_| u8::from(rng.random::<f64>() < density))
                .collect()
        })
        .collect();
    BinaryTrustMatrix::from_rows(rows).unwrap()
}

/// Samples an instance from the acceptance ranges, rejection-sampling the
/// config until (B+1)*R <= T.
pub fn random_instance(rng: &mut ChaCha8Rng) -> (BinaryTrustMatrix, BudgetConfig) {
    loop {
        let models = rng.random_range(3..=7);
        let slots = rng.random_range(12..=48);
        let budget = rng.random_range(1..=5);
        let rate = rng.random_range(2..=5);
        if (budget + 1) * rate > slots {
            continue;
        }
        let density = rng.random_range(0.15..0.9);
        let matrix = random_matrix(rng, models, slots, density);
        return (matrix, BudgetConfig::new(budget, rate));
    }
}

/// Exhaustive plan oracle: enumerates every run-length composition with at
/// most B+1 parts (non-final parts >= R) and every adjacent-distinct model
/// labeling, returning the best score.
pub fn brute_force_score(matrix: &BinaryTrustMatrix, config: &BudgetConfig) -> usize {
    let slots = matrix.slot_count();
    let models = matrix.model_count();
    let mut best = 0usize;
    let mut stack: Vec<(usize, usize, Option<usize>, usize)> =
        vec![(0, config.budget + 1, None, 0)];
    while let Some((start, parts_left, last, acc)) = stack.pop() {
        if start == slots {
            best = best.max(acc);
            continue;
        }
        if parts_left == 0 {
            continue;
        }
        for len in 1..=(slots - start) {
            let end = start + len;
            if end < slots && len < config.rate {
                continue; // non-final runs must reach the dwell
            }
            if end < slots && parts_left == 1 {
                continue; // would need another part to finish
            }
            for model in 0..models {
                if Some(model) == last {
                    continue;
                }
                let gain = matrix.row_sum(model, start..end);
                stack.push((end, parts_left - 1, Some(model), acc + gain));
            }
        }
    }
    best
}

/// Solves `B x = b` by Gaussian elimination; None when singular.
#[allow(clippy::needless_range_loop)]
fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[pivot][col].abs() < 1e-9 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in 0..n {
            if row != col {
                let f = a[row][col] / a[col][col];
                if f != 0.0 {
                    for k in col..n {
                        a[row][k] -= f * a[col][k];
                    }
                    b[row] -= f * b[col];
                }
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

/// Independent LP oracle: converts the program to standard form (upper
/// bounds become rows, every inequality gets a slack) and enumerates all
/// basic solutions, returning the best feasible objective.
///
/// Exponential in the column count; only usable for tiny programs.
pub fn enumerate_lp_optimum(lp: &LinearProgram) -> Option<f64> {
    let n_struct = lp.num_vars();
    let mut rows: Vec<(Vec<f64>, f64, bool)> = Vec::new(); // (coeffs, rhs, is_eq)
    for row in &lp.rows {
        let mut dense = vec![0.0; n_struct];
        for &(col, c) in &row.coeffs {
            dense[col] += c;
        }
        rows.push((dense, row.rhs, row.relation == Relation::Eq));
    }
    for (j, &(lo, hi)) in lp.bounds.iter().enumerate() {
        assert_eq!(lo, 0.0, "oracle expects zero lower bounds");
        if hi.is_finite() {
            let mut dense = vec![0.0; n_struct];
            dense[j] = 1.0;
            rows.push((dense, hi, false));
        }
    }
    let m = rows.len();
    let n_slack = rows.iter().filter(|r| !r.2).count();
    let n_total = n_struct + n_slack;

    // Column-major constraint matrix including slacks.
    let mut full = vec![vec![0.0; m]; n_total];
    let mut rhs = vec![0.0; m];
    let mut slack = n_struct;
    for (r, (dense, b, is_eq)) in rows.iter().enumerate() {
        for (j, &c) in dense.iter().enumerate() {
            full[j][r] = c;
        }
        rhs[r] = *b;
        if !is_eq {
            full[slack][r] = 1.0;
            slack += 1;
        }
    }

    let mut best: Option<f64> = None;
    let mut combo: Vec<usize> = (0..m).collect();
    loop {
        // Assemble the basis matrix for this combination.
        let basis: Vec<Vec<f64>> = (0..m)
            .map(|r| combo.iter().map(|&c| full[c][r]).collect())
            .collect();
        if let Some(x_basic) = solve_square(basis, rhs.clone()) {
            if x_basic.iter().all(|&v| v >= -1e-7) {
                let mut objective = 0.0;
                for (pos, &col) in combo.iter().enumerate() {
                    if col < n_struct {
                        objective += lp.objective[col] * x_basic[pos];
                    }
                }
                if best.is_none_or(|b| objective > b) {
                    best = Some(objective);
                }
            }
        }

        // Next combination of m columns out of n_total.
        let mut i = m;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if combo[i] != i + n_total - m {
                combo[i] += 1;
                for k in i + 1..m {
                    combo[k] = combo[k - 1] + 1;
                }
                break;
            }
        }
    }
}
