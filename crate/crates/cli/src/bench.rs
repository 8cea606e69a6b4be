//! Seeded benchmark sweep: generate instances, run every solver, and
//! aggregate the gap and competitive-ratio statistics.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Args;
use trustsel_core::Result;
use trustsel_core::fixing::fixing_select_with_fraction;
use trustsel_core::oracle::exact_select;
use trustsel_core::relax::{build_lp, solve_lp};
use trustsel_core::report::{per_model_rmse, plan_rmse};
use trustsel_core::splice::splice_select;
use trustsel_core::trust::exclude_outliers;
use trustsel_core::types::BudgetConfig;

use crate::commands::{GenArgs, SignalKind, instance_spec, join};

#[derive(Args)]
pub struct BenchArgs {
    /// Number of seeded instances.
    #[arg(long, default_value_t = 20)]
    pub instances: usize,
    #[arg(long, default_value_t = 7)]
    pub models: usize,
    #[arg(long, default_value_t = 96)]
    pub slots: usize,
    /// Budgets cycle over budget_min..=budget_max across instances.
    #[arg(long, default_value_t = 1)]
    pub budget_min: usize,
    #[arg(long, default_value_t = 10)]
    pub budget_max: usize,
    #[arg(long, default_value_t = 4)]
    pub rate: usize,
    #[arg(long, default_value_t = 0.85)]
    pub lambda: f64,
    /// Number of poisoned models C per instance.
    #[arg(long, default_value_t = 1)]
    pub malicious: usize,
    /// Attack percentile x.
    #[arg(long, default_value_t = 5.0)]
    pub x: f64,
    #[arg(long, default_value_t = 5.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0.20)]
    pub poison_fraction: f64,
    /// Base seed; instance i uses seed + i.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads (defaults to the available parallelism).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Where to write the full per-instance table and summary.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

struct Sample {
    seed: u64,
    budget: usize,
    splice: usize,
    fixing: usize,
    oracle: usize,
    lp_bound: f64,
    gap_oracle_pct: Option<f64>,
    gap_lp_pct: Option<f64>,
    ratio: Option<f64>,
    worst_case_bound: f64,
    failsafe_slots: usize,
    plan_rmse: f64,
    malicious_rmse: Option<f64>,
}

fn run_instance(args: &BenchArgs, index: usize) -> Result<Sample> {
    let budgets = args.budget_max - args.budget_min + 1;
    let budget = args.budget_min + index % budgets;
    let seed = args.seed + index as u64;
    let gen_args = GenArgs {
        models: args.models,
        slots: args.slots,
        malicious: args.malicious,
        seed,
        signal: SignalKind::Sinusoid,
        noise: args.noise,
        x: args.x,
        poison_fraction: args.poison_fraction,
        output: PathBuf::new(),
        truth: None,
        manifest: None,
    };
    let instance = trustsel_core::attack::generate_instance(&instance_spec(&gen_args))?;
    let matrix = exclude_outliers(&instance.outputs, args.lambda)?;
    let mut config = BudgetConfig::new(budget, args.rate);
    config.lambda = args.lambda;

    let splice = splice_select(&matrix, &config)?;
    let frac = solve_lp(&build_lp(&matrix, &config, false)?)?;
    let fixing = fixing_select_with_fraction(&matrix, &config, &frac)?;
    let oracle = exact_select(&matrix, &config)?;

    let t = matrix.slot_count() as f64;
    let worst_case_bound = (t + config.rate as f64 * (config.budget as f64 + 1.0)) / (2.0 * t);
    let ratio = (oracle.trust_score() > 0)
        .then(|| splice.trust_score() as f64 / oracle.trust_score() as f64);
    let gap_oracle_pct = (oracle.trust_score() > 0).then(|| {
        100.0 * (oracle.trust_score() - fixing.trust_score()) as f64
            / oracle.trust_score() as f64
    });
    let gap_lp_pct = (frac.objective() > 0.0).then(|| {
        let gap = 100.0 * (frac.objective() - fixing.trust_score() as f64) / frac.objective();
        if (-1e-6..0.0).contains(&gap) { 0.0 } else { gap }
    });

    let plan_err = plan_rmse(&instance.outputs, &fixing, &instance.ground_truth)?;
    let per_model = per_model_rmse(&instance.outputs, &instance.ground_truth)?;
    let malicious_rmse = instance
        .malicious_ids
        .iter()
        .map(|&m| per_model[m])
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.min(v))));

    Ok(Sample {
        seed,
        budget,
        splice: splice.trust_score(),
        fixing: fixing.trust_score(),
        oracle: oracle.trust_score(),
        lp_bound: frac.objective(),
        gap_oracle_pct,
        gap_lp_pct,
        ratio,
        worst_case_bound,
        failsafe_slots: matrix.failsafe_slots().len(),
        plan_rmse: plan_err,
        malicious_rmse,
    })
}

fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    Some(if values.len() % 2 == 1 {
        values[mid]
    } else {
        0.5 * (values[mid - 1] + values[mid])
    })
}

pub fn run_bench(args: BenchArgs) -> Result<ExitCode> {
    if args.budget_max < args.budget_min {
        return Err(trustsel_core::Error::InvalidConfig(
            "budget_max must be >= budget_min".into(),
        ));
    }
    let threads = args
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .max(1);

    // Fan instances out over workers; each worker owns its instances
    // end-to-end and results are re-ordered afterwards.
    let mut samples: Vec<(usize, Sample)> = Vec::with_capacity(args.instances);
    std::thread::scope(|scope| -> Result<()> {
        let mut handles = Vec::new();
        for worker in 0..threads {
            let args = &args;
            handles.push(scope.spawn(move || -> Result<Vec<(usize, Sample)>> {
                let mut out = Vec::new();
                let mut index = worker;
                while index < args.instances {
                    out.push((index, run_instance(args, index)?));
                    index += threads;
                }
                Ok(out)
            }));
        }
        for handle in handles {
            let chunk = handle.join().expect("bench worker panicked")?;
            samples.extend(chunk);
        }
        Ok(())
    })?;
    samples.sort_by_key(|(i, _)| *i);
    let samples: Vec<Sample> = samples.into_iter().map(|(_, s)| s).collect();

    let mut table = String::from(
        "seed budget splice fixing oracle lp_bound gap_oracle_pct gap_lp_pct ratio worst_case_bound failsafe\n",
    );
    for s in &samples {
        let _ = writeln!(
            table,
            "{} {} {} {} {} {:.3} {} {} {} {:.4} {}",
            s.seed,
            s.budget,
            s.splice,
            s.fixing,
            s.oracle,
            s.lp_bound,
            s.gap_oracle_pct.map_or("-".into(), |v| format!("{v:.4}")),
            s.gap_lp_pct.map_or("-".into(), |v| format!("{v:.4}")),
            s.ratio.map_or("-".into(), |v| format!("{v:.4}")),
            s.worst_case_bound,
            s.failsafe_slots,
        );
    }

    let mut gaps_oracle: Vec<f64> = samples.iter().filter_map(|s| s.gap_oracle_pct).collect();
    let mut gaps_lp: Vec<f64> = samples.iter().filter_map(|s| s.gap_lp_pct).collect();
    let min_ratio = samples
        .iter()
        .filter_map(|s| s.ratio)
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.min(v))));
    let violations: Vec<u64> = samples
        .iter()
        .filter(|s| s.ratio.is_some_and(|r| r < s.worst_case_bound))
        .map(|s| s.seed)
        .collect();
    let rmse_wins = samples
        .iter()
        .filter(|s| s.malicious_rmse.is_some_and(|m| s.plan_rmse <= m))
        .count();

    let mut kv = trustsel_core::io::KvBlock::new("bench_summary");
    kv.push("instances", samples.len());
    kv.push("models", args.models);
    kv.push("slots", args.slots);
    kv.push("budgets", format!("{}..{}", args.budget_min, args.budget_max));
    kv.push("rate", args.rate);
    kv.push("lambda", args.lambda);
    kv.push("malicious", args.malicious);
    kv.push("attack_x", args.x);
    kv.push("base_seed", args.seed);
    if let Some(m) = median(&mut gaps_oracle) {
        kv.push("gap_fixing_vs_oracle_pct_median", format!("{m:.4}"));
        kv.push(
            "gap_fixing_vs_oracle_pct_max",
            format!("{:.4}", gaps_oracle.last().unwrap()),
        );
    }
    if let Some(m) = median(&mut gaps_lp) {
        kv.push("gap_fixing_vs_lp_pct_median", format!("{m:.4}"));
        kv.push("gap_fixing_vs_lp_pct_max", format!("{:.4}", gaps_lp.last().unwrap()));
    }
    if let Some(r) = min_ratio {
        kv.push("min_splice_oracle_ratio", format!("{r:.4}"));
    }
    kv.push("bound_violations", violations.len());
    if !violations.is_empty() {
        kv.push_list("bound_violation_seeds", violations.iter());
    }
    kv.push("rmse_wins_vs_malicious", format!("{rmse_wins}/{}", samples.len()));
    let summary = kv.into_text();

    print!("{summary}");
    if !violations.is_empty() {
        eprintln!(
            "warning: splice/oracle ratio fell below the worst-case bound on seeds {}",
            join(violations.iter())
        );
    }
    if let Some(path) = &args.output {
        std::fs::write(path, format!("{summary}\n{table}"))?;
        println!("table written to {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}
