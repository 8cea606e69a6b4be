//! Subcommand implementations and their argument structs.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, ValueEnum};
use trustsel_core::attack::{BaseSignal, InstanceSpec, generate_instance, swap_percentile_attack};
use trustsel_core::fixing::fixing_select_with_fraction;
use trustsel_core::io;
use trustsel_core::oracle::exact_select;
use trustsel_core::relax::{build_lp, solve_lp};
use trustsel_core::report::{RunReport, SolverResult, per_model_rmse, plan_rmse};
use trustsel_core::splice::splice_select;
use trustsel_core::trust::{compute_trust_matrix, exclude_outliers};
use trustsel_core::types::{BinaryTrustMatrix, BudgetConfig, ModelOutputs};
use trustsel_core::{Error, Result};

use crate::EXIT_FAILSAFE;

/// Solver knobs; any flag left unset falls back to the config file, then
/// to the built-in defaults.
#[derive(Args, Debug, Clone, Default)]
pub struct ConfigArgs {
    /// Optional key/value config file (flags win over file values).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Maximum number of reconfigurations B.
    #[arg(long)]
    pub budget: Option<usize>,
    /// Minimum dwell R in slots.
    #[arg(long)]
    pub rate: Option<usize>,
    /// Trust-level cap p_max.
    #[arg(long)]
    pub p_max: Option<f64>,
    /// Exclusion multiplier lambda.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Initial rounding threshold H.
    #[arg(long)]
    pub h0: Option<f64>,
    /// Threshold decrement eps.
    #[arg(long)]
    pub eps: Option<f64>,
}

impl ConfigArgs {
    /// defaults <- config file <- flags
    pub fn resolve(&self) -> Result<BudgetConfig> {
        let mut cfg = BudgetConfig::default();
        if let Some(path) = &self.config {
            let kv = io::parse_kv(&std::fs::read_to_string(path)?)?;
            for (key, _) in kv.entries() {
                if !matches!(
                    key.as_str(),
                    "budget" | "rate" | "p_max" | "lambda" | "h0" | "eps"
                ) {
                    return Err(Error::InvalidConfig(format!("unknown config key {key:?}")));
                }
            }
            if kv.get("budget").is_some() {
                cfg.budget = kv.parse_scalar("budget")?;
            }
            if kv.get("rate").is_some() {
                cfg.rate = kv.parse_scalar("rate")?;
            }
            if kv.get("p_max").is_some() {
                cfg.p_max = kv.parse_scalar("p_max")?;
            }
            if kv.get("lambda").is_some() {
                cfg.lambda = kv.parse_scalar("lambda")?;
            }
            if kv.get("h0").is_some() {
                cfg.h0 = kv.parse_scalar("h0")?;
            }
            if kv.get("eps").is_some() {
                cfg.eps = kv.parse_scalar("eps")?;
            }
        }
        if let Some(v) = self.budget {
            cfg.budget = v;
        }
        if let Some(v) = self.rate {
            cfg.rate = v;
        }
        if let Some(v) = self.p_max {
            cfg.p_max = v;
        }
        if let Some(v) = self.lambda {
            cfg.lambda = v;
        }
        if let Some(v) = self.h0 {
            cfg.h0 = v;
        }
        if let Some(v) = self.eps {
            cfg.eps = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum SolverKind {
    Splice,
    Fixing,
    Oracle,
    LpBound,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Splice => "splice",
            SolverKind::Fixing => "fixing",
            SolverKind::Oracle => "oracle",
            SolverKind::LpBound => "lp-bound",
        }
    }
}

impl std::fmt::Display for SolverKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Args)]
pub struct TrustArgs {
    /// Raw outputs CSV.
    #[arg(long)]
    pub input: PathBuf,
    /// Where to write the trust matrix CSV.
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub config: ConfigArgs,
}

pub fn run_trust(args: TrustArgs) -> Result<ExitCode> {
    let cfg = args.config.resolve()?;
    let outputs = io::load_outputs(&args.input)?;
    let trust = compute_trust_matrix(&outputs, cfg.p_max)?;
    io::save_trust(&args.output, &trust, outputs.model_ids())?;
    println!(
        "trust matrix {}x{} written to {} (p_max {})",
        trust.model_count(),
        trust.slot_count(),
        args.output.display(),
        cfg.p_max
    );
    Ok(ExitCode::SUCCESS)
}

#[derive(Args)]
pub struct BinarizeArgs {
    /// Raw outputs CSV.
    #[arg(long)]
    pub input: PathBuf,
    /// Where to write the binary trust matrix CSV.
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub config: ConfigArgs,
}

pub fn run_binarize(args: BinarizeArgs) -> Result<ExitCode> {
    let cfg = args.config.resolve()?;
    let outputs = io::load_outputs(&args.input)?;
    let matrix = exclude_outliers(&outputs, cfg.lambda)?;
    io::save_binary(&args.output, &matrix, outputs.model_ids())?;
    println!(
        "binary matrix {}x{} written to {} (lambda {})",
        matrix.model_count(),
        matrix.slot_count(),
        args.output.display(),
        cfg.lambda
    );
    let failsafe = matrix.failsafe_slots();
    if !failsafe.is_empty() {
        eprintln!("warning: no trusted model at slots {}", join(failsafe.iter()));
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Args)]
pub struct SelectArgs {
    /// Binary trust matrix CSV.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub solver: SolverKind,
    /// Where to write the plan file (not applicable to lp-bound).
    #[arg(long)]
    pub plan: Option<PathBuf>,
    /// Dump the relaxation in LP text format (lp-bound only).
    #[arg(long)]
    pub dump_lp: Option<PathBuf>,
    /// Include the sliding-window rate rows in the LP.
    #[arg(long)]
    pub rate_windows: bool,
    #[command(flatten)]
    pub config: ConfigArgs,
}

fn failsafe_exit(matrix: &BinaryTrustMatrix) -> ExitCode {
    let failsafe = matrix.failsafe_slots();
    if failsafe.is_empty() {
        ExitCode::SUCCESS
    } else {
        eprintln!(
            "fail-safe execution alert: no trusted model at slots {}",
            join(failsafe.iter())
        );
        ExitCode::from(EXIT_FAILSAFE)
    }
}

pub fn run_select(args: SelectArgs) -> Result<ExitCode> {
    let cfg = args.config.resolve()?;
    let matrix = io::load_binary(&args.input)?;

    if args.solver == SolverKind::LpBound {
        let lp = build_lp(&matrix, &cfg, args.rate_windows)?;
        if let Some(path) = &args.dump_lp {
            std::fs::write(path, lp.to_lp_format())?;
        }
        let start = Instant::now();
        let frac = solve_lp(&lp)?;
        println!(
            "lp-bound: objective={:.6} time_ms={:.3}",
            frac.objective(),
            start.elapsed().as_secs_f64() * 1e3
        );
        return Ok(failsafe_exit(&matrix));
    }

    if let Some(path) = &args.dump_lp {
        let lp = build_lp(&matrix, &cfg, args.rate_windows)?;
        std::fs::write(path, lp.to_lp_format())?;
    }
    let start = Instant::now();
    let plan = match args.solver {
        SolverKind::Splice => splice_select(&matrix, &cfg)?,
        SolverKind::Fixing => {
            let frac = solve_lp(&build_lp(&matrix, &cfg, false)?)?;
            fixing_select_with_fraction(&matrix, &cfg, &frac)?
        }
        SolverKind::Oracle => exact_select(&matrix, &cfg)?,
        SolverKind::LpBound => unreachable!(),
    };
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    println!(
        "{}: score={} switches={} time_ms={elapsed:.3}",
        args.solver.name(),
        plan.trust_score(),
        plan.switch_count()
    );
    if let Some(path) = &args.plan {
        io::save_plan(path, args.solver.name(), &plan)?;
    }
    Ok(failsafe_exit(&matrix))
}

#[derive(Args)]
pub struct AttackArgs {
    /// Outputs CSV to poison.
    #[arg(long)]
    pub input: PathBuf,
    /// model_id of the row to poison.
    #[arg(long)]
    pub model: String,
    /// Percentile x of the swap x/(100-x) attack.
    #[arg(long, default_value_t = 5.0)]
    pub x: f64,
    /// First poisoned slot (0-based).
    #[arg(long, default_value_t = 0)]
    pub region_start: usize,
    /// Poisoned slot count; defaults to 20% of the horizon.
    #[arg(long)]
    pub region_len: Option<usize>,
    #[arg(long)]
    pub output: PathBuf,
}

pub fn run_attack(args: AttackArgs) -> Result<ExitCode> {
    let outputs = io::load_outputs(&args.input)?;
    let row = outputs
        .model_ids()
        .iter()
        .position(|id| *id == args.model)
        .ok_or_else(|| Error::InvalidInput(format!("no model with id {:?}", args.model)))?;
    let slots = outputs.slot_count();
    let len = args
        .region_len
        .unwrap_or_else(|| ((slots as f64 * 0.2).round() as usize).clamp(1, slots));
    let region = args.region_start..args.region_start + len;
    let outcome = swap_percentile_attack(outputs.row(row), args.x, region.clone())?;
    if outcome.degenerate {
        eprintln!("warning: degenerate distribution, swap is a no-op");
    }
    let rows: Vec<Vec<f64>> = (0..outputs.model_count())
        .map(|i| {
            if i == row {
                outcome.series.clone()
            } else {
                outputs.row(i).to_vec()
            }
        })
        .collect();
    let poisoned = ModelOutputs::new(outputs.model_ids().to_vec(), rows)?;
    io::save_outputs(&args.output, &poisoned)?;
    println!(
        "poisoned model {:?} over slots {}..{} ({} exact swaps, {} reflections)",
        args.model, region.start, region.end, outcome.exact_swaps, outcome.reflections
    );
    Ok(ExitCode::SUCCESS)
}

#[derive(Copy, Clone, Debug, ValueEnum)]
pub enum SignalKind {
    /// Daily sinusoid (traffic volume proxy).
    Sinusoid,
    /// Linear decay (remaining-useful-life proxy).
    Trend,
    /// Cycling plateau levels.
    Piecewise,
}

#[derive(Args)]
pub struct GenArgs {
    #[arg(long, default_value_t = 7)]
    pub models: usize,
    #[arg(long, default_value_t = 96)]
    pub slots: usize,
    /// Number of poisoned models C.
    #[arg(long, default_value_t = 1)]
    pub malicious: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = SignalKind::Sinusoid)]
    pub signal: SignalKind,
    /// Standard deviation of per-model Gaussian noise.
    #[arg(long, default_value_t = 5.0)]
    pub noise: f64,
    /// Attack percentile x.
    #[arg(long, default_value_t = 5.0)]
    pub x: f64,
    /// Fraction of slots poisoned per malicious model.
    #[arg(long, default_value_t = 0.20)]
    pub poison_fraction: f64,
    /// Where to write the outputs CSV.
    #[arg(long)]
    pub output: PathBuf,
    /// Optional ground-truth CSV (single row).
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Optional key/value manifest (seed, malicious ids, regions).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

pub fn instance_spec(args: &GenArgs) -> InstanceSpec {
    let base_signal = match args.signal {
        SignalKind::Sinusoid => BaseSignal::traffic_proxy(),
        SignalKind::Trend => BaseSignal::turbofan_proxy(args.slots),
        SignalKind::Piecewise => BaseSignal::Piecewise {
            levels: vec![60.0, 140.0, 100.0, 180.0],
            segment_len: (args.slots / 8).max(1),
        },
    };
    InstanceSpec {
        models: args.models,
        slots: args.slots,
        malicious: args.malicious,
        base_signal,
        benign_noise: args.noise,
        attack_percentile: args.x,
        poison_fraction: args.poison_fraction,
        seed: args.seed,
    }
}

pub fn run_gen(args: GenArgs) -> Result<ExitCode> {
    let spec = instance_spec(&args);
    let instance = generate_instance(&spec)?;
    io::save_outputs(&args.output, &instance.outputs)?;
    if let Some(path) = &args.truth {
        let truth = ModelOutputs::new(
            vec!["ground_truth".to_string()],
            vec![instance.ground_truth.clone()],
        )?;
        io::save_outputs(path, &truth)?;
    }
    if let Some(path) = &args.manifest {
        let mut kv = io::KvBlock::new("gen_manifest");
        kv.push("seed", spec.seed);
        kv.push("models", spec.models);
        kv.push("slots", spec.slots);
        kv.push_list("malicious_ids", instance.malicious_ids.iter());
        kv.push_list(
            "poison_regions",
            instance
                .poison_regions
                .iter()
                .map(|(row, r)| format!("{row}:{}..{}", r.start, r.end)),
        );
        std::fs::write(path, kv.into_text())?;
    }
    println!(
        "instance {}x{} seed {} written to {} (malicious: {})",
        spec.models,
        spec.slots,
        spec.seed,
        args.output.display(),
        join(instance.malicious_ids.iter())
    );
    Ok(ExitCode::SUCCESS)
}

#[derive(Args)]
pub struct ReportArgs {
    /// Raw outputs CSV.
    #[arg(long)]
    pub input: PathBuf,
    /// Ground-truth CSV from `gen`; enables RMSE reporting.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Directory for report.txt and plan_<solver>.txt files.
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Comma-separated subset of splice,fixing,oracle,lp-bound.
    #[arg(long, value_delimiter = ',', default_values_t = vec![
        SolverKind::Splice, SolverKind::Fixing, SolverKind::Oracle, SolverKind::LpBound
    ])]
    pub solvers: Vec<SolverKind>,
    /// Include the sliding-window rate rows in the LP bound.
    #[arg(long)]
    pub rate_windows: bool,
    #[command(flatten)]
    pub config: ConfigArgs,
}

pub fn run_report(args: ReportArgs) -> Result<ExitCode> {
    let cfg = args.config.resolve()?;
    let outputs = io::load_outputs(&args.input)?;
    let truth: Option<Vec<f64>> = match &args.truth {
        Some(path) => {
            let t = io::load_outputs(path)?;
            Some(t.row(0).to_vec())
        }
        None => None,
    };
    std::fs::create_dir_all(&args.out_dir)?;

    let matrix = exclude_outliers(&outputs, cfg.lambda)?;
    io::save_binary(&args.out_dir.join("binary.csv"), &matrix, outputs.model_ids())?;
    let trust = compute_trust_matrix(&outputs, cfg.p_max)?;
    io::save_trust(&args.out_dir.join("trust.csv"), &trust, outputs.model_ids())?;

    let mut report = RunReport {
        instance: args.input.display().to_string(),
        models: matrix.model_count(),
        slots: matrix.slot_count(),
        config: Some(cfg.clone()),
        failsafe_slots: matrix.failsafe_slots(),
        ..RunReport::default()
    };

    // Solve the LP once; it serves both the bound and the fixing solver.
    let needs_lp = args
        .solvers
        .iter()
        .any(|s| matches!(s, SolverKind::Fixing | SolverKind::LpBound));
    let frac = if needs_lp {
        let lp = build_lp(&matrix, &cfg, args.rate_windows)?;
        let start = Instant::now();
        let frac = solve_lp(&lp)?;
        report.lp_time_ms = Some(start.elapsed().as_secs_f64() * 1e3);
        Some(frac)
    } else {
        None
    };

    for &solver in &args.solvers {
        match solver {
            SolverKind::LpBound => {
                report.lp_bound = Some(frac.as_ref().unwrap().objective());
            }
            _ => {
                let start = Instant::now();
                let plan = match solver {
                    SolverKind::Splice => splice_select(&matrix, &cfg)?,
                    SolverKind::Fixing => {
                        fixing_select_with_fraction(&matrix, &cfg, frac.as_ref().unwrap())?
                    }
                    SolverKind::Oracle => exact_select(&matrix, &cfg)?,
                    SolverKind::LpBound => unreachable!(),
                };
                let elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
                io::save_plan(
                    &args.out_dir.join(format!("plan_{}.txt", solver.name())),
                    solver.name(),
                    &plan,
                )?;
                if let Some(truth) = &truth {
                    report
                        .plan_rmse
                        .push((solver.name().to_string(), plan_rmse(&outputs, &plan, truth)?));
                }
                report.solver_results.push(SolverResult {
                    solver: solver.name().to_string(),
                    plan,
                    elapsed_ms,
                });
            }
        }
    }
    if let Some(truth) = &truth {
        report.per_model_rmse = per_model_rmse(&outputs, truth)?;
    }

    let text = report.to_text();
    std::fs::write(args.out_dir.join("report.txt"), &text)?;
    print!("{text}");
    Ok(failsafe_exit(&matrix))
}

pub fn join<T: std::fmt::Display>(items: impl Iterator<Item = T>) -> String {
    let joined = items.map(|v| v.to_string()).collect::<Vec<_>>().join(" ");
    if joined.is_empty() { "(none)".to_string() } else { joined }
}
