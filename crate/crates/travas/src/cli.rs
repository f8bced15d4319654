// SPDX-License-Identifier: Apache-2.0

//! Command-line interface.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use travas_core::baseline::{self, BaselineConfig};
use travas_core::metrics::compare_logs;
use travas_core::{travas, DpParams, SimpleEventLog, TsgdParams};

use crate::harness::{self, Budget, Deadline, ExperimentGrid, Mechanism};
use crate::input::{load_log, store_log, LogFormat};
use crate::variants::write_variant_list;

#[derive(Debug, Parser)]
#[command(
    name = "travas",
    version,
    about = "Differentially private release of trace variants"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print statistics of an event log.
    Stats(StatsArgs),
    /// Anonymize an event log.
    Anonymize(AnonymizeArgs),
    /// Compare an anonymized log with its original.
    Compare(CompareArgs),
    /// Run an (ε, δ) experiment grid.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Input format; inferred from the extension when omitted.
    #[arg(long, value_enum)]
    pub format: Option<LogFormat>,
    /// Print JSON instead of aligned text.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct BudgetArgs {
    /// Wall-clock budget per baseline grid cell or anonymization, in seconds.
    #[arg(long, env = "TRAVAS_BASELINE_BUDGET_SECS", default_value_t = 300.0)]
    pub budget_secs: f64,
    /// Prefix nodes a single baseline run may expand.
    #[arg(long, env = "TRAVAS_BASELINE_MAX_NODES", default_value_t = 5_000_000)]
    pub max_nodes: usize,
}

impl BudgetArgs {
    fn budget(&self) -> Result<Budget> {
        let wall_clock = Duration::try_from_secs_f64(self.budget_secs)
            .with_context(|| format!("invalid budget {} s", self.budget_secs))?;
        Ok(Budget {
            wall_clock,
            max_nodes: self.max_nodes,
        })
    }
}

#[derive(Debug, Args)]
pub struct AnonymizeArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub format: Option<LogFormat>,
    #[arg(long)]
    pub epsilon: f64,
    /// Required by travas; the baseline ignores it.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Mechanism::Travas)]
    pub mechanism: Mechanism,
    /// Share of distinct variants the baseline length cutoff must cover.
    #[arg(long, default_value_t = 0.8)]
    pub cutoff_coverage: f64,
    /// Baseline prune threshold; calibrated against the input variant count
    /// when omitted.
    #[arg(long)]
    pub prune_threshold: Option<f64>,
    #[arg(long, default_value_t = 5)]
    pub calibration_runs: usize,
    /// Output file (variant list, or XES by extension); stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub budget: BudgetArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub original: PathBuf,
    #[arg(long)]
    pub anonymized: PathBuf,
    /// Format of both files; inferred from each extension when omitted.
    #[arg(long, value_enum)]
    pub format: Option<LogFormat>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub format: Option<LogFormat>,
    /// Grid configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Results table (CSV).
    #[arg(long)]
    pub output: PathBuf,
    /// Full results with per-run values; defaults to the output path with a
    /// `.json` extension.
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[command(flatten)]
    pub budget: BudgetArgs,
}

/// Executes a parsed command, writing reports to `out`.
pub fn run<W: Write>(cli: Cli, out: &mut W) -> Result<()> {
    match cli.command {
        Command::Stats(args) => stats(&args, out),
        Command::Anonymize(args) => anonymize(&args, out),
        Command::Compare(args) => compare(&args, out),
        Command::Experiment(args) => experiment(&args, out),
    }
}

fn load(path: &Path, format: Option<LogFormat>) -> Result<SimpleEventLog> {
    load_log(path, format).with_context(|| format!("reading {}", path.display()))
}

fn load_non_empty(path: &Path, format: Option<LogFormat>) -> Result<SimpleEventLog> {
    let log = load(path, format)?;
    if log.is_empty() {
        bail!("{}: empty log", path.display());
    }
    Ok(log)
}

fn stats<W: Write>(args: &StatsArgs, out: &mut W) -> Result<()> {
    let stats = load_non_empty(&args.input, args.format)?.statistics();
    // Whole percent, truncated.
    let percent = (stats.trace_uniqueness * 100.0).floor() as u64;
    if args.json {
        let value = serde_json::json!({
            "events": stats.num_events,
            "cases": stats.num_cases,
            "activities": stats.num_activities,
            "variants": stats.num_variants,
            "trace_uniqueness": stats.trace_uniqueness,
            "trace_uniqueness_percent": percent,
        });
        writeln!(out, "{value}")?;
    } else {
        writeln!(out, "    events: {}", stats.num_events)?;
        writeln!(out, "     cases: {}", stats.num_cases)?;
        writeln!(out, "activities: {}", stats.num_activities)?;
        writeln!(out, "  variants: {}", stats.num_variants)?;
        writeln!(
            out,
            "uniqueness: {:.4} ({percent}%)",
            stats.trace_uniqueness
        )?;
    }
    Ok(())
}

fn anonymize<W: Write>(args: &AnonymizeArgs, out: &mut W) -> Result<()> {
    let log = load_non_empty(&args.input, args.format)?;
    let mut rng = ChaCha20Rng::seed_from_u64(args.seed);
    let released = match args.mechanism {
        Mechanism::Travas => {
            let Some(delta) = args.delta else {
                bail!("travas needs --delta");
            };
            let params = TsgdParams::from_dp(&DpParams::new(args.epsilon, delta)?);
            let released = travas::anonymize_with(&log, &params, &mut rng);
            let kept_cases: u64 = log
                .iter()
                .filter(|(v, _)| released.contains(v))
                .map(|(_, f)| f)
                .sum();
            eprintln!(
                "k = {}; released {} of {} variants; suppressed {} variants covering {} of {} cases",
                params.k(),
                released.num_variants(),
                log.num_variants(),
                log.num_variants() - released.num_variants(),
                log.total_cases() - kept_cases,
                log.total_cases(),
            );
            released
        }
        Mechanism::Baseline => baseline_release(args, &log, &mut rng)?,
    };
    match &args.output {
        Some(path) => store_log(&released, path, None)
            .with_context(|| format!("writing {}", path.display()))?,
        None => write_variant_list(&released, &mut *out)?,
    }
    Ok(())
}

fn baseline_release(
    args: &AnonymizeArgs,
    log: &SimpleEventLog,
    rng: &mut ChaCha20Rng,
) -> Result<SimpleEventLog> {
    let budget = args.budget.budget()?;
    let deadline = Deadline::start(&budget);
    let cutoff = baseline::cutoff_for_coverage(log, args.cutoff_coverage)?;
    let threshold = match args.prune_threshold {
        Some(t) => t,
        None => {
            let calibration = baseline::calibrate_with_control(
                log,
                args.epsilon,
                cutoff,
                log.num_variants(),
                args.calibration_runs,
                rng,
                &mut deadline.clone(),
            )?;
            if deadline.expired() {
                bail!("budget exhausted while calibrating the prune threshold");
            }
            if !calibration.bracketed {
                log::warn!(
                    "threshold search did not bracket the target (mean {:.2} variants)",
                    calibration.mean_variants
                );
            }
            calibration.threshold
        }
    };
    let cfg = BaselineConfig::new(args.epsilon, cutoff, threshold)?;
    let released = baseline::anonymize_with_control(log, &cfg, rng, &mut deadline.clone())
        .map_err(|e| anyhow::anyhow!("baseline: {e} (budget exhausted)"))?;
    let fake = released.variants().filter(|v| !log.contains(v)).count();
    eprintln!(
        "cutoff {cutoff}, prune threshold {threshold}; released {} variants, {fake} absent from the input",
        released.num_variants()
    );
    Ok(released)
}

fn compare<W: Write>(args: &CompareArgs, out: &mut W) -> Result<()> {
    let original = load_non_empty(&args.original, args.format)?;
    let anonymized = load(&args.anonymized, args.format)?;
    let distance = compare_logs(&original, &anonymized)?;
    let value = serde_json::json!({
        "rls": distance.relative_log_similarity,
        "ald": distance.absolute_log_difference,
    });
    writeln!(out, "{value}")?;
    Ok(())
}

fn experiment<W: Write>(args: &ExperimentArgs, out: &mut W) -> Result<()> {
    let log = load_non_empty(&args.input, args.format)?;
    let text = fs::read_to_string(&args.config)
        .with_context(|| format!("reading {}", args.config.display()))?;
    let grid = ExperimentGrid::from_json(&text)
        .with_context(|| format!("parsing {}", args.config.display()))?;
    let rows = harness::run_grid(&log, &grid, &args.budget.budget()?)?;

    let json_path = args
        .json
        .clone()
        .unwrap_or_else(|| args.output.with_extension("json"));
    if json_path == args.output {
        bail!("--json must differ from --output");
    }
    let mut csv = Vec::new();
    harness::write_results_csv(&rows, &mut csv)?;
    fs::write(&args.output, &csv).with_context(|| format!("writing {}", args.output.display()))?;
    let mut json = Vec::new();
    harness::write_results_json(&rows, &mut json)?;
    fs::write(&json_path, json).with_context(|| format!("writing {}", json_path.display()))?;
    io::Write::write_all(out, &csv)?;
    Ok(())
}
