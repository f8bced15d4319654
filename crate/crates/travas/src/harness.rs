// SPDX-License-Identifier: Apache-2.0

//! Privacy/utility sweeps over an (ε, δ) grid.
//!
//! Every run draws from its own ChaCha20 stream, seeded from a stable hash
//! of `(master_seed, ε index, δ index, mechanism, run index)`. Cells and runs
//! may therefore execute in any order, in parallel, without changing a
//! single output byte. The only exception is the baseline wall-clock budget:
//! runs that outlive it are marked failed.

use std::io::Write;
use std::time::{Duration, Instant};

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use travas_core::baseline::{self, BaselineConfig, ExpansionControl};
use travas_core::metrics::compare_logs;
use travas_core::{travas, DpParams, SimpleEventLog, TsgdParams};

/// Anonymization mechanisms available to the harness and the CLI.
#[derive(
    Clone,
    Copy,
    Debug,
    PartialEq,
    Eq,
    PartialOrd,
    Ord,
    Hash,
    Serialize,
    Deserialize,
    clap::ValueEnum,
)]
#[serde(rename_all = "lowercase")]
pub enum Mechanism {
    Travas,
    Baseline,
}

impl Mechanism {
    pub fn name(self) -> &'static str {
        match self {
            Mechanism::Travas => "travas",
            Mechanism::Baseline => "baseline",
        }
    }

    fn tag(self) -> u64 {
        match self {
            Mechanism::Travas => 1,
            Mechanism::Baseline => 2,
        }
    }
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error(transparent)]
    Core(#[from] travas_core::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn default_coverage() -> f64 {
    0.8
}

fn default_calibration_runs() -> usize {
    5
}

/// Sweep configuration, read from JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentGrid {
    pub epsilons: Vec<f64>,
    pub deltas: Vec<f64>,
    pub repetitions: usize,
    pub master_seed: u64,
    pub mechanisms: Vec<Mechanism>,
    /// Share of distinct variants the baseline length cutoff must cover.
    #[serde(default = "default_coverage")]
    pub cutoff_coverage: f64,
    /// Repetitions per threshold evaluation during baseline calibration.
    #[serde(default = "default_calibration_runs")]
    pub calibration_runs: usize,
}

impl ExperimentGrid {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let grid: ExperimentGrid = serde_json::from_str(text)?;
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: &str| Err(HarnessError::InvalidGrid(msg.to_owned()));
        if self.epsilons.is_empty() || self.deltas.is_empty() || self.mechanisms.is_empty() {
            return bad("epsilons, deltas and mechanisms must be non-empty");
        }
        if self.repetitions == 0 {
            return bad("repetitions must be at least 1");
        }
        if self.calibration_runs == 0 {
            return bad("calibration_runs must be at least 1");
        }
        for &eps in &self.epsilons {
            for &delta in &self.deltas {
                DpParams::new(eps, delta)?;
            }
        }
        let mut mechanisms = self.mechanisms.clone();
        mechanisms.sort();
        mechanisms.dedup();
        if mechanisms.len() != self.mechanisms.len() {
            return bad("mechanisms must not repeat");
        }
        if !(self.cutoff_coverage > 0.0 && self.cutoff_coverage <= 1.0) {
            return bad("cutoff_coverage must lie in (0, 1]");
        }
        Ok(())
    }
}

fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stream index reserved for baseline threshold calibration.
pub const CALIBRATION_STREAM: u64 = u64::MAX;

/// Seed of one run, a pure function of its grid coordinates.
pub fn derive_seed(
    master_seed: u64,
    epsilon_index: usize,
    delta_index: usize,
    mechanism: Mechanism,
    run: u64,
) -> u64 {
    [
        epsilon_index as u64,
        delta_index as u64,
        mechanism.tag(),
        run,
    ]
    .into_iter()
    .fold(splitmix64(master_seed), |acc, part| splitmix64(acc ^ part))
}

/// Resource limits for baseline runs, which can blow up at small ε.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    /// Wall-clock limit per grid cell, calibration included.
    pub wall_clock: Duration,
    /// Prefix nodes one run may expand before it is abandoned.
    pub max_nodes: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            wall_clock: Duration::from_secs(300),
            max_nodes: 5_000_000,
        }
    }
}

/// Stops expansion at a deadline or node count. The clock is read every
/// 1024 nodes.
#[derive(Clone, Copy, Debug)]
pub struct Deadline {
    pub until: Instant,
    pub max_nodes: usize,
}

impl Deadline {
    pub fn start(budget: &Budget) -> Self {
        Deadline {
            until: Instant::now() + budget.wall_clock,
            max_nodes: budget.max_nodes,
        }
    }

    pub fn expired(&self) -> bool {
        Instant::now() >= self.until
    }
}

impl ExpansionControl for Deadline {
    fn proceed(&mut self, expanded: usize) -> bool {
        expanded <= self.max_nodes && (expanded % 1024 != 0 || !self.expired())
    }
}

/// Metrics of one anonymized log. All fields are `None` for a failed run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub seed: u64,
    pub rls: Option<f64>,
    pub ald: Option<u64>,
    pub variants: Option<usize>,
}

impl RunResult {
    fn failed(seed: u64) -> Self {
        RunResult {
            seed,
            rls: None,
            ald: None,
            variants: None,
        }
    }

    fn measured(seed: u64, original: &SimpleEventLog, anonymized: &SimpleEventLog) -> Self {
        let distance = compare_logs(original, anonymized).expect("original log is non-empty");
        RunResult {
            seed,
            rls: Some(distance.relative_log_similarity),
            ald: Some(distance.absolute_log_difference),
            variants: Some(anonymized.num_variants()),
        }
    }

    pub fn is_failed(&self) -> bool {
        self.rls.is_none()
    }
}

/// Aggregate of one (mechanism, ε, δ) cell. Means cover the successful runs
/// only and are `None` when every run failed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridCellResult {
    pub mechanism: Mechanism,
    pub epsilon: f64,
    pub delta: f64,
    pub mean_rls: Option<f64>,
    pub mean_ald: Option<f64>,
    pub mean_variant_count: Option<f64>,
    pub run_count: usize,
    pub failed_runs: usize,
    /// Baseline only.
    pub prune_threshold: Option<f64>,
    /// Baseline only.
    pub cutoff: Option<usize>,
    pub runs: Vec<RunResult>,
}

impl GridCellResult {
    fn aggregate(mechanism: Mechanism, epsilon: f64, delta: f64, runs: Vec<RunResult>) -> Self {
        let ok: Vec<&RunResult> = runs.iter().filter(|r| !r.is_failed()).collect();
        let mean = |f: &dyn Fn(&RunResult) -> f64| {
            (!ok.is_empty()).then(|| ok.iter().map(|r| f(r)).sum::<f64>() / ok.len() as f64)
        };
        GridCellResult {
            mechanism,
            epsilon,
            delta,
            mean_rls: mean(&|r| r.rls.unwrap_or_default()),
            mean_ald: mean(&|r| r.ald.unwrap_or_default() as f64),
            mean_variant_count: mean(&|r| r.variants.unwrap_or_default() as f64),
            run_count: runs.len(),
            failed_runs: runs.len() - ok.len(),
            prune_threshold: None,
            cutoff: None,
            runs,
        }
    }
}

struct Cell {
    mechanism: Mechanism,
    epsilon_index: usize,
    delta_index: usize,
    epsilon: f64,
    delta: f64,
}

/// Runs the whole grid. Returns one row per (mechanism, ε, δ), sorted by
/// mechanism name, then ε and δ descending.
pub fn run_grid(
    log: &SimpleEventLog,
    grid: &ExperimentGrid,
    budget: &Budget,
) -> Result<Vec<GridCellResult>, HarnessError> {
    grid.validate()?;
    if log.is_empty() {
        return Err(travas_core::Error::EmptyLog.into());
    }
    let cutoff = if grid.mechanisms.contains(&Mechanism::Baseline) {
        Some(baseline::cutoff_for_coverage(log, grid.cutoff_coverage)?)
    } else {
        None
    };

    let mut cells = Vec::new();
    for &mechanism in &grid.mechanisms {
        for (epsilon_index, &epsilon) in grid.epsilons.iter().enumerate() {
            for (delta_index, &delta) in grid.deltas.iter().enumerate() {
                cells.push(Cell {
                    mechanism,
                    epsilon_index,
                    delta_index,
                    epsilon,
                    delta,
                });
            }
        }
    }

    let mut rows = cells
        .par_iter()
        .map(|cell| match cell.mechanism {
            Mechanism::Travas => Ok(travas_cell(log, grid, cell)),
            Mechanism::Baseline => {
                baseline_cell(log, grid, cell, cutoff.expect("computed above"), budget)
            }
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;
    rows.sort_by(|a, b| {
        a.mechanism
            .name()
            .cmp(b.mechanism.name())
            .then(b.epsilon.total_cmp(&a.epsilon))
            .then(b.delta.total_cmp(&a.delta))
    });
    Ok(rows)
}

fn run_seeds(grid: &ExperimentGrid, cell: &Cell) -> Vec<u64> {
    (0..grid.repetitions as u64)
        .map(|run| {
            derive_seed(
                grid.master_seed,
                cell.epsilon_index,
                cell.delta_index,
                cell.mechanism,
                run,
            )
        })
        .collect()
}

fn travas_cell(log: &SimpleEventLog, grid: &ExperimentGrid, cell: &Cell) -> GridCellResult {
    let dp = DpParams::new(cell.epsilon, cell.delta).expect("validated grid");
    let params = TsgdParams::from_dp(&dp);
    let runs = run_seeds(grid, cell)
        .into_par_iter()
        .map(|seed| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let out = travas::anonymize_with(log, &params, &mut rng);
            RunResult::measured(seed, log, &out)
        })
        .collect();
    GridCellResult::aggregate(cell.mechanism, cell.epsilon, cell.delta, runs)
}

fn baseline_cell(
    log: &SimpleEventLog,
    grid: &ExperimentGrid,
    cell: &Cell,
    cutoff: usize,
    budget: &Budget,
) -> Result<GridCellResult, HarnessError> {
    let deadline = Deadline::start(budget);
    let seeds = run_seeds(grid, cell);
    let mut rng = ChaCha20Rng::seed_from_u64(derive_seed(
        grid.master_seed,
        cell.epsilon_index,
        cell.delta_index,
        cell.mechanism,
        CALIBRATION_STREAM,
    ));
    let calibration = baseline::calibrate_with_control(
        log,
        cell.epsilon,
        cutoff,
        log.num_variants(),
        grid.calibration_runs,
        &mut rng,
        &mut deadline.clone(),
    )?;
    if !calibration.bracketed {
        log::warn!(
            "baseline ε={}: threshold search did not bracket {} variants (mean {:.2} at {})",
            cell.epsilon,
            log.num_variants(),
            calibration.mean_variants,
            calibration.threshold
        );
    }

    let runs = if deadline.expired() {
        log::warn!(
            "baseline ε={} δ={}: budget spent during calibration",
            cell.epsilon,
            cell.delta
        );
        seeds.into_iter().map(RunResult::failed).collect()
    } else {
        let cfg = BaselineConfig::new(cell.epsilon, cutoff, calibration.threshold)?;
        seeds
            .into_par_iter()
            .map(|seed| {
                let mut rng = ChaCha20Rng::seed_from_u64(seed);
                match baseline::anonymize_with_control(log, &cfg, &mut rng, &mut deadline.clone()) {
                    Ok(out) => RunResult::measured(seed, log, &out),
                    Err(_) => RunResult::failed(seed),
                }
            })
            .collect()
    };
    let mut row = GridCellResult::aggregate(cell.mechanism, cell.epsilon, cell.delta, runs);
    row.prune_threshold = Some(calibration.threshold);
    row.cutoff = Some(cutoff);
    Ok(row)
}

/// Header of the results table.
pub const CSV_HEADER: [&str; 8] = [
    "mechanism",
    "epsilon",
    "delta",
    "mean_rls",
    "mean_ald",
    "mean_variants",
    "runs",
    "failed",
];

/// Writes the results table. Means of fully failed cells are left empty.
pub fn write_results_csv<W: Write>(rows: &[GridCellResult], sink: W) -> Result<(), HarnessError> {
    let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    let mut writer = csv::Writer::from_writer(sink);
    writer.write_record(CSV_HEADER)?;
    for row in rows {
        writer.write_record([
            row.mechanism.name().to_owned(),
            row.epsilon.to_string(),
            row.delta.to_string(),
            opt(row.mean_rls),
            opt(row.mean_ald),
            opt(row.mean_variant_count),
            row.run_count.to_string(),
            row.failed_runs.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

/// Writes the full results, per-run values included, as pretty JSON.
pub fn write_results_json<W: Write>(
    rows: &[GridCellResult],
    mut sink: W,
) -> Result<(), HarnessError> {
    serde_json::to_writer_pretty(&mut sink, rows)?;
    sink.write_all(b"\n")?;
    Ok(())
}
