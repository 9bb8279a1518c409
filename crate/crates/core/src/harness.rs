//! Seeded parameter sweeps over `(N, n, ρ)` grids.
//!
//! Each `(cell, trial)` unit draws from its own stream, keyed by a stable
//! hash of the cell parameters and the trial number, so editing a grid does
//! not reshuffle the randomness of untouched cells. Units run on the rayon
//! pool; results are collected back in cell order, which makes the CSV
//! independent of the worker count.

use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;
use serde::Deserialize;

use crate::detection::{run_test, TestKind, DEFAULT_C1};
use crate::error::{PvError, Result};
use crate::lowdeg::advantage;
use crate::model_gen::{generate_instance, sample_detection_pair, Hypothesis, InstanceParams, Model};
use crate::rng::{stable_hash, SeedSpec};
use crate::spectral::{estimate_direction, recover, score};

pub const RECORD_HEADER: &str = "N,n,rho,trial,task,success,l2_error,entrywise_err,statistic,adv,elapsed_ms";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Recover,
    DetectSpectral,
    DetectL1l2,
    Advantage,
}

impl Task {
    pub fn as_str(self) -> &'static str {
        match self {
            Task::Recover => "recover",
            Task::DetectSpectral => "detect_spectral",
            Task::DetectL1l2 => "detect_l1l2",
            Task::Advantage => "advantage",
        }
    }

    fn tag(self) -> u64 {
        match self {
            Task::Recover => 1,
            Task::DetectSpectral => 2,
            Task::DetectL1l2 => 3,
            Task::Advantage => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum ModelName {
    #[serde(rename = "gaussian")]
    Gaussian,
    #[serde(rename = "orth")]
    Orth,
}

impl From<ModelName> for Model {
    fn from(m: ModelName) -> Self {
        match m {
            ModelName::Gaussian => Model::Gaussian,
            ModelName::Orth => Model::Orthonormal,
        }
    }
}

/// Sweep configuration, read from JSON with keys
/// `Ns, ns, rhos, trials, model, tasks, D, seed, out`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(rename = "Ns")]
    pub ambient_dims: Vec<usize>,
    #[serde(rename = "ns")]
    pub subspace_dims: Vec<usize>,
    pub rhos: Vec<f64>,
    pub trials: usize,
    pub model: ModelName,
    pub tasks: Vec<Task>,
    #[serde(rename = "D")]
    pub max_degree: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub ambient_dim: usize,
    pub subspace_dim: usize,
    pub rho: f64,
}

impl Cell {
    /// Stream index of `trial` in this cell. ρ enters as a fixed-point
    /// integer (1e-12 resolution).
    pub fn stream(&self, trial: usize) -> u64 {
        let rho_fixed = (self.rho * 1e12).round() as u64;
        stable_hash(&[
            self.ambient_dim as u64,
            self.subspace_dim as u64,
            rho_fixed,
            trial as u64,
        ])
    }
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SweepConfig = serde_json::from_str(text).map_err(|e| PvError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| PvError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(PvError::Config(m.to_string()));
        if self.ambient_dims.is_empty() || self.subspace_dims.is_empty() || self.rhos.is_empty() {
            return fail("Ns, ns and rhos must be nonempty");
        }
        if self.ambient_dims.contains(&0) || self.subspace_dims.contains(&0) {
            return fail("grid dimensions must be positive");
        }
        if self.rhos.iter().any(|r| !(*r > 0.0 && *r <= 1.0)) {
            return fail("every rho must lie in (0, 1]");
        }
        if self.trials == 0 {
            return fail("trials must be at least 1");
        }
        if self.tasks.is_empty() {
            return fail("tasks must be nonempty");
        }
        Ok(())
    }

    /// Valid grid cells in `N`-major, then `n`, then `ρ` order. Cells with
    /// `n > N` are skipped with a warning.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &ambient_dim in &self.ambient_dims {
            for &subspace_dim in &self.subspace_dims {
                if subspace_dim > ambient_dim {
                    warn!("skipping cell N={ambient_dim}, n={subspace_dim}: n exceeds N");
                    continue;
                }
                for &rho in &self.rhos {
                    out.push(Cell {
                        ambient_dim,
                        subspace_dim,
                        rho,
                    });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub ambient_dim: usize,
    pub subspace_dim: usize,
    pub rho: f64,
    pub trial: usize,
    pub task: Task,
    pub success: bool,
    pub l2_error: Option<f64>,
    pub entrywise_err: Option<f64>,
    pub statistic: Option<f64>,
    pub adv: Option<f64>,
    pub elapsed_ms: Option<f64>,
}

impl SweepRecord {
    fn empty(cell: &Cell, trial: usize, task: Task) -> Self {
        Self {
            ambient_dim: cell.ambient_dim,
            subspace_dim: cell.subspace_dim,
            rho: cell.rho,
            trial,
            task,
            success: false,
            l2_error: None,
            entrywise_err: None,
            statistic: None,
            adv: None,
            elapsed_ms: None,
        }
    }

    pub fn csv_row(&self) -> String {
        fn opt(x: Option<f64>) -> String {
            x.map(|v| v.to_string()).unwrap_or_default()
        }
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.ambient_dim,
            self.subspace_dim,
            self.rho,
            self.trial,
            self.task.as_str(),
            u8::from(self.success),
            opt(self.l2_error),
            opt(self.entrywise_err),
            opt(self.statistic),
            opt(self.adv),
            opt(self.elapsed_ms),
        )
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SweepOptions {
    /// Fill `elapsed_ms`. Off by default: wall-clock times would make the
    /// CSV differ between otherwise identical runs.
    pub timing: bool,
}

fn run_recover(cell: &Cell, model: Model, seed: SeedSpec, rec: &mut SweepRecord) -> Result<()> {
    let inst = generate_instance(InstanceParams::new(
        cell.ambient_dim,
        cell.subspace_dim,
        cell.rho,
        model,
        seed,
    ))?;
    let est = estimate_direction(&inst.observed)?;
    let raw = score(&est.raw_estimate, &inst.truth.entries)?;
    let rounded = recover(&est.raw_estimate, cell.rho, model)?;
    let exact = score(&rounded.recovered, &inst.truth.entries)?;
    rec.success = exact.exact_match;
    rec.l2_error = Some(raw.l2_error);
    rec.entrywise_err = Some(raw.entrywise_max_weighted);
    rec.statistic = Some(est.leading_value);
    Ok(())
}

/// One null and one planted draw; success means both were classified
/// correctly. `statistic` is the planted draw's test statistic.
fn run_detect(cell: &Cell, kind: TestKind, seed: SeedSpec, rec: &mut SweepRecord) -> Result<()> {
    let mut correct = true;
    for which in [Hypothesis::Null, Hypothesis::Planted] {
        let sample = sample_detection_pair(cell.ambient_dim, cell.subspace_dim, cell.rho, seed, which)?;
        let out = run_test(&sample.observed, cell.rho, DEFAULT_C1, kind)?;
        correct &= out.decision == which;
        if which == Hypothesis::Planted {
            rec.statistic = Some(out.statistic_value);
        }
    }
    rec.success = correct;
    Ok(())
}

fn run_unit(
    cell: &Cell,
    trial: usize,
    config: &SweepConfig,
    adv_cache: &HashMap<usize, std::result::Result<f64, String>>,
    cell_index: usize,
    opts: SweepOptions,
) -> Vec<SweepRecord> {
    let model: Model = config.model.into();
    config
        .tasks
        .iter()
        .map(|&task| {
            let start = Instant::now();
            let mut rec = SweepRecord::empty(cell, trial, task);
            let seed = SeedSpec::new(config.seed, stable_hash(&[cell.stream(trial), task.tag()]));
            let outcome = match task {
                Task::Recover => run_recover(cell, model, seed, &mut rec),
                Task::DetectSpectral => run_detect(cell, TestKind::SpectralNorm, seed, &mut rec),
                Task::DetectL1l2 => run_detect(cell, TestKind::L1L2, seed, &mut rec),
                Task::Advantage => match &adv_cache[&cell_index] {
                    Ok(adv) => {
                        rec.adv = Some(*adv);
                        rec.success = *adv > 2.0;
                        Ok(())
                    }
                    Err(e) => Err(PvError::InvalidParameter(e.clone())),
                },
            };
            if let Err(e) = outcome {
                warn!(
                    "N={} n={} rho={} trial={} task={}: {e}",
                    cell.ambient_dim,
                    cell.subspace_dim,
                    cell.rho,
                    trial,
                    task.as_str()
                );
                rec.success = false;
            }
            if opts.timing {
                rec.elapsed_ms = Some(start.elapsed().as_secs_f64() * 1e3);
            }
            rec
        })
        .collect()
}

pub fn run_sweep(config: &SweepConfig) -> Result<Vec<SweepRecord>> {
    run_sweep_with(config, SweepOptions::default())
}

pub fn run_sweep_with(config: &SweepConfig, opts: SweepOptions) -> Result<Vec<SweepRecord>> {
    config.validate()?;
    let cells = config.cells();
    let adv_cache: HashMap<usize, std::result::Result<f64, String>> = if config.tasks.contains(&Task::Advantage) {
        cells
            .par_iter()
            .enumerate()
            .map(|(i, c)| {
                let adv = advantage(c.ambient_dim, c.subspace_dim, c.rho, config.max_degree)
                    .map(|b| b.adv)
                    .map_err(|e| e.to_string());
                (i, adv)
            })
            .collect()
    } else {
        HashMap::new()
    };
    info!(
        "sweep: {} cells x {} trials x {} tasks",
        cells.len(),
        config.trials,
        config.tasks.len()
    );
    let units: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..config.trials).map(move |t| (c, t)))
        .collect();
    let records: Vec<SweepRecord> = units
        .par_iter()
        .map(|&(c, t)| run_unit(&cells[c], t, config, &adv_cache, c, opts))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    info!("sweep: {} records", records.len());
    Ok(records)
}

pub fn write_records_csv<W: Write>(mut w: W, records: &[SweepRecord]) -> Result<()> {
    writeln!(w, "{RECORD_HEADER}")?;
    for r in records {
        writeln!(w, "{}", r.csv_row())?;
    }
    Ok(())
}

/// Wilson score interval at 95% for `successes` out of `trials`.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    const Z: f64 = 1.959_963_984_540_054;
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z * Z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub ambient_dim: usize,
    pub subspace_dim: usize,
    pub rho: f64,
    pub task: Task,
    pub trials: usize,
    pub successes: usize,
    pub rate: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
    pub mean_l2_error: Option<f64>,
    pub se_l2_error: Option<f64>,
    pub mean_entrywise_err: Option<f64>,
    pub se_entrywise_err: Option<f64>,
    pub mean_statistic: Option<f64>,
}

impl CellSummary {
    pub const CSV_HEADER: &'static str =
        "N,n,rho,task,trials,successes,rate,wilson_low,wilson_high,mean_l2_error,se_l2_error,mean_entrywise_err,se_entrywise_err,mean_statistic";

    pub fn csv_row(&self) -> String {
        fn opt(x: Option<f64>) -> String {
            x.map(|v| v.to_string()).unwrap_or_default()
        }
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.ambient_dim,
            self.subspace_dim,
            self.rho,
            self.task.as_str(),
            self.trials,
            self.successes,
            self.rate,
            self.wilson_low,
            self.wilson_high,
            opt(self.mean_l2_error),
            opt(self.se_l2_error),
            opt(self.mean_entrywise_err),
            opt(self.se_entrywise_err),
            opt(self.mean_statistic),
        )
    }
}

fn mean_and_se(values: &[f64]) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (Some(mean), None);
    }
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (Some(mean), Some((var / n).sqrt()))
}

/// Aggregate records per `(N, n, ρ, task)`, in order of first appearance.
pub fn summarize(records: &[SweepRecord]) -> Vec<CellSummary> {
    let mut order: Vec<(usize, usize, u64, Task)> = Vec::new();
    let mut groups: HashMap<(usize, usize, u64, Task), Vec<&SweepRecord>> = HashMap::new();
    for r in records {
        let key = (r.ambient_dim, r.subspace_dim, r.rho.to_bits(), r.task);
        groups
            .entry(key)
            .or_insert_with(|| {
                order.push(key);
                Vec::new()
            })
            .push(r);
    }
    order
        .into_iter()
        .map(|key| {
            let rs = &groups[&key];
            let trials = rs.len();
            let successes = rs.iter().filter(|r| r.success).count();
            let (wilson_low, wilson_high) = wilson_interval(successes, trials);
            let collect = |f: fn(&SweepRecord) -> Option<f64>| rs.iter().filter_map(|r| f(r)).collect::<Vec<_>>();
            let (mean_l2_error, se_l2_error) = mean_and_se(&collect(|r| r.l2_error));
            let (mean_entrywise_err, se_entrywise_err) = mean_and_se(&collect(|r| r.entrywise_err));
            let (mean_statistic, _) = mean_and_se(&collect(|r| r.statistic));
            CellSummary {
                ambient_dim: key.0,
                subspace_dim: key.1,
                rho: f64::from_bits(key.2),
                task: key.3,
                trials,
                successes,
                rate: successes as f64 / trials as f64,
                wilson_low,
                wilson_high,
                mean_l2_error,
                se_l2_error,
                mean_entrywise_err,
                se_entrywise_err,
                mean_statistic,
            }
        })
        .collect()
}
