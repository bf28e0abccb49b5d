//! Config-driven sweeps: load grids, seeded parallel trials, aggregation
//! and CSV output.
//!
//! Every policy at a given load and trial index sees the same arrival and
//! size streams. Trials run on a rayon pool; results are joined in a fixed
//! order, so output does not depend on the thread count.

mod bounds;
mod config;
mod csv;
mod recipes;
mod sweep;
mod validate;

use rayon::prelude::*;

use crate::distributions::{DistSpec, JobSizeModel};
use crate::error::{Error, Result};
use crate::simulator::{run_trial, Collect, SimConfig, TrialResult};

pub use bounds::{bounds_table, BoundsRow, BOUNDS_HEADER};
pub use config::{
    ExperimentConfig, Outputs, Overrides, PolicyKind, PolicyParams, PolicySpec, Recipe,
    TailsOptions,
};
pub use csv::{fmt_float, CsvTable};
pub use recipes::{resolve, Drift, ResolvedPolicy};
pub use sweep::{curves_csv, run_sweep, run_tails, tails_csv, CurveRow, TailRow, CURVES_HEADER, TAILS_HEADER};
pub use validate::{run_validate, ValidateReport, ValidateRow, VALIDATE_HEADER};

/// Runs `f` on a pool with `threads` workers, or on the global pool.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(Error::config("thread count must be positive")),
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| Error::config(format!("cannot build thread pool: {e}"))),
    }
}

/// One (distribution, load, policy) point of a sweep.
pub(crate) struct Cell<'a> {
    pub dist: &'a DistSpec,
    pub model: JobSizeModel,
    pub rho: f64,
    pub spec: &'a PolicySpec,
    pub resolved: Result<ResolvedPolicy>,
    /// Size classes borrowed from a CARD policy at the same point.
    pub classes: Option<(f64, f64)>,
}

impl Cell<'_> {
    pub fn lambda(&self) -> f64 {
        self.rho / self.model.mean()
    }
}

/// Expands the config into cells ordered by distribution, load, policy.
pub(crate) fn plan<'a>(
    cfg: &'a ExperimentConfig,
    dists: &'a [(DistSpec, JobSizeModel)],
) -> Vec<Cell<'a>> {
    let mut cells = Vec::new();
    for (dist, model) in dists {
        for &rho in &cfg.rho {
            let resolved: Vec<Result<ResolvedPolicy>> = cfg
                .policies
                .iter()
                .map(|spec| recipes::resolve(spec, cfg.n, rho, dist, model))
                .collect();
            let shared = resolved
                .iter()
                .filter_map(|r| r.as_ref().ok().and_then(ResolvedPolicy::card_classes))
                .next();
            for (spec, resolved) in cfg.policies.iter().zip(resolved) {
                let classes = match &resolved {
                    Ok(r) => r.card_classes().or(shared),
                    Err(_) => None,
                };
                cells.push(Cell { dist, model: *model, rho, spec, resolved, classes });
            }
        }
    }
    cells
}

pub(crate) fn sim_config(
    cfg: &ExperimentConfig,
    cell: &Cell<'_>,
    policy: &ResolvedPolicy,
    trial: u64,
    collect: Collect,
) -> SimConfig {
    let mut sc = SimConfig::new(cell.lambda(), cell.model, policy.config.clone(), cfg.arrivals_per_trial);
    sc.warmup_fraction = cfg.warmup_fraction;
    sc.seed = cfg.seed;
    sc.trial = trial;
    sc.collect = collect;
    sc.class_thresholds = cell.classes;
    sc
}

/// Runs every trial of every resolvable cell and reduces each trial with
/// `reduce` on the worker. Results come back in cell order.
pub(crate) fn run_cells<T: Send>(
    cfg: &ExperimentConfig,
    cells: &[Cell<'_>],
    collect: Collect,
    reduce: impl Fn(&Cell<'_>, TrialResult) -> T + Sync,
) -> Vec<Result<Vec<T>>> {
    let jobs: Vec<(usize, u64)> = cells
        .iter()
        .enumerate()
        .filter(|(_, c)| c.resolved.is_ok())
        .flat_map(|(i, _)| (0..cfg.trials as u64).map(move |t| (i, t)))
        .collect();
    let outcomes: Vec<Result<T>> = jobs
        .par_iter()
        .map(|&(i, t)| {
            let cell = &cells[i];
            let policy = cell.resolved.as_ref().expect("filtered to resolved cells");
            run_trial(&sim_config(cfg, cell, policy, t, collect)).map(|r| reduce(cell, r))
        })
        .collect();

    let mut grouped: Vec<Result<Vec<T>>> = Vec::with_capacity(cells.len());
    let mut outcomes = outcomes.into_iter();
    for cell in cells {
        grouped.push(match &cell.resolved {
            Err(e) => Err(Error::config(e.to_string())),
            Ok(_) => {
                let mut trials = Vec::with_capacity(cfg.trials);
                let mut failure = None;
                for r in outcomes.by_ref().take(cfg.trials) {
                    match r {
                        Ok(v) => trials.push(v),
                        Err(e) => {
                            failure.get_or_insert(e);
                        }
                    }
                }
                match failure {
                    Some(e) => Err(e),
                    None => Ok(trials),
                }
            }
        });
    }
    grouped
}
