//! Simulation checks against the analytic guarantees.

use crate::analytics::lower_bound_mean_response;
use crate::error::{Error, Result};
use crate::policies::PolicyConfig;
use crate::simulator::{Collect, TrialResult};
use crate::stats::Estimate;

use super::csv::{fmt_float, fmt_opt, CsvTable};
use super::{plan, run_cells, Cell, ExperimentConfig};

pub const VALIDATE_HEADER: [&str; 8] =
    ["check", "policy", "dist", "rho", "measured", "bound", "se", "pass"];

/// Relative tolerance of the work-decomposition residual.
pub const DECOMPOSITION_TOL: f64 = 0.05;
/// Relative tolerance of work conservation.
pub const CONSERVATION_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct ValidateRow {
    pub check: &'static str,
    pub policy: String,
    pub dist: String,
    pub rho: f64,
    pub measured: Option<f64>,
    pub bound: Option<f64>,
    pub se: Option<f64>,
    pub pass: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidateReport {
    pub rows: Vec<ValidateRow>,
}

impl ValidateReport {
    pub fn all_passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ValidateRow> {
        self.rows.iter().filter(|r| !r.pass)
    }

    pub fn to_csv(&self) -> CsvTable {
        let mut t = CsvTable::new(&VALIDATE_HEADER);
        for r in &self.rows {
            t.push(vec![
                r.check.to_string(),
                r.policy.clone(),
                r.dist.clone(),
                fmt_float(r.rho),
                fmt_opt(r.measured),
                fmt_opt(r.bound),
                fmt_opt(r.se),
                r.pass.to_string(),
            ]);
        }
        t
    }
}

/// Rows:
/// - `lower-bound`: `mean_T + 3·SE >= lower bound`, every policy.
/// - `work-decomposition`: `|E[W] − λE[S²]/(2ε) − E[I·W]/ε| / E[W] <= 5%`.
/// - `work-conservation`: injected = completed + remaining, worst trial.
/// - `pasta`: arrival-sampled minus time-averaged total work within 3 SE.
/// - `idle-fraction`, `below-period`, `above-period`: rigid CARD whose
///   recipe fixes `α`, `β`, `δ`; short server 0 idle fraction `<= δ`,
///   mean below period `<= m₊/β`, mean above period `<= m₊/α`, each
///   with 3 SE slack.
pub fn run_validate(cfg: &ExperimentConfig) -> Result<ValidateReport> {
    if cfg.trials < 2 {
        return Err(Error::InsufficientTrials(cfg.trials));
    }
    let dists = cfg.models()?;
    let cells = plan(cfg, &dists);
    let collect = Collect { tails: false, cycles: true, work_integrals: true };
    let results = run_cells(cfg, &cells, collect, |_, r| r);
    let mut report = ValidateReport::default();
    for (cell, trials) in cells.iter().zip(results) {
        match trials {
            Ok(trials) => check_cell(cfg, cell, &trials, &mut report.rows)?,
            Err(_) => report.rows.push(row(cell, "setup", None, None, None, false)),
        }
    }
    Ok(report)
}

fn row(
    cell: &Cell<'_>,
    check: &'static str,
    measured: Option<f64>,
    bound: Option<f64>,
    se: Option<f64>,
    pass: bool,
) -> ValidateRow {
    ValidateRow {
        check,
        policy: cell.spec.label().to_string(),
        dist: cell.dist.tag(),
        rho: cell.rho,
        measured,
        bound,
        se,
        pass,
    }
}

fn estimate(trials: &[TrialResult], f: impl Fn(&TrialResult) -> f64) -> Result<Estimate> {
    Estimate::from_samples(&trials.iter().map(f).collect::<Vec<_>>())
}

fn check_cell(
    cfg: &ExperimentConfig,
    cell: &Cell<'_>,
    trials: &[TrialResult],
    out: &mut Vec<ValidateRow>,
) -> Result<()> {
    let lambda = cell.lambda();
    let model = &cell.model;
    let eps = 1.0 - cell.rho;

    let mean_t = estimate(trials, |t| t.mean_t)?;
    if let Ok(lb) = lower_bound_mean_response(cfg.n, lambda, model) {
        let ok = mean_t.mean + 3.0 * mean_t.se >= lb;
        out.push(row(cell, "lower-bound", Some(mean_t.mean), Some(lb), Some(mean_t.se), ok));
    }

    let work = estimate(trials, |t| t.time_avg_work_total)?;
    let cross = estimate(trials, |t| t.idle_work_cross_term.unwrap_or(f64::NAN))?;
    let predicted = lambda * model.second_moment() / (2.0 * eps) + cross.mean / eps;
    let residual = (work.mean - predicted).abs() / work.mean;
    out.push(row(
        cell,
        "work-decomposition",
        Some(residual),
        Some(DECOMPOSITION_TOL),
        Some(work.se / work.mean),
        residual <= DECOMPOSITION_TOL,
    ));

    let imbalance = trials
        .iter()
        .map(|t| {
            let b = &t.balance;
            ((b.completed + b.remaining) - b.injected).abs() / b.injected.max(f64::MIN_POSITIVE)
        })
        .fold(0.0, f64::max);
    out.push(row(
        cell,
        "work-conservation",
        Some(imbalance),
        Some(CONSERVATION_TOL),
        None,
        imbalance <= CONSERVATION_TOL,
    ));

    let gap = estimate(trials, |t| t.arrival_avg_work_total - t.time_avg_work_total)?;
    out.push(row(
        cell,
        "pasta",
        Some(gap.mean),
        Some(3.0 * gap.se),
        Some(gap.se),
        gap.mean.abs() <= 3.0 * gap.se,
    ));

    let policy = cell.resolved.as_ref().expect("trials ran, so the policy resolved");
    let rigid = matches!(&policy.config, PolicyConfig::Card(c) if !c.flexible);
    let Some(drift) = policy.drift.filter(|_| rigid) else {
        return Ok(());
    };
    let cycles = |f: &dyn Fn(&crate::simulator::CycleStats) -> Option<f64>| -> Option<Estimate> {
        let vals: Option<Vec<f64>> = trials.iter().map(|t| t.cycle_stats.as_ref().and_then(f)).collect();
        vals.and_then(|v| Estimate::from_samples(&v).ok())
    };
    if let Some(delta) = drift.delta {
        if let Some(idle) = cycles(&|c| Some(c.short_idle_fraction)) {
            let ok = idle.mean <= delta + 3.0 * idle.se;
            out.push(row(cell, "idle-fraction", Some(idle.mean), Some(delta), Some(idle.se), ok));
        }
    }
    for (check, f, bound) in [
        (
            "below-period",
            (&|c: &crate::simulator::CycleStats| c.mean_below) as &dyn Fn(&_) -> _,
            drift.m_plus / drift.beta,
        ),
        ("above-period", &|c: &crate::simulator::CycleStats| c.mean_above, drift.m_plus / drift.alpha),
    ] {
        match cycles(f) {
            Some(e) => out.push(row(cell, check, Some(e.mean), Some(bound), Some(e.se), e.mean <= bound + 3.0 * e.se)),
            None => out.push(row(cell, check, None, Some(bound), None, false)),
        }
    }
    Ok(())
}
