//! Mean-response curves and tail curves.

use rayon::prelude::*;

use crate::analytics::{k_card, lower_bound_mean_response, mg1_mean_work};
use crate::error::{Error, Result};
use crate::simulator::{Collect, ResponseTail, TrialResult};
use crate::stats::Estimate;

use super::csv::{fmt_float, fmt_opt, CsvTable};
use super::{plan, run_cells, sim_config, Cell, ExperimentConfig};

pub const CURVES_HEADER: [&str; 15] = [
    "policy",
    "n",
    "dist",
    "rho",
    "trials",
    "arrivals",
    "mean_T",
    "ci_half",
    "se",
    "normalized_mean_T",
    "normalized_ci",
    "lower_bound",
    "K_card",
    "lower_bound_ok",
    "reason",
];

#[derive(Clone, Debug, PartialEq)]
pub struct CurveRow {
    pub policy: String,
    pub n: usize,
    pub dist: String,
    pub rho: f64,
    pub trials: usize,
    pub arrivals: u64,
    pub mean_t: Option<f64>,
    /// Absent with a single trial.
    pub ci_half: Option<f64>,
    pub se: Option<f64>,
    pub normalized_mean_t: Option<f64>,
    pub normalized_ci: Option<f64>,
    pub lower_bound: Option<f64>,
    pub k_card: Option<f64>,
    /// `mean_T − ci_half >= lower_bound − 3·SE`.
    pub lower_bound_ok: Option<bool>,
    /// Why the row has no measurements.
    pub reason: String,
}

fn curve_row(cfg: &ExperimentConfig, cell: &Cell<'_>, trials: Result<Vec<TrialResult>>) -> CurveRow {
    let lambda = cell.lambda();
    let mut row = CurveRow {
        policy: cell.spec.label().to_string(),
        n: cfg.n,
        dist: cell.dist.tag(),
        rho: cell.rho,
        trials: cfg.trials,
        arrivals: cfg.arrivals_per_trial,
        mean_t: None,
        ci_half: None,
        se: None,
        normalized_mean_t: None,
        normalized_ci: None,
        lower_bound: lower_bound_mean_response(cfg.n, lambda, &cell.model).ok(),
        k_card: k_card(cfg.n, &cell.model).ok(),
        lower_bound_ok: None,
        reason: String::new(),
    };
    let trials = match trials {
        Ok(t) => t,
        Err(e) => {
            row.reason = e.to_string();
            return row;
        }
    };
    let values: Vec<f64> = trials.iter().map(|t| t.mean_t).collect();
    let (mean, ci, se) = match Estimate::from_samples(&values) {
        Ok(e) => (e.mean, Some(e.half_width), Some(e.se)),
        Err(_) => (values[0], None, None),
    };
    row.mean_t = Some(mean);
    row.ci_half = ci;
    row.se = se;
    if cfg.normalize {
        if let Ok(w) = mg1_mean_work(lambda, &cell.model) {
            row.normalized_mean_t = Some(mean / w);
            row.normalized_ci = ci.map(|c| c / w);
        }
    }
    row.lower_bound_ok = row.lower_bound.map(|lb| {
        let (ci, se) = (ci.unwrap_or(0.0), se.unwrap_or(0.0));
        mean - ci >= lb - 3.0 * se
    });
    row
}

/// One curve row per (distribution, load, policy).
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<CurveRow>> {
    let dists = cfg.models()?;
    let cells = plan(cfg, &dists);
    let collect = Collect { tails: false, cycles: false, work_integrals: false };
    let results = run_cells(cfg, &cells, collect, |_, r| r);
    Ok(cells
        .iter()
        .zip(results)
        .map(|(cell, trials)| curve_row(cfg, cell, trials))
        .collect())
}

pub fn curves_csv(rows: &[CurveRow]) -> CsvTable {
    let mut t = CsvTable::new(&CURVES_HEADER);
    for r in rows {
        t.push(vec![
            r.policy.clone(),
            r.n.to_string(),
            r.dist.clone(),
            fmt_float(r.rho),
            r.trials.to_string(),
            r.arrivals.to_string(),
            fmt_opt(r.mean_t),
            fmt_opt(r.ci_half),
            fmt_opt(r.se),
            fmt_opt(r.normalized_mean_t),
            fmt_opt(r.normalized_ci),
            fmt_opt(r.lower_bound),
            fmt_opt(r.k_card),
            r.lower_bound_ok.map(|b| b.to_string()).unwrap_or_default(),
            r.reason.clone(),
        ]);
    }
    t
}

pub const TAILS_HEADER: [&str; 7] = ["policy", "n", "dist", "rho", "t", "ccdf", "ci_half"];

#[derive(Clone, Debug, PartialEq)]
pub struct TailRow {
    pub policy: String,
    pub n: usize,
    pub dist: String,
    pub rho: f64,
    pub t: f64,
    /// Pooled `P{T > t}` over trials.
    pub ccdf: f64,
    pub ci_half: Option<f64>,
}

/// Empirical `P{T > t}` on `points` equally spaced values in `[0, t_max]`,
/// `t_max` being the reference policy's pooled `tails.quantile` quantile.
pub fn run_tails(cfg: &ExperimentConfig) -> Result<Vec<TailRow>> {
    let dists = cfg.models()?;
    let reference = cfg
        .policies
        .iter()
        .position(|p| p.label() == cfg.tails.reference)
        .or_else(|| cfg.policies.iter().position(|p| p.policy.as_str() == cfg.tails.reference))
        .ok_or_else(|| {
            Error::config(format!(
                "tails reference `{}` is not among the policies",
                cfg.tails.reference
            ))
        })?;
    let collect = Collect { tails: true, cycles: false, work_integrals: false };
    let per_point = cfg.policies.len();
    let cells = plan(cfg, &dists);
    let mut rows = Vec::new();

    for point in cells.chunks(per_point) {
        let ref_cell = &point[reference];
        let ref_policy = ref_cell.resolved.as_ref().map_err(|e| {
            Error::config(format!(
                "tails reference `{}` at rho = {}: {e}",
                ref_cell.spec.label(),
                ref_cell.rho
            ))
        })?;
        let ref_tails: Vec<ResponseTail> = (0..cfg.trials as u64)
            .into_par_iter()
            .map(|t| {
                let r = crate::simulator::run_trial(&sim_config(cfg, ref_cell, ref_policy, t, collect))?;
                Ok(r.tail.expect("tails collected"))
            })
            .collect::<Result<_>>()?;
        let t_max = ResponseTail::merge(&ref_tails).quantile(cfg.tails.quantile);
        let grid: Vec<f64> = (0..cfg.tails.points)
            .map(|j| t_max * j as f64 / (cfg.tails.points - 1) as f64)
            .collect();
        let curve_of = |tail: &ResponseTail| -> Vec<f64> { grid.iter().map(|&t| tail.ccdf(t)).collect() };

        let mut curves: Vec<Option<Vec<Vec<f64>>>> = Vec::with_capacity(per_point);
        for (i, cell) in point.iter().enumerate() {
            if i == reference {
                curves.push(Some(ref_tails.iter().map(curve_of).collect()));
                continue;
            }
            let single = std::slice::from_ref(cell);
            let mut out = run_cells(cfg, single, collect, |_, r| {
                curve_of(r.tail.as_ref().expect("tails collected"))
            });
            curves.push(out.pop().and_then(|r| r.ok()));
        }
        drop(ref_tails);

        for (cell, per_trial) in point.iter().zip(curves) {
            let Some(per_trial) = per_trial else { continue };
            for (j, &t) in grid.iter().enumerate() {
                let vals: Vec<f64> = per_trial.iter().map(|c| c[j]).collect();
                let est = Estimate::from_samples(&vals).ok();
                rows.push(TailRow {
                    policy: cell.spec.label().to_string(),
                    n: cfg.n,
                    dist: cell.dist.tag(),
                    rho: cell.rho,
                    t,
                    ccdf: vals.iter().sum::<f64>() / vals.len() as f64,
                    ci_half: est.map(|e| e.half_width),
                });
            }
        }
    }
    Ok(rows)
}

pub fn tails_csv(rows: &[TailRow]) -> CsvTable {
    let mut t = CsvTable::new(&TAILS_HEADER);
    for r in rows {
        t.push(vec![
            r.policy.clone(),
            r.n.to_string(),
            r.dist.clone(),
            fmt_float(r.rho),
            fmt_float(r.t),
            fmt_float(r.ccdf),
            fmt_opt(r.ci_half),
        ]);
    }
    t
}
