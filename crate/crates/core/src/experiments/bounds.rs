//! Analytic constants and bounds per (distribution, load).

use crate::analytics::{
    card_upper_bound_explicit, heavy_traffic_recipe, k_card, k_lwl, k_sita_e, k_sita_o,
    lower_bound_mean_response, mg1_mean_work, sita_e_mean_response, ExplicitBoundParams,
};
use crate::error::Result;

use super::csv::{fmt_float, fmt_opt, CsvTable};
use super::ExperimentConfig;

pub const BOUNDS_HEADER: [&str; 14] = [
    "dist",
    "n",
    "rho",
    "lambda",
    "epsilon",
    "E_W_MG1",
    "K_card",
    "K_lwl",
    "K_sita_e",
    "K_sita_o",
    "lower_bound",
    "sita_e_mean_T",
    "card_upper_bound",
    "note",
];

/// The SITA constants and the explicit CARD upper bound exist for two
/// servers only and are left empty otherwise. The upper bound uses the
/// heavy-traffic parameter choice.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundsRow {
    pub dist: String,
    pub n: usize,
    pub rho: f64,
    pub lambda: f64,
    pub epsilon: f64,
    pub mg1_mean_work: f64,
    pub k_card: Option<f64>,
    pub k_lwl: f64,
    pub k_sita_e: Option<f64>,
    pub k_sita_o: Option<f64>,
    pub lower_bound: Option<f64>,
    pub sita_e_mean_t: Option<f64>,
    pub card_upper_bound: Option<f64>,
    pub note: String,
}

pub fn bounds_table(cfg: &ExperimentConfig) -> Result<Vec<BoundsRow>> {
    let n = cfg.n;
    let mut rows = Vec::new();
    for (dist, model) in cfg.models()? {
        for &rho in &cfg.rho {
            let lambda = rho / model.mean();
            let epsilon = 1.0 - rho;
            let mut notes = Vec::new();
            let mut keep = |r: Result<f64>, what: &str| match r {
                Ok(v) => Some(v),
                Err(e) => {
                    notes.push(format!("{what}: {e}"));
                    None
                }
            };
            let k = keep(k_card(n, &model), "K_card");
            let lb = keep(lower_bound_mean_response(n, lambda, &model), "lower_bound");
            let (kse, kso, sita, upper) = if n == 2 {
                let upper = heavy_traffic_recipe(epsilon, n, &model).and_then(|r| {
                    let p = ExplicitBoundParams {
                        alpha: r.alpha,
                        beta: r.beta,
                        delta: r.delta,
                        epsilon,
                        m_plus: r.m_plus,
                    };
                    card_upper_bound_explicit(&p, &model, lambda)
                });
                (
                    keep(k_sita_e(&model), "K_sita_e"),
                    keep(k_sita_o(&model), "K_sita_o"),
                    keep(sita_e_mean_response(lambda, &model), "sita_e_mean_T"),
                    keep(upper, "card_upper_bound"),
                )
            } else {
                notes.push("SITA constants and explicit upper bound are two-server only".into());
                (None, None, None, None)
            };
            rows.push(BoundsRow {
                dist: dist.tag(),
                n,
                rho,
                lambda,
                epsilon,
                mg1_mean_work: mg1_mean_work(lambda, &model)?,
                k_card: k,
                k_lwl: k_lwl(),
                k_sita_e: kse,
                k_sita_o: kso,
                lower_bound: lb,
                sita_e_mean_t: sita,
                card_upper_bound: upper,
                note: notes.join("; "),
            });
        }
    }
    Ok(rows)
}

impl BoundsRow {
    pub fn to_csv(rows: &[BoundsRow]) -> CsvTable {
        let mut t = CsvTable::new(&BOUNDS_HEADER);
        for r in rows {
            t.push(vec![
                r.dist.clone(),
                r.n.to_string(),
                fmt_float(r.rho),
                fmt_float(r.lambda),
                fmt_float(r.epsilon),
                fmt_float(r.mg1_mean_work),
                fmt_opt(r.k_card),
                fmt_float(r.k_lwl),
                fmt_opt(r.k_sita_e),
                fmt_opt(r.k_sita_o),
                fmt_opt(r.lower_bound),
                fmt_opt(r.sita_e_mean_t),
                fmt_opt(r.card_upper_bound),
                r.note.clone(),
            ]);
        }
        t
    }
}
