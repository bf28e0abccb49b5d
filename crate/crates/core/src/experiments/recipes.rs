//! Policy specs resolved into concrete thresholds at one load.

use crate::analytics::heavy_traffic_recipe;
use crate::distributions::{DistSpec, JobSizeModel};
use crate::error::{Error, Result};
use crate::policies::{
    card_params_from_alpha_beta, card_params_practical, card_threshold_c, dice_footnote_eta,
    dice_thresholds, multiband_config, sita_equal_load, CardConfig, DiceConfig, MultiBandConfig,
    PolicyConfig, PracticalParams, SitaConfig,
};

use super::config::{PolicyKind, PolicySpec, Recipe};

/// Drift parameters behind a CARD configuration, when known.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Drift {
    pub alpha: f64,
    pub beta: f64,
    pub delta: Option<f64>,
    pub m_plus: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResolvedPolicy {
    pub config: PolicyConfig,
    pub drift: Option<Drift>,
}

impl ResolvedPolicy {
    fn plain(config: PolicyConfig) -> Self {
        Self { config, drift: None }
    }

    /// `(m₋, m₊)` when the policy is two-threshold CARD.
    pub fn card_classes(&self) -> Option<(f64, f64)> {
        match &self.config {
            PolicyConfig::Card(c) => Some((c.m_minus, c.m_plus)),
            _ => None,
        }
    }
}

fn need(v: Option<f64>, key: &str, label: &str) -> Result<f64> {
    v.ok_or_else(|| Error::config(format!("policy `{label}` needs `params.{key}`")))
}

fn need_vec(v: &Option<Vec<f64>>, key: &str, label: &str) -> Result<Vec<f64>> {
    v.clone()
        .ok_or_else(|| Error::config(format!("policy `{label}` needs `params.{key}`")))
}

/// Derives the policy for `n` servers at load `rho`.
pub fn resolve(
    spec: &PolicySpec,
    n: usize,
    rho: f64,
    dist: &DistSpec,
    model: &JobSizeModel,
) -> Result<ResolvedPolicy> {
    let p = &spec.params;
    let label = spec.label();
    let eps = 1.0 - rho;
    let lambda = rho / model.mean();
    let cv = dist.nominal_cv().unwrap_or_else(|| model.cv());
    let unsupported = |r: Recipe| {
        Error::config(format!("recipe `{}` does not apply to policy `{label}`", r.as_str()))
    };

    match spec.policy {
        PolicyKind::Lwl => Ok(ResolvedPolicy::plain(PolicyConfig::Lwl { n })),
        PolicyKind::Random => Ok(ResolvedPolicy::plain(PolicyConfig::Random { n })),
        PolicyKind::RoundRobin => Ok(ResolvedPolicy::plain(PolicyConfig::RoundRobin { n })),
        PolicyKind::SitaE => {
            let sita = match &p.cutoffs {
                Some(c) => SitaConfig::new(c.clone())?,
                None => sita_equal_load(n, model)?,
            };
            check_servers(sita.n, n, label)?;
            Ok(ResolvedPolicy::plain(PolicyConfig::Sita(sita)))
        }
        PolicyKind::Dice => {
            let recipe = p.recipe.unwrap_or(if p.tau.is_some() {
                Recipe::Explicit
            } else {
                Recipe::DiceFootnote
            });
            let dice = match recipe {
                Recipe::Explicit => DiceConfig::new(need_vec(&p.tau, "tau", label)?)?,
                Recipe::DiceFootnote => {
                    let eta = p.eta.or_else(|| dice_footnote_eta(cv));
                    dice_thresholds(n, eps, model, eta)?
                }
                r => return Err(unsupported(r)),
            };
            check_servers(dice.n, n, label)?;
            Ok(ResolvedPolicy::plain(PolicyConfig::Dice(dice)))
        }
        PolicyKind::CardMultiband => {
            let flexible = p.flexible.unwrap_or(true);
            let recipe = p.recipe.unwrap_or(if p.cutoffs.is_some() {
                Recipe::Explicit
            } else {
                Recipe::MultibandSqrtEps
            });
            let mb = match recipe {
                Recipe::Explicit => MultiBandConfig::new(
                    need_vec(&p.cutoffs, "cutoffs", label)?,
                    need_vec(&p.thresholds, "thresholds", label)?,
                    flexible,
                )?,
                Recipe::MultibandSqrtEps => multiband_config(n, rho, model, flexible)?,
                r => return Err(unsupported(r)),
            };
            check_servers(mb.n, n, label)?;
            Ok(ResolvedPolicy::plain(PolicyConfig::MultiBand(mb)))
        }
        PolicyKind::CardRigid | PolicyKind::CardFlexible => {
            let flexible = spec.policy == PolicyKind::CardFlexible;
            let recipe = match p.recipe {
                Some(r) => r,
                None if p.m_minus.is_some() => Recipe::Explicit,
                None => {
                    return Err(Error::config(format!(
                        "policy `{label}` needs `params.recipe` or explicit thresholds"
                    )))
                }
            };
            let relaxed = p.allow_c_below_m_plus.unwrap_or(recipe == Recipe::Practical);
            let build = |m_minus: f64, m_plus: f64, c: f64| {
                if relaxed {
                    CardConfig::new_relaxed(n, m_minus, m_plus, c)
                } else {
                    CardConfig::new(n, m_minus, m_plus, c)
                }
            };
            let (card, drift) = match recipe {
                Recipe::Explicit => (
                    build(
                        need(p.m_minus, "m_minus", label)?,
                        need(p.m_plus, "m_plus", label)?,
                        need(p.c, "c", label)?,
                    )?,
                    None,
                ),
                Recipe::IdleBound => {
                    let alpha = need(p.alpha, "alpha", label)?;
                    let beta = need(p.beta, "beta", label)?;
                    let delta = need(p.delta, "delta", label)?;
                    let (m_minus, m_plus) =
                        card_params_from_alpha_beta(n, lambda, model, alpha, beta)?;
                    let c = card_threshold_c(n, m_plus, beta, delta)?;
                    let drift = Drift { alpha, beta, delta: Some(delta), m_plus };
                    (build(m_minus, m_plus, c)?, Some(drift))
                }
                Recipe::HeavyTraffic => {
                    let r = heavy_traffic_recipe(eps, n, model)?;
                    let drift = Drift {
                        alpha: r.alpha,
                        beta: r.beta,
                        delta: Some(r.delta),
                        m_plus: r.m_plus,
                    };
                    (build(r.m_minus, r.m_plus, r.c)?, Some(drift))
                }
                Recipe::Practical => {
                    if n != 2 {
                        return Err(Error::config(format!(
                            "practical recipe of `{label}` is defined for two servers only"
                        )));
                    }
                    let defaults = PracticalParams::for_cv(cv);
                    let pick = |v: Option<f64>, d: Option<f64>, key: &str| {
                        v.or(d).ok_or_else(|| {
                            Error::config(format!(
                                "policy `{label}`: no default `{key}` for cv {cv}; set it in params"
                            ))
                        })
                    };
                    let params = PracticalParams {
                        alpha_prime: pick(p.alpha_prime, defaults.map(|d| d.alpha_prime), "alpha_prime")?,
                        beta_prime: pick(p.beta_prime, defaults.map(|d| d.beta_prime), "beta_prime")?,
                        gamma: pick(p.gamma, defaults.map(|d| d.gamma), "gamma")?,
                    };
                    (card_params_practical(rho, model, &params, relaxed)?, None)
                }
                r => return Err(unsupported(r)),
            };
            let mut card = card.with_flexible(flexible);
            if let Some(sel) = p.short_selection {
                card = card.with_short_selection(sel);
            }
            Ok(ResolvedPolicy { config: PolicyConfig::Card(card), drift })
        }
    }
}

fn check_servers(got: usize, n: usize, label: &str) -> Result<()> {
    if got == n {
        Ok(())
    } else {
        Err(Error::config(format!(
            "policy `{label}` describes {got} servers but the experiment has n = {n}"
        )))
    }
}
