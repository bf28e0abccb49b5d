//! Turning load targets into concrete policy thresholds.

use crate::distributions::JobSizeModel;
use crate::error::{Error, Result};

use super::{CardConfig, DiceConfig, MultiBandConfig, SitaConfig};

/// Size thresholds `(m₋, m₊)` of n-server CARD from the drift parameters.
///
/// `α = 1/n − ρ_s/(n−1)` and `β = (ρ_s+ρ_m)/(n−1) − 1/n` fix the small and
/// small-plus-medium loads; the thresholds are the sizes below which those
/// fractions of the total load `ρ = λE[S]` arrive.
pub fn card_params_from_alpha_beta(
    n: usize,
    lambda: f64,
    model: &JobSizeModel,
    alpha: f64,
    beta: f64,
) -> Result<(f64, f64)> {
    if n < 2 {
        return Err(Error::invalid(format!("need at least 2 servers, got {n}")));
    }
    let nf = n as f64;
    if !(alpha > 0.0 && alpha <= 1.0 / nf) {
        return Err(Error::invalid(format!("alpha must lie in (0, 1/n], got {alpha}")));
    }
    if !(beta > 0.0) {
        return Err(Error::invalid(format!("beta must be positive, got {beta}")));
    }
    let rho = lambda * model.mean();
    let rho_small = (nf - 1.0) * (1.0 / nf - alpha);
    let rho_small_medium = (nf - 1.0) * (1.0 / nf + beta);
    let f_minus = (rho_small / rho).max(0.0);
    let f_plus = rho_small_medium / rho;
    if !(f_minus < 1.0 && f_plus > 0.0 && f_plus < 1.0) {
        return Err(Error::invalid(format!(
            "load fractions ({f_minus}, {f_plus}) outside (0, 1) at rho = {rho}"
        )));
    }
    let m_minus = model.solve_size_threshold(f_minus)?;
    let m_plus = model.solve_size_threshold(f_plus)?;
    Ok((m_minus, m_plus))
}

/// Work threshold that keeps each short server's idle probability below δ:
/// `c = n(n−1)m₊/β · ln((n+1)/(nβδ))`.
pub fn card_threshold_c(n: usize, m_plus: f64, beta: f64, delta: f64) -> Result<f64> {
    if !(beta > 0.0 && delta > 0.0) {
        return Err(Error::invalid(format!("beta and delta must be positive, got {beta}, {delta}")));
    }
    let nf = n as f64;
    let arg = (nf + 1.0) / (nf * beta * delta);
    if !(arg > 1.0) {
        return Err(Error::invalid(format!(
            "log argument (n+1)/(n beta delta) = {arg} must exceed 1"
        )));
    }
    Ok(nf * (nf - 1.0) * m_plus / beta * arg.ln())
}

/// Load-relative CARD parameters for two servers.
///
/// `α′ = 1/2 − ρ_s/ρ`, `β′ = 1/2 − ρ_ℓ/ρ`, and `c = γ ε^{−1/2} ln(1/ε)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PracticalParams {
    pub alpha_prime: f64,
    pub beta_prime: f64,
    pub gamma: f64,
}

impl PracticalParams {
    /// `α′ = β′ = 0.15` with the γ tuned for Weibull cv 1, 10 or 100.
    pub fn for_cv(cv: f64) -> Option<Self> {
        let gamma = match_cv(cv, &[(1.0, 0.3), (10.0, 0.6), (100.0, 2.5)])?;
        Some(Self { alpha_prime: 0.15, beta_prime: 0.15, gamma })
    }
}

/// Two-server rigid CARD from [`PracticalParams`] at load `rho`.
///
/// The tuned γ values give `c < m₊` at most loads, so callers that want the
/// tuned policy pass `allow_c_below_m_plus = true`.
pub fn card_params_practical(
    rho: f64,
    model: &JobSizeModel,
    params: &PracticalParams,
    allow_c_below_m_plus: bool,
) -> Result<CardConfig> {
    let PracticalParams { alpha_prime, beta_prime, gamma } = *params;
    check_load(rho)?;
    for (name, v) in [("alpha'", alpha_prime), ("beta'", beta_prime)] {
        if !(v > 0.0 && v < 0.5) {
            return Err(Error::invalid(format!("{name} must lie in (0, 1/2), got {v}")));
        }
    }
    if !(gamma >= 0.0) {
        return Err(Error::invalid(format!("gamma must be nonnegative, got {gamma}")));
    }
    let eps = 1.0 - rho;
    let m_minus = model.solve_size_threshold(0.5 - alpha_prime)?;
    let m_plus = model.solve_size_threshold(0.5 + beta_prime)?;
    let c = gamma / eps.sqrt() * (1.0 / eps).ln();
    if allow_c_below_m_plus {
        CardConfig::new_relaxed(2, m_minus, m_plus, c)
    } else {
        CardConfig::new(2, m_minus, m_plus, c)
    }
}

/// Multi-band CARD: cutoffs at cumulative load fractions
/// `1/(2n), 3/(2n), …, 1 − 1/(2n)` and thresholds `c_i = m_i / √ε`.
pub fn multiband_config(
    n: usize,
    rho: f64,
    model: &JobSizeModel,
    flexible: bool,
) -> Result<MultiBandConfig> {
    check_load(rho)?;
    let cutoffs = multiband_cutoffs(n, model)?;
    let eps = 1.0 - rho;
    let thresholds = cutoffs[..n - 1].iter().map(|m| m / eps.sqrt()).collect();
    MultiBandConfig::new(cutoffs, thresholds, flexible)
}

/// Cumulative load fraction below multi-band cutoff `i` (1-based).
pub fn multiband_fraction(n: usize, i: usize) -> f64 {
    1.0 / (2.0 * n as f64) + (i as f64 - 1.0) / n as f64
}

fn multiband_cutoffs(n: usize, model: &JobSizeModel) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::invalid(format!("need at least 2 servers, got {n}")));
    }
    (1..=n)
        .map(|i| model.solve_size_threshold(multiband_fraction(n, i)))
        .collect()
}

/// η of the two-server Dice threshold `η ε^{−1/3}` for Weibull cv 1, 10, 100.
pub fn dice_footnote_eta(cv: f64) -> Option<f64> {
    match_cv(cv, &[(1.0, 1.8), (10.0, 5.2), (100.0, 20.0)])
}

/// Load-dependent Dice thresholds.
///
/// Two servers: `τ₁ = η ε^{−1/3}`, with η looked up from the model's cv
/// unless given. More servers: `τ_i = 2 m_i ε^{−1/3}` with `m_i` the
/// multi-band cutoffs.
pub fn dice_thresholds(
    n: usize,
    epsilon: f64,
    model: &JobSizeModel,
    eta: Option<f64>,
) -> Result<DiceConfig> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::invalid(format!("epsilon must lie in (0, 1], got {epsilon}")));
    }
    let scale = epsilon.powf(-1.0 / 3.0);
    if n == 2 {
        let cv = model.cv();
        let eta = eta.or_else(|| dice_footnote_eta(cv)).ok_or_else(|| {
            Error::invalid(format!("no Dice eta known for cv {cv}; give eta explicitly"))
        })?;
        return DiceConfig::new(vec![eta * scale]);
    }
    let cutoffs = multiband_cutoffs(n, model)?;
    DiceConfig::new(cutoffs[..n - 1].iter().map(|m| 2.0 * m * scale).collect())
}

/// SITA cutoffs splitting the load equally: `m_i` at load fraction `i/n`.
pub fn sita_equal_load(n: usize, model: &JobSizeModel) -> Result<SitaConfig> {
    if n < 2 {
        return Err(Error::invalid(format!("need at least 2 servers, got {n}")));
    }
    let cutoffs = (1..n)
        .map(|i| model.solve_size_threshold(i as f64 / n as f64))
        .collect::<Result<Vec<_>>>()?;
    SitaConfig::new(cutoffs)
}

fn match_cv(cv: f64, table: &[(f64, f64)]) -> Option<f64> {
    table
        .iter()
        .find(|(key, _)| ((cv - key) / key).abs() < 1e-6)
        .map(|(_, v)| *v)
}

fn check_load(rho: f64) -> Result<()> {
    if rho > 0.0 && rho < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("load rho must lie in (0, 1), got {rho}")))
    }
}
