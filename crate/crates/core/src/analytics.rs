//! Closed-form constants and bounds.
//!
//! Heavy-traffic constants `K_π` are limits of `E[T_π] / E[W_M/G/1]` as the
//! slack `ε = 1 − ρ` vanishes. Everything here is a pure function of the
//! size distribution and load.

use crate::distributions::JobSizeModel;
use crate::error::{Error, Result};
use crate::policies::{card_params_from_alpha_beta, card_threshold_c};

/// The `1 − 1/n` load cutoff: `E[S · 1(S < m)] = (1 − 1/n) E[S]`.
pub fn ideal_cutoff(n: usize, model: &JobSizeModel) -> Result<f64> {
    if n < 2 {
        return Err(Error::invalid(format!("need at least 2 servers, got {n}")));
    }
    model.solve_size_threshold(1.0 - 1.0 / n as f64)
}

/// `K_CARD = n P{S >= m}` with `m` the `1 − 1/n` cutoff.
pub fn k_card(n: usize, model: &JobSizeModel) -> Result<f64> {
    let m = ideal_cutoff(n, model)?;
    Ok(n as f64 * model.survival(m))
}

pub fn k_lwl() -> f64 {
    1.0
}

fn slack(lambda: f64, model: &JobSizeModel) -> Result<f64> {
    let eps = 1.0 - lambda * model.mean();
    if !(lambda >= 0.0) || !(eps > 0.0) {
        return Err(Error::invalid(format!(
            "need 0 <= lambda E[S] < 1, got lambda = {lambda}, epsilon = {eps}"
        )));
    }
    Ok(eps)
}

/// Mean work in the resource-pooled M/G/1: `λ E[S²] / (2ε)`.
pub fn mg1_mean_work(lambda: f64, model: &JobSizeModel) -> Result<f64> {
    let eps = slack(lambda, model)?;
    Ok(lambda * model.second_moment() / (2.0 * eps))
}

/// Universal lower bound on mean response time:
/// `K_CARD E[W_M/G/1] − (n−1) E[S²] / (2m) + n E[S]`.
///
/// Negative at light load; returned unclamped.
pub fn lower_bound_mean_response(n: usize, lambda: f64, model: &JobSizeModel) -> Result<f64> {
    let m = ideal_cutoff(n, model)?;
    let nf = n as f64;
    let k = nf * model.survival(m);
    Ok(k * mg1_mean_work(lambda, model)? - (nf - 1.0) * model.second_moment() / (2.0 * m)
        + nf * model.mean())
}

/// Pieces of the two-server equal-load split at cutoff `m`.
struct SitaSplit {
    p_below: f64,
    p_above: f64,
    second_below: f64,
    second_above: f64,
}

fn sita_split(model: &JobSizeModel) -> Result<SitaSplit> {
    let m = model.solve_size_threshold(0.5)?;
    let second_below = model.truncated_second_moment(m);
    Ok(SitaSplit {
        p_below: model.cdf(m),
        p_above: model.survival(m),
        second_below,
        second_above: model.second_moment() - second_below,
    })
}

/// Exact mean response time of two-server SITA-E: two independent M/G/1
/// queues with rate-1/2 servers.
pub fn sita_e_mean_response(lambda: f64, model: &JobSizeModel) -> Result<f64> {
    let eps = slack(lambda, model)?;
    let s = sita_split(model)?;
    let weighted = s.p_below * s.second_below + s.p_above * s.second_above;
    Ok(2.0 * lambda / eps * weighted + 2.0 * model.mean())
}

/// Heavy-traffic constant of two-server SITA-E (exact limit).
pub fn k_sita_e(model: &JobSizeModel) -> Result<f64> {
    let s = sita_split(model)?;
    let weighted = s.p_below * s.second_below + s.p_above * s.second_above;
    Ok(4.0 * weighted / model.second_moment())
}

/// Heavy-traffic constant of two-server SITA with the optimal split.
pub fn k_sita_o(model: &JobSizeModel) -> Result<f64> {
    let s = sita_split(model)?;
    let root = (s.second_below * s.p_below).sqrt() + (s.second_above * s.p_above).sqrt();
    Ok(2.0 / model.second_moment() * root * root)
}

/// Inputs of [`card_upper_bound_explicit`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExplicitBoundParams {
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub m_plus: f64,
}

/// Explicit upper bound on two-server CARD mean response time, valid when
/// `δ <= ε < 1/2` and `β >= 2δ` with `c` from [`card_threshold_c`].
pub fn card_upper_bound_explicit(
    p: &ExplicitBoundParams,
    model: &JobSizeModel,
    lambda: f64,
) -> Result<f64> {
    let ExplicitBoundParams { alpha, beta, delta, epsilon, m_plus } = *p;
    if !(delta <= epsilon) {
        return Err(Error::invalid(format!("bound needs delta <= epsilon, got {delta} > {epsilon}")));
    }
    if !(epsilon < 0.5) {
        return Err(Error::invalid(format!("bound needs epsilon < 1/2, got {epsilon}")));
    }
    if !(beta >= 2.0 * delta) {
        return Err(Error::invalid(format!("bound needs beta >= 2 delta, got {beta} < {}", 2.0 * delta)));
    }
    if !(alpha > 0.0 && delta > 0.0 && m_plus >= 0.0) {
        return Err(Error::invalid("bound needs alpha > 0, delta > 0, m_plus >= 0"));
    }
    let k = k_card(2, model)?;
    let mg1 = mg1_mean_work(lambda, model)?;
    let ab = alpha + beta;
    let log_term = (3.0 / (2.0 * beta * delta)).ln();
    let candidates = [
        beta / (alpha * alpha * ab),
        (beta / (alpha * alpha * epsilon * ab)).sqrt(),
        log_term / (beta * ab),
        (log_term / beta).sqrt(),
        delta.sqrt() * log_term / (alpha * alpha * beta * beta * epsilon),
    ];
    let worst = candidates.into_iter().fold(f64::NEG_INFINITY, f64::max);
    Ok((k + 4.0 * beta / ab) * (1.0 + delta / epsilon) * mg1
        + 2.0 * model.mean()
        + 44.0 * m_plus * worst)
}

/// CARD parameters scaled for heavy traffic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HeavyTrafficRecipe {
    pub alpha: f64,
    pub beta: f64,
    /// `ε^{1/3} ln(1/ε)^{2/3}` before any feasibility clip.
    pub beta_unclipped: f64,
    pub delta: f64,
    pub m_minus: f64,
    pub m_plus: f64,
    pub c: f64,
}

/// `α = 1/(4n)`, `β = ε^{1/3} ln(1/ε)^{2/3}` (capped at 0.9 of its feasible
/// maximum `ρ/(n−1) − 1/n`), `δ = ε³`, and the matching `c`.
pub fn heavy_traffic_recipe(epsilon: f64, n: usize, model: &JobSizeModel) -> Result<HeavyTrafficRecipe> {
    if n < 2 {
        return Err(Error::invalid(format!("need at least 2 servers, got {n}")));
    }
    let nf = n as f64;
    if !(epsilon > 0.0 && epsilon < 1.0 / nf) {
        return Err(Error::invalid(format!("recipe needs epsilon in (0, 1/n), got {epsilon}")));
    }
    let rho = 1.0 - epsilon;
    let alpha = 1.0 / (4.0 * nf);
    let beta_unclipped = epsilon.cbrt() * (1.0 / epsilon).ln().powf(2.0 / 3.0);
    let beta_max = rho / (nf - 1.0) - 1.0 / nf;
    let beta = beta_unclipped.min(0.9 * beta_max);
    let delta = epsilon.powi(3);
    let lambda = rho / model.mean();
    let (m_minus, m_plus) = card_params_from_alpha_beta(n, lambda, model, alpha, beta)?;
    let c = card_threshold_c(n, m_plus, beta, delta)?;
    Ok(HeavyTrafficRecipe { alpha, beta, beta_unclipped, delta, m_minus, m_plus, c })
}
