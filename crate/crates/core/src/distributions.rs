//! Job-size distributions.
//!
//! Every policy's parameters are derived from truncated moments of the size
//! distribution, so the closed forms here are the foundation the rest of the
//! crate builds on. All variants have closed-form truncated moments; the
//! Weibull ones go through the regularized lower incomplete gamma function.

use std::fmt;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma_lr, ln_gamma};

use crate::error::{Error, Result};
use crate::numeric::{bisect_decreasing, bisect_increasing};
use crate::rng::RandomStream;

/// Bracket searched for the Weibull shape parameter.
const WEIBULL_SHAPE_BRACKET: (f64, f64) = (0.05, 50.0);

/// Parametric job-size distribution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum JobSizeModel {
    Exponential { rate: f64 },
    Weibull { shape: f64, scale: f64 },
    Uniform { lo: f64, hi: f64 },
    /// Point mass. Only for tests: anything that needs continuity rejects it.
    Deterministic { value: f64 },
}

impl JobSizeModel {
    pub fn exponential(rate: f64) -> Result<Self> {
        positive("rate", rate)?;
        Ok(Self::Exponential { rate })
    }

    pub fn weibull(shape: f64, scale: f64) -> Result<Self> {
        positive("shape", shape)?;
        positive("scale", scale)?;
        Ok(Self::Weibull { shape, scale })
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        if !(lo >= 0.0 && lo < hi && hi.is_finite()) {
            return Err(Error::invalid(format!("uniform bounds need 0 <= lo < hi, got [{lo}, {hi}]")));
        }
        Ok(Self::Uniform { lo, hi })
    }

    pub fn deterministic(value: f64) -> Result<Self> {
        positive("value", value)?;
        Ok(Self::Deterministic { value })
    }

    /// Weibull with the given mean and coefficient of variation.
    ///
    /// Solves `Γ(1+2/k) / Γ(1+1/k)² = 1 + cv²` for the shape `k` by bisection
    /// in log-gamma space, then sets `scale = mean / Γ(1+1/k)`.
    pub fn weibull_from_mean_cv(mean: f64, cv: f64) -> Result<Self> {
        positive("mean", mean)?;
        positive("cv", cv)?;
        let target = (1.0 + cv * cv).ln();
        let log_ratio = |k: f64| ln_gamma(1.0 + 2.0 / k) - 2.0 * ln_gamma(1.0 + 1.0 / k);
        let (lo, hi) = WEIBULL_SHAPE_BRACKET;
        let shape = bisect_decreasing(log_ratio, target, lo, hi, 1e-15).map_err(|_| {
            Error::NoRootBracketed(format!(
                "cv {cv} needs a Weibull shape outside [{lo}, {hi}]"
            ))
        })?;
        let scale = mean / ln_gamma(1.0 + 1.0 / shape).exp();
        Self::weibull(shape, scale)
    }

    pub fn is_continuous(&self) -> bool {
        !matches!(self, Self::Deterministic { .. })
    }

    pub(crate) fn require_continuous(&self) -> Result<()> {
        if self.is_continuous() {
            Ok(())
        } else {
            Err(Error::ContinuityViolation(self.to_string()))
        }
    }

    /// Maps a uniform draw `u ∈ (0,1)` to a size by inverse transform.
    ///
    /// Exponential and Weibull use the survival form `(−ln u)`, so
    /// `u = e⁻¹` gives exactly the unit quantile.
    #[inline]
    pub fn from_uniform(&self, u: f64) -> f64 {
        match *self {
            Self::Exponential { rate } => -u.ln() / rate,
            Self::Weibull { shape, scale } => scale * (-u.ln()).powf(1.0 / shape),
            Self::Uniform { lo, hi } => lo + (hi - lo) * u,
            Self::Deterministic { value } => value,
        }
    }

    #[inline]
    pub fn sample(&self, rng: &mut RandomStream) -> f64 {
        match self {
            Self::Deterministic { value } => *value,
            _ => self.from_uniform(rng.uniform()),
        }
    }

    /// `E[S^k]` for `k ∈ {1, 2}`.
    pub fn moment(&self, k: u32) -> Result<f64> {
        if !(1..=2).contains(&k) {
            return Err(Error::UnsupportedMoment(k));
        }
        let k = k as i32;
        Ok(match *self {
            Self::Exponential { rate } => if k == 1 { 1.0 / rate } else { 2.0 / (rate * rate) },
            Self::Weibull { shape, scale } => {
                scale.powi(k) * ln_gamma(1.0 + k as f64 / shape).exp()
            }
            Self::Uniform { lo, hi } => {
                if k == 1 {
                    0.5 * (lo + hi)
                } else {
                    (hi * hi + hi * lo + lo * lo) / 3.0
                }
            }
            Self::Deterministic { value } => value.powi(k),
        })
    }

    pub fn mean(&self) -> f64 {
        self.moment(1).expect("first moment is always defined")
    }

    pub fn second_moment(&self) -> f64 {
        self.moment(2).expect("second moment is always defined")
    }

    /// Coefficient of variation, `sqrt(E[S²] − E[S]²) / E[S]`.
    pub fn cv(&self) -> f64 {
        let m1 = self.mean();
        (self.second_moment() / (m1 * m1) - 1.0).max(0.0).sqrt()
    }

    /// `P{S < m}`.
    pub fn cdf(&self, m: f64) -> f64 {
        if m <= 0.0 {
            return 0.0;
        }
        match *self {
            Self::Exponential { rate } => -(-rate * m).exp_m1(),
            Self::Weibull { shape, scale } => -(-(m / scale).powf(shape)).exp_m1(),
            Self::Uniform { lo, hi } => ((m - lo) / (hi - lo)).clamp(0.0, 1.0),
            Self::Deterministic { value } => if value < m { 1.0 } else { 0.0 },
        }
    }

    /// `P{S >= m}`.
    pub fn survival(&self, m: f64) -> f64 {
        if m <= 0.0 {
            return 1.0;
        }
        match *self {
            Self::Exponential { rate } => (-rate * m).exp(),
            Self::Weibull { shape, scale } => (-(m / scale).powf(shape)).exp(),
            _ => 1.0 - self.cdf(m),
        }
    }

    /// `E[S^k · 1(S < m)]` for `k ∈ {1, 2}`; `m = +∞` gives the full moment.
    fn truncated_moment(&self, k: u32, m: f64) -> f64 {
        if m <= 0.0 {
            return 0.0;
        }
        let kf = k as f64;
        match *self {
            Self::Exponential { rate } => {
                if m.is_infinite() {
                    return self.moment(k).unwrap();
                }
                // Upper incomplete gamma of integer order in closed form.
                let x = rate * m;
                let tail = if k == 1 {
                    (-x).exp() * (1.0 + x)
                } else {
                    (-x).exp() * (2.0 + 2.0 * x + x * x)
                };
                let full = if k == 1 { 1.0 } else { 2.0 };
                // Series for small x avoids cancellation in `full - tail`.
                let lower = if x < 0.5 { lower_gamma_int_series(k, x) } else { full - tail };
                lower / rate.powi(k as i32)
            }
            Self::Weibull { shape, scale } => {
                let a = 1.0 + kf / shape;
                let full = scale.powi(k as i32) * ln_gamma(a).exp();
                if m.is_infinite() {
                    return full;
                }
                let x = (m / scale).powf(shape);
                full * gamma_lr(a, x)
            }
            Self::Uniform { lo, hi } => {
                let top = m.min(hi);
                if top <= lo {
                    return 0.0;
                }
                (top.powf(kf + 1.0) - lo.powf(kf + 1.0)) / ((kf + 1.0) * (hi - lo))
            }
            Self::Deterministic { value } => if value < m { value.powi(k as i32) } else { 0.0 },
        }
    }

    /// `E[S · 1(S < m)]`.
    pub fn truncated_first_moment(&self, m: f64) -> f64 {
        self.truncated_moment(1, m)
    }

    /// `E[S² · 1(S < m)]`.
    pub fn truncated_second_moment(&self, m: f64) -> f64 {
        self.truncated_moment(2, m)
    }

    /// Size threshold `m` with `E[S · 1(S < m)] = f · E[S]`.
    ///
    /// Returns `+∞` for `f = 1`, meaning every job lies below the threshold.
    pub fn solve_size_threshold(&self, f: f64) -> Result<f64> {
        self.require_continuous()?;
        if !(0.0..=1.0).contains(&f) {
            return Err(Error::invalid(format!("load fraction {f} outside [0, 1]")));
        }
        if f == 0.0 {
            return Ok(0.0);
        }
        if f == 1.0 {
            return Ok(f64::INFINITY);
        }
        let mean = self.mean();
        let ratio = |m: f64| self.truncated_first_moment(m) / mean;
        let mut lo = 0.0;
        let mut hi = mean;
        let mut doublings = 0;
        while ratio(hi) < f {
            lo = hi;
            hi *= 2.0;
            doublings += 1;
            if doublings > 2000 || !hi.is_finite() {
                return Err(Error::NoRootBracketed(format!("load fraction {f} for {self}")));
            }
        }
        bisect_increasing(ratio, f, lo, hi, 1e-13)
    }
}

impl fmt::Display for JobSizeModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Exponential { rate } => write!(f, "Exponential(rate={rate})"),
            Self::Weibull { shape, scale } => write!(f, "Weibull(shape={shape}, scale={scale})"),
            Self::Uniform { lo, hi } => write!(f, "Uniform({lo}, {hi})"),
            Self::Deterministic { value } => write!(f, "Deterministic({value})"),
        }
    }
}

/// Lower incomplete gamma `γ(k+1, x)` for `k ∈ {1,2}` by its power series.
fn lower_gamma_int_series(k: u32, x: f64) -> f64 {
    // γ(a, x) = x^a e^{-x} Σ_j x^j / (a (a+1) ... (a+j))
    let a = (k + 1) as f64;
    let mut term = 1.0 / a;
    let mut sum = term;
    for j in 1..60 {
        term *= x / (a + j as f64);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    x.powf(a) * (-x).exp() * sum
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be positive and finite, got {v}")))
    }
}

/// Distribution entry of an experiment config, e.g.
/// `{ kind = "weibull-mean-cv", mean = 1.0, cv = 10.0 }`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DistSpec {
    WeibullMeanCv { mean: f64, cv: f64 },
    Weibull { shape: f64, scale: f64 },
    Exponential { rate: f64 },
    Uniform { lo: f64, hi: f64 },
    Deterministic { value: f64 },
}

impl DistSpec {
    pub fn build(&self) -> Result<JobSizeModel> {
        match *self {
            Self::WeibullMeanCv { mean, cv } => JobSizeModel::weibull_from_mean_cv(mean, cv),
            Self::Weibull { shape, scale } => JobSizeModel::weibull(shape, scale),
            Self::Exponential { rate } => JobSizeModel::exponential(rate),
            Self::Uniform { lo, hi } => JobSizeModel::uniform(lo, hi),
            Self::Deterministic { value } => JobSizeModel::deterministic(value),
        }
    }

    /// Short label used in CSV output.
    pub fn tag(&self) -> String {
        match self {
            Self::WeibullMeanCv { mean, cv } if *mean == 1.0 => format!("weibull-cv{cv}"),
            Self::WeibullMeanCv { mean, cv } => format!("weibull-mean{mean}-cv{cv}"),
            Self::Weibull { shape, scale } => format!("weibull-k{shape}-s{scale}"),
            Self::Exponential { rate } => format!("exp{rate}"),
            Self::Uniform { lo, hi } => format!("uniform{lo}-{hi}"),
            Self::Deterministic { value } => format!("det{value}"),
        }
    }

    /// Coefficient of variation the spec asks for, when stated directly.
    pub fn nominal_cv(&self) -> Option<f64> {
        match *self {
            Self::WeibullMeanCv { cv, .. } => Some(cv),
            Self::Exponential { .. } => Some(1.0),
            _ => None,
        }
    }
}
