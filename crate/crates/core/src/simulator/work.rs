//! Exact evolution of the work vector between arrivals.
//!
//! Each server drains its work at rate `1/n`, so between two arrivals every
//! trajectory is piecewise linear with at most one kink (when it empties).
//! All integrals below are exact areas under those trajectories.

use crate::policies::WorkVector;

/// Result of [`advance_work`].
#[derive(Clone, Debug, PartialEq)]
pub struct WorkAdvance {
    pub work: WorkVector,
    /// Time each server spent empty during the step.
    pub idle: Vec<f64>,
    /// `∫ W_i(t) dt` over the step.
    pub integral: Vec<f64>,
}

/// Lets `dt` time units pass with no arrivals.
pub fn advance_work(w: &WorkVector, dt: f64) -> WorkAdvance {
    let n = w.len();
    let mut work = w.clone();
    let mut idle = vec![0.0; n];
    let mut integral = vec![0.0; n];
    for (i, wi) in work.as_mut_slice().iter_mut().enumerate() {
        let step = drain(*wi, dt, n as f64);
        *wi = step.remaining;
        idle[i] = step.idle;
        integral[i] = step.area;
    }
    WorkAdvance { work, idle, integral }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Drain {
    pub remaining: f64,
    pub idle: f64,
    pub area: f64,
}

/// One server with work `w` draining at rate `1/n` for `dt`.
#[inline]
pub(crate) fn drain(w: f64, dt: f64, n: f64) -> Drain {
    let empties_at = n * w;
    if empties_at >= dt {
        Drain {
            remaining: (w - dt / n).max(0.0),
            idle: 0.0,
            area: w * dt - dt * dt / (2.0 * n),
        }
    } else {
        Drain {
            remaining: 0.0,
            idle: dt - empties_at,
            area: 0.5 * n * w * w,
        }
    }
}

/// `∫ I(t) W_all(t) dt` over a step of length `dt` starting from `w`, where
/// `I` is the fraction of idle servers.
///
/// `scratch` is reused to hold the sorted emptying times.
pub(crate) fn idle_work_integral(w: &[f64], dt: f64, scratch: &mut Vec<f64>) -> f64 {
    let n = w.len() as f64;
    scratch.clear();
    let mut idle = 0usize;
    let mut total = 0.0;
    for &wi in w {
        total += wi;
        if wi <= 0.0 {
            idle += 1;
        } else if n * wi < dt {
            scratch.push(n * wi);
        }
    }
    if idle == 0 && scratch.is_empty() {
        return 0.0;
    }
    scratch.sort_by(f64::total_cmp);
    let mut acc = 0.0;
    let mut t = 0.0;
    let mut w_all = total;
    let mut segment = |to: f64, idle: usize, t: &mut f64, w_all: &mut f64| {
        let len = to - *t;
        let end = (*w_all - (n - idle as f64) / n * len).max(0.0);
        acc += idle as f64 / n * 0.5 * (*w_all + end) * len;
        *w_all = end;
        *t = to;
    };
    for &e in scratch.iter() {
        segment(e, idle, &mut t, &mut w_all);
        idle += 1;
    }
    segment(dt, idle, &mut t, &mut w_all);
    acc
}
