//! Aggregation of independent trials into means with 95% confidence
//! intervals (Student-t on the per-trial values).

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::simulator::TrialResult;

/// Mean of independent replicates with a 95% confidence half-width.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub half_width: f64,
    /// Standard error of the mean.
    pub se: f64,
    pub samples: usize,
}

impl Estimate {
    pub fn from_samples(values: &[f64]) -> Result<Self> {
        let k = values.len();
        if k < 2 {
            return Err(Error::InsufficientTrials(k));
        }
        let kf = k as f64;
        let mean = values.iter().sum::<f64>() / kf;
        let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (kf - 1.0);
        let se = (var / kf).sqrt();
        Ok(Self {
            mean,
            half_width: t_975(k - 1) * se,
            se,
            samples: k,
        })
    }

    pub fn lower(&self) -> f64 {
        self.mean - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.mean + self.half_width
    }
}

/// 0.975 quantile of Student's t with `df` degrees of freedom.
pub fn t_975(df: usize) -> f64 {
    StudentsT::new(0.0, 1.0, df as f64)
        .expect("df >= 1 is a valid Student-t")
        .inverse_cdf(0.975)
}

/// Per-metric estimates over a set of trials.
#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub trials: usize,
    pub mean_t: Estimate,
    pub mean_t_by_class: Option<[Option<Estimate>; 3]>,
    pub mean_size: Estimate,
    pub time_avg_work_total: Estimate,
    pub arrival_avg_work_total: Estimate,
    pub idle_fraction_per_server: Vec<Estimate>,
    pub idle_work_cross_term: Option<Estimate>,
    pub mean_below: Option<Estimate>,
    pub mean_above: Option<Estimate>,
    pub short_idle_fraction: Option<Estimate>,
}

/// Combines trials in the given order.
pub fn aggregate(trials: &[TrialResult]) -> Result<Summary> {
    if trials.len() < 2 {
        return Err(Error::InsufficientTrials(trials.len()));
    }
    let est = |f: &dyn Fn(&TrialResult) -> f64| {
        Estimate::from_samples(&trials.iter().map(f).collect::<Vec<_>>())
    };
    // Present only when every trial has the value.
    let opt_est = |f: &dyn Fn(&TrialResult) -> Option<f64>| -> Result<Option<Estimate>> {
        let vals: Option<Vec<f64>> = trials.iter().map(f).collect();
        vals.map(|v| Estimate::from_samples(&v)).transpose()
    };

    let n = trials[0].idle_fraction_per_server.len();
    let idle_fraction_per_server = (0..n)
        .map(|i| est(&|t| t.idle_fraction_per_server[i]))
        .collect::<Result<Vec<_>>>()?;
    let mean_t_by_class = if trials.iter().all(|t| t.mean_t_by_class.is_some()) {
        let mut out = [None; 3];
        for (c, slot) in out.iter_mut().enumerate() {
            *slot = opt_est(&|t| t.mean_t_by_class.unwrap()[c])?;
        }
        Some(out)
    } else {
        None
    };

    Ok(Summary {
        trials: trials.len(),
        mean_t: est(&|t| t.mean_t)?,
        mean_t_by_class,
        mean_size: est(&|t| t.mean_size)?,
        time_avg_work_total: est(&|t| t.time_avg_work_total)?,
        arrival_avg_work_total: est(&|t| t.arrival_avg_work_total)?,
        idle_fraction_per_server,
        idle_work_cross_term: opt_est(&|t| t.idle_work_cross_term)?,
        mean_below: opt_est(&|t| t.cycle_stats.as_ref().and_then(|c| c.mean_below))?,
        mean_above: opt_est(&|t| t.cycle_stats.as_ref().and_then(|c| c.mean_above))?,
        short_idle_fraction: opt_est(&|t| t.cycle_stats.as_ref().map(|c| c.short_idle_fraction))?,
    })
}
