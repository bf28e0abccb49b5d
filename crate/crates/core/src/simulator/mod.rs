//! Event-by-event workload simulation of one trial.
//!
//! The only events are Poisson arrivals. Between arrivals the work vector
//! drains deterministically, so every continuous-time statistic (idle time,
//! time-averaged work, the idle-work cross term, below/above periods) is
//! integrated exactly rather than sampled.

mod cycles;
mod tail;
mod work;

use crate::distributions::JobSizeModel;
use crate::error::{Error, Result};
use crate::policies::{PolicyConfig, PolicyState, SizeClass, WorkVector};
use crate::rng::{self, RandomStream};

pub use cycles::CycleStats;
pub use tail::{LogHistogram, ResponseTail, EXACT_LIMIT, QUANTILE_LEVELS};
pub use work::{advance_work, WorkAdvance};

use cycles::CycleTracker;
use tail::TailCollector;
use work::{drain, idle_work_integral};

/// Optional statistics.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Collect {
    /// Keep every response time for quantiles and tail curves.
    pub tails: bool,
    /// Track below/above periods of server 0 (CARD policies only).
    pub cycles: bool,
    /// Integrate `I · W_all` exactly.
    pub work_integrals: bool,
}

impl Default for Collect {
    fn default() -> Self {
        Self { tails: false, cycles: true, work_integrals: true }
    }
}

#[derive(Clone, Debug)]
pub struct SimConfig {
    pub lambda: f64,
    pub model: JobSizeModel,
    pub policy: PolicyConfig,
    pub num_arrivals: u64,
    pub warmup_fraction: f64,
    /// Root seed; per-trial streams come from [`rng::derive_seed`].
    pub seed: u64,
    pub trial: u64,
    pub collect: Collect,
    /// Size classes for non-CARD policies, as `(m₋, m₊)`.
    pub class_thresholds: Option<(f64, f64)>,
    /// Permit `λE[S] >= 1` (transient studies).
    pub allow_unstable: bool,
}

impl SimConfig {
    pub fn new(lambda: f64, model: JobSizeModel, policy: PolicyConfig, num_arrivals: u64) -> Self {
        Self {
            lambda,
            model,
            policy,
            num_arrivals,
            warmup_fraction: 0.1,
            seed: 0,
            trial: 0,
            collect: Collect::default(),
            class_thresholds: None,
            allow_unstable: false,
        }
    }

    pub fn n(&self) -> usize {
        self.policy.n()
    }

    pub fn validate(&self) -> Result<()> {
        self.policy.validate()?;
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::invalid(format!("arrival rate must be positive, got {}", self.lambda)));
        }
        let rho = self.lambda * self.model.mean();
        if rho >= 1.0 && !self.allow_unstable {
            return Err(Error::invalid(format!("load {rho} >= 1 is unstable")));
        }
        if !(0.0..1.0).contains(&self.warmup_fraction) {
            return Err(Error::invalid(format!(
                "warmup fraction must lie in [0, 1), got {}",
                self.warmup_fraction
            )));
        }
        if self.num_arrivals == 0 {
            return Err(Error::invalid("need at least one arrival"));
        }
        Ok(())
    }

    fn classes(&self) -> Option<(f64, f64)> {
        match &self.policy {
            PolicyConfig::Card(c) => Some((c.m_minus, c.m_plus)),
            _ => self.class_thresholds,
        }
    }
}

/// Work accounting over the whole trial, warmup included.
#[derive(Clone, Debug, PartialEq)]
pub struct WorkBalance {
    pub injected: f64,
    pub completed: f64,
    pub remaining: f64,
}

/// Statistics of one trial, measured after warmup.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialResult {
    pub mean_t: f64,
    /// Mean response time of small, medium and large jobs.
    pub mean_t_by_class: Option<[Option<f64>; 3]>,
    pub class_counts: Option<[u64; 3]>,
    pub job_count: u64,
    /// Sample mean of the sizes of the recorded jobs.
    pub mean_size: f64,
    pub observed_time: f64,
    pub time_avg_work_total: f64,
    pub time_avg_work_per_server: Vec<f64>,
    pub idle_fraction_per_server: Vec<f64>,
    /// Time average of `I · W_all`, `I` the fraction of idle servers.
    pub idle_work_cross_term: Option<f64>,
    /// Mean of `W_all` seen by arrivals (before they join).
    pub arrival_avg_work_total: f64,
    pub cycle_stats: Option<CycleStats>,
    pub tail: Option<ResponseTail>,
    pub balance: WorkBalance,
}

impl TrialResult {
    pub fn quantile_table(&self) -> Option<Vec<(f64, f64)>> {
        self.tail.as_ref().map(ResponseTail::quantile_table)
    }
}

/// Simulates one trial.
pub fn run_trial(cfg: &SimConfig) -> Result<TrialResult> {
    cfg.validate()?;
    let n = cfg.n();
    let nf = n as f64;
    let mut arrivals = RandomStream::for_trial(cfg.seed, cfg.trial, rng::ARRIVALS);
    let mut sizes = RandomStream::for_trial(cfg.seed, cfg.trial, rng::SIZES);
    let mut policy_rng = RandomStream::for_trial(cfg.seed, cfg.trial, rng::POLICY);
    let mut state = PolicyState::new();

    let warmup = ((cfg.warmup_fraction * cfg.num_arrivals as f64).floor() as u64)
        .min(cfg.num_arrivals - 1);
    let classes = cfg.classes();
    let cycle_threshold = match &cfg.policy {
        PolicyConfig::Card(c) if cfg.collect.cycles => Some(c.c),
        _ => None,
    };

    let mut w = WorkVector::zeros(n);
    let mut t = 0.0;
    let mut injected = 0.0;
    let mut completed = 0.0;

    let mut t_start = 0.0;
    let mut resp_sum = 0.0;
    let mut size_sum = 0.0;
    let mut arrival_work_sum = 0.0;
    let mut jobs = 0u64;
    let mut class_sum = [0.0; 3];
    let mut class_count = [0u64; 3];
    let mut idle = vec![0.0; n];
    let mut area = vec![0.0; n];
    let mut cross = 0.0;
    let mut scratch = Vec::with_capacity(n);
    let mut tracker: Option<CycleTracker> = None;
    let mut tails = cfg
        .collect
        .tails
        .then(|| TailCollector::with_capacity((cfg.num_arrivals - warmup) as usize));

    for k in 0..cfg.num_arrivals {
        let dt = arrivals.exponential(cfg.lambda);
        let recording = k > warmup;
        if recording {
            if cfg.collect.work_integrals {
                cross += idle_work_integral(&w, dt, &mut scratch);
            }
            if let Some(tr) = tracker.as_mut() {
                tr.advance(t, w[0], dt, nf);
            }
        }
        for (i, wi) in w.as_mut_slice().iter_mut().enumerate() {
            let step = drain(*wi, dt, nf);
            completed += *wi - step.remaining;
            *wi = step.remaining;
            if recording {
                idle[i] += step.idle;
                area[i] += step.area;
            }
        }
        t += dt;
        if k == warmup {
            t_start = t;
            tracker = cycle_threshold.map(|c| CycleTracker::new(c, w[0]));
        }

        let s = cfg.model.sample(&mut sizes);
        let server = cfg.policy.dispatch(&mut state, s, &w, &mut policy_rng);
        let response = nf * (w[server] + s);
        if k >= warmup {
            jobs += 1;
            resp_sum += response;
            size_sum += s;
            arrival_work_sum += w.total();
            if let Some((m_minus, m_plus)) = classes {
                let c = SizeClass::of(s, m_minus, m_plus).index();
                class_sum[c] += response;
                class_count[c] += 1;
            }
            if let Some(tc) = tails.as_mut() {
                tc.push(response);
            }
        }
        let slot = &mut w.as_mut_slice()[server];
        *slot += s;
        injected += s;
        if !slot.is_finite() {
            return Err(Error::NonfiniteWork {
                arrival: k,
                detail: format!("server {server} work became {}", *slot),
            });
        }
        if let Some(tr) = tracker.as_mut() {
            tr.after_arrival(t, w[0]);
        }
    }

    let span = t - t_start;
    let per_time = |x: f64| if span > 0.0 { x / span } else { 0.0 };
    let time_avg_work_per_server: Vec<f64> = area.iter().map(|a| per_time(*a)).collect();
    let idle_fraction_per_server: Vec<f64> = idle.iter().map(|x| per_time(*x)).collect();
    let jobs_f = jobs as f64;
    let (mean_t_by_class, class_counts) = match classes {
        Some(_) => {
            let means = std::array::from_fn(|c| {
                (class_count[c] > 0).then(|| class_sum[c] / class_count[c] as f64)
            });
            (Some(means), Some(class_count))
        }
        None => (None, None),
    };
    Ok(TrialResult {
        mean_t: resp_sum / jobs_f,
        mean_t_by_class,
        class_counts,
        job_count: jobs,
        mean_size: size_sum / jobs_f,
        observed_time: span,
        time_avg_work_total: time_avg_work_per_server.iter().sum(),
        time_avg_work_per_server,
        cycle_stats: tracker.map(|tr| tr.finish(span, idle_fraction_per_server[0])),
        idle_fraction_per_server,
        idle_work_cross_term: cfg.collect.work_integrals.then(|| per_time(cross)),
        arrival_avg_work_total: arrival_work_sum / jobs_f,
        tail: tails.map(TailCollector::finish),
        balance: WorkBalance {
            injected,
            completed,
            remaining: w.total(),
        },
    })
}
