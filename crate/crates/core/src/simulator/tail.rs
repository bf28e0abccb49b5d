//! Response-time tail storage.
//!
//! Up to [`EXACT_LIMIT`] samples are kept verbatim so quantiles are exact.
//! Past that the samples fold into a fixed log-spaced histogram whose grid
//! is shared by every trial, so histograms from different trials merge.

/// Largest sample count stored exactly.
pub const EXACT_LIMIT: usize = 10_000_000;

const HIST_BINS: usize = 10_000;
const HIST_LO: f64 = 1e-4;
const HIST_HI: f64 = 1e10;

/// Probabilities reported by [`ResponseTail::quantile_table`].
pub const QUANTILE_LEVELS: [f64; 6] = [0.5, 0.9, 0.95, 0.99, 0.999, 0.9999];

#[derive(Clone, Debug, PartialEq)]
pub enum ResponseTail {
    /// Sorted samples.
    Exact(Vec<f64>),
    Histogram(LogHistogram),
}

#[derive(Clone, Debug, PartialEq)]
pub struct LogHistogram {
    /// `counts[0]` holds samples below `HIST_LO`, `counts[HIST_BINS + 1]`
    /// samples at or above `HIST_HI`.
    counts: Vec<u64>,
    total: u64,
}

impl LogHistogram {
    fn new() -> Self {
        Self {
            counts: vec![0; HIST_BINS + 2],
            total: 0,
        }
    }

    fn log_span() -> f64 {
        (HIST_HI / HIST_LO).ln()
    }

    fn bin_of(x: f64) -> usize {
        if x < HIST_LO {
            0
        } else if x >= HIST_HI {
            HIST_BINS + 1
        } else {
            let pos = (x / HIST_LO).ln() / Self::log_span() * HIST_BINS as f64;
            1 + (pos as usize).min(HIST_BINS - 1)
        }
    }

    /// Edges `[lo, hi)` of bin `b`.
    fn edges(b: usize) -> (f64, f64) {
        match b {
            0 => (0.0, HIST_LO),
            b if b == HIST_BINS + 1 => (HIST_HI, HIST_HI),
            b => {
                let step = Self::log_span() / HIST_BINS as f64;
                (
                    HIST_LO * ((b - 1) as f64 * step).exp(),
                    HIST_LO * (b as f64 * step).exp(),
                )
            }
        }
    }

    fn push(&mut self, x: f64) {
        self.counts[Self::bin_of(x)] += 1;
        self.total += 1;
    }

    fn absorb(&mut self, other: &LogHistogram) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.total += other.total;
    }

    fn ccdf(&self, t: f64) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        let b = Self::bin_of(t);
        let above: u64 = self.counts[b + 1..].iter().sum();
        let (lo, hi) = Self::edges(b);
        let frac_above = if hi > lo { ((hi - t) / (hi - lo)).clamp(0.0, 1.0) } else { 0.0 };
        (above as f64 + frac_above * self.counts[b] as f64) / self.total as f64
    }

    fn quantile(&self, p: f64) -> f64 {
        let target = (p * self.total as f64).ceil().max(1.0) as u64;
        let mut cum = 0;
        for (b, &c) in self.counts.iter().enumerate() {
            if cum + c >= target {
                let (lo, hi) = Self::edges(b);
                let within = (target - cum) as f64 / c as f64;
                return if lo > 0.0 && hi > lo {
                    lo * (hi / lo).powf(within)
                } else {
                    lo + (hi - lo) * within
                };
            }
            cum += c;
        }
        HIST_HI
    }
}

impl ResponseTail {
    pub fn count(&self) -> u64 {
        match self {
            Self::Exact(v) => v.len() as u64,
            Self::Histogram(h) => h.total,
        }
    }

    /// Empirical `P{T > t}`.
    pub fn ccdf(&self, t: f64) -> f64 {
        match self {
            Self::Exact(v) if v.is_empty() => 0.0,
            Self::Exact(v) => {
                let at_most = v.partition_point(|&x| x <= t);
                (v.len() - at_most) as f64 / v.len() as f64
            }
            Self::Histogram(h) => h.ccdf(t),
        }
    }

    /// Smallest sample `x` with empirical `P{T <= x} >= p`.
    pub fn quantile(&self, p: f64) -> f64 {
        match self {
            Self::Exact(v) if v.is_empty() => f64::NAN,
            Self::Exact(v) => {
                let k = (p * v.len() as f64).ceil().max(1.0) as usize;
                v[k.min(v.len()) - 1]
            }
            Self::Histogram(h) => h.quantile(p),
        }
    }

    pub fn quantile_table(&self) -> Vec<(f64, f64)> {
        QUANTILE_LEVELS.iter().map(|&p| (p, self.quantile(p))).collect()
    }

    /// Pools several tails into one.
    pub fn merge<'a>(parts: impl IntoIterator<Item = &'a ResponseTail>) -> ResponseTail {
        let parts: Vec<&ResponseTail> = parts.into_iter().collect();
        let total: u64 = parts.iter().map(|p| p.count()).sum();
        let all_exact = parts.iter().all(|p| matches!(p, Self::Exact(_)));
        if all_exact && total as usize <= EXACT_LIMIT {
            let mut v = Vec::with_capacity(total as usize);
            for p in &parts {
                if let Self::Exact(s) = p {
                    v.extend_from_slice(s);
                }
            }
            v.sort_by(f64::total_cmp);
            return Self::Exact(v);
        }
        let mut h = LogHistogram::new();
        for p in parts {
            match p {
                Self::Exact(s) => s.iter().for_each(|&x| h.push(x)),
                Self::Histogram(o) => h.absorb(o),
            }
        }
        Self::Histogram(h)
    }
}

/// Accumulates response times during a trial.
#[derive(Debug, Default)]
pub(crate) struct TailCollector {
    samples: Vec<f64>,
    hist: Option<LogHistogram>,
}

impl TailCollector {
    pub fn with_capacity(n: usize) -> Self {
        Self {
            samples: Vec::with_capacity(n.min(EXACT_LIMIT)),
            hist: None,
        }
    }

    #[inline]
    pub fn push(&mut self, x: f64) {
        if let Some(h) = &mut self.hist {
            h.push(x);
            return;
        }
        self.samples.push(x);
        if self.samples.len() > EXACT_LIMIT {
            let mut h = LogHistogram::new();
            self.samples.drain(..).for_each(|s| h.push(s));
            self.samples.shrink_to_fit();
            self.hist = Some(h);
        }
    }

    pub fn finish(mut self) -> ResponseTail {
        match self.hist {
            Some(h) => ResponseTail::Histogram(h),
            None => {
                self.samples.sort_by(f64::total_cmp);
                ResponseTail::Exact(self.samples)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_quantiles_and_ccdf() {
        let mut c = TailCollector::with_capacity(4);
        for x in [4.0, 1.0, 3.0, 2.0] {
            c.push(x);
        }
        let t = c.finish();
        assert_eq!(t.quantile(0.5), 2.0);
        assert_eq!(t.quantile(0.99), 4.0);
        assert_eq!(t.quantile(0.0), 1.0);
        assert_eq!(t.ccdf(2.0), 0.5);
        assert_eq!(t.ccdf(0.0), 1.0);
        assert_eq!(t.ccdf(4.0), 0.0);
        let table = t.quantile_table();
        assert!(table.windows(2).all(|p| p[0].1 <= p[1].1));
    }

    #[test]
    fn histogram_tracks_exact() {
        let mut rng = crate::rng::RandomStream::from_seed(5);
        let xs: Vec<f64> = (0..20_000).map(|_| rng.exponential(0.01)).collect();
        let mut h = LogHistogram::new();
        xs.iter().for_each(|&x| h.push(x));
        let hist = ResponseTail::Histogram(h);
        let exact = ResponseTail::merge([&ResponseTail::Exact({
            let mut v = xs.clone();
            v.sort_by(f64::total_cmp);
            v
        })]);
        for p in [0.1, 0.5, 0.9, 0.99] {
            let (a, b) = (hist.quantile(p), exact.quantile(p));
            assert!((a - b).abs() / b < 0.01, "p={p}: {a} vs {b}");
        }
        for t in [1.0, 10.0, 100.0, 500.0] {
            assert!((hist.ccdf(t) - exact.ccdf(t)).abs() < 0.002);
        }
    }

    #[test]
    fn merge_pools_samples() {
        let a = ResponseTail::Exact(vec![1.0, 3.0]);
        let b = ResponseTail::Exact(vec![2.0, 4.0]);
        assert_eq!(ResponseTail::merge([&a, &b]), ResponseTail::Exact(vec![1.0, 2.0, 3.0, 4.0]));
    }
}
