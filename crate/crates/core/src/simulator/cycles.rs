//! Below/above periods of the designated short server.
//!
//! A below period is a maximal interval with `W_s <= c`, an above period one
//! with `W_s > c`. Upcrossings happen only at arrivals; downcrossings happen
//! while draining, at the exact time `n (W_s − c)` after the step starts.
//! Only periods that both start and end inside the recorded window count.

#[derive(Clone, Debug, PartialEq)]
pub struct CycleStats {
    pub mean_below: Option<f64>,
    pub mean_above: Option<f64>,
    pub below_count: u64,
    pub above_count: u64,
    /// Complete below-above cycles.
    pub count: u64,
    /// Fraction of recorded time with `W_s > c`.
    pub above_fraction: f64,
    /// Fraction of recorded time with `W_s = 0`.
    pub short_idle_fraction: f64,
}

#[derive(Debug)]
pub(crate) struct CycleTracker {
    c: f64,
    above: bool,
    /// Start of the current period if it began at a genuine crossing.
    started: Option<f64>,
    below_sum: f64,
    below_count: u64,
    above_sum: f64,
    above_count: u64,
    time_above: f64,
    cycles: u64,
}

impl CycleTracker {
    pub fn new(c: f64, w_short: f64) -> Self {
        Self {
            c,
            above: w_short > c,
            started: None,
            below_sum: 0.0,
            below_count: 0,
            above_sum: 0.0,
            above_count: 0,
            time_above: 0.0,
            cycles: 0,
        }
    }

    /// Drain step of length `dt` starting at time `t` with short work `w`.
    pub fn advance(&mut self, t: f64, w: f64, dt: f64, n: f64) {
        if !self.above {
            return;
        }
        let reach = n * (w - self.c);
        if reach <= dt {
            self.time_above += reach;
            let crossing = t + reach;
            if let Some(start) = self.started {
                self.above_sum += crossing - start;
                self.above_count += 1;
                if self.below_count > 0 {
                    self.cycles += 1;
                }
            }
            self.above = false;
            self.started = Some(crossing);
        } else {
            self.time_above += dt;
        }
    }

    /// Called after each arrival at time `t` with the updated short work.
    pub fn after_arrival(&mut self, t: f64, w: f64) {
        if !self.above && w > self.c {
            if let Some(start) = self.started {
                self.below_sum += t - start;
                self.below_count += 1;
            }
            self.above = true;
            self.started = Some(t);
        }
    }

    pub fn finish(self, span: f64, short_idle_fraction: f64) -> CycleStats {
        let mean = |sum: f64, count: u64| (count > 0).then(|| sum / count as f64);
        CycleStats {
            mean_below: mean(self.below_sum, self.below_count),
            mean_above: mean(self.above_sum, self.above_count),
            below_count: self.below_count,
            above_count: self.above_count,
            count: self.cycles,
            above_fraction: if span > 0.0 { self.time_above / span } else { 0.0 },
            short_idle_fraction,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scripted_path() {
        // n = 2, c = 1. Start below at W_s = 0.5.
        let mut tr = CycleTracker::new(1.0, 0.5);
        // Arrival at t = 1 pushes W_s to 1.5: first above period starts
        // (the partial below period before it is discarded).
        tr.after_arrival(1.0, 1.5);
        // Drain from t = 1 for 3: hits c after 2(1.5 − 1) = 1.
        tr.advance(1.0, 1.5, 3.0, 2.0);
        assert_eq!(tr.above_count, 1);
        assert!((tr.above_sum - 1.0).abs() < 1e-15);
        // Next arrival at t = 4 with W_s = 1.2 ends a below period of 2.
        tr.after_arrival(4.0, 1.2);
        assert_eq!(tr.below_count, 1);
        assert!((tr.below_sum - 2.0).abs() < 1e-15);
        // Reaches c again 0.4 later.
        tr.advance(4.0, 1.2, 1.0, 2.0);
        assert_eq!(tr.above_count, 2);
        assert_eq!(tr.cycles, 1);
        let s = tr.finish(5.0, 0.0);
        assert!((s.mean_above.unwrap() - 0.7).abs() < 1e-15);
        assert!((s.mean_below.unwrap() - 2.0).abs() < 1e-15);
        assert!((s.above_fraction - 1.4 / 5.0).abs() < 1e-15);
    }

    #[test]
    fn landing_exactly_on_threshold_is_below() {
        let mut tr = CycleTracker::new(1.0, 0.0);
        tr.after_arrival(0.0, 1.0);
        assert!(!tr.above);
    }
}
