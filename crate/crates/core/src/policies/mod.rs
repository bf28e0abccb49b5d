//! Dispatching policies.
//!
//! A policy is an immutable [`PolicyConfig`] plus a per-trial
//! [`PolicyState`]. [`PolicyConfig::dispatch`] looks at the arriving job's
//! size and the current [`WorkVector`] and returns a server index; it never
//! touches the work vector.
//!
//! Sorting and argmin ties always go to the lowest physical index.

mod params;

use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RandomStream;

pub use params::{
    card_params_from_alpha_beta, card_params_practical, card_threshold_c, dice_footnote_eta,
    dice_thresholds, multiband_config, multiband_fraction, sita_equal_load, PracticalParams,
};

/// Unfinished work at each server, in job-size units.
#[derive(Clone, Debug, PartialEq)]
pub struct WorkVector(Vec<f64>);

impl WorkVector {
    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn from_vec(w: Vec<f64>) -> Result<Self> {
        if w.len() < 2 {
            return Err(Error::invalid(format!("need at least 2 servers, got {}", w.len())));
        }
        if let Some(x) = w.iter().find(|x| !(**x >= 0.0)) {
            return Err(Error::invalid(format!("work entries must be nonnegative, got {x}")));
        }
        Ok(Self(w))
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl Deref for WorkVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// How an n-server CARD picks among its short servers.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShortSelection {
    #[default]
    UniformRandom,
    LeastWork,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SizeClass {
    Small,
    Medium,
    Large,
}

impl SizeClass {
    /// Half-open classes `[0, m₋)`, `[m₋, m₊)`, `[m₊, ∞)`.
    #[inline]
    pub fn of(s: f64, m_minus: f64, m_plus: f64) -> Self {
        if s < m_minus {
            Self::Small
        } else if s < m_plus {
            Self::Medium
        } else {
            Self::Large
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// CARD parameters. Servers `0..n-1` are short, server `n-1` is long
/// (rigid); flexible CARD reassigns the roles by current work at every
/// arrival.
#[derive(Clone, Debug, PartialEq)]
pub struct CardConfig {
    pub n: usize,
    pub m_minus: f64,
    pub m_plus: f64,
    pub c: f64,
    pub flexible: bool,
    pub short_selection: ShortSelection,
}

impl CardConfig {
    /// Rigid CARD with uniform-random short selection; requires
    /// `m₋ ≤ m₊ ≤ c`.
    pub fn new(n: usize, m_minus: f64, m_plus: f64, c: f64) -> Result<Self> {
        let cfg = Self::new_relaxed(n, m_minus, m_plus, c)?;
        if !(m_plus <= c) {
            return Err(Error::invalid(format!(
                "CARD needs c >= m_plus, got c = {c}, m_plus = {m_plus}"
            )));
        }
        Ok(cfg)
    }

    /// Like [`CardConfig::new`] but allows `c < m₊`.
    pub fn new_relaxed(n: usize, m_minus: f64, m_plus: f64, c: f64) -> Result<Self> {
        check_n(n)?;
        if !(m_minus >= 0.0 && m_minus <= m_plus) {
            return Err(Error::invalid(format!(
                "CARD needs 0 <= m_minus <= m_plus, got {m_minus}, {m_plus}"
            )));
        }
        if !(c >= 0.0) || c.is_infinite() {
            return Err(Error::invalid(format!("CARD threshold c must be finite and >= 0, got {c}")));
        }
        Ok(Self {
            n,
            m_minus,
            m_plus,
            c,
            flexible: false,
            short_selection: ShortSelection::default(),
        })
    }

    pub fn with_flexible(mut self, flexible: bool) -> Self {
        self.flexible = flexible;
        self
    }

    pub fn with_short_selection(mut self, sel: ShortSelection) -> Self {
        self.short_selection = sel;
        self
    }

    pub fn class_of(&self, s: f64) -> SizeClass {
        SizeClass::of(s, self.m_minus, self.m_plus)
    }
}

/// Multi-band CARD: `n` size cutoffs and `n − 1` work thresholds.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiBandConfig {
    pub n: usize,
    pub cutoffs: Vec<f64>,
    pub thresholds: Vec<f64>,
    pub flexible: bool,
}

impl MultiBandConfig {
    pub fn new(cutoffs: Vec<f64>, thresholds: Vec<f64>, flexible: bool) -> Result<Self> {
        let n = cutoffs.len();
        check_n(n)?;
        if thresholds.len() != n - 1 {
            return Err(Error::invalid(format!(
                "multi-band CARD with {n} cutoffs needs {} thresholds, got {}",
                n - 1,
                thresholds.len()
            )));
        }
        if cutoffs[0] < 0.0 || !cutoffs.windows(2).all(|p| p[0] < p[1]) {
            return Err(Error::invalid("multi-band cutoffs must be nonnegative and strictly increasing"));
        }
        if !thresholds.iter().all(|c| *c > 0.0 && c.is_finite()) {
            return Err(Error::invalid("multi-band thresholds must be positive and finite"));
        }
        Ok(Self { n, cutoffs, thresholds, flexible })
    }
}

/// Dice thresholds on the work-sorted servers.
#[derive(Clone, Debug, PartialEq)]
pub struct DiceConfig {
    pub n: usize,
    pub tau: Vec<f64>,
}

impl DiceConfig {
    pub fn new(tau: Vec<f64>) -> Result<Self> {
        let n = tau.len() + 1;
        check_n(n)?;
        if !tau.iter().all(|t| *t > 0.0) {
            return Err(Error::invalid("Dice thresholds must be positive"));
        }
        if !tau.windows(2).all(|p| p[0] <= p[1]) {
            return Err(Error::invalid("Dice thresholds must be nondecreasing"));
        }
        Ok(Self { n, tau })
    }
}

/// Size-interval assignment: job sizes in `[m_{i-1}, m_i)` go to server `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct SitaConfig {
    pub n: usize,
    pub cutoffs: Vec<f64>,
}

impl SitaConfig {
    pub fn new(cutoffs: Vec<f64>) -> Result<Self> {
        let n = cutoffs.len() + 1;
        check_n(n)?;
        if cutoffs[0] < 0.0 || !cutoffs.windows(2).all(|p| p[0] < p[1]) {
            return Err(Error::invalid("SITA cutoffs must be nonnegative and strictly increasing"));
        }
        Ok(Self { n, cutoffs })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PolicyConfig {
    Lwl { n: usize },
    Random { n: usize },
    RoundRobin { n: usize },
    Sita(SitaConfig),
    Card(CardConfig),
    MultiBand(MultiBandConfig),
    Dice(DiceConfig),
}

/// Mutable per-trial policy state.
#[derive(Clone, Debug, Default)]
pub struct PolicyState {
    cursor: usize,
    order: Vec<usize>,
}

impl PolicyState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }
}

impl PolicyConfig {
    pub fn n(&self) -> usize {
        match self {
            Self::Lwl { n } | Self::Random { n } | Self::RoundRobin { n } => *n,
            Self::Sita(c) => c.n,
            Self::Card(c) => c.n,
            Self::MultiBand(c) => c.n,
            Self::Dice(c) => c.n,
        }
    }

    /// Name used in config files and CSV output.
    pub fn name(&self) -> &'static str {
        match self {
            Self::Lwl { .. } => "lwl",
            Self::Random { .. } => "random",
            Self::RoundRobin { .. } => "round-robin",
            Self::Sita(_) => "sita-e",
            Self::Card(c) if c.flexible => "card-flexible",
            Self::Card(_) => "card-rigid",
            Self::MultiBand(_) => "card-multiband",
            Self::Dice(_) => "dice",
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_n(self.n())
    }

    /// Chooses a server for a job of size `s` given the current work.
    pub fn dispatch(
        &self,
        state: &mut PolicyState,
        s: f64,
        w: &[f64],
        rng: &mut RandomStream,
    ) -> usize {
        debug_assert_eq!(w.len(), self.n());
        match self {
            Self::Lwl { .. } => argmin(w),
            Self::Random { n } => rng.index(*n),
            Self::RoundRobin { n } => {
                let i = state.cursor;
                state.cursor = (i + 1) % n;
                i
            }
            Self::Sita(cfg) => cfg.cutoffs.partition_point(|&m| m <= s),
            Self::Card(cfg) => dispatch_card(cfg, state, s, w, rng),
            Self::MultiBand(cfg) => dispatch_multiband(cfg, state, s, w),
            Self::Dice(cfg) => {
                let order = sorted_order(&mut state.order, w);
                for (pos, &tau) in cfg.tau.iter().enumerate() {
                    let server = order[pos];
                    if tau - w[server] > s {
                        return server;
                    }
                }
                order[cfg.n - 1]
            }
        }
    }
}

impl fmt::Display for PolicyConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn dispatch_card(
    cfg: &CardConfig,
    state: &mut PolicyState,
    s: f64,
    w: &[f64],
    rng: &mut RandomStream,
) -> usize {
    let n = cfg.n;
    let class = cfg.class_of(s);
    if cfg.flexible {
        if n == 2 {
            let (short, long) = if w[1] < w[0] { (1, 0) } else { (0, 1) };
            return match class {
                SizeClass::Small => short,
                SizeClass::Medium if w[short] <= cfg.c => short,
                _ => long,
            };
        }
        let order = sorted_order(&mut state.order, w);
        let long = order[n - 1];
        let pick = |rng: &mut RandomStream| match cfg.short_selection {
            ShortSelection::LeastWork => order[0],
            ShortSelection::UniformRandom => order[rng.index(n - 1)],
        };
        return match class {
            SizeClass::Small => pick(rng),
            SizeClass::Medium => {
                let short = pick(rng);
                if w[short] <= cfg.c {
                    short
                } else {
                    long
                }
            }
            SizeClass::Large => long,
        };
    }
    let long = n - 1;
    let pick = |rng: &mut RandomStream| match cfg.short_selection {
        _ if n == 2 => 0,
        ShortSelection::LeastWork => argmin(&w[..n - 1]),
        ShortSelection::UniformRandom => rng.index(n - 1),
    };
    match class {
        SizeClass::Small => pick(rng),
        SizeClass::Medium => {
            let short = pick(rng);
            if w[short] <= cfg.c {
                short
            } else {
                long
            }
        }
        SizeClass::Large => long,
    }
}

fn dispatch_multiband(cfg: &MultiBandConfig, state: &mut PolicyState, s: f64, w: &[f64]) -> usize {
    let n = cfg.n;
    let m = &cfg.cutoffs;
    let position_to_server = |order: &[usize], pos: usize| if cfg.flexible { order[pos] } else { pos };
    let order: &[usize] = if cfg.flexible { sorted_order(&mut state.order, w) } else { &[] };
    let pos = if s < m[0] {
        0
    } else if s >= m[n - 1] {
        n - 1
    } else {
        let band = m.partition_point(|&x| x <= s) - 1;
        if w[position_to_server(order, band)] <= cfg.thresholds[band] {
            band
        } else {
            band + 1
        }
    };
    position_to_server(order, pos)
}

/// Index of the smallest entry; ties go to the lowest index.
#[inline]
pub fn argmin(w: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in w.iter().enumerate().skip(1) {
        if x < w[best] {
            best = i;
        }
    }
    best
}

/// Server indices sorted by ascending work, stable by index.
fn sorted_order<'a>(buf: &'a mut Vec<usize>, w: &[f64]) -> &'a [usize] {
    buf.clear();
    buf.extend(0..w.len());
    buf.sort_by(|&a, &b| w[a].total_cmp(&w[b]));
    buf
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        Err(Error::invalid(format!("need at least 2 servers, got {n}")))
    } else {
        Ok(())
    }
}
