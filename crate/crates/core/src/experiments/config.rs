//! TOML experiment descriptions.

use std::path::Path;

use serde::Deserialize;

use crate::distributions::{DistSpec, JobSizeModel};
use crate::error::{Error, Result};
use crate::policies::ShortSelection;

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    /// Either a single `distribution` or a list under `distributions`.
    #[serde(default)]
    pub distribution: Option<DistSpec>,
    #[serde(default)]
    pub distributions: Option<Vec<DistSpec>>,
    pub policies: Vec<PolicySpec>,
    pub rho: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_arrivals")]
    pub arrivals_per_trial: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_warmup")]
    pub warmup_fraction: f64,
    #[serde(default = "default_true")]
    pub normalize: bool,
    #[serde(default)]
    pub outputs: Outputs,
    #[serde(default)]
    pub tails: TailsOptions,
}

fn default_trials() -> usize {
    10
}

fn default_arrivals() -> u64 {
    1_000_000
}

fn default_warmup() -> f64 {
    0.1
}

fn default_true() -> bool {
    true
}

/// File names, relative to the output directory.
#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    pub curves_csv: Option<String>,
    pub tails_csv: Option<String>,
    pub validate_report: Option<String>,
    pub bounds_csv: Option<String>,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TailsOptions {
    /// Label (or policy kind) whose quantile sets the grid end.
    #[serde(default = "default_reference")]
    pub reference: String,
    #[serde(default = "default_quantile")]
    pub quantile: f64,
    #[serde(default = "default_points")]
    pub points: usize,
}

fn default_reference() -> String {
    "card-flexible".into()
}

fn default_quantile() -> f64 {
    0.99
}

fn default_points() -> usize {
    200
}

impl Default for TailsOptions {
    fn default() -> Self {
        Self {
            reference: default_reference(),
            quantile: default_quantile(),
            points: default_points(),
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq, Hash)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    CardRigid,
    CardFlexible,
    CardMultiband,
    Lwl,
    SitaE,
    Dice,
    Random,
    RoundRobin,
}

impl PolicyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::CardRigid => "card-rigid",
            Self::CardFlexible => "card-flexible",
            Self::CardMultiband => "card-multiband",
            Self::Lwl => "lwl",
            Self::SitaE => "sita-e",
            Self::Dice => "dice",
            Self::Random => "random",
            Self::RoundRobin => "round-robin",
        }
    }
}

/// How policy thresholds are derived at each load.
#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Recipe {
    /// `(m₋, m₊)` from `alpha`, `beta`; `c` from `beta`, `delta`.
    IdleBound,
    /// `α′`, `β′`, `γ` load-relative parameters (two servers).
    Practical,
    /// Multi-band cutoffs with `c_i = m_i / √ε`.
    MultibandSqrtEps,
    /// Dice thresholds scaled by `ε^{−1/3}`.
    DiceFootnote,
    /// `α = 1/(4n)`, `β ~ ε^{1/3} ln(1/ε)^{2/3}`, `δ = ε³`.
    HeavyTraffic,
    /// Thresholds given verbatim.
    Explicit,
}

impl Recipe {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::IdleBound => "idle-bound",
            Self::Practical => "practical",
            Self::MultibandSqrtEps => "multiband-sqrt-eps",
            Self::DiceFootnote => "dice-footnote",
            Self::HeavyTraffic => "heavy-traffic",
            Self::Explicit => "explicit",
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PolicyParams {
    pub recipe: Option<Recipe>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub delta: Option<f64>,
    pub alpha_prime: Option<f64>,
    pub beta_prime: Option<f64>,
    pub gamma: Option<f64>,
    pub eta: Option<f64>,
    pub m_minus: Option<f64>,
    pub m_plus: Option<f64>,
    pub c: Option<f64>,
    pub cutoffs: Option<Vec<f64>>,
    pub thresholds: Option<Vec<f64>>,
    pub tau: Option<Vec<f64>>,
    pub short_selection: Option<ShortSelection>,
    /// Multi-band only; defaults to flexible.
    pub flexible: Option<bool>,
    pub allow_c_below_m_plus: Option<bool>,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PolicySpec {
    pub policy: PolicyKind,
    /// Row label; defaults to the policy kind.
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default)]
    pub params: PolicyParams,
}

impl PolicySpec {
    pub fn label(&self) -> &str {
        self.label.as_deref().unwrap_or(self.policy.as_str())
    }
}

/// Command-line overrides.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub arrivals: Option<u64>,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(t) = o.trials {
            self.trials = t;
        }
        if let Some(a) = o.arrivals {
            self.arrivals_per_trial = a;
        }
        self.validate()
    }

    pub fn dist_specs(&self) -> Result<Vec<DistSpec>> {
        match (&self.distribution, &self.distributions) {
            (Some(_), Some(_)) => Err(Error::config(
                "give either `distribution` or `distributions`, not both",
            )),
            (Some(d), None) => Ok(vec![d.clone()]),
            (None, Some(ds)) if !ds.is_empty() => Ok(ds.clone()),
            _ => Err(Error::config("missing key `distribution` (or `distributions`)")),
        }
    }

    pub fn models(&self) -> Result<Vec<(DistSpec, JobSizeModel)>> {
        self.dist_specs()?
            .into_iter()
            .map(|d| Ok((d.clone(), d.build()?)))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::config(format!("`n` must be at least 2, got {}", self.n)));
        }
        self.dist_specs()?;
        if self.rho.is_empty() {
            return Err(Error::config("`rho` must list at least one load"));
        }
        if let Some(r) = self.rho.iter().find(|r| !(**r > 0.0 && **r < 1.0)) {
            return Err(Error::config(format!("`rho` values must lie in (0, 1), got {r}")));
        }
        if self.trials < 1 {
            return Err(Error::config("`trials` must be at least 1"));
        }
        if self.arrivals_per_trial < 1 {
            return Err(Error::config("`arrivals_per_trial` must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.warmup_fraction) {
            return Err(Error::config(format!(
                "`warmup_fraction` must lie in [0, 1), got {}",
                self.warmup_fraction
            )));
        }
        if self.policies.is_empty() {
            return Err(Error::config("`policies` must not be empty"));
        }
        let mut labels: Vec<&str> = self.policies.iter().map(PolicySpec::label).collect();
        labels.sort_unstable();
        if let Some(w) = labels.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::config(format!(
                "duplicate policy label `{}`; set `label` to tell them apart",
                w[0]
            )));
        }
        let t = &self.tails;
        if !(t.quantile > 0.0 && t.quantile < 1.0) || t.points < 2 {
            return Err(Error::config("`tails.quantile` must lie in (0, 1) and `tails.points` >= 2"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"
        n = 2
        rho = [0.5, 0.8]
        trials = 3
        arrivals_per_trial = 1000
        distribution = { kind = "exponential", rate = 1.0 }

        [[policies]]
        policy = "lwl"

        [[policies]]
        policy = "card-flexible"
        params = { recipe = "practical" }
    "#;

    #[test]
    fn parses_basic() {
        let cfg = ExperimentConfig::from_toml_str(BASIC).unwrap();
        assert_eq!(cfg.n, 2);
        assert_eq!(cfg.policies[1].params.recipe, Some(Recipe::Practical));
        assert_eq!(cfg.warmup_fraction, 0.1);
        assert_eq!(cfg.tails.reference, "card-flexible");
        assert!(cfg.normalize);
    }

    #[test]
    fn missing_distribution_names_the_key() {
        let text = BASIC.replace("distribution = { kind = \"exponential\", rate = 1.0 }", "");
        let err = ExperimentConfig::from_toml_str(&text).unwrap_err().to_string();
        assert!(err.contains("distribution"), "{err}");
    }

    #[test]
    fn rejects_bad_rho_and_unknown_keys() {
        assert!(ExperimentConfig::from_toml_str(&BASIC.replace("0.8]", "1.0]")).is_err());
        assert!(ExperimentConfig::from_toml_str(&format!("{BASIC}\nbogus = 1")).is_err());
    }

    #[test]
    fn overrides() {
        let mut cfg = ExperimentConfig::from_toml_str(BASIC).unwrap();
        cfg.apply(&Overrides { seed: Some(7), trials: Some(5), arrivals: None }).unwrap();
        assert_eq!((cfg.seed, cfg.trials, cfg.arrivals_per_trial), (7, 5, 1000));
        assert!(cfg.apply(&Overrides { trials: Some(0), ..Default::default() }).is_err());
    }
}
