use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::distributions::DistributionSpec;
use crate::dynamics::SirsParams;
use crate::graphs::DEFAULT_NODE_BUDGET;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    SurvivalSweep,
    HeavyTailCompare,
    TreeStrongSurvival,
    StarScaling,
    LemmaProbe,
    ExpanderReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeKind {
    EdgePersistence,
    PathInfection,
    WindowProb,
    StarScaling,
}

/// Parameter axes. Which ones an experiment reads depends on its kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    #[serde(default)]
    pub lambda: Vec<f64>,
    /// `inf` selects SIS mode.
    #[serde(default)]
    pub alpha: Vec<f64>,
    #[serde(default)]
    pub n: Vec<usize>,
    /// Window probe times.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub x: Vec<f64>,
    /// Path lengths for the path-infection probe.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub r: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepOptions {
    /// Graphs sampled per cell; replica `i` runs on graph `i mod graphs`.
    #[serde(default = "one")]
    pub graphs: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { graphs: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareOptions {
    /// The second degree law.
    pub distribution: DistributionSpec,
    /// Replace a Poisson mean with the mean of the first law.
    #[serde(default)]
    pub match_mean: bool,
    #[serde(default = "default_resamples")]
    pub resamples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeOptions {
    #[serde(default = "default_node_budget")]
    pub node_budget: usize,
    /// Largest reinfection count tracked; the curve uses powers of two up to it.
    #[serde(default = "default_target")]
    pub target: usize,
    /// Where the plateau is read off the curve.
    #[serde(default = "default_plateau")]
    pub plateau_k: usize,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
}

impl Default for TreeOptions {
    fn default() -> Self {
        Self {
            node_budget: default_node_budget(),
            target: default_target(),
            plateau_k: default_plateau(),
            epsilon: default_epsilon(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeOptions {
    pub which: ProbeKind,
    /// Edge persistence runs for `duration_factor * K`.
    #[serde(default = "default_duration_factor")]
    pub duration_factor: f64,
    /// Star rounds.
    #[serde(default = "default_rounds")]
    pub rounds: usize,
    /// Predicted failure ratio between consecutive star sizes and the
    /// multiplicative tolerance around it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicted_ratio: Option<f64>,
    #[serde(default = "default_band")]
    pub band: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StarOptions {
    #[serde(default = "default_rounds")]
    pub rounds: usize,
}

impl Default for StarOptions {
    fn default() -> Self {
        Self { rounds: default_rounds() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpanderOptions {
    #[serde(default = "default_k")]
    pub k: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_cert_trials")]
    pub cert_trials: usize,
    /// `f(M) = tail_factor * M`.
    #[serde(default = "default_tail_factor")]
    pub tail_factor: f64,
    /// Force this `M` instead of the admissible one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u64>,
}

impl Default for ExpanderOptions {
    fn default() -> Self {
        Self {
            k: default_k(),
            beta: default_beta(),
            cert_trials: default_cert_trials(),
            tail_factor: default_tail_factor(),
            m: None,
        }
    }
}

/// One experiment, as read from a TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub trials: usize,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event_budget: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distribution: Option<DistributionSpec>,
    #[serde(default)]
    pub grid: Grid,
    #[serde(default)]
    pub sweep: SweepOptions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare: Option<CompareOptions>,
    #[serde(default)]
    pub tree: TreeOptions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeOptions>,
    #[serde(default)]
    pub star: StarOptions,
    #[serde(default)]
    pub expander: ExpanderOptions,
}

fn one() -> usize {
    1
}
fn default_horizon() -> f64 {
    1e4
}
fn default_resamples() -> usize {
    2000
}
fn default_node_budget() -> usize {
    DEFAULT_NODE_BUDGET
}
fn default_target() -> usize {
    256
}
fn default_plateau() -> usize {
    64
}
fn default_epsilon() -> f64 {
    0.1
}
fn default_duration_factor() -> f64 {
    0.1
}
fn default_rounds() -> usize {
    10
}
fn default_band() -> f64 {
    2.0
}
fn default_k() -> f64 {
    2.0
}
fn default_beta() -> f64 {
    0.1
}
fn default_cert_trials() -> usize {
    10_000
}
fn default_tail_factor() -> f64 {
    2.0
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind) -> Self {
        toml::from_str(&format!("kind = \"{}\"", kind.name())).expect("defaults parse")
    }

    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io { path: path.to_path_buf(), source })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// `(lambda, alpha)` pairs in grid order.
    pub fn rate_pairs(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for &l in &self.grid.lambda {
            for &a in &self.grid.alpha {
                out.push((l, a));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.trials == 0 {
            return Err(HarnessError::NoTrials);
        }
        if !(self.horizon > 0.0) {
            return Err(HarnessError::BadHorizon(self.horizon));
        }
        for (l, a) in self.rate_pairs() {
            SirsParams::new(l, a)?;
        }
        let need = |ok: bool, what: &'static str| if ok { Ok(()) } else { Err(HarnessError::Missing(what)) };
        let rates = !self.grid.lambda.is_empty() && !self.grid.alpha.is_empty();
        match self.kind {
            ExperimentKind::SurvivalSweep | ExperimentKind::HeavyTailCompare => {
                need(self.distribution.is_some(), "distribution")?;
                need(rates, "grid.lambda and grid.alpha")?;
                need(!self.grid.n.is_empty(), "grid.n")?;
                need(self.sweep.graphs >= 1, "sweep.graphs >= 1")?;
                if self.kind == ExperimentKind::HeavyTailCompare {
                    need(self.compare.is_some(), "compare")?;
                }
            }
            ExperimentKind::TreeStrongSurvival => {
                need(self.distribution.is_some(), "distribution")?;
                need(rates, "grid.lambda and grid.alpha")?;
                need(self.tree.plateau_k <= self.tree.target, "tree.plateau_k <= tree.target")?;
            }
            ExperimentKind::StarScaling => {
                need(rates, "grid.lambda and grid.alpha")?;
                need(!self.grid.n.is_empty(), "grid.n")?;
            }
            ExperimentKind::LemmaProbe => {
                let probe = self.probe.as_ref().ok_or(HarnessError::Missing("probe"))?;
                need(rates, "grid.lambda and grid.alpha")?;
                match probe.which {
                    ProbeKind::WindowProb => need(!self.grid.x.is_empty(), "grid.x")?,
                    ProbeKind::PathInfection => need(!self.grid.r.is_empty(), "grid.r")?,
                    ProbeKind::StarScaling => need(self.grid.n.len() >= 2, "at least two grid.n values")?,
                    ProbeKind::EdgePersistence => {}
                }
                if probe.which != ProbeKind::StarScaling && self.rate_pairs().iter().any(|p| p.1.is_infinite()) {
                    return Err(HarnessError::Missing("finite grid.alpha"));
                }
            }
            ExperimentKind::ExpanderReport => {
                need(self.distribution.is_some(), "distribution")?;
                need(!self.grid.n.is_empty(), "grid.n")?;
            }
        }
        Ok(())
    }
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::SurvivalSweep => "survival-sweep",
            ExperimentKind::HeavyTailCompare => "heavy-tail-compare",
            ExperimentKind::TreeStrongSurvival => "tree-strong-survival",
            ExperimentKind::StarScaling => "star-scaling",
            ExperimentKind::LemmaProbe => "lemma-probe",
            ExperimentKind::ExpanderReport => "expander-report",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SWEEP: &str = r#"
kind = "survival-sweep"
seed = 11
trials = 20
horizon = 100.0

[distribution]
kind = "poisson"
mean = 3.0

[grid]
lambda = [2.0]
alpha = [1.0, inf]
n = [10, 20]
"#;

    #[test]
    fn parses_and_roundtrips() {
        let cfg = ExperimentConfig::from_toml(SWEEP).unwrap();
        assert_eq!(cfg.kind, ExperimentKind::SurvivalSweep);
        assert_eq!(cfg.rate_pairs(), vec![(2.0, 1.0), (2.0, f64::INFINITY)]);
        assert_eq!(cfg.sweep.graphs, 1);
        let back = ExperimentConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn rejects_bad_configs() {
        let zero = SWEEP.replace("trials = 20", "trials = 0");
        assert!(matches!(ExperimentConfig::from_toml(&zero), Err(HarnessError::NoTrials)));
        let neg = SWEEP.replace("lambda = [2.0]", "lambda = [-2.0]");
        assert!(matches!(ExperimentConfig::from_toml(&neg), Err(HarnessError::Dynamics(_))));
        let typo = SWEEP.replace("horizon", "horizn");
        assert!(matches!(ExperimentConfig::from_toml(&typo), Err(HarnessError::Toml(_))));
        let no_n = SWEEP.replace("n = [10, 20]", "");
        assert!(matches!(ExperimentConfig::from_toml(&no_n), Err(HarnessError::Missing("grid.n"))));
    }

    #[test]
    fn defaults_for_bare_kind() {
        let cfg = ExperimentConfig::new(ExperimentKind::TreeStrongSurvival);
        assert_eq!(cfg.trials, 1);
        assert_eq!(cfg.tree.target, 256);
        assert_eq!(cfg.tree.node_budget, DEFAULT_NODE_BUDGET);
    }
}
