//! Scenario description, observation model and Gaussian log-likelihood
//! arithmetic shared by every other module.

use std::fmt;
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::detectors::{GlrConfig, QuantizerConfig};
use crate::error::{config_err, Result};
use crate::sim::FadingConfig;

pub const DEFAULT_MAX_HORIZON: u32 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Hypothesis {
    H0,
    H1,
}

impl Hypothesis {
    pub fn other(self) -> Self {
        match self {
            Hypothesis::H0 => Hypothesis::H1,
            Hypothesis::H1 => Hypothesis::H0,
        }
    }
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Hypothesis::H0 => "H0",
            Hypothesis::H1 => "H1",
        })
    }
}

/// One sensing node: observations are `Normal(0, σ²)` when the channel is
/// idle and `Normal(θ, σ²)` when the primary transmits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeParams {
    /// θ_l, also the mean the node's likelihood ratio is designed for.
    pub post_change_mean: f64,
    pub noise_std: f64,
    /// Informational only; `post_change_mean` is authoritative.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel_gain_db: Option<f64>,
}

impl NodeParams {
    pub fn new(post_change_mean: f64, noise_std: f64) -> Self {
        Self {
            post_change_mean,
            noise_std,
            channel_gain_db: None,
        }
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_std * self.noise_std
    }

    /// Log-likelihood ratio of one observation for this node's design mean.
    #[inline]
    pub fn llr(&self, x: f64) -> f64 {
        let theta = self.post_change_mean;
        let var = self.noise_var();
        theta * x / var - theta * theta / (2.0 * var)
    }

    /// Mean LLR increment under H1 (the KL divergence), δ_l = θ²/(2σ²).
    pub fn expected_drift(&self) -> f64 {
        self.post_change_mean * self.post_change_mean / (2.0 * self.noise_var())
    }

    /// Variance of the LLR increment, Σ_l² = θ²/σ².
    pub fn drift_variance(&self) -> f64 {
        self.post_change_mean * self.post_change_mean / self.noise_var()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.noise_std > 0.0 && self.noise_std.is_finite()) {
            return Err(config_err(format!(
                "node noise_std must be positive and finite, got {}",
                self.noise_std
            )));
        }
        if !self.post_change_mean.is_finite() {
            return Err(config_err("node post_change_mean must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DriftConvention {
    /// Fusion increment `2μy`, regardless of the receiver noise variance.
    #[default]
    PaperLiteral,
    /// Exact LLR of `Normal(μ, σ²)` against `Normal(-μ, σ²)`: `2μy/σ²`.
    ExactLlr,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FusionChannelParams {
    /// Variance σ² of the receiver noise Z_k.
    pub noise_variance: f64,
    /// μ, with design means μ₁ = +μ and μ₀ = −μ.
    #[serde(default = "default_design_mean")]
    pub design_mean: f64,
    #[serde(default)]
    pub drift_convention: DriftConvention,
}

fn default_design_mean() -> f64 {
    1.0
}

impl FusionChannelParams {
    pub fn new(noise_variance: f64) -> Self {
        Self {
            noise_variance,
            design_mean: 1.0,
            drift_convention: DriftConvention::PaperLiteral,
        }
    }

    /// Multiplier `k` such that the fusion increment is `k·y`.
    pub fn increment_gain(&self) -> f64 {
        let g = 2.0 * self.design_mean;
        match self.drift_convention {
            DriftConvention::PaperLiteral => g,
            DriftConvention::ExactLlr => g / self.noise_variance,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.noise_variance > 0.0 && self.noise_variance.is_finite()) {
            return Err(config_err("fusion noise_variance must be positive"));
        }
        if !(self.design_mean > 0.0 && self.design_mean.is_finite()) {
            return Err(config_err("fusion design_mean must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    DualSprt,
    SprtCsprt,
    DualCsprt,
    GlrSprt,
    GlrCsprt,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::DualSprt,
        Algorithm::SprtCsprt,
        Algorithm::DualCsprt,
        Algorithm::GlrSprt,
        Algorithm::GlrCsprt,
    ];

    pub fn is_glr(self) -> bool {
        matches!(self, Algorithm::GlrSprt | Algorithm::GlrCsprt)
    }

    /// Whether the fusion center runs the clamped pair rather than one sum.
    pub fn clamped_fusion(self) -> bool {
        matches!(
            self,
            Algorithm::SprtCsprt | Algorithm::DualCsprt | Algorithm::GlrCsprt
        )
    }

    /// Whether nodes transmit from the four-level alphabets.
    pub fn four_level(self) -> bool {
        self.clamped_fusion()
    }

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::DualSprt => "DualSPRT",
            Algorithm::SprtCsprt => "SPRT-CSPRT",
            Algorithm::DualCsprt => "DualCSPRT",
            Algorithm::GlrSprt => "GLR-SPRT",
            Algorithm::GlrCsprt => "GLR-CSPRT",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        Ok(match norm.as_str() {
            "dualsprt" => Algorithm::DualSprt,
            "sprtcsprt" => Algorithm::SprtCsprt,
            "dualcsprt" => Algorithm::DualCsprt,
            "glrsprt" => Algorithm::GlrSprt,
            "glrcsprt" => Algorithm::GlrCsprt,
            _ => return Err(config_err(format!("unknown algorithm `{s}`"))),
        })
    }
}

/// Drift biases added to the clamped fusion statistics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bias {
    /// D1, added to the upper (H1) statistic.
    #[serde(default)]
    pub up: f64,
    /// D0, added to the lower (H0) statistic.
    #[serde(default)]
    pub down: f64,
}

/// Full experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "default_id")]
    pub id: String,
    pub algorithm: Algorithm,
    /// γ for SPRT-type nodes. GLR nodes ignore it (their boundary is `g(c·n)`).
    pub local_threshold: f64,
    /// β.
    pub fusion_threshold: f64,
    pub true_hypothesis: Hypothesis,
    #[serde(default = "default_horizon")]
    pub max_horizon: u32,
    pub fusion: FusionChannelParams,
    #[serde(default)]
    pub bias: Bias,
    #[serde(default)]
    pub quantizer: QuantizerConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub glr: Option<GlrConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fading: Option<FadingConfig>,
    pub nodes: Vec<NodeParams>,
}

fn default_id() -> String {
    "scenario".to_string()
}

fn default_horizon() -> u32 {
    DEFAULT_MAX_HORIZON
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(config_err("scenario needs at least one node"));
        }
        for (l, node) in self.nodes.iter().enumerate() {
            node.validate()
                .map_err(|e| config_err(format!("nodes[{l}]: {e}")))?;
        }
        self.fusion.validate()?;
        if !(self.fusion_threshold > 0.0 && self.fusion_threshold.is_finite()) {
            return Err(config_err("fusion_threshold must be positive"));
        }
        if !self.algorithm.is_glr()
            && !(self.local_threshold > 0.0 && self.local_threshold.is_finite())
        {
            return Err(config_err("local_threshold must be positive"));
        }
        if self.max_horizon == 0 {
            return Err(config_err("max_horizon must be at least 1"));
        }
        if !(self.bias.up.is_finite() && self.bias.down.is_finite()) {
            return Err(config_err("bias terms must be finite"));
        }
        self.quantizer.validate()?;
        match (&self.glr, self.algorithm.is_glr()) {
            (Some(glr), _) => glr.validate()?,
            (None, true) => {
                return Err(config_err(format!(
                    "algorithm {} requires a [glr] table",
                    self.algorithm
                )))
            }
            (None, false) => {}
        }
        if let Some(f) = &self.fading {
            f.validate()?;
        }
        Ok(())
    }

    pub fn with_thresholds(&self, local: f64, beta: f64) -> Self {
        let mut cfg = self.clone();
        if self.algorithm.is_glr() {
            if let Some(glr) = cfg.glr.as_mut() {
                glr.cost = local;
            }
        } else {
            cfg.local_threshold = local;
        }
        cfg.fusion_threshold = beta;
        cfg
    }

    /// The knob that plays the role of the local threshold: γ, or the GLR
    /// observation cost c.
    pub fn local_parameter(&self) -> f64 {
        match (&self.glr, self.algorithm.is_glr()) {
            (Some(glr), true) => glr.cost,
            _ => self.local_threshold,
        }
    }

    pub fn with_truth(&self, truth: Hypothesis) -> Self {
        let mut cfg = self.clone();
        cfg.true_hypothesis = truth;
        cfg
    }
}

/// Exact LLR of `Normal(θ, σ²)` against `Normal(0, σ²)` at `x`.
pub fn gaussian_llr(x: f64, theta: f64, sigma_sq: f64) -> Result<f64> {
    if !(sigma_sq > 0.0) {
        return Err(config_err(format!(
            "variance must be positive, got {sigma_sq}"
        )));
    }
    Ok(theta * x / sigma_sq - theta * theta / (2.0 * sigma_sq))
}

#[inline]
pub fn fusion_llr_increment(y: f64, fusion: &FusionChannelParams) -> f64 {
    fusion.increment_gain() * y
}

/// One observation at a node. `effective_mean` is the realized post-change
/// mean (the node's own mean unless a fading draw overrides it).
#[inline]
pub fn sample_observation<R: Rng + ?Sized>(
    hyp: Hypothesis,
    node: &NodeParams,
    effective_mean: f64,
    rng: &mut R,
) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    match hyp {
        Hypothesis::H0 => node.noise_std * z,
        Hypothesis::H1 => effective_mean + node.noise_std * z,
    }
}
