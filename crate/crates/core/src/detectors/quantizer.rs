use serde::{Deserialize, Serialize};

use crate::error::{config_err, Result};
use crate::model::NodeParams;

/// Band half-width Δ for the four-level quantizer. Bands are `2Δ` wide.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BandWidth {
    Fixed(f64),
    Rule(BandWidthRule),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BandWidthRule {
    /// Δ_l = δ_l, the node's mean LLR increment.
    ExpectedDrift,
}

impl BandWidth {
    pub fn resolve(self, node: &NodeParams) -> f64 {
        match self {
            BandWidth::Fixed(d) => d,
            BandWidth::Rule(BandWidthRule::ExpectedDrift) => node.expected_drift(),
        }
    }
}

impl Default for BandWidth {
    fn default() -> Self {
        BandWidth::Rule(BandWidthRule::ExpectedDrift)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantizerConfig {
    /// b¹₁..b¹₄, strictly ascending.
    #[serde(default = "default_upper")]
    pub upper_levels: [f64; 4],
    /// b⁰₁..b⁰₄, strictly descending.
    #[serde(default = "default_lower")]
    pub lower_levels: [f64; 4],
    #[serde(default)]
    pub delta_up: BandWidth,
    #[serde(default)]
    pub delta_down: BandWidth,
    /// (b₁, b₀) for the single-level algorithms (DualSPRT, GLR-SPRT).
    #[serde(default = "default_binary")]
    pub binary_levels: [f64; 2],
}

fn default_upper() -> [f64; 4] {
    [1.0, 2.0, 3.0, 4.0]
}

fn default_lower() -> [f64; 4] {
    [-1.0, -2.0, -3.0, -4.0]
}

fn default_binary() -> [f64; 2] {
    [1.0, -1.0]
}

impl Default for QuantizerConfig {
    fn default() -> Self {
        Self {
            upper_levels: default_upper(),
            lower_levels: default_lower(),
            delta_up: BandWidth::default(),
            delta_down: BandWidth::default(),
            binary_levels: default_binary(),
        }
    }
}

/// Band half-widths resolved for one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeBands {
    pub up: f64,
    pub down: f64,
}

impl QuantizerConfig {
    pub fn with_fixed_delta(delta: f64) -> Self {
        Self {
            delta_up: BandWidth::Fixed(delta),
            delta_down: BandWidth::Fixed(delta),
            ..Self::default()
        }
    }

    pub fn bands(&self, node: &NodeParams) -> NodeBands {
        NodeBands {
            up: self.delta_up.resolve(node),
            down: self.delta_down.resolve(node),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.upper_levels.windows(2).all(|w| w[0] < w[1]) {
            return Err(config_err("upper_levels must be strictly ascending"));
        }
        if !self.lower_levels.windows(2).all(|w| w[0] > w[1]) {
            return Err(config_err("lower_levels must be strictly descending"));
        }
        for (name, bw) in [("delta_up", self.delta_up), ("delta_down", self.delta_down)] {
            if let BandWidth::Fixed(d) = bw {
                if !(d > 0.0 && d.is_finite()) {
                    return Err(config_err(format!("{name} must be positive, got {d}")));
                }
            }
        }
        Ok(())
    }

    /// Four-level output for a statistic `w` (left-closed bands of width 2Δ
    /// starting at ±γ; silent strictly between the thresholds).
    #[inline]
    pub fn four_level(&self, w: f64, gamma: f64, bands: NodeBands) -> f64 {
        if w >= gamma {
            self.upper_levels[band_index(w - gamma, bands.up)]
        } else if w <= -gamma {
            self.lower_levels[band_index(-gamma - w, bands.down)]
        } else {
            0.0
        }
    }

    #[inline]
    pub fn binary(&self, w: f64, gamma: f64) -> f64 {
        if w >= gamma {
            self.binary_levels[0]
        } else if w <= -gamma {
            self.binary_levels[1]
        } else {
            0.0
        }
    }
}

#[inline]
fn band_index(excess: f64, delta: f64) -> usize {
    let j = (excess / (2.0 * delta)).floor();
    if j >= 3.0 {
        3
    } else {
        j.max(0.0) as usize
    }
}

/// Node output for an SPRT statistic under the four-level alphabet.
pub fn quantize_sprt_output(w: f64, q: &QuantizerConfig, node: &NodeParams, gamma: f64) -> f64 {
    q.four_level(w, gamma, q.bands(node))
}
