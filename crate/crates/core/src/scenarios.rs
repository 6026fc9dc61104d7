//! Built-in scenarios behind the table reproductions.

use crate::detectors::{Boundary, GlrConfig, QuantizerConfig};
use crate::golden::{self, Table4Row};
use crate::model::{
    Algorithm, FusionChannelParams, Hypothesis, NodeParams, ScenarioConfig, DEFAULT_MAX_HORIZON,
};
use crate::sim::FadingConfig;

fn five_nodes(means: &[f64]) -> Vec<NodeParams> {
    means.iter().map(|&m| NodeParams::new(m, 1.0)).collect()
}

fn base(id: String, algorithm: Algorithm, fusion_variance: f64) -> ScenarioConfig {
    ScenarioConfig {
        id,
        algorithm,
        local_threshold: 1.0,
        fusion_threshold: 1.0,
        true_hypothesis: Hypothesis::H1,
        max_horizon: DEFAULT_MAX_HORIZON,
        fusion: FusionChannelParams::new(fusion_variance),
        bias: Default::default(),
        quantizer: QuantizerConfig::default(),
        glr: None,
        fading: None,
        nodes: five_nodes(&golden::NODE_MEANS),
    }
}

/// Fixed-SNR comparison: γ fixed, β left to calibration.
pub fn table1(algorithm: Algorithm) -> ScenarioConfig {
    let mut cfg = base(
        format!("table1-{}", algorithm.name().to_ascii_lowercase()),
        algorithm,
        golden::TABLE1_FUSION_VARIANCE,
    );
    cfg.local_threshold = golden::TABLE1_GAMMA;
    cfg.fusion_threshold = 20.0;
    cfg
}

/// SPRT-CSPRT at one published (γ, β) row.
pub fn table4(row: &Table4Row) -> ScenarioConfig {
    let mut cfg = base(
        format!("table4-g{}-b{}", row.gamma, row.beta),
        Algorithm::SprtCsprt,
        golden::UNIT_FUSION_VARIANCE,
    );
    cfg.local_threshold = row.gamma;
    cfg.fusion_threshold = row.beta;
    cfg
}

/// GLR node design for the unknown-SNR comparison: composite H1 θ ≥ θ₁
/// with θ₁ the weakest node's mean.
pub fn table2_glr() -> GlrConfig {
    GlrConfig {
        theta0: 0.0,
        theta1: 0.5,
        cost: 0.01,
        clamp_range: [0.0, 2.0],
        delta: golden::GLR_DELTA,
        boundary: Boundary::LogInverse,
    }
}

/// Unknown-SNR comparison; thresholds (γ or c, and β) are calibrated.
pub fn table2(algorithm: Algorithm) -> ScenarioConfig {
    let mut cfg = base(
        format!("table2-{}", algorithm.name().to_ascii_lowercase()),
        algorithm,
        golden::UNIT_FUSION_VARIANCE,
    );
    if algorithm.is_glr() {
        cfg.glr = Some(table2_glr());
    }
    cfg
}

/// Slow fading: every node's post-change mean is drawn from Exp(1) once
/// per trial. Nodes are designed for the median ln 2.
pub fn table3(algorithm: Algorithm) -> ScenarioConfig {
    let fading = FadingConfig::exponential(golden::TABLE3_FADING_RATE);
    let median = fading.median();
    let mut cfg = base(
        format!("table3-{}", algorithm.name().to_ascii_lowercase()),
        algorithm,
        golden::UNIT_FUSION_VARIANCE,
    );
    cfg.nodes = five_nodes(&[median; 5]);
    cfg.fading = Some(fading);
    if algorithm.is_glr() {
        cfg.glr = Some(GlrConfig {
            theta1: median,
            ..table2_glr()
        });
    }
    cfg
}
