//! Monte Carlo engine: end-to-end trials, metric estimation, slow-fading
//! draws and threshold calibration.

mod calibrate;
mod engine;
mod ladder;
mod metrics;
mod trial;

use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{config_err, Result};

pub use calibrate::{
    calibrate_thresholds, CalibrationBudget, CalibrationOutcome, CandidateOutcome, ErrorPooling,
};
pub use engine::MonteCarlo;
pub use ladder::{LadderSet, LadderOutcome};
pub use metrics::{estimate_metrics, wilson_interval, MonteCarloSummary, Tally, WILSON_Z95};
pub use trial::{run_trial, TrialResult};

/// Law of the post-change mean θ under slow fading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "distribution", rename_all = "kebab-case")]
pub enum FadingDistribution {
    /// θ ~ Exponential with rate λ (mean 1/λ).
    ExponentialMean { rate: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FadingConfig {
    #[serde(flatten)]
    pub distribution: FadingDistribution,
    /// One draw per node per trial, held for the whole trial.
    #[serde(default = "default_true")]
    pub per_trial: bool,
}

fn default_true() -> bool {
    true
}

impl FadingConfig {
    pub fn exponential(rate: f64) -> Self {
        Self {
            distribution: FadingDistribution::ExponentialMean { rate },
            per_trial: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let FadingDistribution::ExponentialMean { rate } = self.distribution;
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(config_err(format!("fading rate must be positive, got {rate}")));
        }
        if !self.per_trial {
            return Err(config_err("only slow fading (per_trial = true) is supported"));
        }
        Ok(())
    }

    /// Median of θ; the natural design value for a GLR θ₁.
    pub fn median(&self) -> f64 {
        let FadingDistribution::ExponentialMean { rate } = self.distribution;
        std::f64::consts::LN_2 / rate
    }
}

/// Per-node post-change means for one trial.
pub fn draw_fading<R: Rng + ?Sized>(fading: &FadingConfig, nodes: usize, rng: &mut R) -> Vec<f64> {
    let FadingDistribution::ExponentialMean { rate } = fading.distribution;
    let exp = Exp::new(rate).expect("validated rate");
    (0..nodes).map(|_| exp.sample(rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{RandomnessContract, StreamRole};

    fn draws(rate: f64, n: usize) -> Vec<f64> {
        let mut rng = RandomnessContract::new(5, 0)
            .streams()
            .stream(StreamRole::Fading);
        draw_fading(&FadingConfig::exponential(rate), n, &mut rng)
    }

    #[test]
    fn unit_rate_median_is_ln2() {
        let mut v = draws(1.0, 1_000_000);
        v.sort_by(f64::total_cmp);
        let median = 0.5 * (v[499_999] + v[500_000]);
        let ln2 = std::f64::consts::LN_2;
        assert!((median - ln2).abs() < 0.005 * ln2, "median {median}");
        assert_eq!(FadingConfig::exponential(1.0).median(), ln2);
    }

    #[test]
    fn rate_two_mean_is_half() {
        let v = draws(2.0, 1_000_000);
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        assert!((mean - 0.5).abs() < 0.005, "mean {mean}");
    }

    #[test]
    fn fading_toml_form() {
        let f: FadingConfig =
            toml::from_str("distribution = \"exponential-mean\"\nrate = 1.0\nper_trial = true")
                .unwrap();
        assert_eq!(f, FadingConfig::exponential(1.0));
        assert!(FadingConfig::exponential(0.0).validate().is_err());
        let fast = FadingConfig {
            per_trial: false,
            ..FadingConfig::exponential(1.0)
        };
        assert!(fast.validate().is_err());
    }
}
