//! Closed-form approximations for SPRT-CSPRT: first passage of the reflected
//! fusion walk, Gaussian local passage times and their order statistics,
//! the piecewise-constant drift schedule, and the resulting P_FA and E_DD.

mod local;
mod pfa;
mod renewal;
mod schedule;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Algorithm, ScenarioConfig};

pub use local::{local_passage_cdf, order_stat_epoch_means, LocalPassageLaw};
pub use pfa::{pfa_analytic, PfaMethod};
pub use renewal::{reflected_passage_cdf, renewal_first_passage_mean, RenewalGrid};
pub use schedule::{build_epoch_schedule, edd_analytic, Epoch, EpochSchedule};

pub(crate) fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

pub(crate) fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Gaussian law of one fusion increment within a drift segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IncrementLaw {
    pub mean: f64,
    pub variance: f64,
}

impl IncrementLaw {
    pub fn new(mean: f64, variance: f64) -> Result<Self> {
        if !(variance > 0.0 && variance.is_finite() && mean.is_finite()) {
            return Err(Error::Domain(format!(
                "increment law needs finite mean and positive variance, got ({mean}, {variance})"
            )));
        }
        Ok(Self { mean, variance })
    }

    /// Law of `−S`: a walk toward a negative threshold becomes one toward a
    /// positive threshold of the same magnitude.
    pub fn negated(self) -> Self {
        Self {
            mean: -self.mean,
            variance: self.variance,
        }
    }

    pub fn std(&self) -> f64 {
        self.variance.sqrt()
    }

    #[inline]
    pub fn cdf(&self, x: f64) -> f64 {
        std_normal_cdf((x - self.mean) / self.std())
    }

    #[inline]
    pub fn pdf(&self, x: f64) -> f64 {
        let sd = self.std();
        std_normal_pdf((x - self.mean) / sd) / sd
    }

    /// Increment of the fusion statistic before any node transmits:
    /// `gain·Z + bias` with `Z ~ Normal(0, σ²)`.
    pub fn pre_transmission(cfg: &ScenarioConfig, bias: f64) -> Result<Self> {
        let gain = cfg.fusion.increment_gain();
        Self::new(bias, gain * gain * cfg.fusion.noise_variance)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    /// Renewal grid step as a fraction of β.
    pub grid_fraction: f64,
    /// Stop the P_FA series once P(no node has crossed by k) drops below this.
    pub truncation: f64,
    pub pfa_method: PfaMethod,
    /// Composite Simpson intervals for the order-statistic integrals.
    pub simpson_intervals: usize,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            grid_fraction: 1e-3,
            truncation: 1e-12,
            pfa_method: PfaMethod::PassageKernel,
            simpson_intervals: 8_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticSummary {
    pub pfa: f64,
    pub edd: f64,
    /// Mean first-passage time L(0) of the pre-transmission reflected walk.
    pub passage_mean: f64,
    pub epoch_means: Vec<f64>,
    pub schedule: EpochSchedule,
}

pub(crate) fn ensure_analyzable(cfg: &ScenarioConfig) -> Result<()> {
    if cfg.algorithm != Algorithm::SprtCsprt {
        return Err(Error::Inapplicable(format!(
            "the analytic pipeline covers SPRT-CSPRT only, not {}",
            cfg.algorithm
        )));
    }
    if cfg.fading.is_some() {
        return Err(Error::Inapplicable(
            "the analytic pipeline assumes fixed post-change means".into(),
        ));
    }
    cfg.validate()
}

/// P_FA and E_DD under H1 for an SPRT-CSPRT scenario.
pub fn analyze(cfg: &ScenarioConfig, opts: &AnalysisOptions) -> Result<AnalyticSummary> {
    ensure_analyzable(cfg)?;
    let laws: Vec<LocalPassageLaw> = cfg
        .nodes
        .iter()
        .map(|n| LocalPassageLaw::new(n, cfg.local_threshold))
        .collect::<Result<_>>()?;
    let epoch_means = order_stat_epoch_means(&laws, opts.simpson_intervals)?;
    let schedule = build_epoch_schedule(cfg, &epoch_means)?;
    let edd = edd_analytic(&schedule, cfg.fusion_threshold)?;
    let beta = cfg.fusion_threshold;
    let law = IncrementLaw::pre_transmission(cfg, cfg.bias.down)?.negated();
    let grid = renewal_first_passage_mean(law, beta, beta * opts.grid_fraction)?;
    let pfa = pfa_analytic(cfg, opts)?;
    Ok(AnalyticSummary {
        pfa,
        edd,
        passage_mean: grid.l0(),
        epoch_means,
        schedule,
    })
}
