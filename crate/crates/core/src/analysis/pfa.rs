//! False alarm under H1: before the first node transmits, F⁰ is a
//! zero-drift walk reflected at 0 and the error happens if it reaches −β
//! before the first local crossing t₁. Later segments have positive drift
//! and contribute little, so only this first term is computed.

use serde::{Deserialize, Serialize};

use crate::analysis::{
    ensure_analyzable, reflected_passage_cdf, renewal_first_passage_mean, AnalysisOptions,
    IncrementLaw, LocalPassageLaw,
};
use crate::error::Result;
use crate::model::ScenarioConfig;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PfaMethod {
    /// `P(τ_β ≤ t₁) = Σ_k P(τ_β ≤ k)·P(k−1 < t₁ ≤ k)` with the passage law
    /// from the discretized walk kernel and t₁ the minimum of the
    /// Gaussian local passage times.
    #[default]
    PassageKernel,
    /// `Σ_k (1 − e^{−λ_β k})·P(t₁ > k)`, τ_β taken exponential with rate
    /// `1/L(0)`. Not a probability in general (it is not bounded by 1);
    /// kept for comparison.
    ExponentialSeries,
}

/// `P(t₁ > k)` for every node's passage law.
fn none_crossed(laws: &[LocalPassageLaw], k: f64) -> f64 {
    laws.iter().map(|l| 1.0 - l.cdf(k)).product()
}

pub fn pfa_analytic(cfg: &ScenarioConfig, opts: &AnalysisOptions) -> Result<f64> {
    ensure_analyzable(cfg)?;
    let beta = cfg.fusion_threshold;
    let step = beta * opts.grid_fraction;
    let law = IncrementLaw::pre_transmission(cfg, cfg.bias.down)?.negated();
    let laws: Vec<LocalPassageLaw> = cfg
        .nodes
        .iter()
        .map(|n| LocalPassageLaw::new(n, cfg.local_threshold))
        .collect::<Result<_>>()?;
    // Series length: until P(t₁ > k) is negligible.
    let mut horizon = 1usize;
    while none_crossed(&laws, horizon as f64) >= opts.truncation {
        horizon += 1;
    }
    match opts.pfa_method {
        PfaMethod::PassageKernel => {
            let cdf = reflected_passage_cdf(law, beta, step, horizon)?;
            let mut prev = none_crossed(&laws, 0.0);
            let mut total = 0.0;
            for (k, passage) in (1..=horizon).zip(cdf) {
                let surv = none_crossed(&laws, k as f64);
                total += passage * (prev - surv);
                prev = surv;
            }
            Ok(total)
        }
        PfaMethod::ExponentialSeries => {
            let lambda = renewal_first_passage_mean(law, beta, step)?.lambda();
            Ok((1..=horizon)
                .map(|k| (1.0 - (-lambda * k as f64).exp()) * none_crossed(&laws, k as f64))
                .sum())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::golden::TABLE4;
    use crate::scenarios;

    #[test]
    fn published_rows_are_close() {
        let opts = AnalysisOptions::default();
        for row in &TABLE4 {
            let p = pfa_analytic(&scenarios::table4(row), &opts).unwrap();
            assert!(p > 0.0 && p < 0.05, "row γ={} β={}: {p}", row.gamma, row.beta);
        }
    }

    #[test]
    fn decreases_in_both_thresholds() {
        let opts = AnalysisOptions::default();
        let at = |g: f64, b: f64| {
            let mut cfg = scenarios::table4(&TABLE4[0]);
            cfg.local_threshold = g;
            cfg.fusion_threshold = b;
            pfa_analytic(&cfg, &opts).unwrap()
        };
        assert!(at(15.0, 30.0) < at(15.0, 26.0));
        assert!(at(12.0, 27.0) < at(14.0, 27.0));
    }

    #[test]
    fn exponential_series_exceeds_one_on_published_row() {
        // The series adds (1 − e^{−λk}) over every k with P(t₁ > k) ≈ 1;
        // with λ ≈ 1/260 this passes 1 long before t₁ is likely.
        let opts = AnalysisOptions {
            pfa_method: PfaMethod::ExponentialSeries,
            ..Default::default()
        };
        let p = pfa_analytic(&scenarios::table4(&TABLE4[0]), &opts).unwrap();
        assert!(p > 1.0, "{p}");
    }

    #[test]
    fn other_algorithms_are_inapplicable() {
        let mut cfg = scenarios::table4(&TABLE4[0]);
        cfg.algorithm = crate::model::Algorithm::DualCsprt;
        assert!(matches!(
            pfa_analytic(&cfg, &AnalysisOptions::default()),
            Err(crate::Error::Inapplicable(_))
        ));
    }
}
