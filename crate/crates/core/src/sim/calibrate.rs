use serde::{Deserialize, Serialize};

use crate::error::{usage_err, Error, Result};
use crate::model::{Hypothesis, ScenarioConfig};
use crate::sim::{wilson_interval, LadderSet, MonteCarlo, Tally, WILSON_Z95};

/// Which error rate the target constrains.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorPooling {
    /// Error rate under the scenario's own true hypothesis.
    #[default]
    TrueHypothesis,
    /// Errors under H0 and H1 pooled over equal trial counts; delay is the
    /// average of the two conditional delays.
    Pooled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationBudget {
    /// Trials per hypothesis per local-threshold candidate.
    pub trials: u64,
    /// γ values (or GLR costs c) to try.
    pub local_candidates: Vec<f64>,
    /// Initial β search interval; the upper end doubles while the target
    /// is not bracketed.
    pub beta_range: (f64, f64),
    pub max_doublings: u32,
    pub bisection_steps: u32,
    pub master_seed: u64,
    pub workers: usize,
    pub pooling: ErrorPooling,
}

impl CalibrationBudget {
    pub fn new(trials: u64, local_candidates: Vec<f64>) -> Self {
        Self {
            trials,
            local_candidates,
            beta_range: (1e-6, 64.0),
            max_doublings: 4,
            bisection_steps: 48,
            master_seed: 0,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            pooling: ErrorPooling::TrueHypothesis,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CandidateOutcome {
    pub local: f64,
    pub beta: f64,
    pub trials: u64,
    pub errors: u64,
    pub achieved_pfa: f64,
    pub pfa_ci95: (f64, f64),
    pub edd: f64,
    pub bracketed: bool,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationOutcome {
    /// Chosen γ, or c for GLR algorithms.
    pub local: f64,
    pub beta: f64,
    pub achieved_pfa: f64,
    pub pfa_ci95: (f64, f64),
    /// Delay on the calibration trials (not an independent estimate).
    pub edd: f64,
    pub candidates: Vec<CandidateOutcome>,
}

impl CalibrationOutcome {
    pub fn apply(&self, cfg: &ScenarioConfig) -> ScenarioConfig {
        cfg.with_thresholds(self.local, self.beta)
    }
}

/// Seed offset for H0 trials under pooled calibration, so the two halves
/// do not share noise.
const H0_SEED_SALT: u64 = 0x5851_F42D_4C95_7F2D;

/// Master seed used for trials under `truth` when both hypotheses are run.
pub(crate) fn hypothesis_seed(master_seed: u64, truth: Hypothesis) -> u64 {
    match truth {
        Hypothesis::H1 => master_seed,
        Hypothesis::H0 => master_seed ^ H0_SEED_SALT,
    }
}

struct Ladders(Vec<LadderSet>);

impl Ladders {
    fn tally(&self, beta: f64) -> (Tally, f64) {
        let tallies: Vec<Tally> = self.0.iter().map(|s| s.tally(beta)).collect();
        let edd = tallies.iter().map(Tally::edd).sum::<f64>() / tallies.len() as f64;
        let total = tallies.iter().copied().fold(Tally::default(), Tally::merge);
        (total, edd)
    }
}

fn record(cfg: &ScenarioConfig, budget: &CalibrationBudget, cap: f64) -> Result<Ladders> {
    let truths = match budget.pooling {
        ErrorPooling::TrueHypothesis => vec![cfg.true_hypothesis],
        ErrorPooling::Pooled => vec![Hypothesis::H1, Hypothesis::H0],
    };
    let sets = truths
        .into_iter()
        .map(|h| {
            let engine = MonteCarlo::new(hypothesis_seed(budget.master_seed, h), budget.workers);
            LadderSet::record(&cfg.with_truth(h), &engine, budget.trials, cap)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Ladders(sets))
}

fn candidate(
    cfg: &ScenarioConfig,
    local: f64,
    target: f64,
    budget: &CalibrationBudget,
) -> Result<CandidateOutcome> {
    let base = cfg.with_thresholds(local, cfg.fusion_threshold);
    let (lo_beta, mut cap) = budget.beta_range;
    let mut ladders = record(&base, budget, cap)?;
    let mut at_cap = ladders.tally(cap);
    let mut doublings = 0;
    while at_cap.0.pfa() > target && doublings < budget.max_doublings {
        cap *= 2.0;
        doublings += 1;
        ladders = record(&base, budget, cap)?;
        at_cap = ladders.tally(cap);
    }
    let outcome = |beta: f64, (t, edd): (Tally, f64), bracketed: bool| {
        let pfa_ci95 = wilson_interval(t.errors, t.trials, WILSON_Z95);
        let within = pfa_ci95.0 <= target && target <= pfa_ci95.1;
        // At the bottom of the range P_FA cannot be pushed any closer.
        let floor = beta == lo_beta && t.pfa() <= target;
        CandidateOutcome {
            local,
            beta,
            trials: t.trials,
            errors: t.errors,
            achieved_pfa: t.pfa(),
            pfa_ci95,
            edd,
            bracketed,
            accepted: bracketed && (within || floor),
        }
    };
    if at_cap.0.pfa() > target {
        return Ok(outcome(cap, at_cap, false));
    }
    let at_lo = ladders.tally(lo_beta);
    if at_lo.0.pfa() <= target {
        return Ok(outcome(lo_beta, at_lo, true));
    }
    // Invariant: pfa(lo) > target ≥ pfa(hi).
    let (mut lo, mut hi, mut at_hi) = (lo_beta, cap, at_cap);
    for _ in 0..budget.bisection_steps {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let at_mid = ladders.tally(mid);
        if at_mid.0.pfa() > target {
            lo = mid;
        } else {
            hi = mid;
            at_hi = at_mid;
        }
    }
    Ok(outcome(hi, at_hi, true))
}

/// Coordinate search: for each local threshold candidate, bisect β on
/// common random numbers for the smallest β meeting the target, then keep
/// the accepted candidate with the smallest delay.
pub fn calibrate_thresholds(
    cfg: &ScenarioConfig,
    target_pfa: f64,
    budget: &CalibrationBudget,
) -> Result<CalibrationOutcome> {
    if !(target_pfa > 0.0 && target_pfa <= 0.5) {
        return Err(usage_err(format!(
            "target P_FA must lie in (0, 0.5], got {target_pfa}"
        )));
    }
    if budget.local_candidates.is_empty() {
        return Err(usage_err("calibration needs at least one local threshold candidate"));
    }
    let (lo, hi) = budget.beta_range;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(usage_err("beta_range must satisfy 0 < lo < hi < inf"));
    }
    let candidates = budget
        .local_candidates
        .iter()
        .map(|&local| candidate(cfg, local, target_pfa, budget))
        .collect::<Result<Vec<_>>>()?;
    let best = candidates
        .iter()
        .filter(|c| c.accepted)
        .min_by(|a, b| a.edd.total_cmp(&b.edd));
    match best {
        Some(b) => Ok(CalibrationOutcome {
            local: b.local,
            beta: b.beta,
            achieved_pfa: b.achieved_pfa,
            pfa_ci95: b.pfa_ci95,
            edd: b.edd,
            candidates,
        }),
        None => {
            let nearest = candidates
                .iter()
                .min_by(|a, b| {
                    (a.achieved_pfa - target_pfa)
                        .abs()
                        .total_cmp(&(b.achieved_pfa - target_pfa).abs())
                })
                .expect("non-empty");
            Err(Error::Calibration {
                target: target_pfa,
                nearest_pfa: nearest.achieved_pfa,
                nearest_local: nearest.local,
                nearest_beta: nearest.beta,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detectors::QuantizerConfig;
    use crate::model::{Algorithm, FusionChannelParams, NodeParams};

    fn small() -> ScenarioConfig {
        ScenarioConfig {
            id: "cal".into(),
            algorithm: Algorithm::SprtCsprt,
            local_threshold: 4.0,
            fusion_threshold: 10.0,
            true_hypothesis: Hypothesis::H1,
            max_horizon: 10_000,
            fusion: FusionChannelParams::new(5.0),
            bias: Default::default(),
            quantizer: QuantizerConfig::default(),
            glr: None,
            fading: None,
            nodes: vec![NodeParams::new(1.0, 1.0), NodeParams::new(0.75, 1.0), NodeParams::new(0.5, 1.0)],
        }
    }

    fn budget(trials: u64, locals: Vec<f64>) -> CalibrationBudget {
        CalibrationBudget {
            workers: 2,
            master_seed: 3,
            ..CalibrationBudget::new(trials, locals)
        }
    }

    #[test]
    fn hits_target_within_wilson() {
        let out = calibrate_thresholds(&small(), 0.1, &budget(4_000, vec![2.0, 4.0])).unwrap();
        assert!(out.pfa_ci95.0 <= 0.1 && 0.1 <= out.pfa_ci95.1);
        assert!((0.08..=0.12).contains(&out.achieved_pfa));
        assert_eq!(out.candidates.len(), 2);
    }

    #[test]
    fn half_target_accepts_tiny_beta() {
        // Before any node transmits the first increment is pure receiver
        // noise, so a vanishing β decides by its sign: P_FA ≈ 1/2.
        let out = calibrate_thresholds(&small(), 0.5, &budget(2_000, vec![4.0])).unwrap();
        assert!(out.beta < 1.0, "beta {}", out.beta);
        assert!(out.achieved_pfa <= 0.5);
        assert!(out.pfa_ci95.1 >= 0.5);
    }

    #[test]
    fn pfa_falls_with_beta_on_common_numbers() {
        let engine = MonteCarlo::new(8, 1);
        let set = LadderSet::record(&small(), &engine, 5_000, 40.0).unwrap();
        assert!(set.tally(30.0).pfa() < set.tally(12.0).pfa());
    }

    #[test]
    fn unreachable_target_reports_nearest() {
        let mut b = budget(500, vec![4.0]);
        b.beta_range = (1e-6, 0.5);
        b.max_doublings = 0;
        match calibrate_thresholds(&small(), 1e-4, &b) {
            Err(Error::Calibration { nearest_beta, nearest_local, .. }) => {
                assert_eq!(nearest_beta, 0.5);
                assert_eq!(nearest_local, 4.0);
            }
            other => panic!("expected calibration failure, got {other:?}"),
        }
    }

    #[test]
    fn bad_targets_rejected() {
        let b = budget(10, vec![4.0]);
        assert!(calibrate_thresholds(&small(), 0.0, &b).is_err());
        assert!(calibrate_thresholds(&small(), 0.7, &b).is_err());
    }
}
