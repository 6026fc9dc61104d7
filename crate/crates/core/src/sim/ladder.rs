//! β-free trial recordings.
//!
//! Nothing upstream of the fusion threshold depends on β, so one pass per
//! trial can record every slot at which the H1-side statistic (F, or F¹)
//! reaches a new maximum and the H0-side statistic (F, or F⁰) a new
//! minimum. The stopping time and decision for any β up to the recording
//! cap then follow by binary search, exactly as a direct run would give
//! them, and every β is evaluated on common random numbers.

use crate::error::{usage_err, Result};
use crate::fusion::FusionState;
use crate::model::{Hypothesis, ScenarioConfig};
use crate::rng::RandomnessContract;
use crate::sim::trial::{forced_decision, TrialDynamics};
use crate::sim::{MonteCarlo, Tally};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LadderOutcome {
    pub stop_time: u32,
    pub decision: Hypothesis,
    pub truncated: bool,
    pub simultaneous: bool,
}

#[derive(Debug, Default)]
struct TrialLadder {
    up: Vec<(u32, f64)>,
    down: Vec<(u32, f64)>,
    forced: Option<Hypothesis>,
}

fn record_trial(cfg: &ScenarioConfig, contract: RandomnessContract, cap: f64) -> TrialLadder {
    let mut dynamics = TrialDynamics::new(cfg, contract);
    let clamped = cfg.algorithm.clamped_fusion();
    let mut f = FusionState::new();
    let mut out = TrialLadder::default();
    let (mut hi, mut lo) = (0.0f64, 0.0f64);
    while f.time < cfg.max_horizon {
        let s = dynamics.next_increment();
        let (up, down) = if clamped {
            f.csprt_increment(s, f64::INFINITY, cfg.bias).expect("never decides");
            (f.pos_sum, f.neg_sum)
        } else {
            f.sprt_increment(s, f64::INFINITY).expect("never decides");
            (f.sprt_sum, f.sprt_sum)
        };
        if up > hi {
            hi = up;
            out.up.push((f.time, up));
        }
        if down < lo {
            lo = down;
            out.down.push((f.time, down));
        }
        if hi >= cap || lo <= -cap {
            return out;
        }
    }
    out.forced = Some(forced_decision(clamped, &f));
    out
}

/// Flat per-trial ladders for one scenario and true hypothesis.
#[derive(Debug, Clone)]
pub struct LadderSet {
    truth: Hypothesis,
    horizon: u32,
    cap: f64,
    up_off: Vec<usize>,
    up_t: Vec<u32>,
    up_v: Vec<f64>,
    down_off: Vec<usize>,
    down_t: Vec<u32>,
    down_v: Vec<f64>,
    forced: Vec<Option<Hypothesis>>,
}

impl LadderSet {
    /// Record `trials` trials of `cfg` (its β is ignored) up to `cap`.
    pub fn record(cfg: &ScenarioConfig, engine: &MonteCarlo, trials: u64, cap: f64) -> Result<Self> {
        cfg.validate()?;
        if trials == 0 {
            return Err(usage_err("trial count must be at least 1"));
        }
        if !(cap > 0.0 && cap.is_finite()) {
            return Err(usage_err("ladder cap must be positive and finite"));
        }
        let ladders = engine.map_trials(trials, |c| record_trial(cfg, c, cap))?;
        let mut set = LadderSet {
            truth: cfg.true_hypothesis,
            horizon: cfg.max_horizon,
            cap,
            up_off: Vec::with_capacity(ladders.len() + 1),
            up_t: Vec::new(),
            up_v: Vec::new(),
            down_off: Vec::with_capacity(ladders.len() + 1),
            down_t: Vec::new(),
            down_v: Vec::new(),
            forced: Vec::with_capacity(ladders.len()),
        };
        set.up_off.push(0);
        set.down_off.push(0);
        for l in ladders {
            for (t, v) in l.up {
                set.up_t.push(t);
                set.up_v.push(v);
            }
            for (t, v) in l.down {
                set.down_t.push(t);
                set.down_v.push(v);
            }
            set.up_off.push(set.up_t.len());
            set.down_off.push(set.down_t.len());
            set.forced.push(l.forced);
        }
        Ok(set)
    }

    pub fn trials(&self) -> usize {
        self.forced.len()
    }

    pub fn cap(&self) -> f64 {
        self.cap
    }

    pub fn truth(&self) -> Hypothesis {
        self.truth
    }

    /// Outcome of trial `i` at threshold `beta` (`0 < beta ≤ cap`).
    pub fn outcome(&self, i: usize, beta: f64) -> LadderOutcome {
        debug_assert!(beta > 0.0 && beta <= self.cap);
        let (ua, ub) = (self.up_off[i], self.up_off[i + 1]);
        let (da, db) = (self.down_off[i], self.down_off[i + 1]);
        let up_v = &self.up_v[ua..ub];
        let down_v = &self.down_v[da..db];
        let iu = up_v.partition_point(|&v| v < beta);
        let id = down_v.partition_point(|&v| v > -beta);
        let up = (iu < up_v.len()).then(|| (self.up_t[ua + iu], up_v[iu]));
        let down = (id < down_v.len()).then(|| (self.down_t[da + id], down_v[id]));
        let done = |stop_time, decision, simultaneous| LadderOutcome {
            stop_time,
            decision,
            truncated: false,
            simultaneous,
        };
        match (up, down) {
            (Some((tu, vu)), Some((td, vd))) if tu == td => {
                let h = if (-beta - vd) > (vu - beta) {
                    Hypothesis::H0
                } else {
                    Hypothesis::H1
                };
                done(tu, h, true)
            }
            (Some((tu, _)), Some((td, _))) if td < tu => done(td, Hypothesis::H0, false),
            (Some((tu, _)), _) => done(tu, Hypothesis::H1, false),
            (None, Some((td, _))) => done(td, Hypothesis::H0, false),
            (None, None) => LadderOutcome {
                stop_time: self.horizon,
                decision: self.forced[i].expect("uncrossed trials ran to the horizon"),
                truncated: true,
                simultaneous: false,
            },
        }
    }

    pub fn tally(&self, beta: f64) -> Tally {
        let mut t = Tally::default();
        for i in 0..self.trials() {
            let o = self.outcome(i, beta);
            t.push(o.stop_time, o.decision != self.truth, o.truncated, o.simultaneous);
        }
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detectors::QuantizerConfig;
    use crate::model::{Algorithm, FusionChannelParams, NodeParams};
    use crate::sim::run_trial;

    fn cfg(alg: Algorithm, truth: Hypothesis) -> ScenarioConfig {
        ScenarioConfig {
            id: "ladder".into(),
            algorithm: alg,
            local_threshold: 3.0,
            fusion_threshold: 1.0,
            true_hypothesis: truth,
            max_horizon: 60,
            fusion: FusionChannelParams::new(5.0),
            bias: Default::default(),
            quantizer: QuantizerConfig::default(),
            glr: None,
            fading: None,
            nodes: vec![
                NodeParams::new(1.0, 1.0),
                NodeParams::new(0.63, 1.0),
                NodeParams::new(0.5, 1.0),
            ],
        }
    }

    #[test]
    fn matches_direct_runs_for_every_beta() {
        let engine = MonteCarlo::new(21, 2);
        for alg in [Algorithm::DualSprt, Algorithm::SprtCsprt, Algorithm::DualCsprt] {
            for truth in [Hypothesis::H0, Hypothesis::H1] {
                let base = cfg(alg, truth);
                let set = LadderSet::record(&base, &engine, 300, 40.0).unwrap();
                for beta in [0.5, 3.0, 11.7, 25.0, 40.0] {
                    let mut direct = base.clone();
                    direct.fusion_threshold = beta;
                    for i in 0..300 {
                        let r = run_trial(&direct, RandomnessContract::new(21, i as u64));
                        let o = set.outcome(i, beta);
                        assert_eq!(
                            (r.stop_time, r.decision, r.truncated, r.simultaneous),
                            (o.stop_time, o.decision, o.truncated, o.simultaneous),
                            "{alg} {truth} beta={beta} trial {i}"
                        );
                    }
                }
            }
        }
    }
}
