use rand_chacha::ChaCha8Rng;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::detectors::{CsprtPair, GlrConfig, GlrState, NodeBands, QuantizerConfig, SprtState};
use crate::fusion::FusionState;
use crate::model::{sample_observation, Algorithm, Hypothesis, NodeParams, ScenarioConfig};
use crate::rng::{RandomnessContract, StreamRole};
use crate::sim::draw_fading;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TrialResult {
    /// N; equals the horizon when truncated.
    pub stop_time: u32,
    pub decision: Hypothesis,
    pub truth: Hypothesis,
    pub truncated: bool,
    /// Both clamped fusion statistics crossed in the deciding slot.
    pub simultaneous: bool,
    pub local_crossing_times: Vec<Option<u32>>,
}

impl TrialResult {
    pub fn is_error(&self) -> bool {
        self.decision != self.truth
    }
}

/// Node statistic together with the alphabet it transmits from.
#[derive(Debug, Clone, Copy)]
enum Detector {
    SprtBinary(SprtState),
    SprtFour(SprtState),
    PairFour(CsprtPair),
    GlrBinary(GlrState),
    GlrFour(GlrState),
}

struct NodeRuntime {
    params: NodeParams,
    mean: f64,
    bands: NodeBands,
    det: Detector,
    rng: ChaCha8Rng,
}

/// Everything upstream of the fusion test: nodes, their emissions, the
/// multiple-access channel and the increment map. Yields one fusion
/// increment per slot.
pub(crate) struct TrialDynamics<'a> {
    gamma: f64,
    quantizer: &'a QuantizerConfig,
    glr: Option<&'a GlrConfig>,
    truth: Hypothesis,
    nodes: Vec<NodeRuntime>,
    noise_rng: ChaCha8Rng,
    noise_std: f64,
    gain: f64,
}

impl<'a> TrialDynamics<'a> {
    pub(crate) fn new(cfg: &'a ScenarioConfig, contract: RandomnessContract) -> Self {
        let streams = contract.streams();
        let means = match &cfg.fading {
            Some(f) => draw_fading(f, cfg.nodes.len(), &mut streams.stream(StreamRole::Fading)),
            None => cfg.nodes.iter().map(|n| n.post_change_mean).collect(),
        };
        let nodes = cfg
            .nodes
            .iter()
            .zip(means)
            .enumerate()
            .map(|(l, (params, mean))| NodeRuntime {
                params: *params,
                mean,
                bands: cfg.quantizer.bands(params),
                det: match cfg.algorithm {
                    Algorithm::DualSprt => Detector::SprtBinary(SprtState::new()),
                    Algorithm::SprtCsprt => Detector::SprtFour(SprtState::new()),
                    Algorithm::DualCsprt => Detector::PairFour(CsprtPair::new()),
                    Algorithm::GlrSprt => Detector::GlrBinary(GlrState::new()),
                    Algorithm::GlrCsprt => Detector::GlrFour(GlrState::new()),
                },
                rng: streams.stream(StreamRole::Node(l)),
            })
            .collect();
        Self {
            gamma: cfg.local_threshold,
            quantizer: &cfg.quantizer,
            glr: cfg.glr.as_ref(),
            truth: cfg.true_hypothesis,
            nodes,
            noise_rng: streams.stream(StreamRole::FusionNoise),
            noise_std: cfg.fusion.noise_variance.sqrt(),
            gain: cfg.fusion.increment_gain(),
        }
    }

    /// Advance every node one slot and return the fusion increment.
    #[inline]
    pub(crate) fn next_increment(&mut self) -> f64 {
        let gamma = self.gamma;
        let q = self.quantizer;
        let mut y = 0.0;
        for node in &mut self.nodes {
            let x = sample_observation(self.truth, &node.params, node.mean, &mut node.rng);
            y += match &mut node.det {
                Detector::SprtBinary(s) => {
                    s.step(x, &node.params, gamma);
                    q.binary(s.statistic, gamma)
                }
                Detector::SprtFour(s) => {
                    s.step(x, &node.params, gamma);
                    q.four_level(s.statistic, gamma, node.bands)
                }
                Detector::PairFour(p) => {
                    p.step(x, &node.params, gamma);
                    p.four_level(q, gamma, node.bands)
                }
                Detector::GlrBinary(g) => {
                    let cfg = self.glr.expect("validated GLR config");
                    g.step(x, cfg, node.params.noise_var());
                    g.binary(cfg, q)
                }
                Detector::GlrFour(g) => {
                    let cfg = self.glr.expect("validated GLR config");
                    g.step(x, cfg, node.params.noise_var());
                    crate::detectors::glr_quantize(g, cfg, q).unwrap_or(0.0)
                }
            };
        }
        let z: f64 = self.noise_rng.sample(StandardNormal);
        self.gain * (y + self.noise_std * z)
    }

    pub(crate) fn crossing_times(&self) -> Vec<Option<u32>> {
        self.nodes
            .iter()
            .map(|n| match &n.det {
                Detector::SprtBinary(s) | Detector::SprtFour(s) => s.crossing_time,
                Detector::PairFour(p) => p.crossing_time,
                Detector::GlrBinary(g) | Detector::GlrFour(g) => g.stop_time,
            })
            .collect()
    }
}

/// Decision forced at the horizon: the side the statistic leans to.
pub(crate) fn forced_decision(clamped: bool, f: &FusionState) -> Hypothesis {
    let lean = if clamped {
        f.pos_sum + f.neg_sum
    } else {
        f.sprt_sum
    };
    if lean >= 0.0 {
        Hypothesis::H1
    } else {
        Hypothesis::H0
    }
}

/// One sensing session from slot 1 to the fusion decision (or horizon).
pub fn run_trial(cfg: &ScenarioConfig, contract: RandomnessContract) -> TrialResult {
    let mut dynamics = TrialDynamics::new(cfg, contract);
    let clamped = cfg.algorithm.clamped_fusion();
    let beta = cfg.fusion_threshold;
    let mut fusion = FusionState::new();
    while fusion.time < cfg.max_horizon {
        let s = dynamics.next_increment();
        // The loop guard keeps the state undecided, so stepping cannot fail.
        if clamped {
            fusion.csprt_increment(s, beta, cfg.bias).expect("undecided");
        } else {
            fusion.sprt_increment(s, beta).expect("undecided");
        }
        if fusion.is_decided() {
            break;
        }
    }
    let local_crossing_times = dynamics.crossing_times();
    match (fusion.decision, fusion.stop_time) {
        (Some(decision), Some(stop_time)) => TrialResult {
            stop_time,
            decision,
            truth: cfg.true_hypothesis,
            truncated: false,
            simultaneous: fusion.simultaneous,
            local_crossing_times,
        },
        _ => TrialResult {
            stop_time: cfg.max_horizon,
            decision: forced_decision(clamped, &fusion),
            truth: cfg.true_hypothesis,
            truncated: true,
            simultaneous: false,
            local_crossing_times,
        },
    }
}
