//! Multiple-access aggregation and the fusion-center tests.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{usage_err, Result};
use crate::model::{fusion_llr_increment, Bias, FusionChannelParams, Hypothesis};

/// What the fusion center receives in one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotAggregate {
    pub y: f64,
    /// Nodes that transmitted something non-zero, with their level.
    pub contributors: Vec<(usize, f64)>,
}

/// `Y_k = Σ emissions + Z_k` with an explicit noise sample.
pub fn aggregate_with_noise(emissions: &[f64], noise: f64) -> SlotAggregate {
    let contributors = emissions
        .iter()
        .enumerate()
        .filter(|(_, &e)| e != 0.0)
        .map(|(l, &e)| (l, e))
        .collect();
    SlotAggregate {
        y: emissions.iter().sum::<f64>() + noise,
        contributors,
    }
}

/// `Y_k = Σ emissions + Z_k`, `Z_k ~ Normal(0, σ²)`.
pub fn mac_aggregate<R: Rng + ?Sized>(
    emissions: &[f64],
    fusion: &FusionChannelParams,
    rng: &mut R,
) -> SlotAggregate {
    let z: f64 = rng.sample(StandardNormal);
    aggregate_with_noise(emissions, fusion.noise_variance.sqrt() * z)
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FusionState {
    /// F_k of the plain SPRT.
    pub sprt_sum: f64,
    /// F¹_k ≥ 0.
    pub pos_sum: f64,
    /// F⁰_k ≤ 0.
    pub neg_sum: f64,
    pub time: u32,
    pub decision: Option<Hypothesis>,
    pub stop_time: Option<u32>,
    /// Both clamped statistics crossed in the deciding slot.
    pub simultaneous: bool,
}

impl FusionState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_decided(&self) -> bool {
        self.decision.is_some()
    }

    fn ensure_running(&self) -> Result<()> {
        if self.decision.is_some() {
            return Err(usage_err("fusion test stepped after its decision"));
        }
        Ok(())
    }

    fn decide(&mut self, h: Hypothesis) {
        self.decision = Some(h);
        self.stop_time = Some(self.time);
    }

    /// Plain SPRT on a precomputed increment.
    #[inline]
    pub fn sprt_increment(&mut self, s: f64, beta: f64) -> Result<()> {
        self.ensure_running()?;
        self.time += 1;
        self.sprt_sum += s;
        if self.sprt_sum >= beta {
            self.decide(Hypothesis::H1);
        } else if self.sprt_sum <= -beta {
            self.decide(Hypothesis::H0);
        }
        Ok(())
    }

    /// Clamped pair on a precomputed increment. Simultaneous crossings are
    /// resolved by the larger overshoot, ties to H1.
    #[inline]
    pub fn csprt_increment(&mut self, s: f64, beta: f64, bias: Bias) -> Result<()> {
        self.ensure_running()?;
        self.time += 1;
        self.pos_sum = (self.pos_sum + s + bias.up).max(0.0);
        self.neg_sum = (self.neg_sum + s + bias.down).min(0.0);
        let up = self.pos_sum >= beta;
        let down = self.neg_sum <= -beta;
        match (up, down) {
            (true, true) => {
                self.simultaneous = true;
                let over_up = self.pos_sum - beta;
                let over_down = -beta - self.neg_sum;
                self.decide(if over_down > over_up {
                    Hypothesis::H0
                } else {
                    Hypothesis::H1
                });
            }
            (true, false) => self.decide(Hypothesis::H1),
            (false, true) => self.decide(Hypothesis::H0),
            (false, false) => {}
        }
        Ok(())
    }
}

pub fn fusion_sprt_step(
    state: &mut FusionState,
    y: f64,
    fusion: &FusionChannelParams,
    beta: f64,
) -> Result<()> {
    state.sprt_increment(fusion_llr_increment(y, fusion), beta)
}

pub fn fusion_csprt_step(
    state: &mut FusionState,
    y: f64,
    fusion: &FusionChannelParams,
    beta: f64,
    bias: Bias,
) -> Result<()> {
    state.csprt_increment(fusion_llr_increment(y, fusion), beta, bias)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{RandomnessContract, StreamRole};
    use crate::Error;

    #[test]
    fn noise_only_slot_has_receiver_variance() {
        let fusion = FusionChannelParams::new(5.0);
        let mut rng = RandomnessContract::new(1, 1)
            .streams()
            .stream(StreamRole::FusionNoise);
        let n = 1_000_000;
        let ys: Vec<f64> = (0..n)
            .map(|_| mac_aggregate(&[0.0; 5], &fusion, &mut rng).y)
            .collect();
        let mean = ys.iter().sum::<f64>() / n as f64;
        let var = ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((var - 5.0).abs() < 0.05, "var {var}");
    }

    #[test]
    fn noiseless_sums() {
        assert_eq!(aggregate_with_noise(&[1.0, 2.0], 0.0).y, 3.0);
        let agg = aggregate_with_noise(&[4.0; 5], 0.0);
        assert_eq!(agg.y, 20.0);
        assert_eq!(agg.contributors.len(), 5);
        let agg = aggregate_with_noise(&[0.0, -2.0, 0.0], 0.5);
        assert_eq!(agg.contributors, vec![(1, -2.0)]);
    }

    #[test]
    fn sprt_threshold_arithmetic() {
        let mut f = FusionState {
            sprt_sum: 19.5,
            ..Default::default()
        };
        f.sprt_increment(1.0, 20.0).unwrap();
        assert_eq!(f.decision, Some(Hypothesis::H1));
        assert_eq!(f.stop_time, Some(1));
        assert!(matches!(f.sprt_increment(1.0, 20.0), Err(Error::Usage(_))));
    }

    #[test]
    fn sprt_bounded_oscillation_never_stops() {
        let mut f = FusionState::new();
        for k in 0..10_000 {
            let s = if k % 2 == 0 { 1.0 } else { -1.0 };
            f.sprt_increment(s, 20.0).unwrap();
        }
        assert!(!f.is_decided());
    }

    #[test]
    fn csprt_clamps() {
        let mut f = FusionState::new();
        f.csprt_increment(-2.0, 30.0, Bias::default()).unwrap();
        assert_eq!(f.pos_sum, 0.0);
        let mut f = FusionState::new();
        f.csprt_increment(2.0, 30.0, Bias::default()).unwrap();
        assert_eq!(f.neg_sum, 0.0);
        let mut f = FusionState::new();
        f.csprt_increment(1.0, 30.0, Bias { up: -3.0, down: 0.0 }).unwrap();
        assert_eq!(f.pos_sum, 0.0);
    }

    #[test]
    fn csprt_simultaneous_crossing_by_overshoot() {
        let mut f = FusionState {
            pos_sum: 0.0,
            neg_sum: 0.0,
            ..Default::default()
        };
        // Opposite biases make both sides cross at once.
        f.csprt_increment(0.0, 1.0, Bias { up: 2.0, down: -3.0 }).unwrap();
        assert!(f.simultaneous);
        assert_eq!(f.decision, Some(Hypothesis::H0));
        let mut f = FusionState::new();
        f.csprt_increment(0.0, 1.0, Bias { up: 2.0, down: -2.0 }).unwrap();
        assert_eq!(f.decision, Some(Hypothesis::H1));
    }

    #[test]
    fn step_wrappers_apply_drift_convention() {
        let fusion = FusionChannelParams::new(5.0);
        let mut f = FusionState::new();
        fusion_sprt_step(&mut f, 1.0, &fusion, 100.0).unwrap();
        assert_eq!(f.sprt_sum, 2.0);
        fusion_csprt_step(&mut f, -1.0, &fusion, 100.0, Bias::default()).unwrap();
        assert_eq!(f.neg_sum, -2.0);
    }

    proptest::proptest! {
        #[test]
        fn clamped_pair_invariants(incs in proptest::collection::vec(-6.0f64..6.0, 1..400), beta in 1.0f64..40.0) {
            let mut f = FusionState::new();
            for &s in &incs {
                if f.is_decided() { break; }
                f.csprt_increment(s, beta, Bias::default()).unwrap();
                proptest::prop_assert!(f.pos_sum >= 0.0 && f.neg_sum <= 0.0);
                if !f.is_decided() {
                    proptest::prop_assert!(f.pos_sum.max(-f.neg_sum) < beta);
                }
            }
        }

        #[test]
        fn reflection_only_adds(incs in proptest::collection::vec(-6.0f64..6.0, 1..400)) {
            // Unbounded thresholds: compare the running statistics directly.
            let mut clamped = FusionState::new();
            let mut plain = FusionState::new();
            for &s in &incs {
                clamped.csprt_increment(s, f64::INFINITY, Bias::default()).unwrap();
                plain.sprt_increment(s, f64::INFINITY).unwrap();
                proptest::prop_assert!(clamped.pos_sum >= plain.sprt_sum - 1e-9);
                proptest::prop_assert!(clamped.neg_sum <= plain.sprt_sum + 1e-9);
            }
        }

        #[test]
        fn nonnegative_path_clamp_never_binds(incs in proptest::collection::vec(0.0f64..6.0, 1..200)) {
            let mut clamped = FusionState::new();
            let mut plain = FusionState::new();
            for &s in &incs {
                clamped.csprt_increment(s, f64::INFINITY, Bias::default()).unwrap();
                plain.sprt_increment(s, f64::INFINITY).unwrap();
                proptest::prop_assert_eq!(clamped.pos_sum, plain.sprt_sum);
            }
        }
    }
}
