use crate::detectors::quantizer::{NodeBands, QuantizerConfig};
use crate::model::NodeParams;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Crossing {
    #[default]
    None,
    Upper,
    Lower,
}

/// Running SPRT at one node. The statistic keeps evolving after the first
/// crossing; only the first crossing is latched.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SprtState {
    pub statistic: f64,
    pub time: u32,
    pub crossed: Crossing,
    pub crossing_time: Option<u32>,
}

impl SprtState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn step(&mut self, x: f64, node: &NodeParams, gamma: f64) {
        self.step_llr(node.llr(x), gamma);
    }

    #[inline]
    pub fn step_llr(&mut self, llr: f64, gamma: f64) {
        self.statistic += llr;
        self.time += 1;
        if self.crossed == Crossing::None {
            if self.statistic >= gamma {
                self.crossed = Crossing::Upper;
                self.crossing_time = Some(self.time);
            } else if self.statistic <= -gamma {
                self.crossed = Crossing::Lower;
                self.crossing_time = Some(self.time);
            }
        }
    }

    pub fn four_level(&self, q: &QuantizerConfig, gamma: f64, bands: NodeBands) -> f64 {
        q.four_level(self.statistic, gamma, bands)
    }
}

/// Free-function form of [`SprtState::step`].
pub fn sprt_step(mut state: SprtState, x: f64, node: &NodeParams, gamma: f64) -> SprtState {
    state.step(x, node, gamma);
    state
}
