use crate::detectors::quantizer::{NodeBands, QuantizerConfig};
use crate::detectors::sprt::Crossing;
use crate::model::NodeParams;

/// Clamped statistic pair run at a node under DualCSPRT: `pos = (pos+llr)⁺`,
/// `neg = (neg+llr)⁻`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CsprtPair {
    pub pos: f64,
    pub neg: f64,
    pub time: u32,
    pub crossed: Crossing,
    pub crossing_time: Option<u32>,
}

impl CsprtPair {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn step(&mut self, x: f64, node: &NodeParams, gamma: f64) {
        self.step_llr(node.llr(x), gamma);
    }

    #[inline]
    pub fn step_llr(&mut self, llr: f64, gamma: f64) {
        self.pos = (self.pos + llr).max(0.0);
        self.neg = (self.neg + llr).min(0.0);
        self.time += 1;
        if self.crossed == Crossing::None {
            if self.pos >= gamma {
                self.crossed = Crossing::Upper;
                self.crossing_time = Some(self.time);
            } else if self.neg <= -gamma {
                self.crossed = Crossing::Lower;
                self.crossing_time = Some(self.time);
            }
        }
    }

    /// Four-level output of whichever side is past its threshold. If both
    /// are, the side with the larger excess wins (ties go up).
    #[inline]
    pub fn four_level(&self, q: &QuantizerConfig, gamma: f64, bands: NodeBands) -> f64 {
        let up = self.pos - gamma;
        let down = -gamma - self.neg;
        match (up >= 0.0, down >= 0.0) {
            (true, true) if down > up => q.four_level(self.neg, gamma, bands),
            (true, _) => q.four_level(self.pos, gamma, bands),
            (false, true) => q.four_level(self.neg, gamma, bands),
            (false, false) => 0.0,
        }
    }

    /// Single-level output, same side selection as [`Self::four_level`].
    #[inline]
    pub fn binary(&self, q: &QuantizerConfig, gamma: f64) -> f64 {
        let up = self.pos - gamma;
        let down = -gamma - self.neg;
        match (up >= 0.0, down >= 0.0) {
            (true, true) if down > up => q.binary_levels[1],
            (true, _) => q.binary_levels[0],
            (false, true) => q.binary_levels[1],
            (false, false) => 0.0,
        }
    }
}

pub fn csprt_local_step(mut pair: CsprtPair, x: f64, node: &NodeParams, gamma: f64) -> CsprtPair {
    pair.step(x, node, gamma);
    pair
}
