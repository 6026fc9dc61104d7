//! Per-node sequential statistics and their output quantizers.

pub mod csprt;
pub mod glr;
pub mod quantizer;
pub mod sprt;

pub use csprt::{csprt_local_step, CsprtPair};
pub use glr::{glr_boundary, glr_decide, glr_quantize, glr_step, Boundary, GlrConfig, GlrState};
pub use quantizer::{quantize_sprt_output, BandWidth, BandWidthRule, NodeBands, QuantizerConfig};
pub use sprt::{sprt_step, Crossing, SprtState};
