//! Cooperative distributed sequential spectrum sensing.
//!
//! Sensing nodes run local sequential tests on Gaussian observations and,
//! once confident, transmit quantized levels over a shared multiple-access
//! channel. A fusion center accumulates the noisy sum with a Wald SPRT or a
//! pair of clamped (CUSUM-style) statistics. The crate provides the
//! detectors, a deterministic parallel Monte Carlo engine with threshold
//! calibration, and an analytic approximation of false-alarm probability
//! and detection delay.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod detectors;
pub mod error;
pub mod fusion;
pub mod golden;
pub mod model;
pub mod report;
pub mod rng;
pub mod scenarios;
pub mod sim;
pub mod tables;

pub use error::{Error, Result};
