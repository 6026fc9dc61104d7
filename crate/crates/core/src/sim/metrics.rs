use serde::{Deserialize, Serialize};

use crate::error::{usage_err, Result};
use crate::model::Hypothesis;
use crate::sim::TrialResult;

/// Two-sided 95% standard normal quantile.
pub const WILSON_Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `errors` out of `n`.
pub fn wilson_interval(errors: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = errors as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let lo = if errors == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if errors as f64 == n { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// Order-insensitive accumulator. Integer sums make the merge exact, so
/// any partition of the trials over workers gives the same totals.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tally {
    pub trials: u64,
    pub errors: u64,
    pub sum_n: u64,
    pub sum_n2: u128,
    pub truncated: u64,
    pub simultaneous: u64,
}

impl Tally {
    #[inline]
    pub fn push(&mut self, stop_time: u32, error: bool, truncated: bool, simultaneous: bool) {
        let n = stop_time as u64;
        self.trials += 1;
        self.errors += error as u64;
        self.sum_n += n;
        self.sum_n2 += (n as u128) * (n as u128);
        self.truncated += truncated as u64;
        self.simultaneous += simultaneous as u64;
    }

    pub fn push_result(&mut self, r: &TrialResult) {
        self.push(r.stop_time, r.is_error(), r.truncated, r.simultaneous);
    }

    pub fn merge(mut self, other: Tally) -> Tally {
        self.trials += other.trials;
        self.errors += other.errors;
        self.sum_n += other.sum_n;
        self.sum_n2 += other.sum_n2;
        self.truncated += other.truncated;
        self.simultaneous += other.simultaneous;
        self
    }

    pub fn pfa(&self) -> f64 {
        self.errors as f64 / self.trials as f64
    }

    pub fn edd(&self) -> f64 {
        self.sum_n as f64 / self.trials as f64
    }

    pub fn summary(&self, truth: Hypothesis) -> Result<MonteCarloSummary> {
        if self.trials == 0 {
            return Err(usage_err("metrics need at least one trial"));
        }
        let n = self.trials as f64;
        let mean = self.sum_n as f64 / n;
        let var = if self.trials > 1 {
            // Exact integer centring: Σn² − (Σn)²/n.
            let num = self.sum_n2 as f64 - (self.sum_n as f64) * (self.sum_n as f64) / n;
            (num / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        Ok(MonteCarloSummary {
            truth,
            trials: self.trials,
            errors: self.errors,
            edd_mean: mean,
            edd_stderr: (var / n).sqrt(),
            pfa_hat: self.pfa(),
            pfa_ci95: wilson_interval(self.errors, self.trials, WILSON_Z95),
            truncated_count: self.truncated,
            simultaneous_count: self.simultaneous,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloSummary {
    pub truth: Hypothesis,
    pub trials: u64,
    pub errors: u64,
    /// E[N | truth] over every trial, truncated ones counted at the horizon.
    pub edd_mean: f64,
    pub edd_stderr: f64,
    pub pfa_hat: f64,
    pub pfa_ci95: (f64, f64),
    pub truncated_count: u64,
    pub simultaneous_count: u64,
}

/// Summary of trials that share one true hypothesis.
pub fn estimate_metrics(results: &[TrialResult]) -> Result<MonteCarloSummary> {
    let first = results
        .first()
        .ok_or_else(|| usage_err("metrics need at least one trial"))?;
    if results.iter().any(|r| r.truth != first.truth) {
        return Err(usage_err(
            "delay is conditioned on the true hypothesis; summarize each hypothesis separately",
        ));
    }
    let mut tally = Tally::default();
    for r in results {
        tally.push_result(r);
    }
    tally.summary(first.truth)
}
