use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ScenarioConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Epoch {
    /// E[T_k].
    pub time: f64,
    /// μ_k, mean fusion increment from T_k until the next epoch.
    pub drift: f64,
    /// Σ of transmitted levels during the segment.
    pub level_sum: f64,
    /// F̄_k, mean statistic entering the segment.
    pub pre_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochSchedule {
    pub epochs: Vec<Epoch>,
}

impl EpochSchedule {
    /// Build from `(time, drift, level_sum)` segments with F̄ starting at 0.
    pub fn from_segments(segments: &[(f64, f64, f64)]) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::Usage("epoch schedule needs at least one segment".into()));
        }
        if !segments.windows(2).all(|w| w[0].0 < w[1].0) {
            return Err(Error::Usage("epoch times must increase strictly".into()));
        }
        let mut epochs = Vec::with_capacity(segments.len());
        let mut pre_mean = 0.0;
        for (k, &(time, drift, level_sum)) in segments.iter().enumerate() {
            if k > 0 {
                let prev: &Epoch = &epochs[k - 1];
                pre_mean = prev.pre_mean + prev.drift * (time - prev.time);
            }
            epochs.push(Epoch {
                time,
                drift,
                level_sum,
                pre_mean,
            });
        }
        Ok(Self { epochs })
    }
}

/// Drift schedule under H1. Nodes are ordered by their mean passage time
/// and the i-th one starts transmitting the lowest level at `E[t_i]`. It
/// then moves up one level every `2Δ_l/δ_l` slots (the time its statistic
/// needs, at drift δ_l, to cross a band of width 2Δ_l), as long as the
/// upgrade comes before `E[t_{i+1}]`; the last node upgrades freely. A
/// terminal epoch with every node at the top level closes the schedule.
pub fn build_epoch_schedule(cfg: &ScenarioConfig, epoch_means: &[f64]) -> Result<EpochSchedule> {
    let n = cfg.nodes.len();
    if epoch_means.len() != n {
        return Err(Error::Usage(format!(
            "{} epoch means for {} nodes",
            epoch_means.len(),
            n
        )));
    }
    let drift_of = |l: usize| cfg.nodes[l].expected_drift();
    // Ascending mean passage time = descending drift.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| drift_of(b).total_cmp(&drift_of(a)));

    let levels = &cfg.quantizer.upper_levels;
    let mut events: Vec<(f64, usize, usize)> = Vec::new();
    for (i, &l) in order.iter().enumerate() {
        let spacing = 2.0 * cfg.quantizer.bands(&cfg.nodes[l]).up / drift_of(l);
        let next = epoch_means.get(i + 1).copied().unwrap_or(f64::INFINITY);
        let mut t = epoch_means[i];
        events.push((t, l, 0));
        for j in 1..levels.len() {
            t += spacing;
            if t >= next {
                break;
            }
            events.push((t, l, j));
        }
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0));

    let gain = cfg.fusion.increment_gain();
    let bias = cfg.bias.up;
    let mut state: Vec<Option<usize>> = vec![None; n];
    let level_sum = |state: &[Option<usize>]| state.iter().flatten().map(|&j| levels[j]).sum::<f64>();
    let mut segments: Vec<(f64, f64, f64)> = vec![(0.0, bias, 0.0)];
    for (t, l, j) in events {
        state[l] = Some(j);
        let s = level_sum(&state);
        match segments.last_mut() {
            Some(last) if last.0 == t => *last = (t, gain * s + bias, s),
            _ => segments.push((t, gain * s + bias, s)),
        }
    }
    let top = levels[levels.len() - 1] * n as f64;
    let last = *segments.last().expect("non-empty");
    if last.2 < top {
        let step = order
            .iter()
            .map(|&l| 2.0 * cfg.quantizer.bands(&cfg.nodes[l]).up / drift_of(l))
            .fold(0.0, f64::max);
        segments.push((last.0 + step, gain * top + bias, top));
    }
    EpochSchedule::from_segments(&segments)
}

/// `E[T_j] + (β − F̄_j)/μ_j` for the first segment whose linear mean path
/// reaches β before the next epoch.
pub fn edd_analytic(schedule: &EpochSchedule, beta: f64) -> Result<f64> {
    let e = &schedule.epochs;
    if e.is_empty() {
        return Err(Error::Usage("empty epoch schedule".into()));
    }
    for (k, ep) in e.iter().enumerate() {
        let next = e.get(k + 1).map_or(f64::INFINITY, |n| n.time);
        if ep.drift > 0.0 {
            let dt = (beta - ep.pre_mean) / ep.drift;
            if dt < next - ep.time {
                return Ok(ep.time + dt.max(0.0));
            }
        }
    }
    Err(Error::Inapplicable(format!(
        "terminal drift {} cannot carry the fusion statistic to beta={beta}",
        e[e.len() - 1].drift
    )))
}
