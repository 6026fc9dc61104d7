use serde::{Deserialize, Serialize};

use crate::analysis::std_normal_cdf;
use crate::error::{Error, Result};
use crate::model::NodeParams;

/// CLT law of a node's first passage over γ:
/// `Normal(2σ²γ/θ², 8σ⁴γ/θ⁴)`, i.e. γ/δ with variance γΣ²/δ³.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalPassageLaw {
    pub mean: f64,
    pub variance: f64,
}

impl LocalPassageLaw {
    pub fn new(node: &NodeParams, gamma: f64) -> Result<Self> {
        node.validate()?;
        if !(gamma > 0.0 && node.post_change_mean != 0.0) {
            return Err(Error::Domain(
                "local passage law needs γ > 0 and a non-zero post-change mean".into(),
            ));
        }
        let var = node.noise_var();
        let th2 = node.post_change_mean * node.post_change_mean;
        Ok(Self {
            mean: 2.0 * var * gamma / th2,
            variance: 8.0 * var * var * gamma / (th2 * th2),
        })
    }

    pub fn std(&self) -> f64 {
        self.variance.sqrt()
    }

    pub fn cdf(&self, t: f64) -> f64 {
        std_normal_cdf((t - self.mean) / self.std())
    }

    /// Whether the Gaussian approximation is sensible (little mass below 0).
    pub fn is_clt_regime(&self) -> bool {
        self.mean > 3.0 * self.std()
    }
}

/// `Φ_{τγ,l}(k)`.
pub fn local_passage_cdf(node: &NodeParams, gamma: f64, k: f64) -> Result<f64> {
    Ok(LocalPassageLaw::new(node, gamma)?.cdf(k))
}

/// `P(at least i of the variables ≤ x)` for i = 0..=L given each `p_l`.
fn at_least(ps: &[f64], out: &mut Vec<f64>) {
    // Poisson-binomial point masses by the usual one-variable-at-a-time
    // recursion, then tail sums.
    let n = ps.len();
    out.clear();
    out.resize(n + 1, 0.0);
    out[0] = 1.0;
    for (m, &p) in ps.iter().enumerate() {
        for j in (1..=m + 1).rev() {
            out[j] = out[j] * (1.0 - p) + out[j - 1] * p;
        }
        out[0] *= 1.0 - p;
    }
    for j in (0..n).rev() {
        out[j] += out[j + 1];
    }
}

/// `E[t_(i)]`, i = 1..L, for independent Gaussian passage times, from
/// `E[X] = a + ∫_a^b (1 − F_(i)(x)) dx` over a range holding all the mass,
/// by composite Simpson.
pub fn order_stat_epoch_means(laws: &[LocalPassageLaw], intervals: usize) -> Result<Vec<f64>> {
    if laws.is_empty() {
        return Err(Error::Usage("order statistics need at least one law".into()));
    }
    let intervals = (intervals.max(2) + 1) & !1;
    let a = laws
        .iter()
        .map(|l| l.mean - 12.0 * l.std())
        .fold(f64::INFINITY, f64::min);
    let b = laws
        .iter()
        .map(|l| l.mean + 12.0 * l.std())
        .fold(f64::NEG_INFINITY, f64::max);
    let h = (b - a) / intervals as f64;
    let n = laws.len();
    let mut acc = vec![0.0; n];
    let mut ps = vec![0.0; n];
    let mut tails = Vec::with_capacity(n + 1);
    for k in 0..=intervals {
        let x = a + k as f64 * h;
        for (p, law) in ps.iter_mut().zip(laws) {
            *p = law.cdf(x);
        }
        at_least(&ps, &mut tails);
        let w = if k == 0 || k == intervals {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        for i in 0..n {
            acc[i] += w * (1.0 - tails[i + 1]);
        }
    }
    Ok(acc.into_iter().map(|s| a + s * h / 3.0).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::golden::NODE_MEANS;
    use crate::model::{sample_observation, Hypothesis};
    use crate::rng::{RandomnessContract, StreamRole};
    use crate::detectors::SprtState;
    use approx::assert_abs_diff_eq;
    use rand::Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn substitution_values() {
        let law = LocalPassageLaw::new(&NodeParams::new(1.0, 1.0), 15.0).unwrap();
        assert_abs_diff_eq!(law.mean, 30.0);
        assert_abs_diff_eq!(law.variance, 120.0);
        assert_abs_diff_eq!(law.cdf(30.0), 0.5);
        // Mean 30 against std ≈ 11: under three deviations.
        assert!(!law.is_clt_regime());
        assert!(LocalPassageLaw::new(&NodeParams::new(1.0, 1.0), 100.0).unwrap().is_clt_regime());
    }

    #[test]
    fn single_variable_is_its_mean() {
        let law = LocalPassageLaw {
            mean: 42.0,
            variance: 9.0,
        };
        let m = order_stat_epoch_means(&[law], 4000).unwrap();
        assert_abs_diff_eq!(m[0], 42.0, epsilon = 1e-9);
    }

    #[test]
    fn min_of_two_standard_normals() {
        let std = LocalPassageLaw {
            mean: 0.0,
            variance: 1.0,
        };
        let m = order_stat_epoch_means(&[std, std], 4000).unwrap();
        let exact = -1.0 / std::f64::consts::PI.sqrt();
        assert!((m[0] - exact).abs() < 0.005 * exact.abs(), "{}", m[0]);
        assert_abs_diff_eq!(m[1], -exact, epsilon = 1e-6);
    }

    #[test]
    fn five_node_means_match_monte_carlo() {
        let laws: Vec<_> = NODE_MEANS
            .iter()
            .map(|&t| LocalPassageLaw::new(&NodeParams::new(t, 1.0), 15.0).unwrap())
            .collect();
        let analytic = order_stat_epoch_means(&laws, 8000).unwrap();
        assert!(analytic.windows(2).all(|w| w[0] <= w[1]));
        assert!(analytic[0] <= laws.iter().map(|l| l.mean).fold(f64::INFINITY, f64::min));
        let mut rng = RandomnessContract::new(17, 0).streams().stream(StreamRole::Node(0));
        let draws = 1_000_000;
        let mut sums = [0.0; 5];
        let mut buf = [0.0; 5];
        for _ in 0..draws {
            for (b, l) in buf.iter_mut().zip(&laws) {
                let z: f64 = rng.sample(StandardNormal);
                *b = l.mean + l.std() * z;
            }
            buf.sort_by(f64::total_cmp);
            for (s, b) in sums.iter_mut().zip(buf) {
                *s += b;
            }
        }
        for (i, s) in sums.iter().enumerate() {
            let mc = s / draws as f64;
            assert!((analytic[i] - mc).abs() < 0.01 * mc, "i={i}: {} vs {mc}", analytic[i]);
        }
    }

    #[test]
    fn large_threshold_crossing_mean() {
        // γ = 100, θ = σ = 1: the CLT mean is 200 slots.
        let node = NodeParams::new(1.0, 1.0);
        let law = LocalPassageLaw::new(&node, 100.0).unwrap();
        let paths = 100_000u64;
        let mut total = 0u64;
        for i in 0..paths {
            let mut rng = RandomnessContract::new(5, i).streams().stream(StreamRole::Node(0));
            let mut s = SprtState::new();
            while s.crossing_time.is_none() {
                s.step(sample_observation(Hypothesis::H1, &node, 1.0, &mut rng), &node, 100.0);
            }
            total += s.crossing_time.unwrap() as u64;
        }
        let mc = total as f64 / paths as f64;
        assert!((mc - law.mean).abs() < 0.03 * law.mean, "mc {mc}");
    }

    #[test]
    fn poisson_binomial_tails() {
        let mut out = Vec::new();
        at_least(&[0.5, 0.5], &mut out);
        assert_eq!(out, vec![1.0, 0.75, 0.25]);
        at_least(&[1.0, 0.0, 0.3], &mut out);
        assert_abs_diff_eq!(out[1], 1.0);
        assert_abs_diff_eq!(out[2], 0.3);
        assert_abs_diff_eq!(out[3], 0.0);
    }
}
