//! Generalized likelihood ratio test for an unknown post-change mean with a
//! decreasing, time-varying stopping boundary `g(c·n)`.

use serde::{Deserialize, Serialize};

use crate::detectors::quantizer::QuantizerConfig;
use crate::error::{config_err, usage_err, Error, Result};
use crate::model::Hypothesis;

/// Stopping boundary `g`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    /// `g(t) = ln(1/t)`.
    #[default]
    LogInverse,
    /// `ln(1/t)` plus an additive correction linearly interpolated from
    /// `(t, correction)` points (ascending in t, held flat beyond the ends).
    Corrected(Vec<[f64; 2]>),
}

impl Boundary {
    #[inline]
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("boundary argument must be positive, got {t}")));
        }
        Ok(self.eval_unchecked(t))
    }

    #[inline]
    fn eval_unchecked(&self, t: f64) -> f64 {
        let base = -t.ln();
        match self {
            Boundary::LogInverse => base,
            Boundary::Corrected(points) => base + interpolate(points, t),
        }
    }

    fn validate(&self) -> Result<()> {
        if let Boundary::Corrected(points) = self {
            if points.is_empty() {
                return Err(config_err("boundary correction table is empty"));
            }
            if !points.windows(2).all(|w| w[0][0] < w[1][0]) {
                return Err(config_err("boundary correction points must ascend in t"));
            }
        }
        Ok(())
    }
}

fn interpolate(points: &[[f64; 2]], t: f64) -> f64 {
    let first = points[0];
    let last = points[points.len() - 1];
    if t <= first[0] {
        return first[1];
    }
    if t >= last[0] {
        return last[1];
    }
    let i = points.partition_point(|p| p[0] <= t);
    let (a, b) = (points[i - 1], points[i]);
    a[1] + (b[1] - a[1]) * (t - a[0]) / (b[0] - a[0])
}

pub fn glr_boundary(t: f64, boundary: &Boundary) -> Result<f64> {
    boundary.eval(t)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlrConfig {
    #[serde(default)]
    pub theta0: f64,
    pub theta1: f64,
    /// Per-observation cost c.
    pub cost: f64,
    /// Estimator clamp `[a₁, a₂]`.
    pub clamp_range: [f64; 2],
    /// Band parameter Δ with `0 ≤ 3Δ ≤ 1`.
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub boundary: Boundary,
}

fn default_delta() -> f64 {
    0.25
}

impl GlrConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta1 > self.theta0) {
            return Err(config_err("glr theta1 must exceed theta0"));
        }
        if !(self.cost > 0.0 && self.cost.is_finite()) {
            return Err(config_err("glr cost must be positive"));
        }
        let [a1, a2] = self.clamp_range;
        if !(a1 <= a2) {
            return Err(config_err("glr clamp_range must satisfy a1 <= a2"));
        }
        if !(0.0..=1.0 / 3.0 + 1e-12).contains(&self.delta) {
            return Err(config_err("glr delta must lie in [0, 1/3]"));
        }
        self.boundary.validate()
    }

    /// θ* with `I(θ*, θ₀) = I(θ*, θ₁)`; the midpoint for equal-variance
    /// Gaussians.
    pub fn decision_point(&self) -> f64 {
        0.5 * (self.theta0 + self.theta1)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GlrState {
    pub time: u32,
    pub running_sum: f64,
    pub statistic: f64,
    pub stopped: bool,
    pub stop_time: Option<u32>,
    pub theta_hat: f64,
}

/// `Σ log f_a(x_k)/f_b(x_k)` for n Gaussian observations with sample mean `m`.
#[inline]
fn gaussian_log_ratio_sum(n: f64, m: f64, a: f64, b: f64, sigma_sq: f64) -> f64 {
    n * (a - b) * (m - 0.5 * (a + b)) / sigma_sq
}

impl GlrState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Absorb one observation. Updating continues after stopping; only the
    /// first boundary crossing is latched.
    #[inline]
    pub fn step(&mut self, x: f64, cfg: &GlrConfig, sigma_sq: f64) {
        self.running_sum += x;
        self.time += 1;
        let n = self.time as f64;
        let mean = self.running_sum / n;
        let [a1, a2] = cfg.clamp_range;
        self.theta_hat = mean.min(a2).max(a1);
        let vs_null = gaussian_log_ratio_sum(n, mean, self.theta_hat, cfg.theta0, sigma_sq);
        let vs_alt = gaussian_log_ratio_sum(n, mean, self.theta_hat, cfg.theta1, sigma_sq);
        self.statistic = vs_null.max(vs_alt);
        if !self.stopped && self.statistic >= cfg.boundary.eval_unchecked(cfg.cost * n) {
            self.stopped = true;
            self.stop_time = Some(self.time);
        }
    }

    /// Current direction from the estimator, whether or not stopped.
    #[inline]
    pub fn direction(&self, cfg: &GlrConfig) -> Hypothesis {
        if self.theta_hat >= cfg.decision_point() {
            Hypothesis::H1
        } else {
            Hypothesis::H0
        }
    }

    /// Index 0..=4 of the band holding the statistic at the current time;
    /// 0 means below `g(k·c)`.
    pub fn band(&self, cfg: &GlrConfig) -> usize {
        let kc = self.time as f64 * cfg.cost;
        let edge = |scale: f64| {
            let t = kc * scale;
            if t > 0.0 {
                cfg.boundary.eval_unchecked(t)
            } else {
                f64::INFINITY
            }
        };
        let d = cfg.delta;
        let edges = [edge(1.0), edge(3.0 * d), edge(2.0 * d), edge(d)];
        let w = self.statistic;
        let mut idx = edges.iter().take_while(|&&e| w >= e).count();
        // Collapsed bands: a value sitting on a shared edge goes to the
        // lowest band that owns the edge.
        while idx > 1 && edges[idx - 1] == edges[idx - 2] && w == edges[idx - 1] {
            idx -= 1;
        }
        idx
    }

    /// Single-level output: `b₁`/`b₀` by direction while at or above `g(k·c)`.
    pub fn binary(&self, cfg: &GlrConfig, q: &QuantizerConfig) -> f64 {
        if !self.stopped || self.band(cfg) == 0 {
            return 0.0;
        }
        match self.direction(cfg) {
            Hypothesis::H1 => q.binary_levels[0],
            Hypothesis::H0 => q.binary_levels[1],
        }
    }
}

pub fn glr_step(mut state: GlrState, x: f64, cfg: &GlrConfig, sigma_sq: f64) -> GlrState {
    state.step(x, cfg, sigma_sq);
    state
}

pub fn glr_decide(state: &GlrState, cfg: &GlrConfig) -> Result<Hypothesis> {
    if !state.stopped {
        return Err(usage_err("GLR decision requested before the test stopped"));
    }
    Ok(state.direction(cfg))
}

/// Four-level output with time-varying band edges
/// `g(kc) ≤ g(3Δkc) ≤ g(2Δkc) ≤ g(Δkc)`.
pub fn glr_quantize(state: &GlrState, cfg: &GlrConfig, q: &QuantizerConfig) -> Result<f64> {
    let dir = glr_decide(state, cfg)?;
    Ok(match state.band(cfg) {
        0 => 0.0,
        j => match dir {
            Hypothesis::H1 => q.upper_levels[j - 1],
            Hypothesis::H0 => q.lower_levels[j - 1],
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cfg(theta1: f64, clamp: [f64; 2]) -> GlrConfig {
        GlrConfig {
            theta0: 0.0,
            theta1,
            cost: 0.01,
            clamp_range: clamp,
            delta: 0.25,
            boundary: Boundary::LogInverse,
        }
    }

    #[test]
    fn boundary_values() {
        let g = Boundary::LogInverse;
        assert!(g.eval(0.01).unwrap() > g.eval(0.1).unwrap());
        assert_abs_diff_eq!(g.eval(0.01).unwrap(), 4.605170185988091, epsilon = 1e-12);
        assert_eq!(g.eval(1.0).unwrap(), 0.0);
        assert!(matches!(g.eval(0.0), Err(Error::Domain(_))));
        assert!(g.eval(-1.0).is_err());
    }

    #[test]
    fn corrected_boundary_interpolates() {
        let g = Boundary::Corrected(vec![[0.1, 1.0], [0.3, 0.0]]);
        assert_abs_diff_eq!(g.eval(0.2).unwrap(), 5f64.ln() + 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(g.eval(0.01).unwrap(), 100f64.ln() + 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(g.eval(0.5).unwrap(), 2f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn null_data_gives_zero_null_term() {
        let c = cfg(0.5, [0.0, 2.0]);
        let mut s = GlrState::new();
        for _ in 0..5 {
            s.step(0.0, &c, 1.0);
        }
        assert_eq!(s.theta_hat, 0.0);
        let vs_null = gaussian_log_ratio_sum(5.0, 0.0, s.theta_hat, 0.0, 1.0);
        assert_eq!(vs_null, 0.0);
    }

    #[test]
    fn estimator_is_clamped() {
        let c = cfg(0.5, [0.0, 0.8]);
        let mut s = GlrState::new();
        s.step(3.0, &c, 1.0);
        assert_eq!(s.theta_hat, 0.8);
        let mut s = GlrState::new();
        s.step(-3.0, &c, 1.0);
        assert_eq!(s.theta_hat, 0.0);
    }

    #[test]
    fn closed_form_hand_example() {
        // n=10, S=10: θ̂=1, vs θ₀: 10·1·(1−0.5)=5, vs θ₁: 10·0.5·(1−0.75)=1.25.
        let c = cfg(0.5, [-10.0, 10.0]);
        let mut s = GlrState::new();
        for _ in 0..10 {
            s.step(1.0, &c, 1.0);
        }
        assert_abs_diff_eq!(s.theta_hat, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            gaussian_log_ratio_sum(10.0, 1.0, 1.0, 0.5, 1.0),
            1.25,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(s.statistic, 5.0, epsilon = 1e-12);
    }

    #[test]
    fn decision_point_and_direction() {
        let c = cfg(1.0, [0.0, 2.0]);
        assert_eq!(c.decision_point(), 0.5);
        let s = GlrState {
            theta_hat: 0.7,
            stopped: true,
            ..Default::default()
        };
        assert_eq!(glr_decide(&s, &c).unwrap(), Hypothesis::H1);
        let fading = cfg(std::f64::consts::LN_2, [0.0, 2.0]);
        assert_abs_diff_eq!(fading.decision_point(), 0.34657359027997264, epsilon = 1e-15);
        let early = GlrState::new();
        assert!(matches!(glr_decide(&early, &c), Err(Error::Usage(_))));
        assert!(glr_quantize(&early, &c, &QuantizerConfig::default()).is_err());
    }

    #[test]
    fn quantizer_bands_follow_boundary() {
        // kc = 0.1, Δ = 0.25: edges ≈ 2.303, 2.590, 2.996, 3.689.
        let mut c = cfg(0.5, [0.0, 2.0]);
        c.cost = 0.01;
        let q = QuantizerConfig::default();
        let mut s = GlrState {
            time: 10,
            stopped: true,
            theta_hat: 1.0,
            statistic: 3.0,
            ..Default::default()
        };
        assert_eq!(glr_quantize(&s, &c, &q).unwrap(), 3.0);
        s.statistic = 0.1f64.recip().ln();
        assert_eq!(glr_quantize(&s, &c, &q).unwrap(), 1.0);
        s.statistic = 2.0;
        assert_eq!(glr_quantize(&s, &c, &q).unwrap(), 0.0);
        s.statistic = 10.0;
        assert_eq!(glr_quantize(&s, &c, &q).unwrap(), 4.0);
        s.theta_hat = 0.1;
        assert_eq!(glr_quantize(&s, &c, &q).unwrap(), -4.0);
    }

    #[test]
    fn degenerate_bands_tie_to_lower_index() {
        let mut c = cfg(0.5, [0.0, 2.0]);
        c.delta = 1.0 / 3.0;
        let q = QuantizerConfig::default();
        let g = c.boundary.eval(10.0 * c.cost).unwrap();
        let mut s = GlrState {
            time: 10,
            stopped: true,
            theta_hat: 1.0,
            statistic: g,
            ..Default::default()
        };
        assert_eq!(glr_quantize(&s, &c, &q).unwrap(), 1.0);
        s.statistic = g + 1e-9;
        assert_eq!(glr_quantize(&s, &c, &q).unwrap(), 2.0);
    }

    #[test]
    fn stops_when_statistic_meets_boundary() {
        let c = cfg(0.5, [0.0, 2.0]);
        let mut s = GlrState::new();
        let mut n = 0;
        while !s.stopped {
            s.step(1.0, &c, 1.0);
            n += 1;
        }
        // θ̂ = 1: statistic n/2 against ln(1/(0.01 n)).
        let expect = (1..).find(|&k| k as f64 / 2.0 >= (1.0 / (0.01 * k as f64)).ln()).unwrap();
        assert_eq!(n, expect);
        assert_eq!(s.stop_time, Some(expect as u32));
    }

    #[test]
    fn far_alternative_dominates_statistic() {
        // For θ₁ far above the data the vs-θ₁ sum is large and positive and
        // grows like nθ₁²/2σ².
        let data = [0.3, -0.2, 0.9, 0.4];
        let mut prev = 0.0;
        for theta1 in [5.0, 50.0, 500.0] {
            let c = cfg(theta1, [0.0, 2.0]);
            let mut s = GlrState::new();
            for &x in &data {
                s.step(x, &c, 1.0);
            }
            let n = data.len() as f64;
            let m = data.iter().sum::<f64>() / n;
            let vs_alt = gaussian_log_ratio_sum(n, m, s.theta_hat, theta1, 1.0);
            assert_eq!(s.statistic, vs_alt);
            assert!(s.statistic > prev);
            prev = s.statistic;
        }
        // With θ₁ pinned at the estimate the vs-θ₁ sum vanishes and the
        // statistic is the vs-θ₀ term.
        let c = cfg(0.35, [0.35, 0.35]);
        let mut s = GlrState::new();
        for &x in &data {
            s.step(x, &c, 1.0);
        }
        let m = data.iter().sum::<f64>() / 4.0;
        assert_abs_diff_eq!(
            s.statistic,
            gaussian_log_ratio_sum(4.0, m, 0.35, 0.0, 1.0),
            epsilon = 1e-12
        );
    }

    fn naive_statistic(xs: &[f64], c: &GlrConfig, sigma_sq: f64) -> f64 {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let th = mean.min(c.clamp_range[1]).max(c.clamp_range[0]);
        let logpdf = |x: f64, mu: f64| -(x - mu).powi(2) / (2.0 * sigma_sq);
        let a: f64 = xs.iter().map(|&x| logpdf(x, th) - logpdf(x, c.theta0)).sum();
        let b: f64 = xs.iter().map(|&x| logpdf(x, th) - logpdf(x, c.theta1)).sum();
        a.max(b)
    }

    proptest::proptest! {
        #[test]
        fn closed_form_matches_naive_sum(
            xs in proptest::collection::vec(-3.0f64..4.0, 1..120),
            theta1 in 0.1f64..2.0,
            a1 in -0.5f64..0.2,
            width in 0.0f64..3.0,
            sigma_sq in 0.3f64..3.0,
        ) {
            let c = cfg(theta1, [a1, a1 + width]);
            let mut s = GlrState::new();
            for (k, &x) in xs.iter().enumerate() {
                s.step(x, &c, sigma_sq);
                let naive = naive_statistic(&xs[..=k], &c, sigma_sq);
                proptest::prop_assert!((s.statistic - naive).abs() < 1e-9 * (1.0 + naive.abs()));
                proptest::prop_assert!(s.theta_hat >= c.clamp_range[0] && s.theta_hat <= c.clamp_range[1]);
            }
        }

        #[test]
        fn statistic_invariant_to_swaps(xs in proptest::collection::vec(-3.0f64..3.0, 2..60), i in 0usize..60, j in 0usize..60) {
            let c = cfg(0.5, [0.0, 2.0]);
            let i = i % xs.len();
            let j = j % xs.len();
            let mut ys = xs.clone();
            ys.swap(i, j);
            let run = |v: &[f64]| {
                let mut s = GlrState::new();
                for &x in v { s.step(x, &c, 1.0); }
                s.statistic
            };
            proptest::prop_assert!((run(&xs) - run(&ys)).abs() < 1e-9);
        }
    }
}
