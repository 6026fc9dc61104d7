//! Walk reflected at zero, `W ← max(0, W + S)`, started at 0 and absorbed
//! at the first slot with `W ≥ β`.
//!
//! The mean passage time from level s satisfies
//!
//! ```text
//! L(s) = 1 + F_S(−s)·L(0) + ∫_0^β L(u) f_S(u − s) du
//! ```
//!
//! (one step, then restart from 0 on landing at or below zero, or from u
//! inside the strip). A trapezoid Nyström discretization turns it into a
//! dense linear system. The same discretized kernel also propagates the
//! state law forward to give the finite-horizon passage distribution.

use nalgebra::{DMatrix, DVector};

use crate::analysis::IncrementLaw;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RenewalGrid {
    pub threshold: f64,
    pub step: f64,
    /// L(s) at s = 0, h, 2h, …, β.
    pub values: Vec<f64>,
}

impl RenewalGrid {
    pub fn l0(&self) -> f64 {
        self.values[0]
    }

    /// Rate λ_β = 1/L(0) of the exponential passage approximation.
    pub fn lambda(&self) -> f64 {
        1.0 / self.l0()
    }
}

struct Grid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

fn grid(beta: f64, step: f64) -> Result<Grid> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::Domain(format!("threshold must be positive, got {beta}")));
    }
    if !(step > 0.0 && step <= beta / 200.0 * (1.0 + 1e-12)) {
        return Err(Error::Domain(format!(
            "grid step must lie in (0, beta/200], got {step} for beta {beta}"
        )));
    }
    let m = (beta / step).round() as usize;
    let h = beta / m as f64;
    let nodes = (0..=m).map(|j| j as f64 * h).collect();
    let mut weights = vec![h; m + 1];
    weights[0] = 0.5 * h;
    weights[m] = 0.5 * h;
    Ok(Grid { nodes, weights })
}

/// Solve the renewal equation for the mean first-passage time.
pub fn renewal_first_passage_mean(law: IncrementLaw, beta: f64, step: f64) -> Result<RenewalGrid> {
    let g = grid(beta, step)?;
    let n = g.nodes.len();
    let a = DMatrix::from_fn(n, n, |i, j| {
        let s = g.nodes[i];
        let mut v = -g.weights[j] * law.pdf(g.nodes[j] - s);
        if j == 0 {
            v -= law.cdf(-s);
        }
        if i == j {
            v += 1.0;
        }
        v
    });
    let rhs = DVector::from_element(n, 1.0);
    let sol = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Numerical("renewal system is singular".into()))?;
    if sol.iter().any(|v| !v.is_finite() || *v < 1.0 - 1e-6) {
        return Err(Error::Numerical(
            "renewal solution is not a valid passage mean (law too degenerate for the grid)".into(),
        ));
    }
    Ok(RenewalGrid {
        threshold: beta,
        step: beta / (n - 1) as f64,
        values: sol.iter().copied().collect(),
    })
}

/// `P(τ_β ≤ k)` for k = 1..=horizon, walk started at 0.
pub fn reflected_passage_cdf(
    law: IncrementLaw,
    beta: f64,
    step: f64,
    horizon: usize,
) -> Result<Vec<f64>> {
    let g = grid(beta, step)?;
    let n = g.nodes.len();
    // kernel[i][j] = w_j f(u_i − u_j): density at u_i from mass at u_j.
    let kernel = DMatrix::from_fn(n, n, |i, j| g.weights[j] * law.pdf(g.nodes[i] - g.nodes[j]));
    let to_atom = DVector::from_fn(n, |j, _| g.weights[j] * law.cdf(-g.nodes[j]));
    let from_atom = DVector::from_fn(n, |i, _| law.pdf(g.nodes[i]));
    let weights = DVector::from_vec(g.weights.clone());
    let atom_stay = law.cdf(0.0);

    let mut atom = 1.0;
    let mut density = DVector::<f64>::zeros(n);
    let mut out = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let next_atom = atom * atom_stay + to_atom.dot(&density);
        let next_density = &kernel * &density + &from_atom * atom;
        atom = next_atom;
        density = next_density;
        let survival = atom + weights.dot(&density);
        out.push((1.0 - survival).clamp(0.0, 1.0));
    }
    Ok(out)
}
