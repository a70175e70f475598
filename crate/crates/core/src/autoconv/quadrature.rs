//! Gauss–Legendre rules on the unit interval.

use crate::error::{Error, Result};

/// An `n`-point Gauss–Legendre rule mapped to `[0, 1]`. Integrates
/// polynomials of degree `≤ 2n − 1` exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// Legendre polynomial `P_n(t)` and its derivative by the three-term recurrence.
fn legendre(n: usize, t: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, t);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * t * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (t * p1 - p0) / (t * t - 1.0);
    (p1, dp)
}

impl GaussRule {
    pub fn new(points: usize) -> Result<Self> {
        if points == 0 || points > 64 {
            return Err(Error::Config(format!(
                "quadrature order must be in 1..=64, got {points}"
            )));
        }
        let n = points;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n {
            // Chebyshev-like initial guess for the i-th root, largest first
            let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre(n, t);
                let step = p / dp;
                t -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre(n, t);
            let w = 2.0 / ((1.0 - t * t) * dp * dp);
            // map [-1, 1] to [0, 1], ascending
            nodes[n - 1 - i] = 0.5 * (t + 1.0);
            weights[n - 1 - i] = 0.5 * w;
        }
        Ok(GaussRule { nodes, weights })
    }

    pub fn points(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `∫₀¹ f`
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(t))
            .sum()
    }
}
