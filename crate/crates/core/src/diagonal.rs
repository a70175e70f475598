//! Nonlinear diagonal operator on truncated ℓ².
//!
//! `F(x)_n = x_n² / n` for `n ≤ M` and `F(x)_n = x_n / n` for `M < n ≤ N`
//! (indices start at 1; coordinate `i` holds `n = i + 1`).

use crate::error::{Error, Result};
use crate::hilbert::Vector;
use crate::operator::ForwardProblem;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiagonalProblem {
    m: usize,
    n: usize,
}

impl DiagonalProblem {
    /// `m` components are quadratic, the remaining `n - m` linear. `m = 0`
    /// gives a purely linear operator.
    pub fn new(m: usize, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("dimension N must be positive".into()));
        }
        if m > n {
            return Err(Error::Config(format!("cutoff M = {m} exceeds N = {n}")));
        }
        Ok(DiagonalProblem { m, n })
    }

    pub fn cutoff(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn nonlinear(&self, i: usize) -> bool {
        i < self.m
    }

    /// `x†_n = c / n`
    pub fn harmonic(&self, c: f64) -> Vector {
        Vector::from_fn(self.n, |i| c / (i + 1) as f64)
    }

    /// `x₀ = x† + (−1)ⁿ ρ√6 / (πn)`. The perturbation has norm just below `ρ`.
    pub fn alternating_start(&self, xdag: &Vector, rho: f64) -> Result<Vector> {
        xdag.check_len(self.n)?;
        let scale = rho * 6f64.sqrt() / std::f64::consts::PI;
        Ok(Vector::from_fn(self.n, |i| {
            let n = (i + 1) as f64;
            let sign = if (i + 1) % 2 == 0 { 1.0 } else { -1.0 };
            xdag[i] + sign * scale / n
        }))
    }

    /// Inverts `F` exactly using the nonnegative square-root branch on the
    /// quadratic block. Negative data there is clamped to zero.
    pub fn inverse(&self, y: &Vector) -> Result<Vector> {
        y.check_len(self.n)?;
        Ok(Vector::from_fn(self.n, |i| {
            let n = (i + 1) as f64;
            if self.nonlinear(i) {
                (n * y[i]).max(0.0).sqrt()
            } else {
                n * y[i]
            }
        }))
    }

    /// Amplification `|Δx_n| / ε` of the exact inverse when `y_n` alone is
    /// perturbed by `ε`, for each requested 1-based index.
    pub fn ill_posedness_scan(&self, y: &Vector, eps: f64, indices: &[usize]) -> Result<Vec<f64>> {
        let base = self.inverse(y)?;
        indices
            .iter()
            .map(|&n| {
                if n == 0 || n > self.n {
                    return Err(Error::Config(format!("index {n} outside 1..={}", self.n)));
                }
                let mut yp = y.clone();
                yp[n - 1] += eps;
                let xp = self.inverse(&yp)?;
                Ok((xp[n - 1] - base[n - 1]).abs() / eps)
            })
            .collect()
    }

    /// Largest `ρ` with `(x†_n)² ≥ 28|x†_n|ρ + δ̄(2ȳ + δ̄)` for all `n ≤ M`.
    pub fn convexity_radius(&self, xdag: &Vector, ybar: f64, deltabar: f64) -> Result<ConvexityRadius> {
        xdag.check_len(self.n)?;
        let slack = deltabar * (2.0 * ybar + deltabar);
        let mut rho = f64::INFINITY;
        for i in 0..self.m {
            let a = xdag[i].abs();
            if a == 0.0 {
                return Ok(ConvexityRadius::infeasible());
            }
            rho = rho.min((a * a - slack) / (28.0 * a));
        }
        if rho <= 0.0 {
            return Ok(ConvexityRadius::infeasible());
        }
        Ok(ConvexityRadius {
            rho,
            feasible: true,
        })
    }
}

/// Result of a convexity-radius certificate. `feasible == false` means no
/// positive radius satisfies the sufficient condition; `rho` is then 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvexityRadius {
    pub rho: f64,
    pub feasible: bool,
}

impl ConvexityRadius {
    pub(crate) fn infeasible() -> Self {
        ConvexityRadius {
            rho: 0.0,
            feasible: false,
        }
    }
}

impl ForwardProblem for DiagonalProblem {
    fn domain_dim(&self) -> usize {
        self.n
    }

    fn range_dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &Vector) -> Result<Vector> {
        x.check_len(self.n)?;
        Ok(Vector::from_fn(self.n, |i| {
            let n = (i + 1) as f64;
            if self.nonlinear(i) {
                x[i] * x[i] / n
            } else {
                x[i] / n
            }
        }))
    }

    fn deriv_apply(&self, x: &Vector, h: &Vector) -> Result<Vector> {
        x.check_len(self.n)?;
        h.check_len(self.n)?;
        Ok(Vector::from_fn(self.n, |i| {
            let n = (i + 1) as f64;
            if self.nonlinear(i) {
                2.0 * x[i] * h[i] / n
            } else {
                h[i] / n
            }
        }))
    }

    // F'(x) is a diagonal matrix, hence self-adjoint
    fn adjoint_apply(&self, x: &Vector, r: &Vector) -> Result<Vector> {
        self.deriv_apply(x, r)
    }

    fn second_deriv_apply(&self, x: &Vector, h: &Vector, w: &Vector) -> Result<Vector> {
        x.check_len(self.n)?;
        h.check_len(self.n)?;
        w.check_len(self.n)?;
        Ok(Vector::from_fn(self.n, |i| {
            if self.nonlinear(i) {
                2.0 * h[i] * w[i] / (i + 1) as f64
            } else {
                0.0
            }
        }))
    }

    fn has_second_derivative(&self) -> bool {
        true
    }
}
