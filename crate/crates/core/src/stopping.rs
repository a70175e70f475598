//! Stopping rules driven by residual norms only.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `(c₁, c₂)` with `c₁ = 2ω̄³ωρ + 20ρω̄` and `c₂ = 3 + ½ω̄⁴ω² + ½ωω̄²`.
pub fn constants_c1_c2(omega_bar: f64, omega: f64, rho: f64) -> (f64, f64) {
    let c1 = 2.0 * omega_bar.powi(3) * omega * rho + 20.0 * rho * omega_bar;
    let c2 = 3.0 + 0.5 * omega_bar.powi(4) * omega * omega + 0.5 * omega * omega_bar * omega_bar;
    (c1, c2)
}

/// `Δ(δ) = c₁δ + c₂δ²`
pub fn delta_of(c1: f64, c2: f64, delta: f64) -> f64 {
    c1 * delta + c2 * delta * delta
}

/// A stopping rule. Rules never see iterates, only `(k, ‖F(x_k) − y^δ‖)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum StoppingRule {
    /// Stop at the first `k` with `‖F(x_k) − y^δ‖ ≤ τδ`.
    Discrepancy { tau: f64, delta: f64 },
    /// Stop at the first `k ≥ 1` with
    /// `‖F(x_k) − y^δ‖² ≤ 2(k+α−1)²Δ(δ)/(k(α−3)) + τ²δ²`.
    /// At `k = 0` only the plain discrepancy clause applies.
    DeltaCorrected {
        tau: f64,
        delta: f64,
        c1: f64,
        c2: f64,
        alpha: f64,
    },
}

impl StoppingRule {
    pub fn discrepancy(tau: f64, delta: f64) -> Result<Self> {
        check_common(tau, delta)?;
        Ok(StoppingRule::Discrepancy { tau, delta })
    }

    pub fn delta_corrected(tau: f64, delta: f64, c1: f64, c2: f64, alpha: f64) -> Result<Self> {
        let rule = StoppingRule::DeltaCorrected {
            tau,
            delta,
            c1,
            c2,
            alpha,
        };
        rule.validate()?;
        Ok(rule)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            StoppingRule::Discrepancy { tau, delta } => check_common(tau, delta),
            StoppingRule::DeltaCorrected {
                tau,
                delta,
                c1,
                c2,
                alpha,
            } => {
                check_common(tau, delta)?;
                if !(c1 >= 0.0 && c2 >= 0.0 && c1.is_finite() && c2.is_finite()) {
                    return Err(Error::Config(format!(
                        "constants must be nonnegative, got c1 = {c1}, c2 = {c2}"
                    )));
                }
                if !(alpha > 3.0) {
                    return Err(Error::Config(format!(
                        "the corrected rule needs alpha > 3, got {alpha}"
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn tau(&self) -> f64 {
        match *self {
            StoppingRule::Discrepancy { tau, .. } | StoppingRule::DeltaCorrected { tau, .. } => tau,
        }
    }

    pub fn delta(&self) -> f64 {
        match *self {
            StoppingRule::Discrepancy { delta, .. }
            | StoppingRule::DeltaCorrected { delta, .. } => delta,
        }
    }

    /// Same rule with a different noise level.
    pub fn with_delta(self, delta: f64) -> Self {
        match self {
            StoppingRule::Discrepancy { tau, .. } => StoppingRule::Discrepancy { tau, delta },
            StoppingRule::DeltaCorrected {
                tau, c1, c2, alpha, ..
            } => StoppingRule::DeltaCorrected {
                tau,
                delta,
                c1,
                c2,
                alpha,
            },
        }
    }

    /// Bound on the squared residual at step `k`. For the corrected rule at
    /// `k = 0` this is the discrepancy bound `τ²δ²`.
    pub fn threshold(&self, k: usize) -> f64 {
        match *self {
            StoppingRule::Discrepancy { tau, delta } => tau * tau * delta * delta,
            StoppingRule::DeltaCorrected {
                tau,
                delta,
                c1,
                c2,
                alpha,
            } => {
                let base = tau * tau * delta * delta;
                if k == 0 {
                    return base;
                }
                let kf = k as f64;
                let a = kf + alpha - 1.0;
                2.0 * a * a * delta_of(c1, c2, delta) / (kf * (alpha - 3.0)) + base
            }
        }
    }

    pub fn should_stop(&self, k: usize, residual_norm: f64) -> bool {
        match *self {
            StoppingRule::Discrepancy { tau, delta } => residual_norm <= tau * delta,
            StoppingRule::DeltaCorrected { .. } => residual_norm <= self.threshold(k).sqrt(),
        }
    }
}

fn check_common(tau: f64, delta: f64) -> Result<()> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::Config(format!("tau must be positive, got {tau}")));
    }
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::Config(format!("delta must be >= 0, got {delta}")));
    }
    Ok(())
}

/// Positive root `k` of `k(k − 1) = C/δ²` with
/// `C = 2(α−1)E(1)/(ω(α−3)(τ²−1))`: a ceiling for the stopping index.
pub fn kstar_bound(alpha: f64, omega: f64, tau: f64, e1: f64, delta: f64) -> Result<f64> {
    if !(tau > 1.0) {
        return Err(Error::Config(format!("bound needs tau > 1, got {tau}")));
    }
    if !(alpha > 3.0) {
        return Err(Error::Config(format!("bound needs alpha > 3, got {alpha}")));
    }
    if !(omega > 0.0 && delta > 0.0 && e1 >= 0.0) {
        return Err(Error::Config("bound needs omega > 0, delta > 0, E(1) >= 0".into()));
    }
    let c = 2.0 * (alpha - 1.0) * e1 / (omega * (alpha - 3.0) * (tau * tau - 1.0));
    Ok(0.5 * (1.0 + (1.0 + 4.0 * c / (delta * delta)).sqrt()))
}
