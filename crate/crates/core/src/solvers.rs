//! Landweber, Nesterov-accelerated proximal gradient and the general
//! two-point gradient iteration.

use std::time::Instant;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{project_ball_with, BallConstraint, Vector};
use crate::operator::{residual, ForwardProblem, ObservedData};
use crate::stopping::StoppingRule;

/// Residual growth factor (relative to `k = 0`) treated as divergence.
pub const DIVERGENCE_FACTOR: f64 = 1e6;

pub const DEFAULT_MAX_ITER: usize = 10_000;

/// How the momentum weight `λ_k` is chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum CombinationRule {
    /// `λ_k = (k − 1)/(k + α − 1)`, with `λ_0 = 0`.
    Nesterov,
    Constant(f64),
    /// `λ_k` read from the list; the last entry repeats.
    Sequence(Vec<f64>),
}

/// `(k − 1)/(k + α − 1)` for `k ≥ 1`, and 0 at `k = 0`.
pub fn nesterov_lambda(k: usize, alpha: f64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let kf = k as f64;
    (kf - 1.0) / (kf + alpha - 1.0)
}

impl CombinationRule {
    pub fn lambda(&self, k: usize, alpha: f64) -> f64 {
        match self {
            CombinationRule::Nesterov => nesterov_lambda(k, alpha),
            CombinationRule::Constant(l) => *l,
            CombinationRule::Sequence(seq) => seq
                .get(k)
                .or_else(|| seq.last())
                .copied()
                .unwrap_or(0.0),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = |l: f64| (0.0..1.0).contains(&l);
        match self {
            CombinationRule::Nesterov => Ok(()),
            CombinationRule::Constant(l) if ok(*l) => Ok(()),
            CombinationRule::Sequence(seq) if seq.iter().all(|&l| ok(l)) => Ok(()),
            _ => Err(Error::Config("combination weights must lie in [0, 1)".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Step size `ω`.
    pub omega: f64,
    /// Momentum shape `α`.
    pub alpha: f64,
    pub max_iter: usize,
    /// Lipschitz constant `L` of `∇Φ`, if known; `ω < 1/L` is then checked.
    pub lipschitz_estimate: Option<f64>,
    pub combination: CombinationRule,
    /// Keep `x_k` and `z_k` in the trace (needed for energy diagnostics).
    pub store_iterates: bool,
    /// Known solution; when set the trace records `‖x_k − x†‖`.
    pub reference: Option<Vector>,
}

impl SolverConfig {
    pub fn new(omega: f64) -> Self {
        SolverConfig {
            omega,
            alpha: 3.0,
            max_iter: DEFAULT_MAX_ITER,
            lipschitz_estimate: None,
            combination: CombinationRule::Nesterov,
            store_iterates: false,
            reference: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(Error::Config(format!("omega must be positive, got {}", self.omega)));
        }
        if !(self.alpha >= 3.0 && self.alpha.is_finite()) {
            return Err(Error::Config(format!("alpha must be >= 3, got {}", self.alpha)));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be positive".into()));
        }
        if let Some(l) = self.lipschitz_estimate {
            if !(l > 0.0) {
                return Err(Error::Config(format!("Lipschitz estimate must be positive, got {l}")));
            }
            if self.omega * l >= 1.0 {
                warn!("omega = {} violates omega < 1/L with L = {l}", self.omega);
            }
        }
        self.combination.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    DiscrepancyMet,
    MaxIter,
    Diverged,
}

impl StopReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            StopReason::DiscrepancyMet => "discrepancy_met",
            StopReason::MaxIter => "max_iter",
            StopReason::Diverged => "diverged",
        }
    }
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for StopReason {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "discrepancy_met" => Ok(StopReason::DiscrepancyMet),
            "max_iter" => Ok(StopReason::MaxIter),
            "diverged" => Ok(StopReason::Diverged),
            other => Err(Error::Config(format!("unknown stop reason {other:?}"))),
        }
    }
}

/// Snapshot of a running iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationState {
    pub k: usize,
    pub x_curr: Vector,
    pub x_prev: Vector,
    pub z: Vector,
    pub residual_norm: f64,
    pub stopped: bool,
    pub stop_reason: Option<StopReason>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    pub residual_norm: f64,
    pub error_norm: Option<f64>,
    pub energy: Option<f64>,
    /// Seconds since the start of the run.
    pub elapsed_s: f64,
    pub x: Option<Vector>,
    /// The extrapolated point used to compute `x_{k+1}`; absent at the last step.
    pub z: Option<Vector>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    pub records: Vec<IterationRecord>,
    pub stop_reason: StopReason,
}

impl IterationTrace {
    /// Index of the last recorded iterate.
    pub fn k_star(&self) -> usize {
        self.records.last().map_or(0, |r| r.k)
    }

    pub fn elapsed_s(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.elapsed_s)
    }

    pub fn has_iterates(&self) -> bool {
        self.records.iter().all(|r| r.x.is_some())
    }
}

fn project(problem: &dyn ForwardProblem, ball: Option<&BallConstraint>, v: Vector) -> Result<Vector> {
    match ball {
        Some(b) if b.enabled() => project_ball_with(b, &v, |d| problem.domain_norm(d)),
        _ => Ok(v),
    }
}

/// Shared two-point gradient loop. `λ_k = 0` skips the extrapolation so the
/// arithmetic coincides with plain Landweber.
fn run_core(
    problem: &dyn ForwardProblem,
    data: &ObservedData,
    cfg: &SolverConfig,
    x0: &Vector,
    ball: Option<&BallConstraint>,
    stop: &StoppingRule,
    lambda: impl Fn(usize) -> f64,
) -> Result<(Vector, IterationTrace)> {
    cfg.validate()?;
    stop.validate()?;
    x0.check_len(problem.domain_dim())?;
    if stop.tau() <= 1.0 {
        warn!("tau = {} <= 1: outside the convergence theory", stop.tau());
    }
    if let Some(b) = ball {
        b.center().check_len(problem.domain_dim())?;
        if !b.contains_with(x0, |d| problem.domain_norm(d)) {
            return Err(Error::Config("initial guess lies outside the projection ball".into()));
        }
    }
    if let Some(r) = &cfg.reference {
        r.check_len(problem.domain_dim())?;
    }

    let start = Instant::now();
    let error = |x: &Vector| cfg.reference.as_ref().map(|r| problem.domain_norm(&x.sub(r)));
    let mut x_prev = x0.clone();
    let mut x = x0.clone();
    let (mut r, mut rn) = residual(problem, &x, data)?;
    let initial = rn;
    let mut records = Vec::new();
    let mut k = 0;
    let reason = loop {
        let mut rec = IterationRecord {
            k,
            residual_norm: rn,
            error_norm: error(&x),
            energy: None,
            elapsed_s: start.elapsed().as_secs_f64(),
            x: cfg.store_iterates.then(|| x.clone()),
            z: None,
        };
        if !rn.is_finite() || rn > DIVERGENCE_FACTOR * initial.max(f64::MIN_POSITIVE) {
            records.push(rec);
            break StopReason::Diverged;
        }
        if stop.should_stop(k, rn) {
            records.push(rec);
            break StopReason::DiscrepancyMet;
        }
        if k == cfg.max_iter {
            records.push(rec);
            break StopReason::MaxIter;
        }
        let lam = lambda(k);
        let (z, rz) = if lam == 0.0 {
            (x.clone(), r)
        } else {
            let z = x.add_scaled(lam, &x.sub(&x_prev));
            let (rz, _) = residual(problem, &z, data)?;
            (z, rz)
        };
        let g = problem.adjoint_apply(&z, &rz)?;
        let step = z.add_scaled(-cfg.omega, &g);
        if cfg.store_iterates {
            rec.z = Some(z);
        }
        records.push(rec);
        if !step.is_finite() {
            k += 1;
            records.push(IterationRecord {
                k,
                residual_norm: f64::INFINITY,
                error_norm: None,
                energy: None,
                elapsed_s: start.elapsed().as_secs_f64(),
                x: None,
                z: None,
            });
            break StopReason::Diverged;
        }
        let next = project(problem, ball, step)?;
        x_prev = std::mem::replace(&mut x, next);
        (r, rn) = residual(problem, &x, data)?;
        k += 1;
    };
    Ok((
        x,
        IterationTrace {
            records,
            stop_reason: reason,
        },
    ))
}

/// `x_{k+1} = x_k + ω F'(x_k)*(y^δ − F(x_k))`
pub fn landweber_run(
    problem: &dyn ForwardProblem,
    data: &ObservedData,
    cfg: &SolverConfig,
    x0: &Vector,
    stop: &StoppingRule,
) -> Result<(Vector, IterationTrace)> {
    run_core(problem, data, cfg, x0, None, stop, |_| 0.0)
}

/// `z_k = x_k + (k−1)/(k+α−1)(x_k − x_{k−1})`,
/// `x_{k+1} = P(z_k + ω F'(z_k)*(y^δ − F(z_k)))` with `P` the projection
/// onto `ball` and `x_{−1} = x_0`.
pub fn nesterov_run(
    problem: &dyn ForwardProblem,
    data: &ObservedData,
    cfg: &SolverConfig,
    x0: &Vector,
    ball: &BallConstraint,
    stop: &StoppingRule,
) -> Result<(Vector, IterationTrace)> {
    let alpha = cfg.alpha;
    if alpha == 3.0 {
        warn!("alpha = 3: energy estimates need alpha > 3");
    }
    run_core(problem, data, cfg, x0, Some(ball), stop, |k| nesterov_lambda(k, alpha))
}

/// Two-point gradient iteration with weights from `cfg.combination`.
pub fn tpg_run(
    problem: &dyn ForwardProblem,
    data: &ObservedData,
    cfg: &SolverConfig,
    x0: &Vector,
    ball: &BallConstraint,
    stop: &StoppingRule,
) -> Result<(Vector, IterationTrace)> {
    let rule = cfg.combination.clone();
    let alpha = cfg.alpha;
    run_core(problem, data, cfg, x0, Some(ball), stop, move |k| rule.lambda(k, alpha))
}
