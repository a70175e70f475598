//! The forward-problem abstraction consumed by every solver, plus generic
//! self-tests: adjoint consistency, finite-difference derivative checks and
//! a power-iteration bound on the derivative norm.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::hilbert::{self, BallConstraint, Vector};

/// A nonlinear operator `F: X → Y` between finite-dimensional real Hilbert
/// spaces together with its first (and optionally second) derivative.
///
/// Implementations are immutable after construction; all methods take
/// `&self` and may be called from several threads at once.
pub trait ForwardProblem: Send + Sync {
    fn domain_dim(&self) -> usize;

    fn range_dim(&self) -> usize;

    /// `F(x)`
    fn apply(&self, x: &Vector) -> Result<Vector>;

    /// `F'(x) h`
    fn deriv_apply(&self, x: &Vector, h: &Vector) -> Result<Vector>;

    /// `F'(x)* r`, the adjoint with respect to [`Self::domain_inner`] and
    /// [`Self::range_inner`].
    fn adjoint_apply(&self, x: &Vector, r: &Vector) -> Result<Vector>;

    /// `F''(x)(h, w)`. Only the convexity checks need it.
    fn second_deriv_apply(&self, _x: &Vector, _h: &Vector, _w: &Vector) -> Result<Vector> {
        Err(Error::Unsupported("second derivative"))
    }

    fn has_second_derivative(&self) -> bool {
        false
    }

    fn domain_inner(&self, a: &Vector, b: &Vector) -> f64 {
        euclid(a, b)
    }

    fn range_inner(&self, a: &Vector, b: &Vector) -> f64 {
        euclid(a, b)
    }

    fn domain_norm(&self, a: &Vector) -> f64 {
        self.domain_inner(a, a).max(0.0).sqrt()
    }

    fn range_norm(&self, a: &Vector) -> f64 {
        self.range_inner(a, a).max(0.0).sqrt()
    }

    /// Maps an arbitrary coordinate vector onto the admissible subspace of
    /// the domain (for example by enforcing a periodicity constraint).
    fn admissible_domain(&self, v: Vector) -> Vector {
        v
    }

    fn admissible_range(&self, v: Vector) -> Vector {
        v
    }
}

fn euclid(a: &Vector, b: &Vector) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Exact and noisy data for one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservedData {
    pub y_exact: Option<Vector>,
    pub y_noisy: Vector,
    pub delta: f64,
}

impl ObservedData {
    pub fn new(y_exact: Option<Vector>, y_noisy: Vector, delta: f64) -> Result<Self> {
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(Error::Config(format!("noise level must be >= 0, got {delta}")));
        }
        if let Some(y) = &y_exact {
            y.check_len(y_noisy.len())?;
        }
        Ok(ObservedData {
            y_exact,
            y_noisy,
            delta,
        })
    }

    /// Noise-free data: `y^δ = y`, `δ = 0`.
    pub fn exact(y: Vector) -> Self {
        ObservedData {
            y_exact: Some(y.clone()),
            y_noisy: y,
            delta: 0.0,
        }
    }

    /// Checks `‖y − y^δ‖ ≤ δ` (with relative slack 1e-12) in the geometry of
    /// `problem`. Always true when the exact data is unknown.
    pub fn is_consistent(&self, problem: &dyn ForwardProblem) -> bool {
        match &self.y_exact {
            None => true,
            Some(y) => problem.range_norm(&y.sub(&self.y_noisy)) <= self.delta * (1.0 + 1e-12),
        }
    }
}

/// Returns `F(x) − y^δ` and its norm.
pub fn residual(
    problem: &dyn ForwardProblem,
    x: &Vector,
    data: &ObservedData,
) -> Result<(Vector, f64)> {
    data.y_noisy.check_len(problem.range_dim())?;
    let r = problem.apply(x)?.sub(&data.y_noisy);
    let n = problem.range_norm(&r);
    Ok((r, n))
}

/// `Φ^δ(x) = ½‖F(x) − y^δ‖²`
pub fn objective(problem: &dyn ForwardProblem, x: &Vector, data: &ObservedData) -> Result<f64> {
    let (_, n) = residual(problem, x, data)?;
    Ok(0.5 * n * n)
}

/// `∇Φ^δ(x) = F'(x)*(F(x) − y^δ)`. The Landweber direction is its negative.
pub fn gradient(problem: &dyn ForwardProblem, x: &Vector, data: &ObservedData) -> Result<Vector> {
    let (r, _) = residual(problem, x, data)?;
    problem.adjoint_apply(x, &r)
}

/// Draws a standard-normal admissible vector of the domain.
pub fn random_domain_vector(problem: &dyn ForwardProblem, rng: &mut ChaCha8Rng) -> Vector {
    let v = Vector::from_fn(problem.domain_dim(), |_| StandardNormal.sample(rng));
    problem.admissible_domain(v)
}

pub fn random_range_vector(problem: &dyn ForwardProblem, rng: &mut ChaCha8Rng) -> Vector {
    let v = Vector::from_fn(problem.range_dim(), |_| StandardNormal.sample(rng));
    problem.admissible_range(v)
}

/// Draws a random admissible direction of unit domain norm.
pub fn random_unit_direction(problem: &dyn ForwardProblem, rng: &mut ChaCha8Rng) -> Vector {
    loop {
        let v = random_domain_vector(problem, rng);
        let n = problem.domain_norm(&v);
        if n > 0.0 {
            return v.scale(1.0 / n);
        }
    }
}

/// Samples a point uniformly from `region` (measured in the domain norm).
/// A disabled region yields its center.
pub fn sample_in_ball(
    problem: &dyn ForwardProblem,
    region: &BallConstraint,
    rng: &mut ChaCha8Rng,
) -> Vector {
    use rand::Rng;
    if !region.enabled() || !region.radius().is_finite() {
        return region.center().clone();
    }
    let dir = random_unit_direction(problem, rng);
    let dim = problem.domain_dim() as f64;
    let u: f64 = rng.random();
    let r = region.radius() * u.powf(1.0 / dim);
    region.center().add_scaled(r, &dir)
}

/// Outcome of [`adjoint_test`].
#[derive(Debug, Clone)]
pub struct AdjointReport {
    pub trials: usize,
    /// Largest `|⟨F'(x)h, w⟩ − ⟨h, F'(x)*w⟩| / (1 + |⟨F'(x)h, w⟩|)`.
    pub max_violation: f64,
    pub failure: Option<AdjointFailure>,
}

/// The first triple violating the adjoint identity.
#[derive(Debug, Clone)]
pub struct AdjointFailure {
    pub x: Vector,
    pub h: Vector,
    pub w: Vector,
    pub forward: f64,
    pub backward: f64,
}

impl AdjointReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

pub const ADJOINT_TOLERANCE: f64 = 1e-10;

/// Dot-product test of `adjoint_apply` against `deriv_apply` at random
/// `(x, h, w)`.
pub fn adjoint_test(problem: &dyn ForwardProblem, trials: usize, seed: u64) -> Result<AdjointReport> {
    if trials == 0 {
        return Err(Error::Config("adjoint test needs at least one trial".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_violation = 0.0_f64;
    let mut failure = None;
    for _ in 0..trials {
        let x = random_domain_vector(problem, &mut rng);
        let h = random_domain_vector(problem, &mut rng);
        let w = random_range_vector(problem, &mut rng);
        let forward = problem.range_inner(&problem.deriv_apply(&x, &h)?, &w);
        let backward = problem.domain_inner(&h, &problem.adjoint_apply(&x, &w)?);
        let violation = (forward - backward).abs() / (1.0 + forward.abs());
        max_violation = max_violation.max(violation);
        if violation > ADJOINT_TOLERANCE && failure.is_none() {
            failure = Some(AdjointFailure {
                x,
                h,
                w,
                forward,
                backward,
            });
        }
    }
    Ok(AdjointReport {
        trials,
        max_violation,
        failure,
    })
}

/// Norm estimate of `F'(x)` over a region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorBound {
    /// Largest sampled power-iteration estimate of `‖F'(x)‖`.
    pub norm_estimate: f64,
    /// `norm_estimate` times [`OPERATOR_BOUND_SAFETY`]; use this as `ω̄`.
    pub bound: f64,
}

pub const OPERATOR_BOUND_SAFETY: f64 = 1.1;

const POWER_ITERATIONS: usize = 200;

/// Power-iteration estimate of `‖F'(x)‖` at a single point.
pub fn derivative_norm_at(problem: &dyn ForwardProblem, x: &Vector, rng: &mut ChaCha8Rng) -> Result<f64> {
    let mut v = random_unit_direction(problem, rng);
    let mut estimate = 0.0;
    for _ in 0..POWER_ITERATIONS {
        let fv = problem.deriv_apply(x, &v)?;
        let current = problem.range_norm(&fv);
        let next = problem.adjoint_apply(x, &fv)?;
        let n = problem.domain_norm(&next);
        let converged = (current - estimate).abs() <= 1e-13 * current;
        estimate = current;
        if n == 0.0 || converged {
            break;
        }
        v = next.scale(1.0 / n);
    }
    Ok(estimate)
}

/// Estimates `ω̄ ≥ sup ‖F'(x)‖` over `region` by sampling. Sample `i` uses an
/// independent random stream, so the estimate for `s` samples is the running
/// maximum of the first `s` draws.
pub fn estimate_operator_bound(
    problem: &dyn ForwardProblem,
    region: &BallConstraint,
    samples: usize,
    seed: u64,
) -> Result<OperatorBound> {
    if samples == 0 {
        return Err(Error::Config("operator bound needs at least one sample".into()));
    }
    let mut best = 0.0_f64;
    for i in 0..samples {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let x = sample_in_ball(problem, region, &mut rng);
        best = best.max(derivative_norm_at(problem, &x, &mut rng)?);
    }
    Ok(OperatorBound {
        norm_estimate: best,
        bound: OPERATOR_BOUND_SAFETY * best,
    })
}

/// Errors `‖(F(x + εh) − F(x))/ε − F'(x)h‖` for each `ε` in `steps`.
pub fn directional_derivative_errors(
    problem: &dyn ForwardProblem,
    x: &Vector,
    h: &Vector,
    steps: &[f64],
) -> Result<Vec<f64>> {
    let fx = problem.apply(x)?;
    let dfx = problem.deriv_apply(x, h)?;
    steps
        .iter()
        .map(|&eps| {
            let fxe = problem.apply(&x.add_scaled(eps, h))?;
            let quotient = fxe.sub(&fx).scale(1.0 / eps);
            Ok(problem.range_norm(&quotient.sub(&dfx)))
        })
        .collect()
}

/// Central-difference check of [`gradient`] along direction `h`: returns
/// `(⟨∇Φ(x), h⟩, (Φ(x + th) − Φ(x − th)) / 2t)` with `t = 1e-6 (1 + ‖x‖)`.
pub fn gradient_fd_pair(
    problem: &dyn ForwardProblem,
    x: &Vector,
    h: &Vector,
    data: &ObservedData,
) -> Result<(f64, f64)> {
    let g = gradient(problem, x, data)?;
    let analytic = problem.domain_inner(&g, h);
    let t = 1e-6 * (1.0 + problem.domain_norm(x));
    let plus = objective(problem, &x.add_scaled(t, h), data)?;
    let minus = objective(problem, &x.add_scaled(-t, h), data)?;
    Ok((analytic, (plus - minus) / (2.0 * t)))
}

/// Euclidean helpers re-exported for problems that keep the default geometry.
pub fn euclidean_inner(a: &Vector, b: &Vector) -> Result<f64> {
    hilbert::inner(a, b)
}
