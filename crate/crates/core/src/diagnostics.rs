//! Energy functional, auxiliary sequence `w_k`, prox-gradient map and a
//! sampling check of the local convexity inequality.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hilbert::{project_ball_with, BallConstraint, Vector};
use crate::io::{csv_err, csv_writer, flush, format_float, format_opt};
use crate::operator::{
    gradient, objective, random_unit_direction, residual, sample_in_ball, ForwardProblem,
    ObservedData,
};
use crate::solvers::{IterationTrace, SolverConfig};

/// `Θ(x) = Φ(x)` inside the ball (or when it is disabled), `+∞` outside.
pub fn evaluate_theta(
    problem: &dyn ForwardProblem,
    data: &ObservedData,
    ball: &BallConstraint,
    x: &Vector,
) -> Result<f64> {
    if !ball.contains_with(x, |d| problem.domain_norm(d)) {
        return Ok(f64::INFINITY);
    }
    objective(problem, x, data)
}

/// `w_k = x_k + (k−1)/(α−1)(x_k − x_{k−1})`
pub fn compute_w(k: usize, alpha: f64, x_curr: &Vector, x_prev: &Vector) -> Vector {
    let c = (k as f64 - 1.0) / (alpha - 1.0);
    x_curr.add_scaled(c, &x_curr.sub(x_prev))
}

/// `w_k = ((k+α−1) z_k − k x_k)/(α−1)`, the same point expressed through the
/// extrapolated iterate `z_k` of the Nesterov rule. Valid for `k ≥ 1`; at
/// `k = 0` the schedule uses `λ₀ = 0` and `z₀` carries no information on `x₋₁`.
pub fn compute_w_from_z(k: usize, alpha: f64, z: &Vector, x_curr: &Vector) -> Vector {
    let kf = k as f64;
    z.scale((kf + alpha - 1.0) / (alpha - 1.0))
        .add_scaled(-kf / (alpha - 1.0), x_curr)
}

/// `G(z) = (z − P(z − ω∇Φ(z)))/ω`; equals `∇Φ(z)` when the ball is disabled.
#[allow(non_snake_case)]
pub fn compute_G(
    problem: &dyn ForwardProblem,
    data: &ObservedData,
    ball: &BallConstraint,
    omega: f64,
    z: &Vector,
) -> Result<Vector> {
    if !(omega > 0.0) {
        return Err(Error::Config(format!("omega must be positive, got {omega}")));
    }
    let g = gradient(problem, z, data)?;
    if !ball.enabled() {
        return Ok(g);
    }
    let p = project_ball_with(ball, &z.add_scaled(-omega, &g), |d| problem.domain_norm(d))?;
    Ok(z.sub(&p).scale(1.0 / omega))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyState {
    pub k: usize,
    /// `E(k)`; infinite when `x_k` leaves the ball.
    pub energy: f64,
    pub w: Vector,
    /// `Θ(x_k) − Θ(x_*)`
    pub theta_gap: f64,
    /// `‖w_k − x_*‖`
    pub w_dist: f64,
}

/// `E(k) = (2ω/(α−1))(k+α−2)²(Θ(x_k) − Θ(x_*)) + (α−1)‖w_k − x_*‖²` along a
/// trace recorded with `store_iterates`.
pub fn energy_series(
    trace: &IterationTrace,
    problem: &dyn ForwardProblem,
    data: &ObservedData,
    ball: &BallConstraint,
    cfg: &SolverConfig,
    x_star: &Vector,
) -> Result<Vec<EnergyState>> {
    x_star.check_len(problem.domain_dim())?;
    let alpha = cfg.alpha;
    if !(alpha > 1.0) {
        return Err(Error::Config(format!("energy needs alpha > 1, got {alpha}")));
    }
    let theta_star = evaluate_theta(problem, data, ball, x_star)?;
    let mut out = Vec::with_capacity(trace.records.len());
    let mut prev: Option<&Vector> = None;
    for rec in &trace.records {
        let x = rec
            .x
            .as_ref()
            .ok_or(Error::Unsupported("energy needs a trace with stored iterates"))?;
        let w = compute_w(rec.k, alpha, x, prev.unwrap_or(x));
        let theta_gap = evaluate_theta(problem, data, ball, x)? - theta_star;
        let w_dist = problem.domain_norm(&w.sub(x_star));
        let t = rec.k as f64 + alpha - 2.0;
        let energy = 2.0 * cfg.omega / (alpha - 1.0) * t * t * theta_gap
            + (alpha - 1.0) * w_dist * w_dist;
        out.push(EnergyState {
            k: rec.k,
            energy,
            w,
            theta_gap,
            w_dist,
        });
        prev = Some(x);
    }
    Ok(out)
}

/// Copies energies into the trace records.
pub fn attach_energy(trace: &mut IterationTrace, states: &[EnergyState]) {
    for (rec, s) in trace.records.iter_mut().zip(states) {
        rec.energy = Some(s.energy);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexityReport {
    pub samples: usize,
    /// Smallest `‖F'(x)h‖² + ⟨F(x) − y^δ, F''(x)(h,h)⟩` seen.
    pub min_value: f64,
    /// Largest `‖F'(x)h‖² + |⟨F(x) − y^δ, F''(x)(h,h)⟩|` seen.
    pub scale: f64,
    /// `(sample index, value)` of every sample below `−tol·scale`.
    pub violators: Vec<(usize, f64)>,
}

impl ConvexityReport {
    pub fn passed(&self) -> bool {
        self.violators.is_empty()
    }
}

pub const CONVEXITY_TOLERANCE: f64 = 1e-10;

fn convexity_form(
    problem: &dyn ForwardProblem,
    data: &ObservedData,
    x: &Vector,
    h: &Vector,
) -> Result<(f64, f64)> {
    let d = problem.range_norm(&problem.deriv_apply(x, h)?);
    let (r, _) = residual(problem, x, data)?;
    let curv = problem.range_inner(&r, &problem.second_deriv_apply(x, h, h)?);
    Ok((d * d + curv, d * d + curv.abs()))
}

fn probe(
    problem: &dyn ForwardProblem,
    data: &ObservedData,
    samples: usize,
    seed: u64,
    mut point: impl FnMut(&mut ChaCha8Rng) -> Vector,
) -> Result<ConvexityReport> {
    if !problem.has_second_derivative() {
        return Err(Error::Unsupported("convexity probe needs a second derivative"));
    }
    if samples == 0 {
        return Err(Error::Config("convexity probe needs at least one sample".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(samples);
    let mut scale = 0.0_f64;
    for _ in 0..samples {
        let x = point(&mut rng);
        let h = random_unit_direction(problem, &mut rng);
        let (v, s) = convexity_form(problem, data, &x, &h)?;
        scale = scale.max(s);
        values.push(v);
    }
    let min_value = values.iter().copied().fold(f64::INFINITY, f64::min);
    let violators = values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v < -CONVEXITY_TOLERANCE * scale)
        .map(|(i, &v)| (i, v))
        .collect();
    Ok(ConvexityReport {
        samples,
        min_value,
        scale,
        violators,
    })
}

/// Samples `x` uniformly in `region` and unit directions `h`.
pub fn convexity_probe(
    problem: &dyn ForwardProblem,
    data: &ObservedData,
    region: &BallConstraint,
    samples: usize,
    seed: u64,
) -> Result<ConvexityReport> {
    probe(problem, data, samples, seed, |rng| sample_in_ball(problem, region, rng))
}

/// Samples `x` uniformly on the segment `[a, b]`.
pub fn convexity_probe_segment(
    problem: &dyn ForwardProblem,
    data: &ObservedData,
    a: &Vector,
    b: &Vector,
    samples: usize,
    seed: u64,
) -> Result<ConvexityReport> {
    a.check_len(problem.domain_dim())?;
    b.check_len(problem.domain_dim())?;
    let dir = b.sub(a);
    probe(problem, data, samples, seed, |rng| {
        let t: f64 = rng.random();
        a.add_scaled(t, &dir)
    })
}

pub const DIAGNOSTICS_HEADER: [&str; 6] = ["k", "residual", "error", "energy", "theta_gap", "w_dist"];

/// Per-iteration CSV. Columns without data are left empty.
pub fn write_diagnostics_csv(
    path: &Path,
    trace: &IterationTrace,
    energy: Option<&[EnergyState]>,
) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(DIAGNOSTICS_HEADER).map_err(csv_err(path))?;
    for (i, rec) in trace.records.iter().enumerate() {
        let e = energy.and_then(|s| s.get(i));
        w.write_record([
            rec.k.to_string(),
            format_float(rec.residual_norm),
            format_opt(rec.error_norm),
            format_opt(e.map(|s| s.energy).or(rec.energy)),
            format_opt(e.map(|s| s.theta_gap)),
            format_opt(e.map(|s| s.w_dist)),
        ])
        .map_err(csv_err(path))?;
    }
    flush(w, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagonal::DiagonalProblem;

    #[test]
    fn w_at_first_steps() {
        let x0 = Vector::new(vec![1.0, 2.0]).unwrap();
        assert_eq!(compute_w(0, 3.0, &x0, &x0), x0);
        let x1 = Vector::new(vec![1.5, 2.5]).unwrap();
        assert_eq!(compute_w(1, 3.0, &x1, &x0), x1);
    }

    #[test]
    fn theta_outside_ball_is_infinite() {
        let p = DiagonalProblem::new(1, 2).unwrap();
        let data = ObservedData::exact(Vector::zeros(2));
        let ball = BallConstraint::new(Vector::zeros(2), 1.0, true).unwrap();
        let far = Vector::new(vec![2.0, 0.0]).unwrap();
        assert_eq!(evaluate_theta(&p, &data, &ball, &far).unwrap(), f64::INFINITY);
        let near = Vector::new(vec![0.5, 0.0]).unwrap();
        assert_eq!(evaluate_theta(&p, &data, &ball, &near).unwrap(), 0.5 * 0.0625);
    }

    #[test]
    fn g_without_ball_is_gradient() {
        let p = DiagonalProblem::new(2, 4).unwrap();
        let data = ObservedData::exact(Vector::new(vec![1.0, 2.0, 3.0, 4.0]).unwrap());
        let z = Vector::new(vec![0.3, -1.0, 2.0, 0.1]).unwrap();
        let ball = BallConstraint::disabled(Vector::zeros(4));
        assert_eq!(
            compute_G(&p, &data, &ball, 0.1, &z).unwrap(),
            gradient(&p, &z, &data).unwrap()
        );
    }

    #[test]
    fn linear_operator_is_convex_everywhere() {
        let p = DiagonalProblem::new(0, 6).unwrap();
        let data = ObservedData::exact(Vector::from_fn(6, |i| i as f64));
        let region = BallConstraint::new(Vector::zeros(6), 100.0, true).unwrap();
        let rep = convexity_probe(&p, &data, &region, 50, 3).unwrap();
        assert!(rep.passed() && rep.min_value > 0.0);
    }
}
