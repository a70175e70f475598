//! Noise synthesis, experiment orchestration and CSV output.

mod output;
mod spec;

pub use output::{
    emit_outputs, read_results_csv, write_reconstruction_csv, write_results_csv, OutputPaths,
    RECONSTRUCTION_HEADER, RESULTS_HEADER,
};
pub use spec::{
    ExperimentSpec, Method, NoiseLaw, OutputSpec, Overrides, Problem, ProblemSpec, SolutionSpec,
    SolverSpec, StartSpec, StopSpec,
};

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::diagnostics::{attach_energy, energy_series, EnergyState};
use crate::error::{Error, Result};
use crate::hilbert::{norm, BallConstraint, Vector};
use crate::operator::{estimate_operator_bound, ForwardProblem, ObservedData};
use crate::solvers::{
    landweber_run, nesterov_run, tpg_run, CombinationRule, IterationTrace, SolverConfig, StopReason,
};
use crate::stopping::{constants_c1_c2, kstar_bound, StoppingRule};

/// Adds noise of Euclidean norm exactly `noise_rel · ‖y‖` in a uniformly
/// random direction.
pub fn synthesize_noise(y: &Vector, noise_rel: f64, seed: u64) -> Result<ObservedData> {
    synthesize(y, noise_rel, seed, NoiseLaw::White, &norm, &|v| v)
}

/// Like [`synthesize_noise`] but measured in the range norm of `problem` and
/// with a chosen noise law.
pub fn synthesize_noise_in(
    problem: &dyn ForwardProblem,
    y: &Vector,
    noise_rel: f64,
    seed: u64,
    law: NoiseLaw,
) -> Result<ObservedData> {
    y.check_len(problem.range_dim())?;
    synthesize(
        y,
        noise_rel,
        seed,
        law,
        &|v| problem.range_norm(v),
        &|v| problem.admissible_range(v),
    )
}

fn synthesize(
    y: &Vector,
    noise_rel: f64,
    seed: u64,
    law: NoiseLaw,
    norm_fn: &dyn Fn(&Vector) -> f64,
    admissible: &dyn Fn(Vector) -> Vector,
) -> Result<ObservedData> {
    if !(noise_rel >= 0.0 && noise_rel.is_finite()) {
        return Err(Error::Config(format!("noise_rel must be >= 0, got {noise_rel}")));
    }
    let delta = noise_rel * norm_fn(y);
    if delta == 0.0 {
        return Ok(ObservedData::exact(y.clone()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xi = loop {
        let raw = Vector::from_fn(y.len(), |_| StandardNormal.sample(&mut rng));
        let raw = match law {
            NoiseLaw::White => raw,
            NoiseLaw::Proportional => raw.hadamard(y),
        };
        let xi = admissible(raw);
        if norm_fn(&xi) > 0.0 {
            break xi;
        }
    };
    let noisy = y.add_scaled(delta / norm_fn(&xi), &xi);
    Ok(ObservedData {
        y_exact: Some(y.clone()),
        y_noisy: noisy,
        delta,
    })
}

/// One line of the results table.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub method: String,
    pub k_star: usize,
    pub time_s: f64,
    /// `‖x† − x_{k*}‖ / ‖x†‖`
    pub rel_error: f64,
    pub stop_reason: StopReason,
}

/// Everything produced by one solver run inside an experiment.
#[derive(Debug, Clone)]
pub struct MethodRun {
    pub row: ResultRow,
    pub x: Vector,
    pub trace: IterationTrace,
    pub energy: Option<Vec<EnergyState>>,
    /// Ceiling on `k*` from the energy at `k = 1`, when the theory applies.
    pub kstar_bound: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub spec: ExperimentSpec,
    pub problem: Problem,
    pub data: ObservedData,
    pub xdag: Vector,
    pub x0: Vector,
    /// `ω̄` and `(c₁, c₂)` when the corrected rule is active.
    pub constants: Option<(f64, f64, f64)>,
    pub runs: Vec<MethodRun>,
}

impl ExperimentOutcome {
    pub fn rows(&self) -> Vec<ResultRow> {
        self.runs.iter().map(|r| r.row.clone()).collect()
    }

    pub fn any_diverged(&self) -> bool {
        self.runs
            .iter()
            .any(|r| r.row.stop_reason == StopReason::Diverged)
    }
}

/// Builds the stopping rules of an experiment for noise level `delta`. The corrected
/// rule is paired with the plain discrepancy rule at the same `τ`.
fn stopping_rules(
    spec: &ExperimentSpec,
    problem: &dyn ForwardProblem,
    x0: &Vector,
    delta: f64,
) -> Result<(Vec<(Option<&'static str>, StoppingRule)>, Option<(f64, f64, f64)>)> {
    match &spec.stop {
        StopSpec::Discrepancy { tau } => {
            Ok((vec![(None, StoppingRule::discrepancy(*tau, delta)?)], None))
        }
        StopSpec::DeltaCorrected {
            tau,
            omega_bar,
            bound_samples,
            ..
        } => {
            let rho = spec
                .rho()
                .ok_or_else(|| Error::Config("the corrected rule needs rho".into()))?;
            let omega_bar = match omega_bar {
                Some(v) => *v,
                None => {
                    let region = BallConstraint::new(x0.clone(), 2.0 * rho, true)?;
                    estimate_operator_bound(problem, &region, *bound_samples, spec.seed)?.bound
                }
            };
            let (c1, c2) = constants_c1_c2(omega_bar, spec.solver.omega, rho);
            let corrected =
                StoppingRule::delta_corrected(*tau, delta, c1, c2, spec.solver.alpha)?;
            let plain = StoppingRule::discrepancy(*tau, delta)?;
            Ok((
                vec![(Some("delta_corrected"), corrected), (Some("discrepancy"), plain)],
                Some((omega_bar, c1, c2)),
            ))
        }
    }
}

/// Runs every configured method on one shared noisy data set.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutcome> {
    spec.validate()?;
    let problem = spec.build_problem()?;
    let p = problem.as_dyn();
    let xdag = spec.build_solution(&problem)?;
    let x0 = spec.build_start(&problem, &xdag)?;
    let y = p.apply(&xdag)?;
    let data = synthesize_noise_in(p, &y, spec.noise_rel, spec.seed, spec.noise_law)?;
    run_on_data(spec, problem, data, xdag, x0)
}

fn run_on_data(
    spec: &ExperimentSpec,
    problem: Problem,
    data: ObservedData,
    xdag: Vector,
    x0: Vector,
) -> Result<ExperimentOutcome> {
    let p = problem.as_dyn();
    let (rules, constants) = stopping_rules(spec, p, &x0, data.delta)?;
    let ball = match (spec.solver.prox, spec.rho()) {
        (true, Some(rho)) => BallConstraint::new(x0.clone(), 2.0 * rho, true)?,
        _ => BallConstraint::disabled(x0.clone()),
    };
    let cfg = SolverConfig {
        omega: spec.solver.omega,
        alpha: spec.solver.alpha,
        max_iter: spec.solver.max_iter,
        lipschitz_estimate: spec.solver.lipschitz,
        combination: spec
            .solver
            .combination
            .clone()
            .unwrap_or(CombinationRule::Nesterov),
        store_iterates: spec.diagnostics,
        reference: Some(xdag.clone()),
    };
    let xdag_norm = p.domain_norm(&xdag);
    let mut runs = Vec::new();
    for method in &spec.methods {
        for (label, rule) in &rules {
            let (x, mut trace) = match method {
                Method::Landweber => landweber_run(p, &data, &cfg, &x0, rule)?,
                Method::Nesterov => nesterov_run(p, &data, &cfg, &x0, &ball, rule)?,
                Method::Tpg => tpg_run(p, &data, &cfg, &x0, &ball, rule)?,
            };
            let energy = if spec.diagnostics && trace.has_iterates() {
                let e = energy_series(&trace, p, &data, &ball, &cfg, &xdag)?;
                attach_energy(&mut trace, &e);
                Some(e)
            } else {
                None
            };
            let bound = energy.as_ref().and_then(|e| {
                let e1 = e.get(1)?.energy;
                kstar_bound(cfg.alpha, cfg.omega, rule.tau(), e1, data.delta).ok()
            });
            let method_name = match label {
                Some(l) => format!("{}/{}", method.as_str(), l),
                None => method.as_str().to_string(),
            };
            let last = trace.records.last().and_then(|r| r.error_norm);
            let rel_error = match trace.stop_reason {
                StopReason::Diverged => f64::INFINITY,
                _ => last.unwrap_or_else(|| p.domain_norm(&x.sub(&xdag))) / xdag_norm,
            };
            runs.push(MethodRun {
                row: ResultRow {
                    method: method_name,
                    k_star: trace.k_star(),
                    time_s: trace.elapsed_s(),
                    rel_error,
                    stop_reason: trace.stop_reason,
                },
                x,
                trace,
                energy,
                kstar_bound: bound,
            });
        }
    }
    Ok(ExperimentOutcome {
        spec: spec.clone(),
        problem,
        data,
        xdag,
        x0,
        constants,
        runs,
    })
}

/// Least-squares slope of `log y` against `log x`.
pub fn fit_loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::Dimension {
            expected: xs.len(),
            got: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(Error::Config("a slope needs at least two points".into()));
    }
    if xs.iter().chain(ys).any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::Config("log-log fit needs positive finite values".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::Config("log-log fit needs at least two distinct x values".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingLevel {
    pub noise_rel: f64,
    pub delta: f64,
    pub k_star: usize,
    pub stop_reason: StopReason,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingSeries {
    pub method: String,
    pub levels: Vec<ScalingLevel>,
    /// Fitted slope over levels that stopped by the rule with `k* ≥ 1`.
    pub slope: Option<f64>,
    /// Levels left out of the fit.
    pub excluded: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    pub series: Vec<ScalingSeries>,
}

/// Repeats the experiment for each relative noise level and fits
/// `log k*` against `log δ` per method.
pub fn scaling_study(spec: &ExperimentSpec, noise_levels: &[f64]) -> Result<ScalingReport> {
    if noise_levels.len() < 3 {
        return Err(Error::Config("a scaling study needs at least three noise levels".into()));
    }
    let lo = noise_levels.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = noise_levels.iter().copied().fold(0.0, f64::max);
    if !(lo > 0.0) || hi / lo < 100.0 - 1e-9 {
        return Err(Error::Config("noise levels must be positive and span two decades".into()));
    }
    let mut by_method: Vec<ScalingSeries> = Vec::new();
    for &level in noise_levels {
        let mut s = spec.clone();
        s.noise_rel = level;
        s.diagnostics = false;
        let outcome = run_experiment(&s)?;
        for run in &outcome.runs {
            let entry = match by_method.iter_mut().find(|e| e.method == run.row.method) {
                Some(e) => e,
                None => {
                    by_method.push(ScalingSeries {
                        method: run.row.method.clone(),
                        levels: Vec::new(),
                        slope: None,
                        excluded: Vec::new(),
                    });
                    by_method.last_mut().expect("just pushed")
                }
            };
            entry.levels.push(ScalingLevel {
                noise_rel: level,
                delta: outcome.data.delta,
                k_star: run.row.k_star,
                stop_reason: run.row.stop_reason,
            });
        }
    }
    for series in &mut by_method {
        let (good, bad): (Vec<&ScalingLevel>, Vec<&ScalingLevel>) = series
            .levels
            .iter()
            .partition(|l| l.stop_reason == StopReason::DiscrepancyMet && l.k_star >= 1);
        series.excluded = bad.iter().map(|l| l.noise_rel).collect();
        let xs: Vec<f64> = good.iter().map(|l| l.delta).collect();
        let ys: Vec<f64> = good.iter().map(|l| l.k_star as f64).collect();
        series.slope = fit_loglog_slope(&xs, &ys).ok();
    }
    Ok(ScalingReport { series: by_method })
}

/// Presets shipped with the crate, keyed by name.
pub const PRESETS: [(&str, &str); 5] = [
    ("table1", include_str!("../../../../configs/table1.toml")),
    ("table2a", include_str!("../../../../configs/table2a.toml")),
    ("table2b", include_str!("../../../../configs/table2b.toml")),
    ("scaling", include_str!("../../../../configs/scaling.toml")),
    ("energy", include_str!("../../../../configs/energy.toml")),
];

pub fn preset(name: &str) -> Result<ExperimentSpec> {
    let (_, text) = PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::Config(format!("unknown preset {name:?}")))?;
    ExperimentSpec::from_toml_str(text, Path::new(&format!("configs/{name}.toml")))
}
