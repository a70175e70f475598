//! Experiment configuration, read from TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::autoconv::{AutoconvProblem, FourierCoeffs};
use crate::diagonal::DiagonalProblem;
use crate::error::{Error, Result};
use crate::hilbert::Vector;
use crate::operator::ForwardProblem;
use crate::solvers::{CombinationRule, DEFAULT_MAX_ITER};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    /// `‖y − y^δ‖ / ‖y‖`
    pub noise_rel: f64,
    #[serde(default)]
    pub noise_law: NoiseLaw,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    pub problem: ProblemSpec,
    pub solution: SolutionSpec,
    pub x0: StartSpec,
    pub solver: SolverSpec,
    pub stop: StopSpec,
    #[serde(default)]
    pub diagnostics: bool,
    #[serde(default)]
    pub output: OutputSpec,
}

fn default_methods() -> Vec<Method> {
    vec![Method::Landweber, Method::Nesterov]
}

/// Distribution of the noise direction before normalization to length `δ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseLaw {
    /// i.i.d. standard normal entries.
    #[default]
    White,
    /// Standard normal entries multiplied componentwise by `y`.
    Proportional,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Landweber,
    Nesterov,
    Tpg,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Landweber => "landweber",
            Method::Nesterov => "nesterov",
            Method::Tpg => "tpg",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSpec {
    Diagonal {
        #[serde(default = "default_m")]
        m: usize,
        #[serde(default = "default_n")]
        n: usize,
    },
    Autoconv {
        #[serde(default = "default_subintervals")]
        n: usize,
        #[serde(default = "default_quad")]
        quad_order: usize,
    },
}

fn default_m() -> usize {
    100
}
fn default_n() -> usize {
    200
}
fn default_subintervals() -> usize {
    32
}
fn default_quad() -> usize {
    4
}

/// The exact solution `x†`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SolutionSpec {
    /// `x†_n = scale / n` (diagonal problem).
    Harmonic { scale: f64 },
    /// Real Fourier coefficients `[[k, c_k], ...]` (auto-convolution).
    Fourier { coeffs: Vec<(i64, f64)> },
    Values { values: Vec<f64> },
}

/// The initial guess `x₀`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StartSpec {
    /// `x† + (−1)ⁿ ρ√6/(πn)` (diagonal problem).
    Alternating { rho: f64 },
    /// `factor · x†`
    Scaled { factor: f64 },
    Fourier { coeffs: Vec<(i64, f64)> },
    Values { values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    pub omega: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    /// Project onto `B_{2ρ}(x₀)` in the accelerated methods.
    #[serde(default)]
    pub prox: bool,
    /// `ρ`; the projection radius is `2ρ`.
    #[serde(default)]
    pub rho: Option<f64>,
    #[serde(default)]
    pub lipschitz: Option<f64>,
    /// Weights for the `tpg` method.
    #[serde(default)]
    pub combination: Option<CombinationRule>,
}

fn default_alpha() -> f64 {
    3.0
}
fn default_max_iter() -> usize {
    DEFAULT_MAX_ITER
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum StopSpec {
    Discrepancy {
        tau: f64,
    },
    /// The noise-corrected rule; `omega_bar` is estimated over `B_{2ρ}(x₀)`
    /// when absent.
    DeltaCorrected {
        tau: f64,
        #[serde(default)]
        omega_bar: Option<f64>,
        #[serde(default)]
        rho: Option<f64>,
        #[serde(default = "default_bound_samples")]
        bound_samples: usize,
    },
}

fn default_bound_samples() -> usize {
    20
}

impl StopSpec {
    pub fn tau(&self) -> f64 {
        match self {
            StopSpec::Discrepancy { tau } | StopSpec::DeltaCorrected { tau, .. } => *tau,
        }
    }

    pub fn set_tau(&mut self, value: f64) {
        match self {
            StopSpec::Discrepancy { tau } | StopSpec::DeltaCorrected { tau, .. } => *tau = value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub dir: Option<PathBuf>,
    /// Write per-iteration CSVs.
    #[serde(default = "yes")]
    pub traces: bool,
    /// Write the long-format reconstruction CSV.
    #[serde(default = "yes")]
    pub reconstruction: bool,
}

fn yes() -> bool {
    true
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            dir: None,
            traces: true,
            reconstruction: true,
        }
    }
}

/// Command-line overrides applied on top of a spec.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub max_iter: Option<usize>,
    pub alpha: Option<f64>,
    pub tau: Option<f64>,
    pub no_prox: bool,
}

/// A constructed forward problem.
#[derive(Debug, Clone)]
pub enum Problem {
    Diagonal(DiagonalProblem),
    Autoconv(AutoconvProblem),
}

impl Problem {
    pub fn as_dyn(&self) -> &dyn ForwardProblem {
        match self {
            Problem::Diagonal(p) => p,
            Problem::Autoconv(p) => p,
        }
    }
}

impl ExperimentSpec {
    pub fn from_toml_str(text: &str, origin: &Path) -> Result<Self> {
        let spec: ExperimentSpec = toml::from_str(text).map_err(|e| Error::ConfigParse {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text, path)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn apply_overrides(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(d) = &o.out_dir {
            self.output.dir = Some(d.clone());
        }
        if let Some(m) = o.max_iter {
            self.solver.max_iter = m;
        }
        if let Some(a) = o.alpha {
            self.solver.alpha = a;
        }
        if let Some(t) = o.tau {
            self.stop.set_tau(t);
        }
        if o.no_prox {
            self.solver.prox = false;
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if !(self.noise_rel >= 0.0 && self.noise_rel.is_finite()) {
            return fail(format!("noise_rel must be >= 0, got {}", self.noise_rel));
        }
        if self.methods.is_empty() {
            return fail("at least one method is required".into());
        }
        if !(self.solver.omega > 0.0) {
            return fail(format!("omega must be positive, got {}", self.solver.omega));
        }
        if !(self.solver.alpha >= 3.0) {
            return fail(format!("alpha must be >= 3, got {}", self.solver.alpha));
        }
        if self.solver.max_iter == 0 {
            return fail("max_iter must be positive".into());
        }
        if self.solver.prox && self.rho().is_none() {
            return fail("prox needs solver.rho".into());
        }
        if let Some(r) = self.solver.rho {
            if !(r > 0.0) {
                return fail(format!("rho must be positive, got {r}"));
            }
        }
        if !(self.stop.tau() > 0.0) {
            return fail(format!("tau must be positive, got {}", self.stop.tau()));
        }
        if let StopSpec::DeltaCorrected { rho, .. } = &self.stop {
            if !(self.solver.alpha > 3.0) {
                return fail("the corrected stopping rule needs alpha > 3".into());
            }
            if rho.or(self.solver.rho).is_none() {
                return fail("the corrected stopping rule needs rho".into());
            }
        }
        if self.methods.contains(&Method::Tpg) && self.solver.combination.is_none() {
            return fail("method tpg needs solver.combination".into());
        }
        match (&self.problem, &self.solution) {
            (ProblemSpec::Autoconv { .. }, SolutionSpec::Harmonic { .. }) => {
                fail("harmonic solutions apply to the diagonal problem only".into())
            }
            (ProblemSpec::Diagonal { .. }, SolutionSpec::Fourier { .. }) => {
                fail("Fourier solutions apply to the autoconv problem only".into())
            }
            _ => Ok(()),
        }
    }

    /// `ρ` used for the projection ball and the corrected rule.
    pub fn rho(&self) -> Option<f64> {
        match &self.stop {
            StopSpec::DeltaCorrected { rho: Some(r), .. } => Some(*r),
            _ => self.solver.rho,
        }
    }

    pub fn build_problem(&self) -> Result<Problem> {
        Ok(match self.problem {
            ProblemSpec::Diagonal { m, n } => Problem::Diagonal(DiagonalProblem::new(m, n)?),
            ProblemSpec::Autoconv { n, quad_order } => {
                Problem::Autoconv(AutoconvProblem::new(n, quad_order)?)
            }
        })
    }

    pub fn build_solution(&self, problem: &Problem) -> Result<Vector> {
        match (&self.solution, problem) {
            (SolutionSpec::Harmonic { scale }, Problem::Diagonal(p)) => Ok(p.harmonic(*scale)),
            (SolutionSpec::Fourier { coeffs }, Problem::Autoconv(p)) => Ok(fourier_nodes(p, coeffs)),
            (SolutionSpec::Values { values }, _) => values_for(problem, values),
            _ => Err(Error::Config("solution kind does not match the problem".into())),
        }
    }

    pub fn build_start(&self, problem: &Problem, xdag: &Vector) -> Result<Vector> {
        match (&self.x0, problem) {
            (StartSpec::Alternating { rho }, Problem::Diagonal(p)) => p.alternating_start(xdag, *rho),
            (StartSpec::Alternating { .. }, _) => {
                Err(Error::Config("alternating start applies to the diagonal problem only".into()))
            }
            (StartSpec::Scaled { factor }, _) => Ok(xdag.scale(*factor)),
            (StartSpec::Fourier { coeffs }, Problem::Autoconv(p)) => Ok(fourier_nodes(p, coeffs)),
            (StartSpec::Fourier { .. }, _) => {
                Err(Error::Config("Fourier start applies to the autoconv problem only".into()))
            }
            (StartSpec::Values { values }, _) => values_for(problem, values),
        }
    }
}

fn fourier_nodes(p: &AutoconvProblem, coeffs: &[(i64, f64)]) -> Vector {
    let c = FourierCoeffs::from_pairs(coeffs.iter().copied());
    p.sample(|s| c.eval(s))
}

fn values_for(problem: &Problem, values: &[f64]) -> Result<Vector> {
    let v = Vector::new(values.to_vec())?;
    v.check_len(problem.as_dyn().domain_dim())?;
    if let Problem::Autoconv(p) = problem {
        p.check_periodic(&v)?;
    }
    Ok(v)
}
