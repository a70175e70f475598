use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use itreg::autoconv::{conv_convexity_radius, AutoconvProblem, FourierCoeffs};
use itreg::diagnostics::convexity_probe;
use itreg::diagonal::DiagonalProblem;
use itreg::experiment::{
    emit_outputs, preset, run_experiment, scaling_study, ExperimentOutcome, ExperimentSpec,
    Overrides,
};
use itreg::hilbert::{project_ball, BallConstraint, Vector};
use itreg::io::format_float;
use itreg::operator::{
    adjoint_test, directional_derivative_errors, gradient_fd_pair, random_domain_vector,
    random_unit_direction, ForwardProblem, ObservedData,
};

#[derive(Parser)]
#[command(name = "itreg", version, about = "Iterative regularization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML file.
    Run {
        config: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Repeat an experiment over several noise levels and fit log k* vs log δ.
    Scaling {
        config: PathBuf,
        /// Relative noise levels.
        #[arg(long, value_delimiter = ',', num_args = 1.., default_values_t = [1e-2, 1e-3, 1e-4])]
        deltas: Vec<f64>,
        #[command(flatten)]
        flags: Flags,
    },
    /// Adjoint, derivative, convexity and projection checks on both problems.
    Selftest {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Run a bundled experiment.
    Reproduce {
        #[arg(value_parser = ["table1", "table2a", "table2b", "scaling", "energy"])]
        which: String,
        #[command(flatten)]
        flags: Flags,
    },
}

#[derive(Args, Clone, Default)]
struct Flags {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    /// Disable the projection step.
    #[arg(long)]
    no_prox: bool,
    /// Write wall-clock times into results.csv (makes output non-reproducible).
    #[arg(long)]
    record_time: bool,
}

impl Flags {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            out_dir: self.out_dir.clone(),
            max_iter: self.max_iter,
            alpha: self.alpha,
            tau: self.tau,
            no_prox: self.no_prox,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

/// Returns `Ok(false)` when a run diverged.
fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run { config, flags } => {
            let spec = ExperimentSpec::from_file(&config)?;
            run_and_report(spec, &flags)
        }
        Command::Reproduce { which, flags } => {
            let spec = preset(&which)?;
            if which == "scaling" {
                return scaling(spec, &[1e-2, 1e-3, 1e-4], &flags);
            }
            run_and_report(spec, &flags)
        }
        Command::Scaling {
            config,
            deltas,
            flags,
        } => scaling(ExperimentSpec::from_file(&config)?, &deltas, &flags),
        Command::Selftest { seed } => selftest(seed),
    }
}

fn out_dir(spec: &ExperimentSpec) -> PathBuf {
    spec.output
        .dir
        .clone()
        .unwrap_or_else(|| Path::new("out").join(&spec.name))
}

fn run_and_report(mut spec: ExperimentSpec, flags: &Flags) -> Result<bool> {
    spec.apply_overrides(&flags.overrides());
    spec.validate()?;
    let outcome = run_experiment(&spec)?;
    print_outcome(&outcome);
    let dir = out_dir(&spec);
    let paths = emit_outputs(&outcome, &dir, flags.record_time)
        .with_context(|| format!("writing outputs to {}", dir.display()))?;
    println!("wrote {}", paths.results.display());
    Ok(!outcome.any_diverged())
}

fn print_outcome(o: &ExperimentOutcome) {
    println!(
        "{}: delta = {}, seed = {}",
        o.spec.name,
        format_float(o.data.delta),
        o.spec.seed
    );
    if let Some((omega_bar, c1, c2)) = o.constants {
        println!(
            "omega_bar = {}, c1 = {}, c2 = {}",
            format_float(omega_bar),
            format_float(c1),
            format_float(c2)
        );
    }
    println!(
        "{:<28} {:>8} {:>10} {:>12}  stop",
        "method", "k*", "time [s]", "rel. error"
    );
    for run in &o.runs {
        let r = &run.row;
        let bound = run
            .kstar_bound
            .map(|b| format!("  (k* bound {b:.1})"))
            .unwrap_or_default();
        println!(
            "{:<28} {:>8} {:>10.4} {:>11.4}%  {}{}",
            r.method,
            r.k_star,
            r.time_s,
            100.0 * r.rel_error,
            r.stop_reason,
            bound
        );
    }
}

fn scaling(mut spec: ExperimentSpec, deltas: &[f64], flags: &Flags) -> Result<bool> {
    spec.apply_overrides(&flags.overrides());
    let report = scaling_study(&spec, deltas)?;
    let mut ok = true;
    for s in &report.series {
        println!("{}:", s.method);
        for l in &s.levels {
            println!(
                "  noise_rel {:>8.1e}  delta {:>12.5e}  k* {:>8}  {}",
                l.noise_rel, l.delta, l.k_star, l.stop_reason
            );
        }
        match s.slope {
            Some(slope) => println!("  slope of log k* vs log delta: {slope:.3}"),
            None => println!("  slope unavailable"),
        }
        if !s.excluded.is_empty() {
            println!("  excluded levels: {:?}", s.excluded);
            ok = false;
        }
    }
    Ok(ok)
}

fn selftest(seed: u64) -> Result<bool> {
    let diag = DiagonalProblem::new(100, 200)?;
    let conv = AutoconvProblem::new(32, 4)?;
    let mut ok = true;
    let mut check = |name: &str, pass: bool, detail: String| {
        println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        ok &= pass;
    };

    for (name, p) in [("diagonal", &diag as &dyn ForwardProblem), ("autoconv", &conv)] {
        let rep = adjoint_test(p, 100, seed)?;
        check(
            &format!("{name} adjoint"),
            rep.passed(),
            format!("max violation {:.3e}", rep.max_violation),
        );
        let (pass, detail) = derivative_order(p, seed)?;
        check(&format!("{name} derivative order"), pass, detail);
        let (pass, detail) = gradient_check(p, seed)?;
        check(&format!("{name} gradient"), pass, detail);
    }

    let xdag = diag.harmonic(100.0);
    let rho = diag.convexity_radius(&xdag, 0.0, 0.0)?.rho;
    let x0 = diag.alternating_start(&xdag, rho)?;
    let data = ObservedData::exact(diag.apply(&xdag)?);
    let region = BallConstraint::new(x0, 6.0 * rho, true)?;
    let rep = convexity_probe(&diag, &data, &region, 500, seed)?;
    check(
        "diagonal convexity",
        rep.passed(),
        format!("rho {rho:.5}, min {:.3e}, scale {:.3e}", rep.min_value, rep.scale),
    );

    let coeffs = FourierCoeffs::from_pairs([(0, 10.0), (1, 1.0)]);
    let rho = conv_convexity_radius(&coeffs, 0.0, 0.0).rho;
    let xdag = conv.sample(|s| coeffs.eval(s));
    let x0c = FourierCoeffs::from_pairs([(0, 10.0), (1, 1.0 - rho)]);
    let x0 = conv.sample(|s| x0c.eval(s));
    let data = ObservedData::exact(conv.apply(&xdag)?);
    let region = BallConstraint::new(x0, 6.0 * rho, true)?;
    let rep = convexity_probe(&conv, &data, &region, 200, seed)?;
    check(
        "autoconv convexity",
        rep.passed(),
        format!("rho {rho:.5}, min {:.3e}, scale {:.3e}", rep.min_value, rep.scale),
    );

    let (pass, detail) = nonexpansive(seed);
    check("projection nonexpansive", pass, detail);
    Ok(ok)
}

fn derivative_order(p: &dyn ForwardProblem, seed: u64) -> Result<(bool, String)> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let x = random_domain_vector(p, &mut rng);
    let h = random_unit_direction(p, &mut rng);
    let errs = directional_derivative_errors(p, &x, &h, &[1e-3, 1e-4, 1e-5])?;
    let ratios: Vec<f64> = errs.windows(2).map(|w| w[0] / w[1]).collect();
    let pass = ratios.iter().all(|r| (5.0..=20.0).contains(r));
    Ok((pass, format!("error ratios {ratios:.3?}")))
}

fn gradient_check(p: &dyn ForwardProblem, seed: u64) -> Result<(bool, String)> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let y = p.apply(&random_domain_vector(p, &mut rng))?;
    let data = ObservedData::exact(y);
    let mut worst = 0.0_f64;
    for _ in 0..10 {
        let x = random_domain_vector(p, &mut rng);
        let h = random_unit_direction(p, &mut rng);
        let (a, fd) = gradient_fd_pair(p, &x, &h, &data)?;
        worst = worst.max((a - fd).abs() / a.abs().max(fd.abs()).max(1e-300));
    }
    Ok((worst <= 1e-5, format!("max relative error {worst:.3e}")))
}

fn nonexpansive(seed: u64) -> (bool, String) {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let center = Vector::from_fn(5, |_| rng.random_range(-1.0..1.0));
    let ball = BallConstraint::new(center, 1.0, true).expect("positive radius");
    let mut worst = 0.0_f64;
    for _ in 0..1000 {
        let u = Vector::from_fn(5, |_| rng.random_range(-4.0..4.0));
        let v = Vector::from_fn(5, |_| rng.random_range(-4.0..4.0));
        let pu = project_ball(&ball, &u).expect("finite");
        let pv = project_ball(&ball, &v).expect("finite");
        let d = itreg::hilbert::norm(&u.sub(&v));
        worst = worst.max(itreg::hilbert::norm(&pu.sub(&pv)) / d);
    }
    (worst <= 1.0 + 1e-12, format!("largest ratio {worst:.6}"))
}

