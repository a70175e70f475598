use itreg::diagnostics::{
    compute_G, compute_w, compute_w_from_z, energy_series, evaluate_theta, write_diagnostics_csv,
    DIAGNOSTICS_HEADER,
};
use itreg::experiment::{preset, run_experiment, synthesize_noise};
use itreg::hilbert::{norm, BallConstraint, Vector};
use itreg::operator::{gradient, objective, ForwardProblem};
use itreg::prelude::*;
use itreg::solvers::nesterov_lambda;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn both_forms_of_w_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        let k = rng.random_range(1..500usize);
        let alpha = rng.random_range(3.0..8.0);
        let x = Vector::from_fn(9, |_| rng.random_range(-5.0..5.0));
        let xp = Vector::from_fn(9, |_| rng.random_range(-5.0..5.0));
        let z = x.add_scaled(nesterov_lambda(k, alpha), &x.sub(&xp));
        let a = compute_w(k, alpha, &x, &xp);
        let b = compute_w_from_z(k, alpha, &z, &x);
        // both forms scale x_k by O(k/α); compare at that magnitude
        let scale = (1.0 + k as f64) * (1.0 + norm(&x) + norm(&xp));
        assert!(norm(&a.sub(&b)) <= 1e-14 * scale, "k {k}");
    }
}

#[test]
fn theta_matches_objective_inside_ball() {
    let p = DiagonalProblem::new(100, 200).unwrap();
    let xd = p.harmonic(100.0);
    let data = synthesize_noise(&p.apply(&xd).unwrap(), 1e-4, 2).unwrap();
    let ball = BallConstraint::new(xd.clone(), 1.0, true).unwrap();
    let x = xd.add_scaled(0.1, &Vector::from_fn(200, |i| (i as f64).sin()).scale(0.1));
    assert_eq!(
        evaluate_theta(&p, &data, &ball, &x).unwrap(),
        objective(&p, &x, &data).unwrap()
    );
    let exact = ObservedData::exact(p.apply(&xd).unwrap());
    assert_eq!(evaluate_theta(&p, &exact, &ball, &xd).unwrap(), 0.0);
}

#[test]
fn g_vanishes_at_interior_solution() {
    let p = DiagonalProblem::new(100, 200).unwrap();
    let xd = p.harmonic(100.0);
    let data = ObservedData::exact(p.apply(&xd).unwrap());
    let ball = BallConstraint::new(xd.clone(), 0.5, true).unwrap();
    let g = compute_G(&p, &data, &ball, 1e-5, &xd).unwrap();
    assert!(g.iter().all(|&v| v == 0.0));
    let off = xd.add_scaled(1.0, &Vector::from_fn(200, |i| if i == 0 { 0.1 } else { 0.0 }));
    let ball_off = BallConstraint::disabled(xd.clone());
    assert_eq!(
        compute_G(&p, &data, &ball_off, 1e-5, &off).unwrap(),
        gradient(&p, &off, &data).unwrap()
    );
}

#[test]
fn energy_zero_at_constant_solution_trace() {
    let p = DiagonalProblem::new(100, 200).unwrap();
    let xd = p.harmonic(100.0);
    let data = ObservedData::exact(p.apply(&xd).unwrap());
    let stop = StoppingRule::delta_corrected(1.5, 0.0, 1.0, 3.0, 4.0).unwrap();
    let mut cfg = SolverConfig::new(2e-5);
    cfg.alpha = 4.0;
    cfg.max_iter = 10;
    cfg.store_iterates = true;
    let ball = BallConstraint::new(xd.clone(), 0.1, true).unwrap();
    let (_, t) = nesterov_run(&p, &data, &cfg, &xd, &ball, &stop).unwrap();
    let e = energy_series(&t, &p, &data, &ball, &cfg, &xd).unwrap();
    assert!(e.iter().all(|s| s.energy == 0.0));
}

#[test]
fn energy_at_start_and_requirements() {
    let o = run_experiment(&preset("energy").unwrap()).unwrap();
    let run = &o.runs[0];
    let e = run.energy.as_ref().unwrap();
    let p = o.problem.as_dyn();
    let (alpha, omega) = (o.spec.solver.alpha, o.spec.solver.omega);
    let phi0 = objective(p, &o.x0, &o.data).unwrap() - objective(p, &o.xdag, &o.data).unwrap();
    let d0 = p.domain_norm(&o.x0.sub(&o.xdag));
    let want = 2.0 * omega / (alpha - 1.0) * (alpha - 2.0).powi(2) * phi0 + (alpha - 1.0) * d0 * d0;
    assert!((e[0].energy - want).abs() <= 1e-12 * want);
    assert_eq!(e[0].w, o.x0);

    // invariants along the run
    let e0 = e[0].energy;
    for s in e {
        assert!(s.w_dist * s.w_dist <= e0 / (alpha - 1.0) * (1.0 + 1e-9));
        let t = s.k as f64 + alpha - 2.0;
        assert!(s.theta_gap <= (alpha - 1.0) * e0 / (2.0 * omega * t * t) * (1.0 + 1e-9));
        assert!(s.theta_gap < 0.0 || s.energy >= 0.0);
    }

    // traces without iterates cannot be analysed
    let mut bare = run.trace.clone();
    bare.records.iter_mut().for_each(|r| r.x = None);
    let ball = BallConstraint::disabled(o.x0.clone());
    let cfg = SolverConfig::new(omega);
    assert!(energy_series(&bare, p, &o.data, &ball, &cfg, &o.xdag).is_err());
}

#[test]
fn diagnostics_csv_layout() {
    let o = run_experiment(&preset("energy").unwrap()).unwrap();
    let run = &o.runs[0];
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nested/diag.csv");
    write_diagnostics_csv(&path, &run.trace, run.energy.as_deref()).unwrap();
    let mut rdr = csv::Reader::from_path(&path).unwrap();
    assert!(rdr.headers().unwrap().iter().eq(DIAGNOSTICS_HEADER));
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), run.trace.records.len());
    for (row, (rec, e)) in rows.iter().zip(run.trace.records.iter().zip(run.energy.as_ref().unwrap())) {
        assert_eq!(row[1].parse::<f64>().unwrap(), rec.residual_norm);
        assert_eq!(row[3].parse::<f64>().unwrap(), e.energy);
    }
}
