use itreg::diagnostics::compute_G;
use itreg::experiment::synthesize_noise;
use itreg::hilbert::{norm, BallConstraint, Vector};
use itreg::prelude::*;
use itreg::solvers::{nesterov_lambda, IterationTrace};

struct Setup {
    p: DiagonalProblem,
    data: ObservedData,
    xdag: Vector,
    x0: Vector,
}

fn table1(seed: u64) -> Setup {
    let p = DiagonalProblem::new(100, 200).unwrap();
    let xdag = p.harmonic(100.0);
    let x0 = p.alternating_start(&xdag, 1.0 / 28.0).unwrap();
    let data = synthesize_noise(&p.apply(&xdag).unwrap(), 1e-5, seed).unwrap();
    Setup { p, data, xdag, x0 }
}

fn cfg() -> SolverConfig {
    let mut c = SolverConfig::new(3.2682e-5);
    c.store_iterates = true;
    c
}

fn same(a: &IterationTrace, b: &IterationTrace) -> bool {
    a.stop_reason == b.stop_reason
        && a.records.len() == b.records.len()
        && a.records.iter().zip(&b.records).all(|(r, s)| {
            r.k == s.k && r.residual_norm.to_bits() == s.residual_norm.to_bits() && r.x == s.x
        })
}

#[test]
fn tpg_with_nesterov_weights_is_nesterov() {
    let s = table1(3);
    let stop = StoppingRule::discrepancy(1.0, s.data.delta).unwrap();
    let ball = BallConstraint::disabled(s.x0.clone());
    let (xa, ta) = nesterov_run(&s.p, &s.data, &cfg(), &s.x0, &ball, &stop).unwrap();
    let mut c = cfg();
    c.combination = CombinationRule::Nesterov;
    let (xb, tb) = tpg_run(&s.p, &s.data, &c, &s.x0, &ball, &stop).unwrap();
    assert_eq!(xa, xb);
    assert!(same(&ta, &tb));
}

#[test]
fn tpg_with_zero_weights_is_landweber() {
    let s = table1(4);
    let stop = StoppingRule::discrepancy(1.0, s.data.delta).unwrap();
    let mut c = cfg();
    c.combination = CombinationRule::Sequence(vec![0.0]);
    let (xa, ta) = landweber_run(&s.p, &s.data, &cfg(), &s.x0, &stop).unwrap();
    let (xb, tb) = tpg_run(&s.p, &s.data, &c, &s.x0, &BallConstraint::disabled(s.x0.clone()), &stop).unwrap();
    assert_eq!(xa, xb);
    assert!(same(&ta, &tb));
}

#[test]
fn constant_momentum_is_recorded() {
    let s = table1(1);
    let stop = StoppingRule::discrepancy(1.0, s.data.delta).unwrap();
    let ball = BallConstraint::disabled(s.x0.clone());
    let mut c = cfg();
    c.combination = CombinationRule::Constant(0.5);
    let (_, half) = tpg_run(&s.p, &s.data, &c, &s.x0, &ball, &stop).unwrap();
    let (_, lw) = landweber_run(&s.p, &s.data, &cfg(), &s.x0, &stop).unwrap();
    let (_, nv) = nesterov_run(&s.p, &s.data, &cfg(), &s.x0, &ball, &stop).unwrap();
    println!(
        "k*: landweber {}, constant 0.5 {}, nesterov {}",
        lw.k_star(),
        half.k_star(),
        nv.k_star()
    );
    assert_eq!(half.stop_reason, StopReason::DiscrepancyMet);
}

#[test]
fn momentum_schedule() {
    assert_eq!(nesterov_lambda(1, 3.0), 0.0);
    for k in 1..500 {
        let l = nesterov_lambda(k, 3.7);
        assert!((l - (k as f64 - 1.0) / (k as f64 + 2.7)).abs() <= 1e-15);
        assert!(nesterov_lambda(k + 1, 3.7) > l && l < 1.0);
    }
}

#[test]
fn projected_iterates_stay_in_ball() {
    let s = table1(5);
    let rho = 1.0 / 28.0;
    let ball = BallConstraint::new(s.x0.clone(), 2.0 * rho, true).unwrap();
    let stop = StoppingRule::discrepancy(1.0, 0.0).unwrap();
    let mut c = cfg();
    c.max_iter = 300;
    c.omega = 3e-5;
    let (_, t) = nesterov_run(&s.p, &s.data, &c, &s.x0, &ball, &stop).unwrap();
    for rec in &t.records {
        let x = rec.x.as_ref().unwrap();
        assert!(norm(&x.sub(&s.x0)) <= 2.0 * rho * (1.0 + 1e-12));
    }
}

#[test]
fn exact_solution_is_fixed_point() {
    let p = DiagonalProblem::new(100, 200).unwrap();
    let xdag = p.harmonic(100.0);
    let data = ObservedData::exact(p.apply(&xdag).unwrap());
    let ball = BallConstraint::new(xdag.clone(), 0.1, true).unwrap();
    let g = compute_G(&p, &data, &ball, 2e-5, &xdag).unwrap();
    assert!(g.iter().all(|&v| v == 0.0));
    // zero residual meets every threshold at once
    let stop = StoppingRule::delta_corrected(1.5, 0.0, 1.0, 3.0, 4.0).unwrap();
    let mut c = cfg();
    c.alpha = 4.0;
    let (x, t) = nesterov_run(&p, &data, &c, &xdag, &ball, &stop).unwrap();
    assert_eq!(x, xdag);
    assert_eq!(t.k_star(), 0);
    assert_eq!(t.stop_reason, StopReason::DiscrepancyMet);
}

#[test]
fn identical_inputs_give_identical_traces() {
    let a = table1(8);
    let b = table1(8);
    let stop = StoppingRule::discrepancy(1.0, a.data.delta).unwrap();
    let ball = BallConstraint::disabled(a.x0.clone());
    let (_, ta) = nesterov_run(&a.p, &a.data, &cfg(), &a.x0, &ball, &stop).unwrap();
    let (_, tb) = nesterov_run(&b.p, &b.data, &cfg(), &b.x0, &ball, &stop).unwrap();
    assert!(same(&ta, &tb));
}

#[test]
fn trace_has_one_record_per_index() {
    let s = table1(2);
    let stop = StoppingRule::discrepancy(1.0, s.data.delta).unwrap();
    let mut c = cfg();
    c.reference = Some(s.xdag.clone());
    let (x, t) = landweber_run(&s.p, &s.data, &c, &s.x0, &stop).unwrap();
    assert_eq!(t.records.len(), t.k_star() + 1);
    assert!(t.records.iter().enumerate().all(|(i, r)| r.k == i));
    let last = t.records.last().unwrap();
    let err = norm(&x.sub(&s.xdag));
    assert!((last.error_norm.unwrap() - err).abs() <= 1e-14 * err);
    assert!(last.residual_norm <= s.data.delta);
}

#[test]
fn prox_gradient_map_replays_iterates() {
    let s = table1(6);
    let rho = 1.0 / 28.0;
    let ball = BallConstraint::new(s.x0.clone(), 2.0 * rho, true).unwrap();
    let stop = StoppingRule::discrepancy(1.0, 0.0).unwrap();
    let mut c = cfg();
    c.max_iter = 20;
    let (_, t) = nesterov_run(&s.p, &s.data, &c, &s.x0, &ball, &stop).unwrap();
    for w in t.records.windows(2) {
        let z = w[0].z.as_ref().unwrap();
        let g = compute_G(&s.p, &s.data, &ball, c.omega, z).unwrap();
        let replay = z.add_scaled(-c.omega, &g);
        let next = w[1].x.as_ref().unwrap();
        assert!(norm(&replay.sub(next)) <= 1e-12 * norm(next));
    }
}

#[test]
fn invalid_configs_rejected() {
    let s = table1(1);
    let stop = StoppingRule::discrepancy(1.0, s.data.delta).unwrap();
    let mut c = cfg();
    c.omega = 0.0;
    assert!(landweber_run(&s.p, &s.data, &c, &s.x0, &stop).is_err());
    let mut c = cfg();
    c.alpha = 2.0;
    assert!(landweber_run(&s.p, &s.data, &c, &s.x0, &stop).is_err());
    assert!(landweber_run(&s.p, &s.data, &cfg(), &Vector::zeros(3), &stop).is_err());
}
