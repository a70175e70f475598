use itreg::experiment::run_experiment;
use itreg::stopping::{constants_c1_c2, kstar_bound, StoppingRule};
use proptest::prelude::*;

proptest! {
    #[test]
    fn c1_increasing_in_each_argument(
        wb in 0.1..50.0f64, w in 1e-4..1.0f64, rho in 1e-3..1.0f64, bump in 1.01..2.0f64
    ) {
        let (c1, _) = constants_c1_c2(wb, w, rho);
        prop_assert!(constants_c1_c2(wb * bump, w, rho).0 > c1);
        prop_assert!(constants_c1_c2(wb, w * bump, rho).0 > c1);
        prop_assert!(constants_c1_c2(wb, w, rho * bump).0 > c1);
    }

    #[test]
    fn c2_independent_of_rho(wb in 0.1..50.0f64, w in 1e-4..1.0f64, rho in 0.0..1.0f64) {
        prop_assert_eq!(constants_c1_c2(wb, w, rho).1, constants_c1_c2(wb, w, 0.5).1);
    }

    #[test]
    fn corrected_threshold_dominates_discrepancy(
        k in 1usize..100_000, delta in 1e-8..1.0f64, alpha in 3.01..10.0f64, tau in 1.0..3.0f64
    ) {
        let r = StoppingRule::delta_corrected(tau, delta, 20.8, 3.28, alpha).unwrap();
        prop_assert!(r.threshold(k) >= tau * tau * delta * delta);
    }
}

#[test]
fn threshold_grows_without_bound() {
    let r = StoppingRule::delta_corrected(1.5, 1e-3, 1.0, 3.0, 4.0).unwrap();
    let t: Vec<f64> = [10usize, 1_000, 100_000, 10_000_000]
        .iter()
        .map(|&k| r.threshold(k))
        .collect();
    assert!(t.windows(2).all(|w| w[1] > 10.0 * w[0]), "{t:?}");
}

#[test]
fn threshold_minimized_near_alpha_minus_one() {
    for alpha in [4.0, 6.0, 11.0] {
        let r = StoppingRule::delta_corrected(1.2, 1e-2, 5.0, 3.0, alpha).unwrap();
        let best = (1..200)
            .min_by(|&a, &b| r.threshold(a).total_cmp(&r.threshold(b)))
            .unwrap();
        assert!((best as f64 - (alpha - 1.0)).abs() <= 1.0, "alpha {alpha}: {best}");
    }
}

#[test]
fn with_delta_keeps_other_fields() {
    let r = StoppingRule::delta_corrected(1.2, 1e-2, 5.0, 3.0, 4.0).unwrap();
    let s = r.with_delta(2e-2);
    assert_eq!(s.delta(), 2e-2);
    assert_eq!(s.tau(), 1.2);
}

#[test]
fn bound_dominates_observed_stopping_index() {
    for name in ["energy", "energy_autoconv"] {
        let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
            .join(format!("../../configs/{name}.toml"));
        let spec = itreg::experiment::ExperimentSpec::from_file(&path).unwrap();
        let o = run_experiment(&spec).unwrap();
        for run in &o.runs {
            if run.row.stop_reason == itreg::solvers::StopReason::DiscrepancyMet {
                let bound = run.kstar_bound.expect("bound available");
                assert!(run.row.k_star as f64 <= bound, "{}: {} > {bound}", run.row.method, run.row.k_star);
            }
        }
    }
}

#[test]
fn bound_undefined_without_margin() {
    assert!(kstar_bound(4.0, 1e-3, 1.0, 1.0, 1e-2).is_err());
    assert!(kstar_bound(3.0, 1e-3, 1.5, 1.0, 1e-2).is_err());
}
