//! Rate fitting and audit properties.

use nalgebra::DVector;
use pdflow::convex::solve_kkt_oracle;
use pdflow::diagnostics::{audit_lyapunov, audit_sequence, compare_trajectories, fit_rate, regime_sweep};
use pdflow::dynamics::{make_config, PDState, Regime, RegimeHint};
use pdflow::flows::run_central;
use pdflow::instances::QpSpec;
use pdflow::integrator::{log_sample_schedule, IntegratorConfig, Method, SampleSchedule};
use pdflow::rng::DEFAULT_SEED;
use pdflow::trajectory::Energy;
use pdflow::Error;
use proptest::prelude::*;

fn short_run(alpha: f64) -> pdflow::trajectory::Trajectory {
    let p = QpSpec::benchmark().build(DEFAULT_SEED).unwrap();
    let kkt = solve_kkt_oracle(&p).unwrap();
    let cfg = make_config(alpha, RegimeHint::Auto).unwrap();
    let s0 = PDState::at_rest(1.0, DVector::zeros(10), 3);
    run_central(&p, &kkt, &cfg, &s0, &ic(30.0)).unwrap()
}

fn ic(t_end: f64) -> IntegratorConfig {
    IntegratorConfig {
        method: Method::Rk45 {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            min_step: 1e-12,
            max_step: f64::INFINITY,
        },
        t_end,
        schedule: SampleSchedule::Times(log_sample_schedule(1.0, t_end, 80).unwrap()),
    }
}

#[test]
fn audit_rejects_mismatched_energy() {
    let traj = short_run(4.0);
    assert!(audit_lyapunov(&traj, Energy::Fast).is_ok());
    assert!(matches!(audit_lyapunov(&traj, Energy::Slow), Err(Error::InvalidArgument(_))));
}

#[test]
fn trajectory_compared_with_itself_has_zero_difference() {
    let traj = short_run(4.0);
    let c = compare_trajectories(&traj, &traj, (3.0, 30.0)).unwrap();
    assert_eq!(c.slope_difference, 0.0);
}

#[test]
fn sweep_reports_rows_in_input_order() {
    let p = QpSpec::benchmark().build(DEFAULT_SEED).unwrap();
    let kkt = solve_kkt_oracle(&p).unwrap();
    let s0 = PDState::at_rest(1.0, DVector::zeros(10), 3);
    let rows = regime_sweep(&p, &kkt, &[4.0, 3.0, 1.5], &s0, &ic(20.0)).unwrap();
    let regimes: Vec<Regime> = rows.iter().map(|r| r.regime).collect();
    assert_eq!(regimes, [Regime::Fast, Regime::Slow, Regime::Slow]);
    // the regime boundary uses the slow family with β = ½
    assert_eq!(rows[1].beta, 0.5);
    assert!((rows[2].expected_gap_slope + 1.0).abs() < 1e-15);
}

proptest! {
    #[test]
    fn fit_rate_recovers_power_laws(k in -4.0..4.0f64, c in 1e-3..1e3f64, lo in 0.5..5.0f64, span in 1.5..3.0f64, n in 3usize..60) {
        let hi = lo * 10f64.powf(span);
        let ts = log_sample_schedule(lo, hi, n).unwrap();
        let samples: Vec<(f64, f64)> = ts.iter().map(|&t| (t, c * t.powf(k))).collect();
        // keep every sample above the floor
        prop_assume!(samples.iter().all(|s| s.1 > 1e-12));
        let r = fit_rate("v", &samples, (lo, hi)).unwrap();
        prop_assert!((r.slope - k).abs() < 1e-10, "{} vs {}", r.slope, k);
        prop_assert!((r.intercept - c.ln()).abs() < 1e-8);
    }

    #[test]
    fn audit_is_monotone_in_tolerance(values in prop::collection::vec(0.0..10.0f64, 2..50), rel in 0.0..1e-2f64, abs in 0.0..1e-2f64, extra in 0.0..1e-2f64) {
        let times: Vec<f64> = (0..values.len()).map(|k| k as f64).collect();
        let tight = audit_sequence(&times, &values, rel, abs).violations;
        let loose_rel = audit_sequence(&times, &values, rel + extra, abs).violations;
        let loose_abs = audit_sequence(&times, &values, rel, abs + extra).violations;
        prop_assert!(loose_rel <= tight && loose_abs <= tight);
    }

    #[test]
    fn nonincreasing_sequences_pass_the_audit(mut values in prop::collection::vec(0.0..10.0f64, 2..50)) {
        values.sort_by(|a, b| b.total_cmp(a));
        let times: Vec<f64> = (0..values.len()).map(|k| k as f64).collect();
        prop_assert_eq!(audit_sequence(&times, &values, 1e-8, 1e-10).violations, 0);
    }
}
