//! Grid refinement checks: the reported error metrics measure estimator
//! behavior, not discretization artifacts.

use fluxsim::{canned_scenario, run_scenario, Discretization};

#[test]
fn metrics_are_stable_under_time_step_refinement() {
    let mut coarse = canned_scenario("fig3").unwrap();
    coarse.t_end = 2.0;
    coarse.settle = 0.5;
    let mut fine = coarse.clone();
    fine.dt = 2e-5;
    let a = run_scenario(&coarse, 0).unwrap().metrics;
    let b = run_scenario(&fine, 0).unwrap().metrics;
    let drift = (a.rms - b.rms).abs() / b.rms;
    assert!(drift < 1e-3, "rms {} vs {} (relative change {drift})", a.rms, b.rms);
}

#[test]
fn forward_euler_estimators_need_a_finer_step_for_the_same_accuracy() {
    // With exact parameters the only error left is the integration rule.
    // First-order quadrature at dt = 1e-4 sits at about w*dt/2 relative
    // error; the trapezoidal default is three orders of magnitude tighter,
    // and Euler recovers once dt shrinks accordingly.
    let mut base = canned_scenario("fig3").unwrap();
    base.mismatch = Default::default();
    base.t_end = 3.0;

    let mut euler_coarse = base.clone();
    euler_coarse.discretization = Discretization::ForwardEuler;
    let rel_euler = run_scenario(&euler_coarse, 0).unwrap().metrics.relative_rms();
    assert!(
        (1e-3..3e-3).contains(&rel_euler),
        "coarse Euler relative rms {rel_euler}"
    );

    let trap = base.clone();
    let rel_trap = run_scenario(&trap, 0).unwrap().metrics.relative_rms();
    assert!(rel_trap < 1e-5, "trapezoid relative rms {rel_trap}");

    let mut euler_fine = base;
    euler_fine.discretization = Discretization::ForwardEuler;
    euler_fine.dt = 1e-5;
    let rel_fine = run_scenario(&euler_fine, 0).unwrap().metrics.relative_rms();
    assert!(rel_fine < 3e-4, "fine Euler relative rms {rel_fine}");
}
