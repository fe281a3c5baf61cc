use super::*;
use crate::initial_data::{cap, perturbed_cap};
use alloc::vec;
use core::f64::consts::PI;

fn close(a: f64, b: f64, tol: f64) -> bool {
    abs(a - b) <= tol
}

#[test]
fn cap_speeds_at_pole_and_rim() {
    // v = 1 on a constant graph; e^ψ(0, 2) = 2/9, e^ψ(rim, 2) = 2/5, H = 3/2.
    let u = cap(2.0, Mode::Axisymmetric, 41).unwrap();
    let s = rhs(&u, 0.05).unwrap();
    assert!(close(s[0], -3.0, 1e-12), "{}", s[0]);
    assert!(close(s[40], -5.0 / 3.0, 1e-12), "{}", s[40]);
    assert!(s.iter().all(|&v| v < 0.0));

    // n = 1: H = 3/4 doubles the pole speed.
    let u = cap(2.0, Mode::Interval, 41).unwrap();
    let s = rhs(&u, 0.05).unwrap();
    assert!(close(s[20], -6.0, 1e-12));
    assert!(close(s[0], -10.0 / 3.0, 1e-12) && close(s[40], -10.0 / 3.0, 1e-12));
}

#[test]
fn rhs_refuses_small_mean_curvature() {
    let u = cap(1.001, Mode::Axisymmetric, 21).unwrap();
    assert!(matches!(rhs(&u, 0.05), Err(FlowError::SpeedBlowup { .. })));
}

#[test]
fn single_small_step_follows_the_speed() {
    let u = cap(2.0, Mode::Axisymmetric, 41).unwrap();
    for dt in [1e-6, 1e-7] {
        let policy = TimeStepPolicy { dt_max: dt, ..Default::default() };
        let next = step(&FlowState::new(u.clone()), &policy).unwrap();
        assert_eq!(next.dt_last, dt);
        assert_eq!(next.steps, 1);
        assert!(abs(next.u.values()[0] - (2.0 - 3.0 * dt)) < 50.0 * dt * dt);
        assert!(abs(next.u.values()[40] - (2.0 - 5.0 / 3.0 * dt)) < 50.0 * dt * dt);
    }
}

#[test]
fn hundred_steps_decrease_strictly() {
    let mut state = FlowState::new(cap(2.0, Mode::Axisymmetric, 41).unwrap());
    let policy = TimeStepPolicy::default();
    for _ in 0..100 {
        let next = step(&state, &policy).unwrap();
        assert!(next.t > state.t);
        for (a, b) in state.u.values().iter().zip(next.u.values()) {
            assert!(b < a && *b >= 1.0);
        }
        state = next;
    }
    assert!(neumann_residual_of(&state.u) < 1e-3);
}

fn neumann_residual_of(u: &GraphFunction) -> f64 {
    crate::geometry::neumann_residual(u)
}

#[test]
fn dt_scales_with_h_squared() {
    let policy = TimeStepPolicy { dt_max: 1.0, ..Default::default() };
    for mode in [Mode::Interval, Mode::Axisymmetric] {
        let coarse = stable_dt(&perturbed_cap(2.0, 0.2, mode, 101).unwrap(), &policy).unwrap();
        let fine = stable_dt(&perturbed_cap(2.0, 0.2, mode, 201).unwrap(), &policy).unwrap();
        let ratio = coarse / fine;
        assert!((ratio - 4.0).abs() <= 0.2, "{ratio}");
    }
}

#[test]
fn zero_time_budget_takes_no_steps() {
    let policy = TimeStepPolicy { t_max: 0.0, ..Default::default() };
    let out = run(cap(2.0, Mode::Axisymmetric, 101).unwrap(), &policy, &Thresholds::default()).unwrap();
    assert_eq!(out.stop, StopReason::MaxTimeReached);
    assert_eq!(out.state.steps, 0);
    assert_eq!(out.trajectory.snapshots.len(), 1);
    assert!(out.checks.iter().all(|c| c.pass), "{:?}", out.checks);
}

#[test]
fn nearly_flat_cap_stops_at_once() {
    let out = run(cap(1.001, Mode::Axisymmetric, 41).unwrap(), &TimeStepPolicy::default(), &Thresholds::default())
        .unwrap();
    assert_eq!(out.stop, StopReason::HFloorReached);
    assert!(out.state.steps <= 3);
}

#[test]
fn run_lands_on_t_max() {
    let policy = TimeStepPolicy { t_max: 0.01, record_every: 50, ..Default::default() };
    let out = run(cap(2.0, Mode::Interval, 41).unwrap(), &policy, &Thresholds::default()).unwrap();
    assert_eq!(out.stop, StopReason::MaxTimeReached);
    assert_eq!(out.state.t, 0.01);
    let last = out.trajectory.snapshots.last().unwrap();
    assert_eq!(last.t, 0.01);
    assert_eq!(last.step, out.state.steps);
    assert!(out.trajectory.snapshots.windows(2).all(|w| w[1].t > w[0].t));
}

#[test]
fn coarse_cap_run_reaches_the_h_floor() {
    let policy = TimeStepPolicy { record_every: 500, ..Default::default() };
    let out = run(cap(2.0, Mode::Axisymmetric, 81).unwrap(), &policy, &Thresholds::default()).unwrap();
    assert_eq!(out.stop, StopReason::HFloorReached);
    assert!(out.state.diagnostics.min_h <= 0.05 + 1e-3);
    let est = out.singular_time.unwrap();
    assert!(close(est.t_star, ln(45.0 / 32.0), 0.01 * ln(45.0 / 32.0)));
    assert!(out.state.t < est.t_star);
    assert!(out.checks.iter().all(|c| c.pass), "{:?}", out.checks);
}

#[test]
fn inadmissible_data_is_rejected() {
    let u = GraphFunction::from_fn(Mode::Axisymmetric, 41, |x| 2.0 + 0.1 * x[0]).unwrap();
    assert!(matches!(
        run(u, &TimeStepPolicy::default(), &Thresholds::default()),
        Err(FlowError::Inadmissible(_))
    ));
}

#[test]
fn bad_policies_are_rejected() {
    let u = cap(2.0, Mode::Axisymmetric, 21).unwrap();
    for policy in [
        TimeStepPolicy { cfl: 0.0, ..Default::default() },
        TimeStepPolicy { cfl: 1.5, ..Default::default() },
        TimeStepPolicy { dt_max: -1.0, ..Default::default() },
        TimeStepPolicy { eps_h: 0.0, ..Default::default() },
        TimeStepPolicy { t_max: -1.0, ..Default::default() },
        TimeStepPolicy { record_every: 0, ..Default::default() },
    ] {
        assert!(matches!(run(u.clone(), &policy, &Thresholds::default()), Err(FlowError::InvalidPolicy(_))));
    }
}

#[test]
fn singular_time_from_exact_area_law() {
    // Closed-form cap area 8πλ²/((1+λ)²(1+λ²)) at λ = 2 is 32π/45.
    let a0 = 32.0 * PI / 45.0;
    let series: Vec<(f64, f64)> = (0..20).map(|i| (0.01 * i as f64, a0 * exp(0.01 * i as f64))).collect();
    let est = extrapolate_singular_time(&series, PI).unwrap();
    assert!(close(est.t_star, 0.34093, 1e-5), "{}", est.t_star);
    assert!(close(est.slope, 1.0, 1e-12));
    assert!(close(est.intercept, ln(a0), 1e-12));

    // n = 1: L(0) = (8/3)·acos(4/5).
    let l0 = 8.0 / 3.0 * libm::acos(0.8);
    let series: Vec<(f64, f64)> = (0..20).map(|i| (0.005 * i as f64, l0 * exp(0.005 * i as f64))).collect();
    let est = extrapolate_singular_time(&series, 2.0).unwrap();
    assert!(close(est.t_star, 0.15315, 1e-5), "{}", est.t_star);
}

#[test]
fn singular_time_rejects_bad_series() {
    let series = vec![(0.0, 2.0); 5];
    assert!(matches!(extrapolate_singular_time(&series, PI), Err(FlowError::TooFewSamples { got: 5, need: 10 })));

    let series: Vec<(f64, f64)> = (0..20).map(|i| (0.01 * i as f64, 2.0)).collect();
    match extrapolate_singular_time(&series, PI) {
        Err(FlowError::AreaLawViolated { slope, .. }) => assert_eq!(slope, 0.0),
        other => panic!("{other:?}"),
    }
}

#[test]
fn numerical_failures_are_flagged() {
    assert!(StopReason::ConvexityLost.is_numerical_failure());
    assert!(StopReason::StepUnderflow.is_numerical_failure());
    assert!(StopReason::NonFiniteGeometry.is_numerical_failure());
    assert!(!StopReason::HFloorReached.is_numerical_failure());
    assert!(!StopReason::MaxTimeReached.is_numerical_failure());
}
