use super::*;
use crate::flow::{run, Snapshot, TimeStepPolicy};
use crate::initial_data::{cap, perturbed_cap};
use core::f64::consts::PI;

fn thresholds() -> Thresholds {
    Thresholds::default()
}

fn frozen(u: &GraphFunction, count: usize) -> Trajectory {
    let scalars = snapshot_scalars(u).unwrap();
    Trajectory {
        mode: u.mode(),
        m: u.m(),
        snapshots: (0..count)
            .map(|i| Snapshot { step: i as u64, t: 0.0, dt: 0.0, values: u.values().to_vec(), scalars })
            .collect(),
    }
}

#[test]
fn boundary_height_identity_on_cap() {
    // On cap(2) the rim height is 3/5 and w_ñ = w there.
    let c = check_boundary_height_identity(&cap(2.0, Mode::Axisymmetric, 401).unwrap(), &thresholds()).unwrap();
    assert!(c.max_residual <= 1e-5 && c.pass, "{c:?}");
    let c = check_boundary_height_identity(&cap(2.0, Mode::Interval, 401).unwrap(), &thresholds()).unwrap();
    assert!(c.pass, "{c:?}");
}

#[test]
fn boundary_height_identity_on_flat_disk() {
    let u = GraphFunction::from_fn(Mode::Axisymmetric, 41, |_| 1.0).unwrap();
    let c = check_boundary_height_identity(&u, &thresholds()).unwrap();
    assert_eq!(c.max_residual, 0.0);
}

#[test]
fn boundary_height_identity_refines() {
    let r: Vec<f64> = [201, 401]
        .iter()
        .map(|&m| {
            let u = perturbed_cap(2.0, 0.2, Mode::Axisymmetric, m).unwrap();
            check_boundary_height_identity(&u, &thresholds()).unwrap().max_residual
        })
        .collect();
    assert!(r[1] <= 1e-4 && r[0] / r[1] >= 3.0, "{r:?}");
}

#[test]
fn boundary_h_identity_is_excluded_during_warmup() {
    // H is constant on a cap, so H_ñ = 0 and the residual is |H|/H = 1.
    let u = cap(2.0, Mode::Axisymmetric, 101).unwrap();
    let c = check_boundary_h_identity(&u, 0.0, &thresholds()).unwrap();
    assert!(abs(c.max_residual - 1.0) < 1e-9, "{c:?}");
    assert!(c.pass && c.threshold.is_infinite());
    assert!(c.details.contains("warmup excluded"));
    let late = check_boundary_h_identity(&u, 0.2, &thresholds()).unwrap();
    assert!(!late.pass);
}

#[test]
fn mixed_a_needs_polar_grid() {
    let u = cap(2.0, Mode::Axisymmetric, 41).unwrap();
    assert_eq!(check_mixed_a(&u, &thresholds()), Err(DiagnosticsError::ModeUnsupported));
}

#[test]
fn mixed_a_vanishes_by_symmetry() {
    let polar = Mode::Polar2d { n_theta: 32 };
    let c = check_mixed_a(&cap(2.0, polar, 41).unwrap(), &thresholds()).unwrap();
    assert!(c.max_residual <= 1e-10, "{c:?}");
    let c = check_mixed_a(&perturbed_cap(2.0, 0.2, polar, 41).unwrap(), &thresholds()).unwrap();
    assert!(c.max_residual <= 1e-8, "{c:?}");
}

fn lopsided(m: usize, n_theta: usize) -> GraphFunction {
    // (r³ − ¾r⁴)cos θ has zero radial slope on the rim.
    GraphFunction::from_fn(Mode::Polar2d { n_theta }, m, |x| {
        let r = libm::sqrt(x[0] * x[0] + x[1] * x[1]);
        2.0 + 0.1 * libm::cos(PI * r) + 0.05 * x[0] * r * r * (1.0 - 0.75 * r)
    })
    .unwrap()
}

#[test]
fn mixed_a_converges_on_lopsided_data() {
    let r: Vec<f64> = [(41, 64), (81, 128)]
        .iter()
        .map(|&(m, nt)| check_mixed_a(&lopsided(m, nt), &thresholds()).unwrap().max_residual)
        .collect();
    assert!(r[0] > 0.0 && r[0] / r[1] >= 3.0, "{r:?}");
}

#[test]
fn sign_conditions_on_cap_and_flat_disk() {
    let u = cap(2.0, Mode::Axisymmetric, 101).unwrap();
    let field = geometry_field(&u).unwrap();
    assert!(abs(field[0].normal[0] + 1.0) < 1e-14);
    assert!(abs(field[0].height - 1.0 / 3.0) < 1e-14);
    assert!(abs(field[100].height - 0.6) < 1e-14);
    assert!(check_sign_conditions(&u, &thresholds()).unwrap().pass);

    let flat = GraphFunction::from_fn(Mode::Axisymmetric, 41, |_| 1.0).unwrap();
    let c = check_sign_conditions(&flat, &thresholds()).unwrap();
    assert!(!c.pass && c.details.contains("w > 0"), "{c:?}");
}

#[test]
fn frozen_trajectory_passes_trajectory_checks() {
    let traj = frozen(&cap(2.0, Mode::Axisymmetric, 41).unwrap(), 4);
    let th = thresholds();
    let area = check_area_law(&traj, &th).unwrap();
    assert_eq!(area.max_residual, 0.0);
    let checks = evaluate_trajectory(&traj, &th).unwrap();
    let get = |name: &str| checks.iter().find(|c| c.name == name).unwrap().clone();
    assert_eq!(get("kappa_h_bounds").max_residual, 0.0);
    assert!(get("kappa_h_bounds").pass);
    assert_eq!(get("boundary_monotone").max_residual, 0.0);
    assert!(get("convergence_tail_monotone").pass);
    // No flow at all: u does not decrease.
    assert!(!get("pointwise_monotone").pass);
}

#[test]
fn single_snapshot_has_zero_area_residual() {
    let traj = frozen(&cap(2.0, Mode::Axisymmetric, 41).unwrap(), 1);
    assert_eq!(check_area_law(&traj, &thresholds()).unwrap().max_residual, 0.0);
    assert!(check_pointwise_monotone(&traj).pass);
}

#[test]
fn flat_disk_metrics_vanish() {
    let traj = frozen(&GraphFunction::from_fn(Mode::Axisymmetric, 41, |_| 1.0).unwrap(), 2);
    for s in convergence_metrics(&traj).unwrap() {
        assert_eq!(s.sup_u_minus_1, 0.0);
        assert_eq!(s.sup_du, 0.0);
    }
}

#[test]
fn area_law_improves_with_resolution() {
    let residual = |m: usize| {
        let policy = TimeStepPolicy { t_max: 0.05, record_every: 100, ..Default::default() };
        let out = run(perturbed_cap(2.0, 0.2, Mode::Axisymmetric, m).unwrap(), &policy, &thresholds()).unwrap();
        check_area_law(&out.trajectory, &thresholds()).unwrap().max_residual
    };
    let (coarse, fine) = (residual(101), residual(201));
    assert!(coarse > fine, "{coarse} vs {fine}");
}

#[test]
fn trajectory_report_is_reproducible() {
    let policy = TimeStepPolicy { t_max: 0.01, record_every: 200, ..Default::default() };
    let out = run(perturbed_cap(2.0, 0.2, Mode::Axisymmetric, 101).unwrap(), &policy, &thresholds()).unwrap();
    let again = evaluate_trajectory(&out.trajectory, &thresholds()).unwrap();
    assert_eq!(again, out.checks);
    let names: Vec<&str> = again.iter().map(|c| c.name.as_str()).collect();
    assert_eq!(
        names,
        [
            "boundary_height_identity",
            "boundary_h_identity",
            "mixed_a",
            "sign_conditions",
            "dual_path_curvature",
            "area_law",
            "kappa_h_bounds",
            "convexity",
            "boundary_monotone",
            "pointwise_monotone",
            "convergence_tail_monotone",
        ]
    );
    for c in &again {
        assert_eq!(c.pass, c.max_residual <= c.threshold);
    }
}

#[test]
fn cap_kappa_bound_holds_on_interval() {
    let traj = frozen(&cap(2.0, Mode::Interval, 41).unwrap(), 2);
    let checks = evaluate_trajectory(&traj, &thresholds()).unwrap();
    let k = checks.iter().find(|c| c.name == "kappa_h_bounds").unwrap();
    assert!(k.details.contains("max H(0) = 0.75"), "{}", k.details);
}
