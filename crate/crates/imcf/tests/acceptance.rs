//! Acceptance suite. Prints one line per criterion and exits non-zero if any fails.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use imcf::commands::run_into;
use imcf::persist::{read_snapshots, RunManifest, SNAPSHOTS_FILE};
use imcf::RunConfig;
use imcf_core::chart::{jet, map_point, slice_sphere};
use imcf_core::diagnostics::{check_boundary_h_identity, check_boundary_height_identity, dual_path_deviation};
use imcf_core::flow::run;
use imcf_core::geometry::{axisym_curvatures, geometry_field, meridian_profile};
use imcf_core::initial_data::{cap, perturbed_cap};
use imcf_core::{ChartPoint, GraphFunction, Mode, StopReason, Thresholds, TimeStepPolicy, Trajectory};

const M: usize = 401;
const T_STAR_N2: f64 = 0.34093; // ln(45/32)
const T_STAR_N1: f64 = 0.15315; // ln(2/1.716)

struct Suite {
    failed: usize,
}

impl Suite {
    fn report(&mut self, n: usize, pass: bool, detail: String) {
        println!("criterion {n:>2}: {}  {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.failed += 1;
        }
    }
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Weyl sequence in the unit disk.
fn disk_samples(count: usize) -> Vec<[f64; 2]> {
    let (a1, a2) = (0.754_877_666_246_692_8, 0.569_840_290_998_053_3);
    (0..count)
        .map(|i| {
            let (s, t) = (((i as f64 + 0.5) * a1).fract(), ((i as f64 + 0.5) * a2).fract());
            let r = s.sqrt();
            let th = std::f64::consts::TAU * t;
            [r * th.cos(), r * th.sin()]
        })
        .collect()
}

fn criterion_1(suite: &mut Suite) {
    let start = Instant::now();
    let xs = disk_samples(1000);
    let mut identity = 0.0f64;
    let mut rim = 0.0f64;
    let mut conformal = 0.0f64;
    let mut sphere = 0.0f64;
    for (i, x) in xs.iter().enumerate() {
        let f = map_point(&ChartPoint::new(*x, 1.0).unwrap());
        identity = identity.max(f[0].abs()).max((f[1] - x[0]).abs()).max((f[2] - x[1]).abs());

        let th = std::f64::consts::TAU * i as f64 / xs.len() as f64;
        let lambda = 1.0 + 9.0 * (i as f64 / xs.len() as f64);
        let edge = ChartPoint::new([th.cos(), th.sin()], lambda).unwrap();
        let q = map_point(&edge);
        rim = rim.max((dot(&q, &q).sqrt() - 1.0).abs());

        let j = jet(&ChartPoint::new(*x, lambda).unwrap(), 1);
        let [f1, f2] = j.d_x;
        conformal = conformal
            .max(dot(&f1, &f2).abs())
            .max(dot(&f1, &j.d_lambda).abs())
            .max(dot(&f2, &j.d_lambda).abs())
            .max((dot(&f1, &f1) - dot(&f2, &f2)).abs());

        for l in [1.1, 2.0, 5.0] {
            let s = slice_sphere(l).unwrap();
            let q = map_point(&ChartPoint::new(*x, l).unwrap());
            let d = [q[0] - s.center_height, q[1], q[2]];
            sphere = sphere.max((dot(&d, &d).sqrt() - s.radius).abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = identity <= 1e-12 && rim <= 1e-12 && conformal <= 1e-10 && sphere <= 1e-12 && secs < 1.0;
    suite.report(
        1,
        pass,
        format!("f(x,1)-x {identity:.1e}, rim {rim:.1e}, conformality {conformal:.1e}, slice spheres {sphere:.1e}, {secs:.3} s"),
    );
}

/// Largest gap between the interval kernel curvature and the meridian curvature
/// of the same profile read as a surface of revolution on `x ≥ 0`.
fn interval_dual_path(u: &GraphFunction) -> f64 {
    let m = u.m();
    let half = GraphFunction::new(Mode::Axisymmetric, m / 2 + 1, u.values()[m / 2..].to_vec()).unwrap();
    let meridian = axisym_curvatures(&meridian_profile(&half).unwrap()).unwrap();
    let field = geometry_field(u).unwrap();
    meridian.iter().zip(&field[m / 2..]).map(|(r, s)| (r.kappa_meridian - s.kappa[0]).abs()).fold(0.0, f64::max)
}

fn criterion_2(suite: &mut Suite) {
    let start = Instant::now();
    let mut umbilic = 0.0f64;
    let mut dual = 0.0f64;
    for lambda0 in [1.5, 2.0, 4.0] {
        let exact = (lambda0 * lambda0 - 1.0) / (2.0 * lambda0);
        for mode in [Mode::Interval, Mode::Axisymmetric] {
            let u = cap(lambda0, mode, M).unwrap();
            for s in geometry_field(&u).unwrap() {
                for k in &s.kappa[..s.n] {
                    umbilic = umbilic.max((k - exact).abs());
                }
            }
            dual = dual.max(match mode {
                Mode::Interval => interval_dual_path(&u),
                _ => dual_path_deviation(&u).unwrap(),
            });
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = umbilic <= 1e-6 && dual <= 1e-6 && secs < 5.0;
    suite.report(2, pass, format!("umbilic {umbilic:.1e}, dual path {dual:.1e}, {secs:.2} s"));
}

fn config(n: usize, initial: &str, extra_policy: &str) -> RunConfig {
    let mode = if n == 1 { "interval" } else { "axisymmetric" };
    RunConfig::from_json(&format!(
        r#"{{"n": {n}, "mode": {{"kind": "{mode}"}}, "m": {M}, "initial": {initial},
            "policy": {{"eps_h": 0.05, "record_every": 2000{extra_policy}}},
            "outputs": {{"profiles_csv": false}}}}"#
    ))
    .unwrap()
}

struct FullRun {
    label: &'static str,
    manifest: RunManifest,
    trajectory: Trajectory,
    secs: f64,
}

impl FullRun {
    fn check(&self, name: &str) -> (bool, f64) {
        let c = self.manifest.checks.iter().find(|c| c.name == name).unwrap();
        (c.pass, c.max_residual)
    }
}

fn full_run(label: &'static str, config: &RunConfig, root: &Path) -> FullRun {
    let dir = root.join(label);
    let start = Instant::now();
    let summary = run_into(config, &dir).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let trajectory = read_snapshots(&dir.join(SNAPSHOTS_FILE), config.mode, config.m).unwrap();
    FullRun { label, manifest: summary.manifest, trajectory, secs }
}

fn criterion_3(suite: &mut Suite, runs: &[FullRun]) {
    let mut pass = true;
    let mut parts = Vec::new();
    for (r, target) in runs.iter().zip([T_STAR_N2, T_STAR_N1]) {
        let (area_ok, area) = r.check("area_law");
        let t_star = r.manifest.singular_time.as_ref().map_or(f64::NAN, |s| s.t_star);
        let rel = (t_star - target).abs() / target;
        pass &= r.manifest.stop_reason == StopReason::HFloorReached && area_ok && area <= 0.01 && rel <= 0.05 && r.secs < 120.0;
        parts.push(format!("{}: T* {t_star:.5} (rel {rel:.1e}), area law {area:.1e}, {:.1} s", r.label, r.secs));
    }
    suite.report(3, pass, parts.join("; "));
}

fn criterion_4(suite: &mut Suite, runs: &[FullRun]) {
    let mut pass = true;
    let mut parts = Vec::new();
    for r in runs {
        let h0 = r.trajectory.snapshots[0].scalars.max_h;
        let kappa = r.trajectory.snapshots.iter().map(|s| s.scalars.max_kappa).fold(f64::MIN, f64::max);
        let h = r.trajectory.snapshots.iter().map(|s| s.scalars.max_h).fold(f64::MIN, f64::max);
        pass &= kappa <= 1.02 * h0 && h <= 1.02 * h0 && r.check("kappa_h_bounds").0;
        parts.push(format!("{}: max κ/max H(0) {:.4}, max H/max H(0) {:.4}", r.label, kappa / h0, h / h0));
    }
    suite.report(4, pass, parts.join("; "));
}

fn criterion_5(suite: &mut Suite, runs: &[FullRun], perturbed: &imcf_core::RunOutput) {
    let mut pass = true;
    let mut parts = Vec::new();
    for r in runs {
        let min = r.trajectory.snapshots.iter().map(|s| s.scalars.min_kappa).fold(f64::MAX, f64::min);
        pass &= min > 0.0 && r.manifest.stop_reason != StopReason::ConvexityLost;
        parts.push(format!("{}: min κ {min:.3e}", r.label));
    }
    let min = perturbed.trajectory.snapshots.iter().map(|s| s.scalars.min_kappa).fold(f64::MAX, f64::min);
    pass &= min > 0.0 && perturbed.stop != StopReason::ConvexityLost;
    parts.push(format!("perturbed n=2: min κ {min:.3e}, stop {:?} at t {:.4}", perturbed.stop, perturbed.state.t));
    suite.report(5, pass, parts.join("; "));
}

fn criterion_6(suite: &mut Suite) {
    let th = Thresholds::default();
    let mut pass = true;
    let mut parts = Vec::new();
    for (label, amplitude) in [("cap", 0.0), ("perturbed", 0.2)] {
        let residual = |m| {
            let u = perturbed_cap(2.0, amplitude, Mode::Axisymmetric, m).unwrap();
            check_boundary_height_identity(&u, &th).unwrap().max_residual
        };
        let (coarse, fine) = (residual(201), residual(M));
        let ratio = coarse / fine;
        pass &= fine <= 1e-4 && ratio >= 3.0;
        parts.push(format!("{label}: {fine:.2e} at m={M}, ratio {ratio:.2}"));
    }
    suite.report(6, pass, parts.join("; "));
}

fn boundary_h_at(m: usize, t: f64) -> f64 {
    let th = Thresholds::default();
    let policy = TimeStepPolicy { t_max: t, record_every: usize::MAX, ..TimeStepPolicy::default() };
    let u0 = perturbed_cap(2.0, 0.2, Mode::Axisymmetric, m).unwrap();
    let out = run(u0, &policy, &th).unwrap();
    assert_eq!(out.stop, StopReason::MaxTimeReached);
    check_boundary_h_identity(&out.state.u, t, &th).unwrap().max_residual
}

fn criterion_7(suite: &mut Suite) {
    let early = boundary_h_at(M, 0.02);
    let late = boundary_h_at(M, 0.1);
    let coarse_early = boundary_h_at(201, 0.02);
    let coarse_late = boundary_h_at(201, 0.1);
    let pass = late <= 0.1 && late < early && early < coarse_early && late < coarse_late;
    suite.report(
        7,
        pass,
        format!("m={M}: {early:.3e} at t=0.02, {late:.3e} at t=0.1; m=201: {coarse_early:.3e}, {coarse_late:.3e}"),
    );
}

fn criterion_8(suite: &mut Suite, runs: &[FullRun]) {
    let mut pass = true;
    let mut parts = Vec::new();
    for r in runs {
        let (ok, violations) = r.check("sign_conditions");
        pass &= ok;
        parts.push(format!("{}: {violations} violations over {} snapshots", r.label, r.trajectory.snapshots.len()));
    }
    suite.report(8, pass, parts.join("; "));
}

fn criterion_9(suite: &mut Suite, runs: &[FullRun]) {
    let mut pass = true;
    let mut parts = Vec::new();
    for r in runs {
        let rims: Vec<f64> = r.trajectory.snapshots.iter().map(|s| s.scalars.rim_height).collect();
        let rim_ok = (rims[0] - 0.6).abs() < 1e-12 && rims.windows(2).all(|w| w[1] <= w[0]) && *rims.last().unwrap() < rims[0];
        let f = &r.manifest.flattening;
        pass &= rim_ok
            && r.check("pointwise_monotone").0
            && r.check("boundary_monotone").0
            && r.check("convergence_tail_monotone").0
            && f.final_sup_u_minus_1 <= 0.5
            && f.met;
        parts.push(format!(
            "{}: rim {:.3} -> {:.3}, sup(u-1) {:.3} -> {:.3}",
            r.label,
            rims[0],
            rims.last().unwrap(),
            f.initial_sup_u_minus_1,
            f.final_sup_u_minus_1
        ));
    }
    suite.report(9, pass, parts.join("; "));
}

fn criterion_10(suite: &mut Suite, root: &Path) {
    let cfg = root.join("determinism.json");
    fs::write(
        &cfg,
        r#"{"n": 2, "mode": {"kind": "axisymmetric"}, "m": 401,
            "initial": {"kind": "perturbed_cap", "lambda0": 2.0, "amplitude": 0.2},
            "policy": {"t_max": 0.06, "record_every": 1000}}"#,
    )
    .unwrap();
    let exe = env!("CARGO_BIN_EXE_imcf");
    let mut bytes = Vec::new();
    for name in ["first", "second"] {
        let dir = root.join(name);
        let status = Command::new(exe).env(imcf::OUTPUT_DIR_ENV, &dir).args(["run", "--config"]).arg(&cfg).status().unwrap();
        assert_eq!(status.code(), Some(0));
        bytes.push(fs::read(dir.join(SNAPSHOTS_FILE)).unwrap());
    }
    let identical = bytes[0] == bytes[1];
    let out = Command::new(exe).args(["verify", "--manifest"]).arg(root.join("first/manifest.json")).output().unwrap();
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let reproduced = report["reproduced"] == true;
    let pass = identical && reproduced && out.status.code() == Some(0);
    suite.report(
        10,
        pass,
        format!("snapshots identical: {identical} ({} bytes), verify reproduced: {reproduced}, exit {:?}", bytes[0].len(), out.status.code()),
    );
}

fn main() {
    let root = tempfile::tempdir().unwrap();
    let mut suite = Suite { failed: 0 };
    criterion_1(&mut suite);
    criterion_2(&mut suite);

    let cap_initial = r#"{"kind": "cap", "lambda0": 2.0}"#;
    let runs = [
        full_run("cap n=2", &config(2, cap_initial, ""), root.path()),
        full_run("cap n=1", &config(1, cap_initial, ""), root.path()),
    ];
    criterion_3(&mut suite, &runs);
    criterion_4(&mut suite, &runs);

    let policy = TimeStepPolicy { record_every: 2000, ..TimeStepPolicy::default() };
    let perturbed = run(perturbed_cap(2.0, 0.2, Mode::Axisymmetric, M).unwrap(), &policy, &Thresholds::default()).unwrap();
    criterion_5(&mut suite, &runs, &perturbed);
    criterion_6(&mut suite);
    criterion_7(&mut suite);
    criterion_8(&mut suite, &runs);
    criterion_9(&mut suite, &runs);
    criterion_10(&mut suite, root.path());

    println!("{} of 10 criteria passed", 10 - suite.failed);
    if suite.failed > 0 {
        std::process::exit(1);
    }
}
