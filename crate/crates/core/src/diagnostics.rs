//! Residual and sign monitors evaluated on snapshots and trajectories.
//!
//! Every check is a pure function of the recorded nodal values and times, so
//! a persisted trajectory reproduces the same results bit for bit.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use alloc::format;

use crate::flow::Trajectory;
use crate::geometry::{
    area, axisym_curvatures, boundary_frames_from, differentiate, directional_boundary_derivative, geometry_field,
    meridian_profile, neumann_residual, BoundaryFrame, GeometryError, GeometrySample, GraphFunction, Mode,
};
use crate::initial_data::rim_height;
use crate::math::{abs, dot, exp, sqrt, sub};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DiagnosticsError {
    #[error("check is only defined for polar2d grids")]
    ModeUnsupported,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CheckScope {
    Snapshot,
    Trajectory,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CheckResult {
    pub name: String,
    pub scope: CheckScope,
    pub max_residual: f64,
    pub threshold: f64,
    pub pass: bool,
    pub details: String,
}

impl CheckResult {
    fn new(name: &str, scope: CheckScope, max_residual: f64, threshold: f64, details: String) -> Self {
        Self {
            name: name.to_string(),
            scope,
            max_residual,
            threshold,
            pass: max_residual <= threshold,
            details,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct Thresholds {
    /// `|w_ñ − w|` on the rim.
    pub boundary_height: f64,
    /// `|H_ñ + H|/H` on the rim, after warmup.
    pub boundary_h: f64,
    pub t_warmup: f64,
    /// `|h(ñ, z)|/|h|` on polar grids.
    pub mixed_a: f64,
    /// Relative overshoot of `max κ` and `max H` over `max H(0)`.
    pub kappa_h_relative: f64,
    pub area_law: f64,
    /// Largest allowed rise of the rim height between snapshots.
    pub boundary_monotone: f64,
    /// Largest allowed rise of `sup(u − 1)` or `sup|Du|` along the tail.
    pub tail_monotone: f64,
    /// Kernel vs meridian curvature agreement.
    pub dual_path: f64,
    pub unit_ball_slack: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            boundary_height: 1e-4,
            boundary_h: 0.1,
            t_warmup: 0.05,
            mixed_a: 1e-3,
            kappa_h_relative: 0.02,
            area_law: 0.01,
            boundary_monotone: 1e-8,
            tail_monotone: 1e-8,
            dual_path: 1e-6,
            unit_ball_slack: 1e-10,
        }
    }
}

/// Geometry scalars recorded with every snapshot.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SnapshotScalars {
    pub area: f64,
    pub min_h: f64,
    pub max_h: f64,
    pub min_kappa: f64,
    pub max_kappa: f64,
    pub rim_height: f64,
    pub sup_u_minus_1: f64,
    pub sup_du: f64,
    pub neumann_residual: f64,
}

fn scalars_from(u: &GraphFunction, field: &[GeometrySample]) -> Result<SnapshotScalars, GeometryError> {
    let jets = differentiate(u)?;
    let mut s = SnapshotScalars {
        area: area(u, field),
        min_h: f64::INFINITY,
        max_h: f64::NEG_INFINITY,
        min_kappa: f64::INFINITY,
        max_kappa: f64::NEG_INFINITY,
        rim_height: f64::INFINITY,
        sup_u_minus_1: f64::NEG_INFINITY,
        sup_du: 0.0,
        neumann_residual: neumann_residual(u),
    };
    for g in field {
        s.min_h = s.min_h.min(g.mean_curvature);
        s.max_h = s.max_h.max(g.mean_curvature);
        s.min_kappa = s.min_kappa.min(g.kappa_min());
        s.max_kappa = s.max_kappa.max(g.kappa_max());
    }
    for (jet, &v) in jets.iter().zip(u.values()) {
        s.sup_u_minus_1 = s.sup_u_minus_1.max(v - 1.0);
        s.sup_du = s.sup_du.max(sqrt(jet.du[0] * jet.du[0] + jet.du[1] * jet.du[1]));
    }
    for i in u.boundary_nodes() {
        s.rim_height = s.rim_height.min(rim_height(u.values()[i]));
    }
    Ok(s)
}

pub fn snapshot_scalars(u: &GraphFunction) -> Result<SnapshotScalars, GeometryError> {
    let field = geometry_field(u)?;
    scalars_from(u, &field)
}

fn boundary_height_from(u: &GraphFunction, field: &[GeometrySample], frames: &[BoundaryFrame]) -> Result<(f64, usize), GeometryError> {
    let w: Vec<f64> = field.iter().map(|s| s.height).collect();
    let w_n = directional_boundary_derivative(u, &w, frames)?;
    let (mut worst, mut node) = (0.0, frames[0].node);
    for (frame, d) in frames.iter().zip(&w_n) {
        let r = abs(d - w[frame.node]);
        if !(r <= worst) {
            worst = r;
            node = frame.node;
        }
    }
    Ok((worst, node))
}

/// `max |w_ñ − w|` over the rim, with `w = ⟨X, e₀⟩`.
pub fn check_boundary_height_identity(u: &GraphFunction, thresholds: &Thresholds) -> Result<CheckResult, GeometryError> {
    let field = geometry_field(u)?;
    let frames = boundary_frames_from(u, &field);
    let (r, node) = boundary_height_from(u, &field, &frames)?;
    Ok(CheckResult::new(
        "boundary_height_identity",
        CheckScope::Snapshot,
        r,
        thresholds.boundary_height,
        format!("worst rim node {node}"),
    ))
}

fn boundary_h_residual(u: &GraphFunction, field: &[GeometrySample], frames: &[BoundaryFrame]) -> Result<(f64, usize), GeometryError> {
    let mean: Vec<f64> = field.iter().map(|s| s.mean_curvature).collect();
    let h_n = directional_boundary_derivative(u, &mean, frames)?;
    let (mut worst, mut node) = (0.0, frames[0].node);
    for (frame, d) in frames.iter().zip(&h_n) {
        let h = mean[frame.node];
        let r = abs(d + h) / h;
        if !(r <= worst) {
            worst = r;
            node = frame.node;
        }
    }
    Ok((worst, node))
}

/// `max |H_ñ + H|/H` over the rim. Before `t_warmup` the residual is
/// reported but not asserted.
pub fn check_boundary_h_identity(u: &GraphFunction, t: f64, thresholds: &Thresholds) -> Result<CheckResult, GeometryError> {
    let field = geometry_field(u)?;
    let frames = boundary_frames_from(u, &field);
    let (r, node) = boundary_h_residual(u, &field, &frames)?;
    Ok(boundary_h_result(r, node, t, thresholds))
}

fn boundary_h_result(r: f64, node: usize, t: f64, thresholds: &Thresholds) -> CheckResult {
    if t < thresholds.t_warmup {
        CheckResult::new("boundary_h_identity", CheckScope::Snapshot, r, f64::INFINITY, format!("warmup excluded (t = {t})"))
    } else {
        CheckResult::new(
            "boundary_h_identity",
            CheckScope::Snapshot,
            r,
            thresholds.boundary_h,
            format!("worst rim node {node} at t = {t}"),
        )
    }
}

fn mixed_a_residual(field: &[GeometrySample], frames: &[BoundaryFrame]) -> (f64, usize) {
    let (mut worst, mut node) = (0.0, frames.first().map_or(0, |f| f.node));
    for frame in frames {
        let Some(z) = frame.z else { continue };
        let s = &field[frame.node];
        let z_len = sqrt(BoundaryFrame::metric(s, &z, &z));
        let mut hz = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                hz += s.h[i][j] * frame.n_tilde[i] * z[j];
            }
        }
        let r = abs(hz) / (z_len * sqrt(s.second_form_norm_squared()));
        if !(r <= worst) {
            worst = r;
            node = frame.node;
        }
    }
    (worst, node)
}

/// `max |h(ñ, z)|/|h|` over the rim, `z` the unit boundary tangent.
pub fn check_mixed_a(u: &GraphFunction, thresholds: &Thresholds) -> Result<CheckResult, DiagnosticsError> {
    if !matches!(u.mode(), Mode::Polar2d { .. }) {
        return Err(DiagnosticsError::ModeUnsupported);
    }
    let field = geometry_field(u)?;
    let frames = boundary_frames_from(u, &field);
    let (r, node) = mixed_a_residual(&field, &frames);
    Ok(CheckResult::new("mixed_a", CheckScope::Snapshot, r, thresholds.mixed_a, format!("worst rim node {node}")))
}

/// Number of nodes violating any of the six sign and position conditions.
fn sign_violations(u: &GraphFunction, field: &[GeometrySample], slack: f64) -> (usize, String) {
    let mut count = 0;
    let mut first = String::new();
    let mut note = |label: &str, node: usize| {
        if count == 0 {
            first = format!("{label} fails at node {node}");
        }
        count += 1;
    };
    let e0 = [1.0, 0.0, 0.0];
    let mut w_max_interior = f64::NEG_INFINITY;
    let mut w_max_boundary = f64::NEG_INFINITY;
    for (node, s) in field.iter().enumerate() {
        if !(s.normal[0] < 0.0) {
            note("⟨N, e₀⟩ < 0", node);
        }
        if !(dot(&sub(&e0, &s.position), &s.normal) < 0.0) {
            note("⟨e₀ − X, N⟩ < 0", node);
        }
        if !(sqrt(dot(&s.position, &s.position)) <= 1.0 + slack) {
            note("|X| ≤ 1", node);
        }
        if !(s.height > 0.0) {
            note("w > 0", node);
        }
        if !(s.graph_condition < 0.0) {
            note("⟨∂f/∂λ, N⟩ < 0", node);
        }
        if u.is_boundary(node) {
            w_max_boundary = w_max_boundary.max(s.height);
        } else {
            w_max_interior = w_max_interior.max(s.height);
        }
    }
    if !(w_max_boundary >= w_max_interior) {
        note("boundary argmax of w", 0);
    }
    (count, first)
}

pub fn check_sign_conditions(u: &GraphFunction, thresholds: &Thresholds) -> Result<CheckResult, GeometryError> {
    let field = geometry_field(u)?;
    let (count, first) = sign_violations(u, &field, thresholds.unit_ball_slack);
    Ok(CheckResult::new("sign_conditions", CheckScope::Snapshot, count as f64, 0.0, first))
}

/// Largest gap between the kernel curvatures and the meridian-curve route.
pub fn dual_path_deviation(u: &GraphFunction) -> Result<f64, GeometryError> {
    let field = geometry_field(u)?;
    dual_path_from(u, &field)
}

fn dual_path_from(u: &GraphFunction, field: &[GeometrySample]) -> Result<f64, GeometryError> {
    let revolution = axisym_curvatures(&meridian_profile(u)?)?;
    Ok(field
        .iter()
        .zip(&revolution)
        .map(|(s, r)| {
            let k = r.sorted();
            abs(s.kappa[0] - k[0]).max(abs(s.kappa[1] - k[1]))
        })
        .fold(0.0, f64::max))
}

/// Per-snapshot values every trajectory check is built from.
struct SnapshotEval {
    t: f64,
    scalars: SnapshotScalars,
    boundary_height: (f64, usize),
    boundary_h: (f64, usize),
    mixed_a: Option<(f64, usize)>,
    signs: (usize, String),
    dual_path: Option<f64>,
}

fn evaluate_snapshot(u: &GraphFunction, t: f64, thresholds: &Thresholds) -> Result<SnapshotEval, GeometryError> {
    let field = geometry_field(u)?;
    let frames = boundary_frames_from(u, &field);
    Ok(SnapshotEval {
        t,
        scalars: scalars_from(u, &field)?,
        boundary_height: boundary_height_from(u, &field, &frames)?,
        boundary_h: boundary_h_residual(u, &field, &frames)?,
        mixed_a: matches!(u.mode(), Mode::Polar2d { .. }).then(|| mixed_a_residual(&field, &frames)),
        signs: sign_violations(u, &field, thresholds.unit_ball_slack),
        dual_path: if u.mode() == Mode::Axisymmetric { Some(dual_path_from(u, &field)?) } else { None },
    })
}

/// `max_t |A(t)e^{−t}/A(0) − 1|`.
pub fn check_area_law(traj: &Trajectory, thresholds: &Thresholds) -> Result<CheckResult, GeometryError> {
    let series: Vec<(f64, f64)> = traj
        .snapshots
        .iter()
        .enumerate()
        .map(|(i, s)| Ok((s.t, snapshot_scalars(&traj.graph(i)?)?.area)))
        .collect::<Result<_, GeometryError>>()?;
    Ok(area_law_from(&series, thresholds))
}

fn area_law_from(series: &[(f64, f64)], thresholds: &Thresholds) -> CheckResult {
    let Some(&(t0, a0)) = series.first() else {
        return CheckResult::new("area_law", CheckScope::Trajectory, 0.0, thresholds.area_law, "empty trajectory".into());
    };
    let (mut worst, mut at) = (0.0, t0);
    for &(t, a) in series {
        let r = abs(a * exp(-(t - t0)) / a0 - 1.0);
        if !(r <= worst) {
            worst = r;
            at = t;
        }
    }
    CheckResult::new("area_law", CheckScope::Trajectory, worst, thresholds.area_law, format!("worst at t = {at}"))
}

fn kappa_h_from(scalars: &[(f64, SnapshotScalars)], thresholds: &Thresholds) -> CheckResult {
    let Some((_, first)) = scalars.first() else {
        return CheckResult::new("kappa_h_bounds", CheckScope::Trajectory, 0.0, thresholds.kappa_h_relative, "empty trajectory".into());
    };
    let h0 = first.max_h;
    let (mut worst_kappa, mut worst_h) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for (_, s) in scalars {
        worst_kappa = worst_kappa.max((s.max_kappa - h0) / h0);
        worst_h = worst_h.max((s.max_h - h0) / h0);
    }
    CheckResult::new(
        "kappa_h_bounds",
        CheckScope::Trajectory,
        worst_kappa.max(worst_h),
        thresholds.kappa_h_relative,
        format!("max H(0) = {h0}; κ overshoot {worst_kappa:.3e}, H overshoot {worst_h:.3e}"),
    )
}

fn boundary_monotone_from(scalars: &[(f64, SnapshotScalars)], thresholds: &Thresholds) -> CheckResult {
    let (mut worst, mut at) = (0.0, 0.0);
    for pair in scalars.windows(2) {
        let jump = pair[1].1.rim_height - pair[0].1.rim_height;
        if jump > worst {
            worst = jump;
            at = pair[1].0;
        }
    }
    CheckResult::new("boundary_monotone", CheckScope::Trajectory, worst, thresholds.boundary_monotone, format!("largest rise at t = {at}"))
}

/// Counts node pairs of consecutive snapshots where `u` fails to decrease.
pub fn check_pointwise_monotone(traj: &Trajectory) -> CheckResult {
    let mut count = 0usize;
    let mut first = String::new();
    for pair in traj.snapshots.windows(2) {
        for (node, (a, b)) in pair[0].values.iter().zip(&pair[1].values).enumerate() {
            if !(b < a) {
                if count == 0 {
                    first = format!("u does not decrease at node {node} between t = {} and t = {}", pair[0].t, pair[1].t);
                }
                count += 1;
            }
        }
    }
    CheckResult::new("pointwise_monotone", CheckScope::Trajectory, count as f64, 0.0, first)
}

/// Convergence metrics at one recorded time.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConvergenceSample {
    pub t: f64,
    pub sup_u_minus_1: f64,
    pub sup_du: f64,
}

pub fn convergence_metrics(traj: &Trajectory) -> Result<Vec<ConvergenceSample>, GeometryError> {
    (0..traj.snapshots.len())
        .map(|i| {
            let s = snapshot_scalars(&traj.graph(i)?)?;
            Ok(ConvergenceSample { t: traj.snapshots[i].t, sup_u_minus_1: s.sup_u_minus_1, sup_du: s.sup_du })
        })
        .collect()
}

fn convergence_tail_from(samples: &[ConvergenceSample], thresholds: &Thresholds) -> CheckResult {
    let tail = &samples[samples.len() / 2..];
    let (mut worst, mut at) = (0.0, 0.0);
    for pair in tail.windows(2) {
        let rise = (pair[1].sup_u_minus_1 - pair[0].sup_u_minus_1).max(pair[1].sup_du - pair[0].sup_du);
        if rise > worst {
            worst = rise;
            at = pair[1].t;
        }
    }
    CheckResult::new("convergence_tail_monotone", CheckScope::Trajectory, worst, thresholds.tail_monotone, format!("largest rise at t = {at}"))
}

/// `sup(u − 1)` and `sup|Du|` must not rise over the final half of snapshots.
pub fn check_convergence_tail(traj: &Trajectory, thresholds: &Thresholds) -> Result<CheckResult, GeometryError> {
    Ok(convergence_tail_from(&convergence_metrics(traj)?, thresholds))
}

fn worst_of<T>(evals: &[SnapshotEval], pick: impl Fn(&SnapshotEval) -> Option<(f64, T)>) -> Option<(f64, T, f64)> {
    let mut best: Option<(f64, T, f64)> = None;
    for e in evals {
        if let Some((r, extra)) = pick(e) {
            if best.as_ref().is_none_or(|b| !(r <= b.0)) {
                best = Some((r, extra, e.t));
            }
        }
    }
    best
}

/// Every monitor over a whole trajectory, in a fixed order. Snapshot checks
/// report their worst snapshot.
pub fn evaluate_trajectory(traj: &Trajectory, thresholds: &Thresholds) -> Result<Vec<CheckResult>, GeometryError> {
    let evals: Vec<SnapshotEval> = (0..traj.snapshots.len())
        .map(|i| evaluate_snapshot(&traj.graph(i)?, traj.snapshots[i].t, thresholds))
        .collect::<Result<_, _>>()?;
    let mut out = Vec::new();

    let bh = worst_of(&evals, |e| Some(e.boundary_height));
    out.push(match bh {
        Some((r, node, t)) => CheckResult::new(
            "boundary_height_identity",
            CheckScope::Snapshot,
            r,
            thresholds.boundary_height,
            format!("worst rim node {node} at t = {t}"),
        ),
        None => CheckResult::new("boundary_height_identity", CheckScope::Snapshot, 0.0, thresholds.boundary_height, "no snapshots".into()),
    });

    let settled = worst_of(&evals, |e| (e.t >= thresholds.t_warmup).then_some(e.boundary_h));
    out.push(match settled {
        Some((r, node, t)) => boundary_h_result(r, node, t, thresholds),
        None => {
            let r = worst_of(&evals, |e| Some(e.boundary_h)).map_or(0.0, |w| w.0);
            CheckResult::new(
                "boundary_h_identity",
                CheckScope::Snapshot,
                r,
                f64::INFINITY,
                format!("warmup excluded (no snapshot with t ≥ {})", thresholds.t_warmup),
            )
        }
    });

    out.push(match worst_of(&evals, |e| e.mixed_a) {
        Some((r, node, t)) => {
            CheckResult::new("mixed_a", CheckScope::Snapshot, r, thresholds.mixed_a, format!("worst rim node {node} at t = {t}"))
        }
        None => CheckResult::new(
            "mixed_a",
            CheckScope::Snapshot,
            0.0,
            thresholds.mixed_a,
            "mode unsupported: holds by symmetry".into(),
        ),
    });

    let violations: usize = evals.iter().map(|e| e.signs.0).sum();
    let first = evals.iter().find(|e| e.signs.0 > 0).map(|e| format!("{} at t = {}", e.signs.1, e.t)).unwrap_or_default();
    out.push(CheckResult::new("sign_conditions", CheckScope::Snapshot, violations as f64, 0.0, first));

    out.push(match worst_of(&evals, |e| e.dual_path.map(|d| (d, ()))) {
        Some((r, (), t)) => CheckResult::new("dual_path_curvature", CheckScope::Snapshot, r, thresholds.dual_path, format!("worst at t = {t}")),
        None => CheckResult::new("dual_path_curvature", CheckScope::Snapshot, 0.0, thresholds.dual_path, "axisymmetric only".into()),
    });

    let scalars: Vec<(f64, SnapshotScalars)> = evals.iter().map(|e| (e.t, e.scalars)).collect();
    let series: Vec<(f64, f64)> = scalars.iter().map(|(t, s)| (*t, s.area)).collect();
    out.push(area_law_from(&series, thresholds));
    out.push(kappa_h_from(&scalars, thresholds));

    let convex = scalars.iter().map(|(_, s)| s.min_kappa).fold(f64::INFINITY, f64::min);
    out.push(CheckResult::new(
        "convexity",
        CheckScope::Trajectory,
        scalars.iter().filter(|(_, s)| !(s.min_kappa > 0.0)).count() as f64,
        0.0,
        format!("min κ over snapshots = {convex}"),
    ));

    out.push(boundary_monotone_from(&scalars, thresholds));
    out.push(check_pointwise_monotone(traj));
    let samples: Vec<ConvergenceSample> = evals
        .iter()
        .map(|e| ConvergenceSample { t: e.t, sup_u_minus_1: e.scalars.sup_u_minus_1, sup_du: e.scalars.sup_du })
        .collect();
    out.push(if samples.is_empty() {
        CheckResult::new("convergence_tail_monotone", CheckScope::Trajectory, 0.0, thresholds.tail_monotone, "no snapshots".into())
    } else {
        convergence_tail_from(&samples, thresholds)
    });
    Ok(out)
}

#[cfg(test)]
mod tests;
