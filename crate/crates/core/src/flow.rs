//! Time integration of the scalar Neumann problem
//!
//! ```text
//! ∂u/∂t = −v/(e^ψ H)   in (0, T) × D
//! ∂u/∂ν = 0            on (0, T) × ∂D
//! ```
//!
//! with a two-stage explicit Runge–Kutta (Heun) scheme. The rim is handled by
//! even ghost reflection at every stage, and the step is limited by the
//! parabolicity coefficient `g^{ij}/H²` of the operator.

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::diagnostics::{self, snapshot_scalars, CheckResult, SnapshotScalars, Thresholds};
use crate::geometry::{differentiate_with, sample, GeometryError, GraphFunction, Mode, RimStencil};
use crate::initial_data::{rim_height, validate, AdmissibilityReport};
use crate::math::{abs, exp, ln};

/// Steps shorter than this end a run.
pub const DT_MIN: f64 = 1e-12;

/// Relative area-law residual above which the singular time is not extrapolated.
pub const AREA_LAW_EXTRAPOLATION_LIMIT: f64 = 0.02;

/// Minimum number of `(t, A)` samples for extrapolation.
pub const MIN_AREA_SAMPLES: usize = 10;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FlowError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("invalid time-step policy: {0}")]
    InvalidPolicy(&'static str),
    #[error("initial data is not admissible: {}", .0.reasons.join("; "))]
    Inadmissible(Box<AdmissibilityReport>),
    #[error("speed blows up: min H = {min_h:e}")]
    SpeedBlowup { min_h: f64 },
    #[error("time step {dt:e} below {DT_MIN:e}")]
    StepUnderflow { dt: f64 },
    #[error("curvature routes disagree by {deviation:e} at t = {t}")]
    CurvaturePathMismatch { t: f64, deviation: f64 },
    #[error("area law violated: residual {residual:e}, fitted slope {slope}")]
    AreaLawViolated { residual: f64, slope: f64 },
    #[error("{got} area samples, need at least {need}")]
    TooFewSamples { got: usize, need: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct TimeStepPolicy {
    pub cfl: f64,
    pub dt_max: f64,
    /// Floor on `min H`.
    pub eps_h: f64,
    /// Threshold on `sup(u − 1)`.
    pub eps_flat: f64,
    pub t_max: f64,
    pub record_every: usize,
}

impl Default for TimeStepPolicy {
    fn default() -> Self {
        Self { cfl: 0.4, dt_max: 1e-3, eps_h: 0.05, eps_flat: 1e-3, t_max: 10.0, record_every: 500 }
    }
}

impl TimeStepPolicy {
    pub fn validate(&self) -> Result<(), FlowError> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(FlowError::InvalidPolicy("cfl must lie in (0, 1]"));
        }
        if !(self.dt_max > 0.0) {
            return Err(FlowError::InvalidPolicy("dt_max must be positive"));
        }
        if !(self.eps_h > 0.0) || !(self.eps_flat > 0.0) {
            return Err(FlowError::InvalidPolicy("eps_h and eps_flat must be positive"));
        }
        if !(self.t_max >= 0.0) {
            return Err(FlowError::InvalidPolicy("t_max must be non-negative"));
        }
        if self.record_every == 0 {
            return Err(FlowError::InvalidPolicy("record_every must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum StopReason {
    FlatnessReached,
    HFloorReached,
    ConvexityLost,
    ChartBreakdown,
    StepUnderflow,
    MaxTimeReached,
    NonFiniteGeometry,
}

impl StopReason {
    /// Stops that signal a discretization failure rather than a planned end.
    pub fn is_numerical_failure(&self) -> bool {
        matches!(self, StopReason::ConvexityLost | StopReason::NonFiniteGeometry | StopReason::StepUnderflow)
    }
}

/// Geometry extrema of the latest evaluated state.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepDiagnostics {
    pub min_h: f64,
    pub max_h: f64,
    pub min_kappa: f64,
    pub max_kappa: f64,
    pub rim_height: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub t: f64,
    pub u: GraphFunction,
    pub dt_last: f64,
    pub steps: u64,
    pub diagnostics: StepDiagnostics,
}

impl FlowState {
    pub fn new(u: GraphFunction) -> Self {
        Self { t: 0.0, u, dt_last: 0.0, steps: 0, diagnostics: StepDiagnostics::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Snapshot {
    pub step: u64,
    pub t: f64,
    pub dt: f64,
    pub values: Vec<f64>,
    pub scalars: SnapshotScalars,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub mode: Mode,
    pub m: usize,
    pub snapshots: Vec<Snapshot>,
}

impl Trajectory {
    pub fn graph(&self, index: usize) -> Result<GraphFunction, GeometryError> {
        GraphFunction::new(self.mode, self.m, self.snapshots[index].values.clone())
    }

    pub fn area_series(&self) -> Vec<(f64, f64)> {
        self.snapshots.iter().map(|s| (s.t, s.scalars.area)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SingularTimeEstimate {
    pub t_star: f64,
    pub initial_area: f64,
    pub limit_area: f64,
    /// Least-squares fit `ln A ≈ slope·t + intercept`.
    pub slope: f64,
    pub intercept: f64,
    pub area_law_residual: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub trajectory: Trajectory,
    pub stop: StopReason,
    pub state: FlowState,
    pub checks: Vec<CheckResult>,
    pub singular_time: Option<SingularTimeEstimate>,
}

/// Everything one right-hand-side evaluation yields.
struct Evaluation {
    speeds: Vec<f64>,
    diagnostics: StepDiagnostics,
    /// `min H²/λ_max(g^{ij})` over the nodes.
    stiffness_bound: f64,
}

fn evaluate(u: &GraphFunction) -> Result<Evaluation, GeometryError> {
    crate::geometry::check_chart_domain(u)?;
    let jets = differentiate_with(u, RimStencil::Mirrored)?;
    let n = u.dim();
    let mut speeds = Vec::with_capacity(u.len());
    let mut d = StepDiagnostics {
        min_h: f64::INFINITY,
        max_h: f64::NEG_INFINITY,
        min_kappa: f64::INFINITY,
        max_kappa: f64::NEG_INFINITY,
        rim_height: f64::INFINITY,
    };
    let mut stiffness_bound = f64::INFINITY;
    for (node, (jet, &value)) in jets.iter().zip(u.values()).enumerate() {
        let s = sample(n, jet.x, value, jet.du, jet.d2u).ok_or(GeometryError::NonFiniteGeometry { node })?;
        let h = s.mean_curvature;
        d.min_h = d.min_h.min(h);
        d.max_h = d.max_h.max(h);
        d.min_kappa = d.min_kappa.min(s.kappa_min());
        d.max_kappa = d.max_kappa.max(s.kappa_max());
        stiffness_bound = stiffness_bound.min(h * h / s.g_inv_max_eigenvalue());
        speeds.push(s.speed());
    }
    for i in u.boundary_nodes() {
        d.rim_height = d.rim_height.min(rim_height(u.values()[i]));
    }
    Ok(Evaluation { speeds, diagnostics: d, stiffness_bound })
}

/// Nodal graph speed `−v/(e^ψ H)`.
pub fn rhs(u: &GraphFunction, eps_h: f64) -> Result<Vec<f64>, FlowError> {
    let eval = evaluate(u)?;
    if !(eval.diagnostics.min_h > eps_h) {
        return Err(FlowError::SpeedBlowup { min_h: eval.diagnostics.min_h });
    }
    Ok(eval.speeds)
}

/// Stable step bound `cfl·h²·min H²/λ_max(g^{ij})`, capped by `dt_max`.
pub fn stable_dt(u: &GraphFunction, policy: &TimeStepPolicy) -> Result<f64, FlowError> {
    let eval = evaluate(u)?;
    Ok(dt_from(u, &eval, policy))
}

fn dt_from(u: &GraphFunction, eval: &Evaluation, policy: &TimeStepPolicy) -> f64 {
    let h = u.min_spacing();
    (policy.cfl * h * h * eval.stiffness_bound).min(policy.dt_max)
}

enum StageFailure {
    Geometry(GeometryError),
    LostMeanConvexity,
}

/// Heun step from `u` with the already evaluated first-stage speeds.
fn heun(u: &GraphFunction, first: &Evaluation, dt: f64) -> Result<(GraphFunction, Evaluation), StageFailure> {
    let stage: Vec<f64> = u.values().iter().zip(&first.speeds).map(|(v, s)| v + dt * s).collect();
    let stage = u.with_values(stage).map_err(StageFailure::Geometry)?;
    let second = evaluate(&stage).map_err(StageFailure::Geometry)?;
    if !(second.diagnostics.min_h > 0.0) {
        return Err(StageFailure::LostMeanConvexity);
    }
    let next: Vec<f64> = u
        .values()
        .iter()
        .zip(stage.values())
        .zip(&second.speeds)
        .map(|((v0, v1), s1)| 0.5 * (v0 + v1 + dt * s1))
        .collect();
    Ok((u.with_values(next).map_err(StageFailure::Geometry)?, second))
}

/// One time step.
pub fn step(state: &FlowState, policy: &TimeStepPolicy) -> Result<FlowState, FlowError> {
    let eval = evaluate(&state.u)?;
    if !(eval.diagnostics.min_h > policy.eps_h) {
        return Err(FlowError::SpeedBlowup { min_h: eval.diagnostics.min_h });
    }
    let dt = dt_from(&state.u, &eval, policy);
    if dt < DT_MIN {
        return Err(FlowError::StepUnderflow { dt });
    }
    match heun(&state.u, &eval, dt) {
        Ok((u, _)) => Ok(FlowState {
            t: state.t + dt,
            u,
            dt_last: dt,
            steps: state.steps + 1,
            diagnostics: eval.diagnostics,
        }),
        Err(StageFailure::Geometry(e)) => Err(e.into()),
        Err(StageFailure::LostMeanConvexity) => Err(FlowError::SpeedBlowup { min_h: 0.0 }),
    }
}

fn record(state: &FlowState, snapshots: &mut Vec<Snapshot>, thresholds: &Thresholds) -> Result<(), FlowError> {
    let scalars = snapshot_scalars(&state.u)?;
    if state.u.mode() == Mode::Axisymmetric {
        let deviation = diagnostics::dual_path_deviation(&state.u)?;
        if !(deviation <= thresholds.dual_path) {
            return Err(FlowError::CurvaturePathMismatch { t: state.t, deviation });
        }
    }
    snapshots.push(Snapshot {
        step: state.steps,
        t: state.t,
        dt: state.dt_last,
        values: state.u.values().to_vec(),
        scalars,
    });
    Ok(())
}

/// Integrates from `u0` until a [`StopReason`] fires, recording a snapshot
/// every `record_every` steps and at the end, then evaluates all monitors.
pub fn run(u0: GraphFunction, policy: &TimeStepPolicy, thresholds: &Thresholds) -> Result<RunOutput, FlowError> {
    policy.validate()?;
    let report = validate(&u0);
    if !report.pass {
        return Err(FlowError::Inadmissible(Box::new(report)));
    }
    let mode = u0.mode();
    let m = u0.m();
    let mut state = FlowState::new(u0);
    let mut snapshots = Vec::new();

    let stop = loop {
        let eval = match evaluate(&state.u) {
            Ok(e) => e,
            Err(GeometryError::OutsideChart { .. }) => break StopReason::ChartBreakdown,
            Err(GeometryError::NonFiniteGeometry { .. }) => break StopReason::NonFiniteGeometry,
            Err(e) => return Err(e.into()),
        };
        state.diagnostics = eval.diagnostics;

        let sup_above_one = state.u.values().iter().fold(f64::NEG_INFINITY, |a, &v| a.max(v - 1.0));
        let reason = if !(eval.diagnostics.min_kappa > 0.0) {
            Some(StopReason::ConvexityLost)
        } else if !(eval.diagnostics.min_h > policy.eps_h) {
            Some(StopReason::HFloorReached)
        } else if sup_above_one <= policy.eps_flat {
            Some(StopReason::FlatnessReached)
        } else if state.t >= policy.t_max {
            Some(StopReason::MaxTimeReached)
        } else {
            None
        };
        if let Some(reason) = reason {
            break reason;
        }

        if state.steps.is_multiple_of(policy.record_every as u64) {
            record(&state, &mut snapshots, thresholds)?;
        }

        let mut dt = dt_from(&state.u, &eval, policy);
        if dt < DT_MIN {
            break StopReason::StepUnderflow;
        }
        let remaining = policy.t_max - state.t;
        let lands_on_end = dt >= remaining;
        if lands_on_end {
            dt = remaining;
        }
        match heun(&state.u, &eval, dt) {
            Ok((u, _)) => {
                state.u = u;
                state.t = if lands_on_end { policy.t_max } else { state.t + dt };
                state.dt_last = dt;
                state.steps += 1;
            }
            Err(StageFailure::Geometry(GeometryError::OutsideChart { .. })) => break StopReason::ChartBreakdown,
            Err(StageFailure::Geometry(GeometryError::NonFiniteGeometry { .. })) => {
                break StopReason::NonFiniteGeometry
            }
            Err(StageFailure::Geometry(e)) => return Err(e.into()),
            Err(StageFailure::LostMeanConvexity) => break StopReason::HFloorReached,
        }
    };

    if snapshots.last().map(|s| s.step) != Some(state.steps) {
        record(&state, &mut snapshots, thresholds)?;
    }

    let trajectory = Trajectory { mode, m, snapshots };
    let checks = diagnostics::evaluate_trajectory(&trajectory, thresholds)?;
    let singular_time = extrapolate_singular_time(&trajectory.area_series(), mode.flat_disk_measure()).ok();
    Ok(RunOutput { trajectory, stop, state, checks, singular_time })
}

/// Singular time from the exponential area law `A(t) = A(0)eᵗ` and the
/// limit area of the flat unit disk: `T* = ln(A_limit/A(0))`.
pub fn extrapolate_singular_time(series: &[(f64, f64)], limit_area: f64) -> Result<SingularTimeEstimate, FlowError> {
    if series.len() < MIN_AREA_SAMPLES {
        return Err(FlowError::TooFewSamples { got: series.len(), need: MIN_AREA_SAMPLES });
    }
    let (t0, a0) = series[0];
    let residual = series.iter().map(|&(t, a)| abs(a * exp(-(t - t0)) / a0 - 1.0)).fold(0.0, f64::max);

    let count = series.len() as f64;
    let mean_t = series.iter().map(|p| p.0).sum::<f64>() / count;
    let mean_l = series.iter().map(|p| ln(p.1)).sum::<f64>() / count;
    let (mut stt, mut stl) = (0.0, 0.0);
    for &(t, a) in series {
        stt += (t - mean_t) * (t - mean_t);
        stl += (t - mean_t) * (ln(a) - mean_l);
    }
    let slope = if stt > 0.0 { stl / stt } else { 0.0 };
    let intercept = mean_l - slope * mean_t;

    if !(residual <= AREA_LAW_EXTRAPOLATION_LIMIT) || stt == 0.0 {
        return Err(FlowError::AreaLawViolated { residual, slope });
    }
    Ok(SingularTimeEstimate {
        t_star: t0 + ln(limit_area / a0),
        initial_area: a0,
        limit_area,
        slope,
        intercept,
        area_law_residual: residual,
    })
}

#[cfg(test)]
mod tests;
