//! Inverse mean curvature flow of strictly convex hypersurfaces that meet the
//! unit sphere perpendicularly from the inside.
//!
//! The flow is solved in its scalar form: the surface is a graph `λ = u(x)`
//! over the unit disk in Moebius coordinates, and `u` evolves by
//! `∂u/∂t = −v/(e^ψ H)` with a homogeneous Neumann condition on the rim.
//!
//! Modules, bottom-up:
//!
//! - [`chart`]: the closed-form Moebius chart with analytic derivatives.
//! - [`geometry`]: discrete graph functions and the extrinsic geometry kernel.
//! - [`initial_data`]: admissible initial surfaces and their validator.
//! - [`flow`]: explicit time integration and singular-time extrapolation.
//! - [`diagnostics`]: residual and sign monitors for the flow's estimates.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
// Negated comparisons reject NaN; indexed loops mirror tensor notation.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod chart;
pub mod diagnostics;
pub mod flow;
pub mod geometry;
pub mod initial_data;
mod math;

pub use chart::{ChartError, ChartJet, ChartPoint, SliceSphere};
pub use diagnostics::{CheckResult, CheckScope, Thresholds};
pub use flow::{FlowError, FlowState, RunOutput, Snapshot, StopReason, TimeStepPolicy, Trajectory};
pub use geometry::{GeometryError, GeometrySample, GraphFunction, Mode};
pub use initial_data::AdmissibilityReport;

/// Ambient points and vectors in ℝ^{n+1}; component 0 is the `e₀` axis.
///
/// One-dimensional data uses the first two components and leaves the last at zero.
pub type Vec3 = [f64; 3];
