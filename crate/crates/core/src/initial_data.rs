//! Admissible initial surfaces: strictly convex graphs that meet the unit
//! sphere perpendicularly and stay inside the open hemisphere around `e₀`.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::geometry::{geometry_field, neumann_residual, GeometryError, GraphFunction, Mode};
use crate::math::{cos, sqrt};

/// Largest accepted one-sided normal derivative of `u` on the rim.
pub const NEUMANN_TOL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InitialDataError {
    #[error("invalid generator parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("initial data is not admissible: {}", .0.reasons.join("; "))]
    Inadmissible(Box<AdmissibilityReport>),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AdmissibilityReport {
    pub neumann_residual: f64,
    pub min_kappa: f64,
    pub min_u_minus_1: f64,
    /// Smallest rim height `⟨X, e₀⟩`.
    pub rim_height: f64,
    /// `min −⟨∂f/∂λ, N⟩`.
    pub graph_condition_min: f64,
    /// `max ⟨N, e₀⟩`, recorded without a bound.
    pub normal_height_max: f64,
    pub pass: bool,
    pub reasons: Vec<String>,
}

/// The umbilic cap `u ≡ λ₀`.
pub fn cap(lambda0: f64, mode: Mode, m: usize) -> Result<GraphFunction, InitialDataError> {
    if !(lambda0 > 1.0) || !lambda0.is_finite() {
        return Err(InitialDataError::InvalidParameter("cap needs λ₀ > 1"));
    }
    Ok(GraphFunction::from_fn(mode, m, |_| lambda0)?)
}

/// `u₀ = λ₀ + a·cos(π|x|)`, which has zero slope at the pole and on the rim.
pub fn perturbed_cap(lambda0: f64, amplitude: f64, mode: Mode, m: usize) -> Result<GraphFunction, InitialDataError> {
    if !lambda0.is_finite() || !amplitude.is_finite() {
        return Err(InitialDataError::InvalidParameter("non-finite generator parameter"));
    }
    let u = GraphFunction::from_fn(mode, m, |x| lambda0 + amplitude * cos(PI * sqrt(x[0] * x[0] + x[1] * x[1])))?;
    let report = validate(&u);
    if !report.pass {
        return Err(InitialDataError::Inadmissible(Box::new(report)));
    }
    Ok(u)
}

/// Rim height of the slice `λ`: `(λ² − 1)/(1 + λ²)`.
pub fn rim_height(lambda: f64) -> f64 {
    (lambda * lambda - 1.0) / (1.0 + lambda * lambda)
}

pub fn validate(u0: &GraphFunction) -> AdmissibilityReport {
    let mut reasons = Vec::new();
    let neumann = neumann_residual(u0);
    let min_u_minus_1 = u0.values().iter().fold(f64::INFINITY, |a, &v| a.min(v - 1.0));
    let rim = u0.boundary_nodes().iter().map(|&i| rim_height(u0.values()[i])).fold(f64::INFINITY, f64::min);

    if !(neumann <= NEUMANN_TOL) {
        reasons.push(alloc::format!("Neumann residual {neumann:.3e} exceeds {NEUMANN_TOL:e}"));
    }
    if !(min_u_minus_1 > 0.0) {
        reasons.push(alloc::format!("min(u − 1) = {min_u_minus_1:.3e} is not positive"));
    }
    if !(rim > 0.0) {
        reasons.push(alloc::format!("rim height {rim:.3e} is not positive"));
    }

    let (min_kappa, graph_min, normal_max) = match geometry_field(u0) {
        Ok(field) => field.iter().fold((f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY), |(k, g, nh), s| {
            (k.min(s.kappa_min()), g.min(-s.graph_condition), nh.max(s.normal[0]))
        }),
        Err(e) => {
            reasons.push(alloc::format!("geometry unavailable: {e}"));
            (f64::NAN, f64::NAN, f64::NAN)
        }
    };
    if !min_kappa.is_nan() {
        if !(min_kappa > 0.0) {
            reasons.push(alloc::format!("min κ = {min_kappa:.3e}: not strictly convex"));
        }
        if !(graph_min > 0.0) {
            reasons.push(alloc::format!("graph condition fails: min −⟨∂f/∂λ, N⟩ = {graph_min:.3e}"));
        }
    }

    AdmissibilityReport {
        neumann_residual: neumann,
        min_kappa,
        min_u_minus_1,
        rim_height: rim,
        graph_condition_min: graph_min,
        normal_height_max: normal_max,
        pass: reasons.is_empty(),
        reasons,
    }
}
