//! Discrete graph functions over the unit disk and their extrinsic geometry.
//!
//! A surface is stored as nodal values of `u ≥ 1` on a uniform grid; the
//! embedding is `X(x) = f(x, u(x))` with `f` the Moebius chart. Geometry is
//! evaluated pointwise from the chart jet and finite-difference derivatives
//! of `u`, all expressed in Cartesian disk coordinates.

mod boundary;
mod kernel;
mod revolution;
mod stencil;

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::math::{cos, integrate_uniform, sin, sqrt};

pub use boundary::{boundary_frame, boundary_frames_from, directional_boundary_derivative, BoundaryFrame};
pub use kernel::{sample, GeometrySample};
pub use revolution::{axisym_curvatures, meridian_profile, MeridianSample, RevolutionCurvatures};
pub use stencil::{differentiate, differentiate_with, neumann_residual, NodeJet, RimStencil};

/// Smallest admissible number of radial (or interval) nodes.
pub const MIN_NODES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("grid too coarse: {m} nodes, need at least {min}")]
    GridTooCoarse { m: usize, min: usize },
    #[error("angular resolution {n_theta} too low, need at least 8")]
    AngularTooCoarse { n_theta: usize },
    #[error("expected {expected} nodal values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite geometry at node {node}")]
    NonFiniteGeometry { node: usize },
    #[error("graph value {value} below the chart domain λ ≥ 1 at node {node}")]
    OutsideChart { node: usize, value: f64 },
    #[error("meridian profile degenerates at node {node}")]
    AxisDegeneracy { node: usize },
    #[error("operation needs an axisymmetric graph")]
    NotAxisymmetric,
}

/// Grid layout of a graph function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum Mode {
    /// `n = 1`, nodes on `x ∈ [−1, 1]`.
    Interval,
    /// `n = 2`, `u = u(r)` on `r ∈ [0, 1]`.
    Axisymmetric,
    /// `n = 2`, `u = u(r, θ)`: a pole node followed by `m − 1` rings of `n_theta` nodes.
    Polar2d { n_theta: usize },
}

impl Mode {
    /// Dimension `n` of the flowing hypersurface.
    pub fn dim(&self) -> usize {
        match self {
            Mode::Interval => 1,
            Mode::Axisymmetric | Mode::Polar2d { .. } => 2,
        }
    }

    pub fn node_count(&self, m: usize) -> usize {
        match self {
            Mode::Interval | Mode::Axisymmetric => m,
            Mode::Polar2d { n_theta } => 1 + (m.saturating_sub(1)) * n_theta,
        }
    }

    /// Grid spacing in the radial (or interval) direction.
    pub fn spacing(&self, m: usize) -> f64 {
        match self {
            Mode::Interval => 2.0 / (m as f64 - 1.0),
            _ => 1.0 / (m as f64 - 1.0),
        }
    }

    /// Measure of the flat unit disk `D ⊂ ℝⁿ`: the area the flow approaches.
    pub fn flat_disk_measure(&self) -> f64 {
        match self {
            Mode::Interval => 2.0,
            _ => PI,
        }
    }
}

/// Nodal values of the graph height `u` over the unit disk.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphFunction {
    mode: Mode,
    m: usize,
    values: Vec<f64>,
}

impl GraphFunction {
    pub fn new(mode: Mode, m: usize, values: Vec<f64>) -> Result<Self, GeometryError> {
        if m < MIN_NODES {
            return Err(GeometryError::GridTooCoarse { m, min: MIN_NODES });
        }
        if let Mode::Polar2d { n_theta } = mode {
            if n_theta < 8 {
                return Err(GeometryError::AngularTooCoarse { n_theta });
            }
        }
        let expected = mode.node_count(m);
        if values.len() != expected {
            return Err(GeometryError::LengthMismatch { expected, got: values.len() });
        }
        Ok(Self { mode, m, values })
    }

    /// Samples `profile` at every node's Cartesian disk position.
    pub fn from_fn(mode: Mode, m: usize, profile: impl Fn([f64; 2]) -> f64) -> Result<Self, GeometryError> {
        if m < MIN_NODES {
            return Err(GeometryError::GridTooCoarse { m, min: MIN_NODES });
        }
        let count = mode.node_count(m);
        let values = (0..count).map(|i| profile(node_position(mode, m, i))).collect();
        Self::new(mode, m, values)
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Number of radial (or interval) nodes.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.mode.dim()
    }

    pub fn spacing(&self) -> f64 {
        self.mode.spacing(self.m)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Cartesian disk coordinates of node `i`.
    pub fn position(&self, i: usize) -> [f64; 2] {
        node_position(self.mode, self.m, i)
    }

    /// Distance of node `i` from the disk center.
    pub fn radius(&self, i: usize) -> f64 {
        let p = self.position(i);
        sqrt(p[0] * p[0] + p[1] * p[1])
    }

    /// Indices of nodes on `∂D`.
    pub fn boundary_nodes(&self) -> Vec<usize> {
        match self.mode {
            Mode::Interval => alloc::vec![0, self.m - 1],
            Mode::Axisymmetric => alloc::vec![self.m - 1],
            Mode::Polar2d { n_theta } => {
                let start = 1 + (self.m - 2) * n_theta;
                (start..start + n_theta).collect()
            }
        }
    }

    pub fn is_boundary(&self, i: usize) -> bool {
        match self.mode {
            Mode::Interval => i == 0 || i == self.m - 1,
            Mode::Axisymmetric => i == self.m - 1,
            Mode::Polar2d { n_theta } => i > (self.m - 2) * n_theta,
        }
    }

    /// Effective smallest node spacing, used by the time-step bound.
    pub fn min_spacing(&self) -> f64 {
        let h = self.spacing();
        match self.mode {
            Mode::Polar2d { n_theta } => h * (2.0 * PI / n_theta as f64).min(1.0),
            _ => h,
        }
    }

    /// Replaces the values, keeping the grid.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self, GeometryError> {
        Self::new(self.mode, self.m, values)
    }
}

fn node_position(mode: Mode, m: usize, i: usize) -> [f64; 2] {
    let h = mode.spacing(m);
    match mode {
        Mode::Interval => [-1.0 + i as f64 * h, 0.0],
        Mode::Axisymmetric => [radial_coordinate(i, m, h), 0.0],
        Mode::Polar2d { n_theta } => {
            if i == 0 {
                return [0.0, 0.0];
            }
            let ring = 1 + (i - 1) / n_theta;
            let k = (i - 1) % n_theta;
            let r = radial_coordinate(ring, m, h);
            let th = 2.0 * PI * k as f64 / n_theta as f64;
            [r * cos(th), r * sin(th)]
        }
    }
}

#[inline]
fn radial_coordinate(j: usize, m: usize, h: f64) -> f64 {
    if j + 1 == m {
        1.0
    } else {
        j as f64 * h
    }
}

/// Geometry at every node, with the rim differentiated by one-sided stencils.
pub fn geometry_field(u: &GraphFunction) -> Result<Vec<GeometrySample>, GeometryError> {
    geometry_field_with(u, RimStencil::OneSided)
}

pub fn geometry_field_with(u: &GraphFunction, rim: RimStencil) -> Result<Vec<GeometrySample>, GeometryError> {
    check_chart_domain(u)?;
    let jets = differentiate_with(u, rim)?;
    let n = u.dim();
    jets.iter()
        .zip(u.values())
        .enumerate()
        .map(|(node, (jet, &value))| {
            sample(n, jet.x, value, jet.du, jet.d2u).ok_or(GeometryError::NonFiniteGeometry { node })
        })
        .collect()
}

pub(crate) fn check_chart_domain(u: &GraphFunction) -> Result<(), GeometryError> {
    for (node, &value) in u.values().iter().enumerate() {
        if !value.is_finite() {
            return Err(GeometryError::NonFiniteGeometry { node });
        }
        if value < 1.0 {
            return Err(GeometryError::OutsideChart { node, value });
        }
    }
    Ok(())
}

/// Total area (length for `n = 1`) from the induced area element `√det g`.
pub fn area(u: &GraphFunction, samples: &[GeometrySample]) -> f64 {
    let h = u.spacing();
    let m = u.m();
    match u.mode() {
        Mode::Interval => {
            let density: Vec<f64> = samples.iter().map(|s| s.area_element()).collect();
            integrate_uniform(&density, h)
        }
        Mode::Axisymmetric => {
            let density: Vec<f64> = samples
                .iter()
                .enumerate()
                .map(|(i, s)| s.area_element() * u.radius(i))
                .collect();
            2.0 * PI * integrate_uniform(&density, h)
        }
        Mode::Polar2d { n_theta } => {
            let mut density = Vec::with_capacity(m);
            density.push(0.0);
            let d_theta = 2.0 * PI / n_theta as f64;
            for ring in 1..m {
                let start = 1 + (ring - 1) * n_theta;
                let ring_sum: f64 = samples[start..start + n_theta].iter().map(|s| s.area_element()).sum();
                density.push(ring_sum * d_theta * radial_coordinate(ring, m, h));
            }
            integrate_uniform(&density, h)
        }
    }
}
