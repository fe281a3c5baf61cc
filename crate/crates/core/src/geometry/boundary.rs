use alloc::vec::Vec;
use core::f64::consts::PI;

use super::{geometry_field, GeometryError, GeometrySample, GraphFunction, Mode};
use crate::math::{axpy, cos, sin, sqrt};
use crate::Vec3;

/// Frame of the hypersurface along its boundary at one rim node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryFrame {
    pub node: usize,
    /// Outward Euclidean normal of `∂D` in chart coordinates.
    pub outward: [f64; 2],
    /// Contravariant outward unit conormal `ñ`, `g(ñ, ñ) = 1`.
    pub n_tilde: [f64; 2],
    /// Coordinate tangent of `∂D` (`n = 2` only).
    pub z: Option<[f64; 2]>,
    /// Normal of the boundary curve inside the sphere: the surface normal there.
    pub nu: Vec3,
}

impl BoundaryFrame {
    /// `dX(ñ)`: the conormal pushed into ambient space.
    pub fn ambient_conormal(&self, sample: &GeometrySample) -> Vec3 {
        let mut out = [0.0; 3];
        for i in 0..sample.n {
            out = axpy(self.n_tilde[i], &sample.tangents[i], &out);
        }
        out
    }

    /// `g(a, b)` for chart vectors at this node.
    pub fn metric(sample: &GeometrySample, a: &[f64; 2], b: &[f64; 2]) -> f64 {
        let mut acc = 0.0;
        for i in 0..sample.n {
            for j in 0..sample.n {
                acc += sample.g[i][j] * a[i] * b[j];
            }
        }
        acc
    }
}

pub fn boundary_frame(u: &GraphFunction) -> Result<Vec<BoundaryFrame>, GeometryError> {
    let samples = geometry_field(u)?;
    Ok(boundary_frames_from(u, &samples))
}

/// Frames from an already computed geometry field.
pub fn boundary_frames_from(u: &GraphFunction, samples: &[GeometrySample]) -> Vec<BoundaryFrame> {
    u.boundary_nodes()
        .into_iter()
        .map(|node| {
            let s = &samples[node];
            let (outward, z) = match u.mode() {
                Mode::Interval => (if node == 0 { [-1.0, 0.0] } else { [1.0, 0.0] }, None),
                Mode::Axisymmetric => ([1.0, 0.0], Some([0.0, 1.0])),
                Mode::Polar2d { n_theta } => {
                    let k = (node - 1) % n_theta;
                    let th = 2.0 * PI * k as f64 / n_theta as f64;
                    let (c, sn) = (cos(th), sin(th));
                    ([c, sn], Some([-sn, c]))
                }
            };
            // ñ^i = g^{ij} n̆_j / |n̆|_g
            let n = s.n;
            let mut raised = [0.0; 2];
            for i in 0..n {
                for j in 0..n {
                    raised[i] += s.g_inv[i][j] * outward[j];
                }
            }
            let len2: f64 = (0..n).map(|i| raised[i] * outward[i]).sum();
            let inv = 1.0 / sqrt(len2);
            BoundaryFrame { node, outward, n_tilde: [raised[0] * inv, raised[1] * inv], z, nu: s.normal }
        })
        .collect()
}

/// `φ_i ñ^i` at each frame's node for a nodal scalar `field`, with the
/// chart-coordinate gradient taken by second-order one-sided radial stencils
/// and periodic central angular differences.
pub fn directional_boundary_derivative(
    u: &GraphFunction,
    field: &[f64],
    frames: &[BoundaryFrame],
) -> Result<Vec<f64>, GeometryError> {
    let m = u.m();
    if m < super::MIN_NODES {
        return Err(GeometryError::GridTooCoarse { m, min: super::MIN_NODES });
    }
    if field.len() != u.len() {
        return Err(GeometryError::LengthMismatch { expected: u.len(), got: field.len() });
    }
    let h = u.spacing();
    let one_sided = |a: f64, b: f64, c: f64| (3.0 * a - 4.0 * b + c) / (2.0 * h);
    Ok(frames
        .iter()
        .map(|frame| {
            let node = frame.node;
            let grad = match u.mode() {
                Mode::Interval => {
                    if node == 0 {
                        [-one_sided(field[0], field[1], field[2]), 0.0]
                    } else {
                        [one_sided(field[m - 1], field[m - 2], field[m - 3]), 0.0]
                    }
                }
                Mode::Axisymmetric => [one_sided(field[m - 1], field[m - 2], field[m - 3]), 0.0],
                Mode::Polar2d { n_theta } => {
                    let k = (node - 1) % n_theta;
                    let at = |ring: usize, kk: usize| field[1 + (ring - 1) * n_theta + kk % n_theta];
                    let fr = one_sided(at(m - 1, k), at(m - 2, k), at(m - 3, k));
                    let dth = 2.0 * PI / n_theta as f64;
                    let ft = (at(m - 1, k + 1) - at(m - 1, k + n_theta - 1)) / (2.0 * dth);
                    let [c, s] = frame.outward;
                    [fr * c - ft * s, fr * s + ft * c]
                }
            };
            grad[0] * frame.n_tilde[0] + grad[1] * frame.n_tilde[1]
        })
        .collect())
}
