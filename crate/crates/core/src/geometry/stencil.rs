//! Second-order finite differences of nodal graph values.
//!
//! Derivatives are returned in Cartesian disk coordinates. Axisymmetric and
//! polar nodes convert their radial/angular differences through the polar
//! chain rule; the pole of an axisymmetric grid uses an even ghost, and the
//! pole of a polar grid reads the first ring's Fourier modes.

use alloc::vec::Vec;
use core::f64::consts::PI;

use super::{GeometryError, GraphFunction, Mode, MIN_NODES};
use crate::math::{abs, cos, sin};

/// How the rim `|x| = 1` is differentiated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RimStencil {
    /// Second-order one-sided stencils on the data as given.
    #[default]
    OneSided,
    /// Even ghost reflection across the rim: the Neumann condition is imposed,
    /// the normal derivative is zero and the second derivative reads the mirror.
    Mirrored,
}

/// First and second derivatives of `u` at one node, in Cartesian disk coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeJet {
    pub x: [f64; 2],
    pub du: [f64; 2],
    pub d2u: [[f64; 2]; 2],
}

pub fn differentiate(u: &GraphFunction) -> Result<Vec<NodeJet>, GeometryError> {
    differentiate_with(u, RimStencil::OneSided)
}

pub fn differentiate_with(u: &GraphFunction, rim: RimStencil) -> Result<Vec<NodeJet>, GeometryError> {
    let m = u.m();
    if m < MIN_NODES {
        return Err(GeometryError::GridTooCoarse { m, min: MIN_NODES });
    }
    Ok(match u.mode() {
        Mode::Interval => interval(u, rim),
        Mode::Axisymmetric => axisymmetric(u, rim),
        Mode::Polar2d { n_theta } => polar(u, n_theta, rim),
    })
}

/// Largest one-sided outward derivative magnitude on the rim.
pub fn neumann_residual(u: &GraphFunction) -> f64 {
    let v = u.values();
    let h = u.spacing();
    let m = u.m();
    match u.mode() {
        Mode::Interval => {
            let left = -(-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
            let right = rim_first(v[m - 1], v[m - 2], v[m - 3], h);
            abs(left).max(abs(right))
        }
        Mode::Axisymmetric => abs(rim_first(v[m - 1], v[m - 2], v[m - 3], h)),
        Mode::Polar2d { n_theta } => (0..n_theta)
            .map(|k| {
                let at = |ring: usize| v[1 + (ring - 1) * n_theta + k];
                abs(rim_first(at(m - 1), at(m - 2), at(m - 3), h))
            })
            .fold(0.0, f64::max),
    }
}

#[inline]
fn rim_first(u0: f64, u1: f64, u2: f64, h: f64) -> f64 {
    (3.0 * u0 - 4.0 * u1 + u2) / (2.0 * h)
}

#[inline]
fn rim_second(u0: f64, u1: f64, u2: f64, u3: f64, h: f64) -> f64 {
    (2.0 * u0 - 5.0 * u1 + 4.0 * u2 - u3) / (h * h)
}

/// `(u_r, u_rr)` at the last radial node, measured outward.
#[inline]
fn rim_radial(u0: f64, u1: f64, u2: f64, u3: f64, h: f64, rim: RimStencil) -> (f64, f64) {
    match rim {
        RimStencil::OneSided => (rim_first(u0, u1, u2, h), rim_second(u0, u1, u2, u3, h)),
        RimStencil::Mirrored => (0.0, 2.0 * (u1 - u0) / (h * h)),
    }
}

fn interval(u: &GraphFunction, rim: RimStencil) -> Vec<NodeJet> {
    let v = u.values();
    let h = u.spacing();
    let m = u.m();
    (0..m)
        .map(|i| {
            let (d1, d2) = if i == 0 {
                let (out, second) = rim_radial(v[0], v[1], v[2], v[3], h, rim);
                (-out, second)
            } else if i == m - 1 {
                rim_radial(v[m - 1], v[m - 2], v[m - 3], v[m - 4], h, rim)
            } else {
                ((v[i + 1] - v[i - 1]) / (2.0 * h), (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (h * h))
            };
            NodeJet { x: u.position(i), du: [d1, 0.0], d2u: [[d2, 0.0], [0.0, 0.0]] }
        })
        .collect()
}

fn axisymmetric(u: &GraphFunction, rim: RimStencil) -> Vec<NodeJet> {
    let v = u.values();
    let h = u.spacing();
    let m = u.m();
    (0..m)
        .map(|j| {
            let r = u.radius(j);
            if j == 0 {
                let urr = 2.0 * (v[1] - v[0]) / (h * h);
                return NodeJet { x: [0.0, 0.0], du: [0.0, 0.0], d2u: [[urr, 0.0], [0.0, urr]] };
            }
            let (ur, urr) = if j == m - 1 {
                rim_radial(v[m - 1], v[m - 2], v[m - 3], v[m - 4], h, rim)
            } else {
                ((v[j + 1] - v[j - 1]) / (2.0 * h), (v[j + 1] - 2.0 * v[j] + v[j - 1]) / (h * h))
            };
            NodeJet { x: [r, 0.0], du: [ur, 0.0], d2u: [[urr, 0.0], [0.0, ur / r]] }
        })
        .collect()
}

fn polar(u: &GraphFunction, n_theta: usize, rim: RimStencil) -> Vec<NodeJet> {
    let v = u.values();
    let h = u.spacing();
    let m = u.m();
    let dth = 2.0 * PI / n_theta as f64;
    let at = |ring: usize, k: usize| -> f64 {
        if ring == 0 {
            v[0]
        } else {
            v[1 + (ring - 1) * n_theta + (k % n_theta)]
        }
    };
    let mut out = Vec::with_capacity(u.len());
    out.push(pole_from_first_ring(v[0], &v[1..1 + n_theta], h));

    for ring in 1..m {
        let r = u.radius(1 + (ring - 1) * n_theta);
        for k in 0..n_theta {
            let prev = (k + n_theta - 1) % n_theta;
            let next = (k + 1) % n_theta;
            let theta_diff = |ring: usize| (at(ring, next) - at(ring, prev)) / (2.0 * dth);
            let ut = theta_diff(ring);
            let utt = (at(ring, next) - 2.0 * at(ring, k) + at(ring, prev)) / (dth * dth);
            let (ur, urr, urt) = if ring == m - 1 {
                let (ur, urr) = rim_radial(at(m - 1, k), at(m - 2, k), at(m - 3, k), at(m - 4, k), h, rim);
                let urt = match rim {
                    RimStencil::OneSided => rim_first(theta_diff(m - 1), theta_diff(m - 2), theta_diff(m - 3), h),
                    RimStencil::Mirrored => 0.0,
                };
                (ur, urr, urt)
            } else {
                // Ring 1 has the pole as its inner radial neighbour, where ∂_θ vanishes.
                let (inner_value, inner_theta) =
                    if ring == 1 { (v[0], 0.0) } else { (at(ring - 1, k), theta_diff(ring - 1)) };
                let ur = (at(ring + 1, k) - inner_value) / (2.0 * h);
                let urr = (at(ring + 1, k) - 2.0 * at(ring, k) + inner_value) / (h * h);
                let urt = (theta_diff(ring + 1) - inner_theta) / (2.0 * h);
                (ur, urr, urt)
            };
            let th = dth * k as f64;
            out.push(polar_to_cartesian(r, th, ur, ut, urr, urt, utt));
        }
    }
    out
}

/// Cartesian derivatives from polar ones at `(r cos θ, r sin θ)`, `r > 0`.
fn polar_to_cartesian(r: f64, th: f64, ur: f64, ut: f64, urr: f64, urt: f64, utt: f64) -> NodeJet {
    let (c, s) = (cos(th), sin(th));
    let ir = 1.0 / r;
    let ir2 = ir * ir;
    let ux = c * ur - s * ir * ut;
    let uy = s * ur + c * ir * ut;
    let uxx = c * c * urr - 2.0 * c * s * ir * urt + s * s * ir2 * utt + s * s * ir * ur + 2.0 * c * s * ir2 * ut;
    let uyy = s * s * urr + 2.0 * c * s * ir * urt + c * c * ir2 * utt + c * c * ir * ur - 2.0 * c * s * ir2 * ut;
    let uxy = c * s * urr + (c * c - s * s) * ir * urt - c * s * ir2 * utt - c * s * ir * ur
        - (c * c - s * s) * ir2 * ut;
    NodeJet { x: [r * c, r * s], du: [ux, uy], d2u: [[uxx, uxy], [uxy, uyy]] }
}

/// Pole derivatives from the Fourier modes 0, 1, 2 of the first ring.
fn pole_from_first_ring(u0: f64, ring: &[f64], h: f64) -> NodeJet {
    let n = ring.len() as f64;
    let dth = 2.0 * PI / n;
    let (mut mean, mut a1, mut b1, mut a2, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (k, &val) in ring.iter().enumerate() {
        let th = dth * k as f64;
        mean += val;
        a1 += val * cos(th);
        b1 += val * sin(th);
        a2 += val * cos(2.0 * th);
        b2 += val * sin(2.0 * th);
    }
    mean /= n;
    let (a1, b1, a2, b2) = (2.0 * a1 / n, 2.0 * b1 / n, 2.0 * a2 / n, 2.0 * b2 / n);
    let h2 = h * h;
    let uxx = 2.0 * (mean - u0 + a2) / h2;
    let uyy = 2.0 * (mean - u0 - a2) / h2;
    let uxy = 2.0 * b2 / h2;
    NodeJet { x: [0.0, 0.0], du: [a1 / h, b1 / h], d2u: [[uxx, uxy], [uxy, uyy]] }
}
