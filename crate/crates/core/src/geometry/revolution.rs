//! Principal curvatures of an axisymmetric graph from its meridian curve.
//!
//! A second route to `κ` that bypasses the normal, the metric inverse and
//! the eigenproblem: the surface is treated as a surface of revolution with
//! profile `(s(r), z(r))`, `s` the distance from the `e₀`-axis and `z` the
//! height.

use alloc::vec::Vec;

use super::{differentiate, GeometryError, GraphFunction, Mode};
use crate::chart::{jet, ChartPoint};
use crate::math::{axpy, sqrt};

/// One meridian sample with its first and second `r`-derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeridianSample {
    pub s: f64,
    pub z: f64,
    pub ds: f64,
    pub dz: f64,
    pub d2s: f64,
    pub d2z: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RevolutionCurvatures {
    pub kappa_meridian: f64,
    pub kappa_parallel: f64,
}

impl RevolutionCurvatures {
    pub fn mean_curvature(&self) -> f64 {
        self.kappa_meridian + self.kappa_parallel
    }

    /// Both curvatures sorted ascending.
    pub fn sorted(&self) -> [f64; 2] {
        if self.kappa_meridian <= self.kappa_parallel {
            [self.kappa_meridian, self.kappa_parallel]
        } else {
            [self.kappa_parallel, self.kappa_meridian]
        }
    }
}

/// Meridian curve of an axisymmetric graph along the ray `x = (r, 0)`.
pub fn meridian_profile(u: &GraphFunction) -> Result<Vec<MeridianSample>, GeometryError> {
    if u.mode() != Mode::Axisymmetric {
        return Err(GeometryError::NotAxisymmetric);
    }
    super::check_chart_domain(u)?;
    let jets = differentiate(u)?;
    Ok(jets
        .iter()
        .zip(u.values())
        .map(|(nj, &value)| {
            let (ur, urr) = (nj.du[0], nj.d2u[0][0]);
            let cj = jet(&ChartPoint { x: nj.x, lambda: value }, 2);
            let sec = cj.second.expect("order-2 jet");
            let d1 = axpy(ur, &cj.d_lambda, &cj.d_x[0]);
            let mut d2 = sec.d_xx[0][0];
            d2 = axpy(2.0 * ur, &sec.d_lx[0], &d2);
            d2 = axpy(ur * ur, &sec.d_ll, &d2);
            d2 = axpy(urr, &cj.d_lambda, &d2);
            MeridianSample { s: cj.f[1], z: cj.f[0], ds: d1[1], dz: d1[0], d2s: d2[1], d2z: d2[0] }
        })
        .collect())
}

/// Meridian and parallel curvatures, oriented like the geometry kernel
/// (positive on caps). On the axis `s = 0` the parallel curvature takes its
/// limit, the meridian curvature.
pub fn axisym_curvatures(profile: &[MeridianSample]) -> Result<Vec<RevolutionCurvatures>, GeometryError> {
    profile
        .iter()
        .enumerate()
        .map(|(node, p)| {
            let speed2 = p.ds * p.ds + p.dz * p.dz;
            if !(speed2 > 0.0) || p.s < 0.0 {
                return Err(GeometryError::AxisDegeneracy { node });
            }
            let speed = sqrt(speed2);
            let kappa_meridian = (p.ds * p.d2z - p.dz * p.d2s) / (speed2 * speed);
            let kappa_parallel = if p.s == 0.0 { kappa_meridian } else { p.dz / (p.s * speed) };
            Ok(RevolutionCurvatures { kappa_meridian, kappa_parallel })
        })
        .collect()
}
