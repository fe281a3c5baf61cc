//! Moebius coordinates for the pointed half-ball `B⁺ = B₁⁺(0) \ {e₀}`.
//!
//! The chart is
//!
//! ```text
//! f(x, λ) = (4λx + (1 + |x|²)(λ² − 1) e₀) / ((1 + λ)² + (1 − λ)²|x|²)
//! ```
//!
//! on `D × [1, ∞)`. Each slice `f(D, λ)` with `λ > 1` is a spherical cap that
//! meets the unit sphere at right angles; `λ = 1` is the flat equatorial disk.
//! All derivatives are closed-form quotient-rule expressions of the rational map.
//!
//! Chart points always carry two disk coordinates. One-dimensional data lives
//! on the line `x₂ = 0`, where the chart restricts to the planar Moebius map and
//! the third ambient component vanishes identically.

use crate::math::{abs, axpy, dot, norm, scale, sqrt, sub};
use crate::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum ChartError {
    #[error("chart point out of domain: |x| = {x_norm}, λ = {lambda}")]
    InvalidPoint { x_norm: f64, lambda: f64 },
    #[error("point ({0}, {1}, {2}) is not in the pointed half-ball")]
    PointOutsideChart(f64, f64, f64),
    #[error("inverse chart Newton iteration did not converge (residual {residual:e})")]
    NoConvergence { residual: f64 },
    #[error("slice λ = {0} is the flat disk and has no finite sphere")]
    DegenerateSlice(f64),
}

/// A point `(x, λ)` of `D × [1, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChartPoint {
    pub x: [f64; 2],
    pub lambda: f64,
}

impl ChartPoint {
    /// Radius slack accepted on `|x| ≤ 1` for points produced by arithmetic on the rim.
    pub const RADIUS_SLACK: f64 = 1e-12;

    pub fn new(x: [f64; 2], lambda: f64) -> Result<Self, ChartError> {
        let x_norm = sqrt(x[0] * x[0] + x[1] * x[1]);
        if !(x_norm <= 1.0 + Self::RADIUS_SLACK) || !(lambda >= 1.0) || !lambda.is_finite() {
            return Err(ChartError::InvalidPoint { x_norm, lambda });
        }
        Ok(Self { x, lambda })
    }

    #[inline]
    pub fn radius_squared(&self) -> f64 {
        self.x[0] * self.x[0] + self.x[1] * self.x[1]
    }
}

/// Second derivatives of the chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartSecond {
    pub d_ll: Vec3,
    pub d_lx: [Vec3; 2],
    pub d_xx: [[Vec3; 2]; 2],
}

/// The chart value and its derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartJet {
    pub f: Vec3,
    pub d_lambda: Vec3,
    pub d_x: [Vec3; 2],
    pub second: Option<ChartSecond>,
}

/// The sphere carrying the slice `f(D, λ)`: center `c·e₀`, radius `r`, `c² − r² = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SliceSphere {
    pub center_height: f64,
    pub radius: f64,
}

#[inline]
fn denominator(s: f64, lambda: f64) -> f64 {
    (1.0 + lambda) * (1.0 + lambda) + (1.0 - lambda) * (1.0 - lambda) * s
}

pub fn map_point(p: &ChartPoint) -> Vec3 {
    let [x1, x2] = p.x;
    let l = p.lambda;
    let s = p.radius_squared();
    let den = denominator(s, l);
    [(1.0 + s) * (l * l - 1.0) / den, 4.0 * l * x1 / den, 4.0 * l * x2 / den]
}

/// Chart jet of order 1 or 2. Orders above 2 are treated as 2.
pub fn jet(p: &ChartPoint, order: u8) -> ChartJet {
    let [x1, x2] = p.x;
    let x = [x1, x2];
    let l = p.lambda;
    let s = p.radius_squared();
    let lm1 = l * l - 1.0;
    let one_minus = 1.0 - l;

    let num: Vec3 = [(1.0 + s) * lm1, 4.0 * l * x1, 4.0 * l * x2];
    let den = denominator(s, l);
    let inv = 1.0 / den;
    let f = scale(inv, &num);

    // Variable 0 is λ, variables 1 and 2 are x₁ and x₂.
    let d_num: [Vec3; 3] = [
        [2.0 * l * (1.0 + s), 4.0 * x1, 4.0 * x2],
        [2.0 * x1 * lm1, 4.0 * l, 0.0],
        [2.0 * x2 * lm1, 0.0, 4.0 * l],
    ];
    let d_den: [f64; 3] = [
        2.0 * (1.0 + l) - 2.0 * one_minus * s,
        2.0 * one_minus * one_minus * x1,
        2.0 * one_minus * one_minus * x2,
    ];

    let mut d_f = [[0.0; 3]; 3];
    for a in 0..3 {
        d_f[a] = scale(inv, &axpy(-d_den[a], &f, &d_num[a]));
    }

    let second = if order >= 2 {
        let mut d2_num = [[[0.0; 3]; 3]; 3];
        let mut d2_den = [[0.0; 3]; 3];
        d2_num[0][0] = [2.0 * (1.0 + s), 0.0, 0.0];
        d2_den[0][0] = 2.0 + 2.0 * s;
        for i in 0..2 {
            let mut e = [0.0; 3];
            e[i + 1] = 4.0;
            let v = [4.0 * l * x[i], e[1], e[2]];
            d2_num[0][i + 1] = v;
            d2_num[i + 1][0] = v;
            let dd = -4.0 * one_minus * x[i];
            d2_den[0][i + 1] = dd;
            d2_den[i + 1][0] = dd;
            d2_num[i + 1][i + 1] = [2.0 * lm1, 0.0, 0.0];
            d2_den[i + 1][i + 1] = 2.0 * one_minus * one_minus;
        }
        let mut d2_f = [[[0.0; 3]; 3]; 3];
        for a in 0..3 {
            for b in a..3 {
                let mut v = d2_num[a][b];
                for k in 0..3 {
                    v[k] -= d_f[a][k] * d_den[b] + d_f[b][k] * d_den[a] + f[k] * d2_den[a][b];
                }
                let v = scale(inv, &v);
                d2_f[a][b] = v;
                d2_f[b][a] = v;
            }
        }
        Some(ChartSecond {
            d_ll: d2_f[0][0],
            d_lx: [d2_f[0][1], d2_f[0][2]],
            d_xx: [[d2_f[1][1], d2_f[1][2]], [d2_f[2][1], d2_f[2][2]]],
        })
    } else {
        None
    };

    ChartJet { f, d_lambda: d_f[0], d_x: [d_f[1], d_f[2]], second }
}

/// `e^ψ = |∂f/∂λ|`, in closed form `2(1 + |x|²)/((1 + λ)² + (1 − λ)²|x|²)`.
pub fn conformal_factor(p: &ChartPoint) -> f64 {
    let s = p.radius_squared();
    2.0 * (1.0 + s) / denominator(s, p.lambda)
}

/// `σ_ij = e^{−2ψ}⟨∂f/∂xⁱ, ∂f/∂xʲ⟩`, from the jet.
pub fn sigma_metric(p: &ChartPoint) -> [[f64; 2]; 2] {
    let j = jet(p, 1);
    let e2 = dot(&j.d_lambda, &j.d_lambda);
    let mut sigma = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            sigma[a][b] = dot(&j.d_x[a], &j.d_x[b]) / e2;
        }
    }
    sigma
}

pub fn slice_sphere(lambda: f64) -> Result<SliceSphere, ChartError> {
    if !(lambda > 1.0) || !lambda.is_finite() {
        return Err(ChartError::DegenerateSlice(lambda));
    }
    let d = lambda * lambda - 1.0;
    Ok(SliceSphere { center_height: (lambda * lambda + 1.0) / d, radius: 2.0 * lambda / d })
}

const INVERSE_MAX_ITER: usize = 100;
const INVERSE_TOL: f64 = 1e-14;

/// Inverse chart by damped Newton on the rotation-reduced system `(|x|, λ)`.
pub fn inverse_map(q: &Vec3) -> Result<ChartPoint, ChartError> {
    let outside = || ChartError::PointOutsideChart(q[0], q[1], q[2]);
    if !q.iter().all(|c| c.is_finite()) {
        return Err(outside());
    }
    let q_norm = norm(q);
    let e0_dist = norm(&sub(q, &[1.0, 0.0, 0.0]));
    if q_norm > 1.0 + 1e-12 || q[0] < -1e-14 || e0_dist < 1e-14 {
        return Err(outside());
    }
    let height = q[0].max(0.0);
    let b = sqrt(q[1] * q[1] + q[2] * q[2]);

    let residual = |rho: f64, lambda: f64| -> [f64; 2] {
        let f = map_point(&ChartPoint { x: [rho, 0.0], lambda });
        [f[0] - height, f[1] - b]
    };
    let rnorm = |r: [f64; 2]| sqrt(r[0] * r[0] + r[1] * r[1]);

    let mut rho = b.min(1.0);
    let mut lambda = 1.0;
    let mut r = residual(rho, lambda);
    let mut converged = rnorm(r) <= INVERSE_TOL;
    for _ in 0..INVERSE_MAX_ITER {
        if converged {
            break;
        }
        let j = jet(&ChartPoint { x: [rho, 0.0], lambda }, 1);
        // Columns: ∂/∂ρ and ∂/∂λ of (f₀, f₁).
        let (a, bb, c, d) = (j.d_x[0][0], j.d_lambda[0], j.d_x[0][1], j.d_lambda[1]);
        let det = a * d - bb * c;
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let d_rho = (d * r[0] - bb * r[1]) / det;
        let d_lambda = (a * r[1] - c * r[0]) / det;
        let current = rnorm(r);
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let rho_t = (rho - step * d_rho).clamp(0.0, 1.0);
            let lambda_t = (lambda - step * d_lambda).max(1.0);
            let r_t = residual(rho_t, lambda_t);
            if rnorm(r_t) < current {
                rho = rho_t;
                lambda = lambda_t;
                r = r_t;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        converged = rnorm(r) <= INVERSE_TOL * (1.0 + lambda);
    }

    let res = rnorm(r);
    if !converged && res > 1e-12 {
        return Err(ChartError::NoConvergence { residual: res });
    }
    let x = if b > 0.0 { [rho * q[1] / b, rho * q[2] / b] } else { [0.0, 0.0] };
    let p = ChartPoint { x, lambda };
    let back = map_point(&p);
    let err = norm(&sub(&back, q));
    if !(err <= 1e-10 * (1.0 + abs(lambda))) {
        return Err(ChartError::NoConvergence { residual: err });
    }
    Ok(p)
}
