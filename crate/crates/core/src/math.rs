//! Float helpers over `libm` so results do not depend on the platform libm.

use crate::Vec3;

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub(crate) fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline]
pub(crate) fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline]
pub(crate) fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub(crate) fn norm(a: &Vec3) -> f64 {
    sqrt(dot(a, a))
}

#[inline]
pub(crate) fn axpy(alpha: f64, x: &Vec3, y: &Vec3) -> Vec3 {
    [alpha * x[0] + y[0], alpha * x[1] + y[1], alpha * x[2] + y[2]]
}

#[inline]
pub(crate) fn scale(alpha: f64, x: &Vec3) -> Vec3 {
    [alpha * x[0], alpha * x[1], alpha * x[2]]
}

#[inline]
pub(crate) fn sub(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Inverse of a symmetric `n × n` matrix, `n ∈ {1, 2}`, stored in a 2×2 block.
pub(crate) fn sym_inverse(n: usize, m: &[[f64; 2]; 2]) -> Option<[[f64; 2]; 2]> {
    if n == 1 {
        if m[0][0] == 0.0 {
            return None;
        }
        return Some([[1.0 / m[0][0], 0.0], [0.0, 0.0]]);
    }
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    let inv = 1.0 / det;
    Some([[m[1][1] * inv, -m[0][1] * inv], [-m[1][0] * inv, m[0][0] * inv]])
}

/// Largest eigenvalue of a symmetric `n × n` matrix.
pub(crate) fn sym_max_eigenvalue(n: usize, m: &[[f64; 2]; 2]) -> f64 {
    if n == 1 {
        return m[0][0];
    }
    let half_tr = 0.5 * (m[0][0] + m[1][1]);
    let half_diff = 0.5 * (m[0][0] - m[1][1]);
    half_tr + sqrt(half_diff * half_diff + m[0][1] * m[1][0])
}

/// Composite quadrature of uniformly sampled data: Simpson when the number of
/// intervals is even, trapezoid otherwise.
pub(crate) fn integrate_uniform(samples: &[f64], h: f64) -> f64 {
    let len = samples.len();
    if len < 2 {
        return 0.0;
    }
    let intervals = len - 1;
    if intervals.is_multiple_of(2) {
        let mut acc = samples[0] + samples[intervals];
        for (i, s) in samples.iter().enumerate().take(intervals).skip(1) {
            acc += if i % 2 == 1 { 4.0 * s } else { 2.0 * s };
        }
        acc * h / 3.0
    } else {
        let inner: f64 = samples[1..intervals].iter().sum();
        h * (0.5 * (samples[0] + samples[intervals]) + inner)
    }
}
