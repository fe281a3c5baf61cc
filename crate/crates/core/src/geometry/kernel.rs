use crate::chart::{jet, ChartPoint};
use crate::math::{axpy, dot, scale, sqrt, sym_inverse};
use crate::Vec3;

/// Extrinsic geometry of the graph `X = f(x, u(x))` at one node.
///
/// Matrices are stored as 2×2 blocks; only the leading `n × n` part is
/// meaningful. `kappa` is sorted ascending and `kappa[1]` is unused for `n = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometrySample {
    pub n: usize,
    pub position: Vec3,
    /// Unit normal with `⟨∂f/∂λ, N⟩ < 0`.
    pub normal: Vec3,
    /// Coordinate tangents `∂X/∂xⁱ`.
    pub tangents: [Vec3; 2],
    pub v: f64,
    pub e_psi: f64,
    pub sigma: [[f64; 2]; 2],
    pub g: [[f64; 2]; 2],
    pub g_inv: [[f64; 2]; 2],
    pub h: [[f64; 2]; 2],
    pub kappa: [f64; 2],
    pub mean_curvature: f64,
    /// Height `w = ⟨X, e₀⟩`.
    pub height: f64,
    /// `⟨∂f/∂λ, N⟩`, negative for graphs.
    pub graph_condition: f64,
}

impl GeometrySample {
    pub fn kappa_min(&self) -> f64 {
        self.kappa[0]
    }

    pub fn kappa_max(&self) -> f64 {
        self.kappa[self.n - 1]
    }

    pub fn kappas(&self) -> &[f64] {
        &self.kappa[..self.n]
    }

    /// `√det g`.
    pub fn area_element(&self) -> f64 {
        if self.n == 1 {
            sqrt(self.g[0][0])
        } else {
            sqrt(self.g[0][0] * self.g[1][1] - self.g[0][1] * self.g[1][0])
        }
    }

    /// Graph speed `∂u/∂t = −v/(e^ψ H)`.
    pub fn speed(&self) -> f64 {
        -self.v / (self.e_psi * self.mean_curvature)
    }

    /// Largest eigenvalue of `g^{ij}`.
    pub fn g_inv_max_eigenvalue(&self) -> f64 {
        crate::math::sym_max_eigenvalue(self.n, &self.g_inv)
    }

    /// `g_ij = e^{2ψ}(u_i u_j + σ_ij)`, the metric assembled from the chart data.
    pub fn conformal_metric(&self, du: &[f64; 2]) -> [[f64; 2]; 2] {
        let e2 = self.e_psi * self.e_psi;
        let mut g = [[0.0; 2]; 2];
        for i in 0..self.n {
            for j in 0..self.n {
                g[i][j] = e2 * (du[i] * du[j] + self.sigma[i][j]);
            }
        }
        g
    }

    /// `|A|² = h_ij h_kl g^{ik} g^{jl}`.
    pub fn second_form_norm_squared(&self) -> f64 {
        let n = self.n;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        acc += self.h[i][j] * self.h[k][l] * self.g_inv[i][k] * self.g_inv[j][l];
                    }
                }
            }
        }
        acc
    }
}

/// Geometry of the graph at chart position `x` with value `u`, gradient `du`
/// and Hessian `d2u` (Cartesian disk coordinates). Returns `None` when any
/// quantity is not finite or the metric is singular.
pub fn sample(n: usize, x: [f64; 2], u: f64, du: [f64; 2], d2u: [[f64; 2]; 2]) -> Option<GeometrySample> {
    debug_assert!(n == 1 || n == 2);
    let cj = jet(&ChartPoint { x, lambda: u }, 2);
    let second = cj.second?;

    let mut tangents = [[0.0; 3]; 2];
    for i in 0..n {
        tangents[i] = axpy(du[i], &cj.d_lambda, &cj.d_x[i]);
    }

    let e2 = dot(&cj.d_lambda, &cj.d_lambda);
    let e_psi = sqrt(e2);
    let mut sigma = [[0.0; 2]; 2];
    let mut g = [[0.0; 2]; 2];
    for i in 0..n {
        for j in 0..n {
            sigma[i][j] = dot(&cj.d_x[i], &cj.d_x[j]) / e2;
            g[i][j] = dot(&tangents[i], &tangents[j]);
        }
    }
    let sigma_inv = sym_inverse(n, &sigma)?;
    let g_inv = sym_inverse(n, &g)?;

    // σ^{ik} u_k and v² = 1 + σ^{ij} u_i u_j.
    let mut raised = [0.0; 2];
    let mut v2 = 1.0;
    for i in 0..n {
        for k in 0..n {
            raised[i] += sigma_inv[i][k] * du[k];
        }
        v2 += raised[i] * du[i];
    }
    let v = sqrt(v2);

    // N = −v⁻¹e^{−ψ}(∂f/∂λ − σ^{ik}u_k ∂f/∂xⁱ).
    let mut dir = cj.d_lambda;
    for i in 0..n {
        dir = axpy(-raised[i], &cj.d_x[i], &dir);
    }
    let normal = scale(-1.0 / (v * e_psi), &dir);

    let mut h = [[0.0; 2]; 2];
    for i in 0..n {
        for j in i..n {
            let mut xij: Vec3 = second.d_xx[i][j];
            xij = axpy(du[j], &second.d_lx[i], &xij);
            xij = axpy(du[i], &second.d_lx[j], &xij);
            xij = axpy(du[i] * du[j], &second.d_ll, &xij);
            xij = axpy(d2u[i][j], &cj.d_lambda, &xij);
            let hij = -dot(&xij, &normal);
            h[i][j] = hij;
            h[j][i] = hij;
        }
    }

    let (kappa, mean_curvature) = if n == 1 {
        let k = g_inv[0][0] * h[0][0];
        ([k, 0.0], k)
    } else {
        // Mixed tensor A = g⁻¹h, self-adjoint for g.
        let mut a = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                a[i][j] = g_inv[i][0] * h[0][j] + g_inv[i][1] * h[1][j];
            }
        }
        let half_tr = 0.5 * (a[0][0] + a[1][1]);
        let half_diff = 0.5 * (a[0][0] - a[1][1]);
        let disc = sqrt((half_diff * half_diff + a[0][1] * a[1][0]).max(0.0));
        ([half_tr - disc, half_tr + disc], 2.0 * half_tr)
    };

    let graph_condition = dot(&cj.d_lambda, &normal);
    let s = GeometrySample {
        n,
        position: cj.f,
        normal,
        tangents,
        v,
        e_psi,
        sigma,
        g,
        g_inv,
        h,
        kappa,
        mean_curvature,
        height: cj.f[0],
        graph_condition,
    };
    let finite = s.position.iter().chain(s.normal.iter()).all(|c| c.is_finite())
        && s.mean_curvature.is_finite()
        && s.kappa.iter().all(|k| k.is_finite())
        && s.v.is_finite();
    finite.then_some(s)
}
