//! Benchmark problems: Cook's membrane and manufactured solutions on the
//! unit square with Γ_D = {x = 0}.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::driver::config::Material;
use crate::elasticity::ElasticityProblem;
use crate::error::Result;
use crate::estimator::ExactSolution;
use crate::mesh::{cook_membrane, Mesh};
use crate::tensor::{mat_vec, Point, Tensor2, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Manufactured {
    /// `u = ∇⊥ψ + λ⁻¹(W, 0)`, `p = ∂_x W`.
    Smooth,
    /// `u = ∇⊥ψ`, `p = 0`.
    Divfree,
    /// `u = (0, −2x)`, `p = 0`.
    PatchTest,
}

/// Displacement with first and second derivatives and pressure with its
/// gradient at one point. `h[i][j][k] = ∂_j ∂_k u_i`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Jet {
    pub u: Vec2,
    pub g: Tensor2,
    pub h: [[[f64; 2]; 2]; 2],
    pub p: f64,
    pub gp: Vec2,
}

impl Jet {
    pub fn stress(&self, mu: f64) -> Tensor2 {
        let mut s = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                s[i][j] = mu * (self.g[i][j] + self.g[j][i]) + if i == j { self.p } else { 0.0 };
            }
        }
        s
    }

    /// `f = −div(2με(u) + pI)`.
    pub fn load(&self, mu: f64) -> Vec2 {
        let mut f = [0.0; 2];
        for (i, fi) in f.iter_mut().enumerate() {
            let mut d = self.gp[i];
            for j in 0..2 {
                d += mu * (self.h[i][j][j] + self.h[j][i][j]);
            }
            *fi = -d;
        }
        f
    }
}

/// `ψ = x²(1−x)² sin(πy)`; returns `u = (∂_y ψ, −∂_x ψ)` with derivatives.
fn rot_psi(x: Point) -> Jet {
    let (a, b) = (x[0], x[1]);
    let xx = [
        a * a * (1.0 - a).powi(2),
        2.0 * a * (1.0 - a) * (1.0 - 2.0 * a),
        2.0 - 12.0 * a + 12.0 * a * a,
        -12.0 + 24.0 * a,
    ];
    let (s, c) = (PI * b).sin_cos();
    let ss = [s, PI * c, -PI * PI * s, -PI * PI * PI * c];
    Jet {
        u: [xx[0] * ss[1], -xx[1] * ss[0]],
        g: [[xx[1] * ss[1], xx[0] * ss[2]], [-xx[2] * ss[0], -xx[1] * ss[1]]],
        h: [
            [[xx[2] * ss[1], xx[1] * ss[2]], [xx[1] * ss[2], xx[0] * ss[3]]],
            [[-xx[3] * ss[0], -xx[2] * ss[1]], [-xx[2] * ss[1], -xx[1] * ss[2]]],
        ],
        p: 0.0,
        gp: [0.0; 2],
    }
}

/// Adds `λ⁻¹(W, 0)` and `p = ∂_x W` with `W = x²y(1−y) + x sin(πy)`.
fn add_compressible(mut j: Jet, x: Point, lambda_inv: f64) -> Jet {
    let (a, b) = (x[0], x[1]);
    let (s, c) = (PI * b).sin_cos();
    let y = b * (1.0 - b);
    let (y1, y2) = (1.0 - 2.0 * b, -2.0);
    let w = a * a * y + a * s;
    let wx = 2.0 * a * y + s;
    let wy = a * a * y1 + a * PI * c;
    let wxx = 2.0 * y;
    let wxy = 2.0 * a * y1 + PI * c;
    let wyy = a * a * y2 - a * PI * PI * s;
    j.u[0] += lambda_inv * w;
    j.g[0][0] += lambda_inv * wx;
    j.g[0][1] += lambda_inv * wy;
    j.h[0][0][0] += lambda_inv * wxx;
    j.h[0][0][1] += lambda_inv * wxy;
    j.h[0][1][0] += lambda_inv * wxy;
    j.h[0][1][1] += lambda_inv * wyy;
    j.p = wx;
    j.gp = [wxx, wxy];
    j
}

pub fn manufactured_jet(kind: Manufactured, x: Point, lambda_inv: f64) -> Jet {
    match kind {
        Manufactured::Smooth => add_compressible(rot_psi(x), x, lambda_inv),
        Manufactured::Divfree => rot_psi(x),
        Manufactured::PatchTest => Jet {
            u: [0.0, -2.0 * x[0]],
            g: [[0.0, 0.0], [-2.0, 0.0]],
            ..Jet::default()
        },
    }
}

/// Problem with load and tractions derived from the exact solution, and
/// the exact solution itself.
pub fn manufactured_setup(
    kind: Manufactured,
    mesh: Mesh,
    mu: f64,
    lambda_inv: f64,
) -> Result<(ElasticityProblem, ExactSolution)> {
    let jet = move |x: Point| manufactured_jet(kind, x, lambda_inv);
    let problem = ElasticityProblem::new(
        mesh,
        mu,
        lambda_inv,
        Arc::new(move |x| jet(x).load(mu)),
        Arc::new(move |x, n| mat_vec(&jet(x).stress(mu), n)),
    )?;
    let exact = ExactSolution {
        u: Arc::new(move |x| jet(x).u),
        grad_u: Arc::new(move |x| jet(x).g),
        p: Arc::new(move |x| jet(x).p),
    };
    Ok((problem, exact))
}

/// Cook's membrane on `mesh`: `f = 0`, traction `(0, 1)` on the right edge,
/// traction free top and bottom.
pub fn cook_problem(mesh: Mesh, mu: f64, lambda_inv: f64) -> Result<ElasticityProblem> {
    ElasticityProblem::new(
        mesh,
        mu,
        lambda_inv,
        Arc::new(|_| [0.0, 0.0]),
        Arc::new(|_, n| if n[0] > 0.999 { [0.0, 1.0] } else { [0.0, 0.0] }),
    )
}

/// Cook's membrane with `μ = 1` and Poisson ratio `nu` on the default mesh.
pub fn cook_setup(nu: f64) -> Result<ElasticityProblem> {
    cook_problem(cook_membrane(), 1.0, Material::Nu(nu).lambda_inv(1.0)?)
}
