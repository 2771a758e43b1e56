//! Error estimator terms, the guaranteed bound, data oscillation and energy
//! errors against exact solutions.

pub mod korn;

use std::sync::Arc;

use rayon::prelude::*;

use crate::elasticity::{broken_stress, DiscreteSolution, ElasticityProblem, ProjectedData};
use crate::error::{check_finite, Error, Result};
use crate::fem::quadrature::{triangle_rule, EDGE, VOLUME};
use crate::fem::space::FeField;
use crate::mesh::Mesh;
use crate::recovery::ConformingRecovery;
use crate::symmetrize::SymmetrizedStress;
use crate::tensor::{a_weighted2, frob2, skew, sym, Point, Tensor2, Vec2};

pub use korn::{KornConstants, KornEstimator};

/// `((1/2μ)‖dev τ‖² + c_tr‖tr τ‖²)^{1/2}` over the listed elements.
pub fn a_norm(
    tau: &(dyn Fn(usize, [f64; 3]) -> Tensor2 + Sync),
    mesh: &Mesh,
    mu: f64,
    lambda_inv: f64,
    region: &[usize],
) -> f64 {
    region
        .iter()
        .map(|&t| {
            let area = mesh.geometry(t).area;
            VOLUME
                .points
                .iter()
                .zip(&VOLUME.weights)
                .map(|(l, w)| w * area * a_weighted2(&tau(t, *l), mu, lambda_inv))
                .sum::<f64>()
        })
        .sum::<f64>()
        .sqrt()
}

/// The bound for a general splitting parameter `δ ∈ (0, 1/2)`.
pub fn bound_with_delta(eta_r: f64, eta_c: f64, eta_s: f64, korn: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::InvalidParameter(format!("delta {delta} not in (0, 1/2)")));
    }
    let k2 = korn * korn;
    let s = eta_r * eta_r + (k2 + 2.0 * delta) * eta_c * eta_c + k2 / delta * eta_s * eta_s;
    Ok((s / (1.0 - 2.0 * delta)).sqrt())
}

/// The bound with `δ = 1/4`: `(2η_R² + (2C′² + 1)η_C² + 8C′²η_S²)^{1/2}`.
#[inline]
pub fn guaranteed_bound(eta_r: f64, eta_c: f64, eta_s: f64, korn: f64) -> f64 {
    let k2 = korn * korn;
    (2.0 * eta_r * eta_r + (2.0 * k2 + 1.0) * eta_c * eta_c + 8.0 * k2 * eta_s * eta_s).sqrt()
}

#[derive(Debug, Clone)]
pub struct Oscillation {
    /// Squared contribution per element (Neumann edges go to their element).
    pub per_element: Vec<f64>,
    pub total: f64,
}

/// `(Σ_T h_T²‖f − P_h f‖²_T + Σ_{E⊂Γ_N} h_E‖g − P g‖²_E)^{1/2}`.
pub fn oscillation(problem: &ElasticityProblem, data: &ProjectedData) -> Result<Oscillation> {
    let mesh = &problem.mesh;
    data.f.check_mesh(mesh)?;
    let mut per_element: Vec<f64> = (0..mesh.n_triangles())
        .into_par_iter()
        .map(|t| {
            let g = mesh.geometry(t);
            let s: f64 = VOLUME
                .points
                .iter()
                .zip(&VOLUME.weights)
                .map(|(l, w)| {
                    let f = (problem.f)(mesh.map_point(t, *l));
                    let pf = data.f.eval_p1_vector(t, *l);
                    w * g.area * ((f[0] - pf[0]).powi(2) + (f[1] - pf[1]).powi(2))
                })
                .sum();
            g.diameter * g.diameter * s
        })
        .collect();
    for (e, edge) in mesh.edges().iter().enumerate() {
        let Some(gp) = data.g.edges[e] else { continue };
        let s: f64 = EDGE
            .points
            .iter()
            .zip(&EDGE.weights)
            .map(|(&s, w)| {
                let g = (problem.g)(mesh.edge_point(e, s), edge.normal);
                let p = gp.eval(s);
                w * edge.length * ((g[0] - p[0]).powi(2) + (g[1] - p[1]).powi(2))
            })
            .sum();
        per_element[edge.triangles[0]] += edge.length * s;
    }
    let total = per_element.iter().sum::<f64>().sqrt();
    Ok(Oscillation { per_element, total })
}

/// Exact displacement gradient and pressure of a reference solution.
#[derive(Clone)]
pub struct ExactSolution {
    pub u: Arc<dyn Fn(Point) -> Vec2 + Send + Sync>,
    pub grad_u: Arc<dyn Fn(Point) -> Tensor2 + Send + Sync>,
    pub p: Arc<dyn Fn(Point) -> f64 + Send + Sync>,
}

impl std::fmt::Debug for ExactSolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("ExactSolution")
    }
}

/// `(2μ‖ε(u − u_h)‖²_h + λ⁻¹‖p − p_h‖²)^{1/2}`.
pub fn energy_error(solution: &DiscreteSolution, exact: &ExactSolution, problem: &ElasticityProblem) -> Result<f64> {
    let mesh = &problem.mesh;
    solution.u.check_mesh(mesh)?;
    let rule = triangle_rule(10)?;
    let s: f64 = (0..mesh.n_triangles())
        .into_par_iter()
        .map(|t| {
            let area = mesh.geometry(t).area;
            rule.points
                .iter()
                .zip(&rule.weights)
                .map(|(l, w)| {
                    let x = mesh.map_point(t, *l);
                    let (_, gh) = solution.eval_u(mesh, t, *l);
                    let g = (exact.grad_u)(x);
                    let d = [[g[0][0] - gh[0][0], g[0][1] - gh[0][1]], [g[1][0] - gh[1][0], g[1][1] - gh[1][1]]];
                    let dp = (exact.p)(x) - solution.eval_p(t, *l);
                    w * area * (2.0 * problem.mu * frob2(&sym(&d)) + problem.lambda_inv * dp * dp)
                })
                .sum::<f64>()
        })
        .sum();
    Ok(s.sqrt())
}

#[derive(Debug, Clone)]
pub struct EstimatorReport {
    pub eta_r_t: Vec<f64>,
    pub eta_c_t: Vec<f64>,
    pub eta_s_t: Vec<f64>,
    pub eta_r: f64,
    pub eta_c: f64,
    pub eta_s: f64,
    pub korn: f64,
    pub bound: f64,
    pub osc: f64,
    /// Marking indicator: the element-wise restriction of the bound.
    pub indicators: Vec<f64>,
    pub energy_error: Option<f64>,
    pub efficiency: Option<f64>,
}

impl EstimatorReport {
    pub fn with_energy_error(mut self, err: f64) -> Self {
        self.energy_error = Some(err);
        self.efficiency = (err > 0.0).then(|| self.bound / err);
        self
    }
}

/// Element terms `η_{R,T} = ‖σ_h^S − σ_h‖_{A,T}`, `η_{C,T} = √(2μ)‖ε(u_h^C − u_h)‖_T`,
/// `η_{S,T} = ‖as σ_h^S‖_T / √(2μ)`, their Euclidean sums and the bound.
pub fn compute_estimators(
    solution: &DiscreteSolution,
    sym_stress: &SymmetrizedStress,
    recovery: &ConformingRecovery,
    problem: &ElasticityProblem,
    data: &ProjectedData,
    korn: &KornConstants,
) -> Result<EstimatorReport> {
    let mesh = &problem.mesh;
    let sigma = broken_stress(solution, problem)?;
    for f in [&sym_stress.stress.field, &recovery.field, &sigma] {
        f.check_mesh(mesh)?;
    }
    if korn.per_element.len() != mesh.n_triangles() {
        return Err(Error::MeshMismatch);
    }
    let (mu, li) = (problem.mu, problem.lambda_inv);
    let terms: Vec<[f64; 3]> = (0..mesh.n_triangles())
        .into_par_iter()
        .map(|t| element_terms(mesh, t, &sigma, sym_stress, &recovery.field, &solution.u, mu, li))
        .collect();
    let eta_r_t: Vec<f64> = terms.iter().map(|v| v[0]).collect();
    let eta_c_t: Vec<f64> = terms.iter().map(|v| v[1]).collect();
    let eta_s_t: Vec<f64> = terms.iter().map(|v| v[2]).collect();
    let l2 = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let (eta_r, eta_c, eta_s) = (l2(&eta_r_t), l2(&eta_c_t), l2(&eta_s_t));
    let k = korn.global;
    let indicators = terms.iter().map(|v| guaranteed_bound(v[0], v[1], v[2], k)).collect();
    let osc = oscillation(problem, data)?.total;
    Ok(EstimatorReport {
        eta_r_t,
        eta_c_t,
        eta_s_t,
        eta_r,
        eta_c,
        eta_s,
        korn: k,
        bound: check_finite("error bound", guaranteed_bound(eta_r, eta_c, eta_s, k))?,
        osc,
        indicators,
        energy_error: None,
        efficiency: None,
    })
}

#[allow(clippy::too_many_arguments)]
fn element_terms(
    mesh: &Mesh,
    t: usize,
    sigma: &FeField,
    s: &SymmetrizedStress,
    uc: &FeField,
    uh: &FeField,
    mu: f64,
    lambda_inv: f64,
) -> [f64; 3] {
    let area = mesh.geometry(t).area;
    let mut out = [0.0; 3];
    for (l, &w) in VOLUME.points.iter().zip(&VOLUME.weights) {
        let wq = w * area;
        let (ss, _) = s.stress.eval(mesh, t, *l);
        let sh = sigma.eval_p1_tensor(t, *l);
        let d = [[ss[0][0] - sh[0][0], ss[0][1] - sh[0][1]], [ss[1][0] - sh[1][0], ss[1][1] - sh[1][1]]];
        out[0] += wq * a_weighted2(&d, mu, lambda_inv);
        let (_, gc) = uc.eval_p3_conf(mesh, t, *l);
        let (_, gh) = uh.eval_broken_p2(mesh, t, *l);
        let e = sym(&[[gc[0][0] - gh[0][0], gc[0][1] - gh[0][1]], [gc[1][0] - gh[1][0], gc[1][1] - gh[1][1]]]);
        out[1] += wq * 2.0 * mu * frob2(&e);
        out[2] += wq * frob2(&skew(&ss)) / (2.0 * mu);
    }
    out.map(f64::sqrt)
}
