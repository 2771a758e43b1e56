//! Displacement–pressure formulation with nonconforming quadratic
//! displacements and discontinuous linear pressures.
//!
//! The nonconforming space is realized on fully discontinuous P2 by Lagrange
//! multipliers: on every interior edge the jump, and on every Dirichlet edge
//! the trace, is made orthogonal to linear functions (two moments per
//! component).
//!
//! Unknown layout: displacement `12t + 6c + node`, pressure `12nt + 3t + i`,
//! multipliers `15nt + 4j + 2c + m` for the `j`-th constrained edge.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fem::basis::{bary_grad, p2, p2_dl};
use crate::fem::projection::{project_neumann, project_volume, NeumannData, Target, TractionFn, VectorFn};
use crate::fem::quadrature::{EDGE, VOLUME};
use crate::fem::rt1::psi;
use crate::fem::space::{FeField, SpaceDescriptor, SpaceKind};
use crate::linalg::{self, SparseSystem};
use crate::mesh::Mesh;
use crate::tensor::{Tensor2, Vec2};

#[derive(Clone)]
pub struct ElasticityProblem {
    pub mesh: Mesh,
    pub mu: f64,
    /// `1/λ`; zero is the incompressible limit.
    pub lambda_inv: f64,
    pub f: VectorFn,
    pub g: TractionFn,
}

impl std::fmt::Debug for ElasticityProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ElasticityProblem")
            .field("n_triangles", &self.mesh.n_triangles())
            .field("mu", &self.mu)
            .field("lambda_inv", &self.lambda_inv)
            .finish_non_exhaustive()
    }
}

impl ElasticityProblem {
    pub fn new(mesh: Mesh, mu: f64, lambda_inv: f64, f: VectorFn, g: TractionFn) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::InvalidParameter(format!("shear modulus must be positive, got {mu}")));
        }
        if !(lambda_inv >= 0.0 && lambda_inv.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "1/lambda must be finite and nonnegative, got {lambda_inv}"
            )));
        }
        Ok(ElasticityProblem {
            mesh,
            mu,
            lambda_inv,
            f,
            g,
        })
    }

    /// Same material and data on another mesh.
    pub fn with_mesh(&self, mesh: Mesh) -> Self {
        ElasticityProblem {
            mesh,
            ..self.clone()
        }
    }

    pub fn project_data(&self) -> Result<ProjectedData> {
        Ok(ProjectedData {
            f: project_volume(self.f.as_ref(), &self.mesh, Target::P1)?,
            g: project_neumann(self.g.as_ref(), &self.mesh)?,
        })
    }
}

/// `P_h f` (discontinuous P1) and the edge-wise linear projection of `g`.
#[derive(Debug, Clone)]
pub struct ProjectedData {
    pub f: FeField,
    pub g: NeumannData,
}

#[derive(Debug, Clone)]
pub struct DiscreteSolution {
    pub u: FeField,
    pub p: FeField,
    /// Edge-moment multipliers, four per constrained edge.
    pub multipliers: Vec<f64>,
    /// Constrained edges (interior and Dirichlet) in multiplier order.
    pub constrained_edges: Vec<usize>,
    pub residual: f64,
}

impl DiscreteSolution {
    /// Value and gradient of `u_h` on element `t`.
    pub fn eval_u(&self, mesh: &Mesh, t: usize, l: [f64; 3]) -> (Vec2, Tensor2) {
        self.u.eval_broken_p2(mesh, t, l)
    }

    pub fn eval_p(&self, t: usize, l: [f64; 3]) -> f64 {
        self.p.eval_p1_scalar(t, l)
    }
}

/// Dimension of the nonconforming displacement space plus the pressure space.
pub fn n_dofs(mesh: &Mesh) -> usize {
    let constrained = constrained_edges(mesh).len();
    12 * mesh.n_triangles() - 4 * constrained + 3 * mesh.n_triangles()
}

pub fn constrained_edges(mesh: &Mesh) -> Vec<usize> {
    mesh.edges()
        .iter()
        .enumerate()
        .filter(|(_, e)| !e.is_boundary() || e.is_dirichlet())
        .map(|(i, _)| i)
        .collect()
}

#[inline]
pub fn u_dof(t: usize, c: usize, n: usize) -> usize {
    12 * t + 6 * c + n
}

struct ElementBlocks {
    a: [[f64; 12]; 12],
    b: [[f64; 12]; 3],
    m: [[f64; 3]; 3],
    load: [f64; 12],
}

fn element_blocks(mesh: &Mesh, t: usize, mu: f64, f: &FeField) -> ElementBlocks {
    let geo = mesh.geometry(t);
    let area = geo.area;
    let mut a = [[0.0; 12]; 12];
    let mut b = [[0.0; 12]; 3];
    let mut load = [0.0; 12];
    // volume load against the element mean of P_h f; with a linear load the
    // mean normal fluxes would jump across edges and averaging would not
    // equilibrate
    let fv: Vec2 = std::array::from_fn(|c| (0..3).map(|i| f.coefficients[6 * t + 3 * c + i]).sum::<f64>() / 3.0);
    for (l, &w) in VOLUME.points.iter().zip(&VOLUME.weights) {
        let wq = w * area;
        let v = p2(*l);
        let g: [Vec2; 6] = p2_dl(*l).map(|d| bary_grad(d, &geo.grad_bary));
        for c in 0..2 {
            for n in 0..6 {
                let i = 6 * c + n;
                load[i] += wq * fv[c] * v[n];
                for (q, bq) in b.iter_mut().enumerate() {
                    bq[i] += wq * l[q] * g[n][c];
                }
                for d in 0..2 {
                    for mm in 0..6 {
                        let j = 6 * d + mm;
                        // ε(e_c N_n) : ε(e_d N_m)
                        let dot = if c == d {
                            g[n][0] * g[mm][0] + g[n][1] * g[mm][1]
                        } else {
                            0.0
                        };
                        let e = 0.5 * (dot + g[n][d] * g[mm][c]);
                        a[i][j] += wq * 2.0 * mu * e;
                    }
                }
            }
        }
    }
    let mut m = [[0.0; 3]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = area * if i == j { 2.0 } else { 1.0 } / 12.0;
        }
    }
    ElementBlocks { a, b, m, load }
}

/// Values of the six P2 basis functions of triangle `t` at parameter `s` of
/// its local edge `k` (global edge orientation).
pub(crate) fn p2_on_edge(mesh: &Mesh, t: usize, k: usize, s: f64) -> [f64; 6] {
    p2(mesh.edge_bary(t, k, s))
}

/// Assembles the full saddle-point system.
pub fn assemble_elasticity(problem: &ElasticityProblem, data: &ProjectedData) -> Result<SparseSystem> {
    let mesh = &problem.mesh;
    data.f.check_mesh(mesh)?;
    let nt = mesh.n_triangles();
    let cons = constrained_edges(mesh);
    let dim = 15 * nt + 4 * cons.len();
    let p_off = 12 * nt;
    let mul_off = 15 * nt;

    let blocks: Vec<ElementBlocks> = (0..nt)
        .into_par_iter()
        .map(|t| element_blocks(mesh, t, problem.mu, &data.f))
        .collect();

    let mut entries = Vec::with_capacity(nt * (144 + 72 + 9) + cons.len() * 96);
    let mut loads = Vec::with_capacity(nt * 12);
    for (t, blk) in blocks.iter().enumerate() {
        for i in 0..12 {
            for j in 0..12 {
                if blk.a[i][j] != 0.0 {
                    entries.push((12 * t + i, 12 * t + j, blk.a[i][j]));
                }
            }
            loads.push((12 * t + i, blk.load[i]));
        }
        for q in 0..3 {
            for i in 0..12 {
                let v = blk.b[q][i];
                if v != 0.0 {
                    entries.push((p_off + 3 * t + q, 12 * t + i, v));
                    entries.push((12 * t + i, p_off + 3 * t + q, v));
                }
            }
            if problem.lambda_inv > 0.0 {
                for r in 0..3 {
                    entries.push((p_off + 3 * t + q, p_off + 3 * t + r, -problem.lambda_inv * blk.m[q][r]));
                }
            }
        }
    }

    for (j, &e) in cons.iter().enumerate() {
        let edge = mesh.edge(e);
        for (side, t) in edge.adjacent().enumerate() {
            let k = mesh.local_edge(t, e).expect("edge belongs to its triangle");
            let sign = if side == 0 { 1.0 } else { -1.0 };
            let mut mom = [[0.0; 6]; 2];
            for (&s, &w) in EDGE.points.iter().zip(&EDGE.weights) {
                let v = p2_on_edge(mesh, t, k, s);
                for (mm, row) in mom.iter_mut().enumerate() {
                    for n in 0..6 {
                        row[n] += w * edge.length * v[n] * psi(mm, s);
                    }
                }
            }
            for c in 0..2 {
                for (mm, row) in mom.iter().enumerate() {
                    let r = mul_off + 4 * j + 2 * c + mm;
                    for n in 0..6 {
                        let v = sign * row[n];
                        if v != 0.0 {
                            entries.push((r, u_dof(t, c, n), v));
                            entries.push((u_dof(t, c, n), r, v));
                        }
                    }
                }
            }
        }
    }

    for (e, gp) in data.g.edges.iter().enumerate() {
        let Some(gp) = gp else { continue };
        let edge = mesh.edge(e);
        let t = edge.triangles[0];
        let k = mesh.local_edge(t, e).expect("edge belongs to its triangle");
        for (&s, &w) in EDGE.points.iter().zip(&EDGE.weights) {
            let v = p2_on_edge(mesh, t, k, s);
            let gv = gp.eval(s);
            for c in 0..2 {
                for n in 0..6 {
                    loads.push((u_dof(t, c, n), w * edge.length * gv[c] * v[n]));
                }
            }
        }
    }
    SparseSystem::assemble(dim, entries, loads)
}

pub fn solve_elasticity(problem: &ElasticityProblem, data: &ProjectedData) -> Result<DiscreteSolution> {
    let mesh = &problem.mesh;
    let system = assemble_elasticity(problem, data)?;
    let x = linalg::solve(&system)?;
    let residual = system.relative_residual(&x);
    let nt = mesh.n_triangles();
    Ok(DiscreteSolution {
        u: FeField::new(SpaceDescriptor::new(SpaceKind::BrokenP2Vector, mesh), x[..12 * nt].to_vec())?,
        p: FeField::new(
            SpaceDescriptor::new(SpaceKind::P1DiscScalar, mesh),
            x[12 * nt..15 * nt].to_vec(),
        )?,
        multipliers: x[15 * nt..].to_vec(),
        constrained_edges: constrained_edges(mesh),
        residual,
    })
}

/// `σ_h = 2μ ε(u_h) + p_h I` as a discontinuous P1 tensor.
pub fn broken_stress(solution: &DiscreteSolution, problem: &ElasticityProblem) -> Result<FeField> {
    let mesh = &problem.mesh;
    solution.u.check_mesh(mesh)?;
    let nt = mesh.n_triangles();
    let mu = problem.mu;
    let coeffs: Vec<f64> = (0..nt)
        .into_par_iter()
        .flat_map_iter(|t| {
            let mut c = [0.0; 12];
            for i in 0..3 {
                let mut l = [0.0; 3];
                l[i] = 1.0;
                let (_, g) = solution.eval_u(mesh, t, l);
                let p = solution.eval_p(t, l);
                let s = [
                    [2.0 * mu * g[0][0] + p, mu * (g[0][1] + g[1][0])],
                    [mu * (g[0][1] + g[1][0]), 2.0 * mu * g[1][1] + p],
                ];
                for r in 0..2 {
                    for cc in 0..2 {
                        c[3 * (2 * r + cc) + i] = s[r][cc];
                    }
                }
            }
            c
        })
        .collect();
    FeField::new(SpaceDescriptor::new(SpaceKind::P1DiscTensor, mesh), coeffs)
}

/// Largest `|div u_h - λ⁻¹ p_h|` over element vertices, relative to
/// `max(‖∇u_h‖_∞, λ⁻¹‖p_h‖_∞)` evaluated there.
pub fn incompressibility_defect(solution: &DiscreteSolution, problem: &ElasticityProblem) -> (f64, f64) {
    let mesh = &problem.mesh;
    let mut defect: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for t in 0..mesh.n_triangles() {
        for i in 0..3 {
            let mut l = [0.0; 3];
            l[i] = 1.0;
            let (_, g) = solution.eval_u(mesh, t, l);
            let p = solution.eval_p(t, l);
            defect = defect.max((g[0][0] + g[1][1] - problem.lambda_inv * p).abs());
            let gn = g.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
            scale = scale.max(gn).max(problem.lambda_inv * p.abs());
        }
    }
    (defect, scale)
}
