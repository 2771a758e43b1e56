//! Equilibrated H(div) stress reconstruction in RT1.
//!
//! Edge moments of the normal trace are fixed from averaged (or prescribed)
//! tractions; the remaining interior degrees of freedom are chosen element by
//! element so that the divergence balances the projected load.

use rayon::prelude::*;

use crate::elasticity::{ElasticityProblem, ProjectedData};
use crate::error::{Error, Result};
use crate::fem::projection::NeumannData;
use crate::fem::quadrature::{EDGE, VOLUME};
use crate::fem::rt1::{eval_local, poly_div, psi, Rt1Space};
use crate::fem::space::{FeField, SpaceDescriptor, SpaceKind};
use crate::mesh::Mesh;
use crate::tensor::{mat_vec, Tensor2, Vec2};

/// Per edge, per tensor row, the moments `∫_E (σ n_E)_row ψ_m` for `m = 0, 1`.
#[derive(Debug, Clone)]
pub struct EdgeTraces {
    pub moments: Vec<[[f64; 2]; 2]>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepsApplied {
    pub edge_moments: bool,
    pub interior: bool,
}

#[derive(Debug, Clone)]
pub struct ReconstructedStress {
    pub field: FeField,
    pub space: Rt1Space,
    pub steps: StepsApplied,
}

impl ReconstructedStress {
    /// Value and row divergence at barycentric point `l` of element `t`.
    pub fn eval(&self, mesh: &Mesh, t: usize, l: [f64; 3]) -> (Tensor2, Vec2) {
        self.space.eval(&self.field.coefficients, t, mesh.map_point(t, l))
    }
}

fn one_sided(sigma: &FeField, mesh: &Mesh, t: usize, e: usize) -> [[f64; 2]; 2] {
    let edge = mesh.edge(e);
    let k = mesh.local_edge(t, e).expect("edge belongs to its triangle");
    let mut out = [[0.0; 2]; 2];
    for (&s, &w) in EDGE.points.iter().zip(&EDGE.weights) {
        let sn = mat_vec(&sigma.eval_p1_tensor(t, mesh.edge_bary(t, k, s)), edge.normal);
        for (row, o) in out.iter_mut().enumerate() {
            for (m, om) in o.iter_mut().enumerate() {
                *om += w * edge.length * sn[row] * psi(m, s);
            }
        }
    }
    out
}

/// Edge data for the reconstruction: averaged traces on interior edges,
/// the one-sided trace on Dirichlet edges and the projected traction on
/// Neumann edges, all in the global edge normal.
pub fn average_normal_traces(sigma: &FeField, mesh: &Mesh, g: &NeumannData) -> Result<EdgeTraces> {
    sigma.check_mesh(mesh)?;
    let moments = (0..mesh.n_edges())
        .into_par_iter()
        .map(|e| {
            let edge = mesh.edge(e);
            if edge.is_neumann() {
                let gp = g.edges[e].unwrap_or_default();
                let mut out = [[0.0; 2]; 2];
                for (m, _) in [0, 1].iter().enumerate() {
                    let v = gp.moment(m, edge.length);
                    out[0][m] = v[0];
                    out[1][m] = v[1];
                }
                out
            } else if edge.is_boundary() {
                one_sided(sigma, mesh, edge.triangles[0], e)
            } else {
                let a = one_sided(sigma, mesh, edge.triangles[0], e);
                let b = one_sided(sigma, mesh, edge.triangles[1], e);
                let mut out = [[0.0; 2]; 2];
                for r in 0..2 {
                    for m in 0..2 {
                        out[r][m] = 0.5 * (a[r][m] + b[r][m]);
                    }
                }
                out
            }
        })
        .collect();
    Ok(EdgeTraces { moments })
}

/// Sets all edge degrees of freedom from the trace moments; interior
/// degrees of freedom are zero.
pub fn steps_1_2(traces: &EdgeTraces, mesh: &Mesh, space: Rt1Space) -> Result<ReconstructedStress> {
    if traces.moments.len() != mesh.n_edges() {
        return Err(Error::MeshMismatch);
    }
    let mut coeffs = vec![0.0; space.n_dofs()];
    for (e, mom) in traces.moments.iter().enumerate() {
        for r in 0..2 {
            for m in 0..2 {
                coeffs[space.edge_dof(e, r, m)] = mom[r][m];
            }
        }
    }
    Ok(ReconstructedStress {
        field: FeField::new(SpaceDescriptor::new(SpaceKind::Rt1Tensor, mesh), coeffs)?,
        space,
        steps: StepsApplied {
            edge_moments: true,
            interior: false,
        },
    })
}

/// Chooses the interior degrees of freedom so that `div σ + P_h f` is
/// orthogonal to the mean-free linear functions on every element.
pub fn step_3(partial: ReconstructedStress, f: &FeField, mesh: &Mesh) -> Result<ReconstructedStress> {
    f.check_mesh(mesh)?;
    let ReconstructedStress { mut field, space, .. } = partial;
    let updates: Vec<[[f64; 2]; 2]> = (0..mesh.n_triangles())
        .into_par_iter()
        .map(|t| interior_update(&space, &field.coefficients, f, mesh, t))
        .collect::<Result<_>>()?;
    for (t, upd) in updates.iter().enumerate() {
        for r in 0..2 {
            for j in 0..2 {
                field.coefficients[space.interior_dof(t, r, j)] = upd[r][j];
            }
        }
    }
    Ok(ReconstructedStress {
        field,
        space,
        steps: StepsApplied {
            edge_moments: true,
            interior: true,
        },
    })
}

fn interior_update(space: &Rt1Space, coeffs: &[f64], f: &FeField, mesh: &Mesh, t: usize) -> Result<[[f64; 2]; 2]> {
    let el = &space.elements[t];
    let area = mesh.geometry(t).area;
    let mut out = [[0.0; 2]; 2];
    for (row, o) in out.iter_mut().enumerate() {
        let dofs = space.local_dofs(t, row).map(|i| coeffs[i]);
        let mut partial = dofs;
        partial[6] = 0.0;
        partial[7] = 0.0;
        let c0 = el.coefficients(&partial);
        // columns: divergence of the two interior basis functions
        let mut mat = [[0.0; 2]; 2];
        let mut rhs = [0.0; 2];
        for (l, &w) in VOLUME.points.iter().zip(&VOLUME.weights) {
            let x = mesh.map_point(t, *l);
            let xi = el.xi(x);
            let pd = poly_div(xi, el.h);
            let div0 = el.div(&c0, x);
            let fv = f.eval_p1_vector(t, *l)[row];
            for j in 0..2 {
                let q = xi[j];
                for k in 0..2 {
                    let dk: f64 = (0..8).map(|b| el.inv[b][6 + k] * pd[b]).sum();
                    mat[j][k] += w * area * dk * q;
                }
                rhs[j] -= w * area * (div0 + fv) * q;
            }
        }
        let det = mat[0][0] * mat[1][1] - mat[0][1] * mat[1][0];
        let norm = mat.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        if !(det.abs() > 1e-12 * norm * norm) {
            return Err(Error::Singular {
                pivot: t,
                detail: "interior equilibration block".into(),
            });
        }
        o[0] = (rhs[0] * mat[1][1] - rhs[1] * mat[0][1]) / det;
        o[1] = (mat[0][0] * rhs[1] - mat[1][0] * rhs[0]) / det;
    }
    Ok(out)
}

/// Full reconstruction from the broken stress.
pub fn reconstruct(sigma: &FeField, problem: &ElasticityProblem, data: &ProjectedData) -> Result<ReconstructedStress> {
    let mesh = &problem.mesh;
    let traces = average_normal_traces(sigma, mesh, &data.g)?;
    let partial = steps_1_2(&traces, mesh, Rt1Space::new(mesh))?;
    step_3(partial, &data.f, mesh)
}

/// `‖div σ + P_h f‖_{L²(T)}` per element.
pub fn equilibrium_defect(rs: &ReconstructedStress, f: &FeField, mesh: &Mesh) -> Vec<f64> {
    (0..mesh.n_triangles())
        .into_par_iter()
        .map(|t| {
            let c = rs.space.local_coefficients(&rs.field.coefficients, t);
            let area = mesh.geometry(t).area;
            let mut s = 0.0;
            for (l, &w) in VOLUME.points.iter().zip(&VOLUME.weights) {
                let (_, d) = eval_local(&rs.space.elements[t], &c, mesh.map_point(t, *l));
                let fv = f.eval_p1_vector(t, *l);
                s += w * area * ((d[0] + fv[0]).powi(2) + (d[1] + fv[1]).powi(2));
            }
            s.sqrt()
        })
        .collect()
}

/// `(div σ + P_h f, 1)_T` per element and row.
pub fn mean_defect(rs: &ReconstructedStress, f: &FeField, mesh: &Mesh) -> Vec<Vec2> {
    (0..mesh.n_triangles())
        .map(|t| {
            let area = mesh.geometry(t).area;
            let mut s = [0.0; 2];
            for (l, &w) in VOLUME.points.iter().zip(&VOLUME.weights) {
                let (_, d) = rs.eval(mesh, t, *l);
                let fv = f.eval_p1_vector(t, *l);
                for r in 0..2 {
                    s[r] += w * area * (d[r] + fv[r]);
                }
            }
            s
        })
        .collect()
}

/// `‖σ_h‖_∞` over the volume quadrature points.
pub fn sup_norm_p1_tensor(sigma: &FeField, mesh: &Mesh) -> f64 {
    (0..mesh.n_triangles())
        .flat_map(|t| VOLUME.points.iter().map(move |l| (t, *l)))
        .map(|(t, l)| {
            sigma
                .eval_p1_tensor(t, l)
                .iter()
                .flatten()
                .fold(0.0f64, |m, v| m.max(v.abs()))
        })
        .fold(0.0, f64::max)
}
