//! Divergence-free correction of the reconstructed stress so that its
//! antisymmetric part has zero mean on every element.
//!
//! The correction is the row-wise rotated gradient `∇⊥χ` of a continuous P2
//! vector field `χ` vanishing on the closure of Γ_N. Minimizing `‖∇⊥χ‖`
//! subject to one mean constraint per element gives a global saddle system
//! with a piecewise constant multiplier.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fem::basis::{bary_grad, p2_dl};
use crate::fem::quadrature::VOLUME;
use crate::fem::rt1::{dof_functionals, Rt1Space};
use crate::fem::space::{p2_nodes, FeField, SpaceDescriptor, SpaceKind};
use crate::linalg::{self, SparseSystem};
use crate::mesh::Mesh;
use crate::stress_recon::ReconstructedStress;
use crate::tensor::{Tensor2, Vec2};

#[derive(Debug, Clone)]
pub struct SymmetrizedStress {
    /// `σ_h^S = σ_h^R + ∇⊥χ`, exactly represented in RT1.
    pub stress: ReconstructedStress,
    /// `∇⊥χ` as a discontinuous P1 tensor.
    pub correction: FeField,
    pub chi: FeField,
    /// Multiplier per element.
    pub nu: Vec<f64>,
}

/// Unknown numbering of the symmetry saddle system.
#[derive(Debug, Clone)]
pub struct SymmetryKkt {
    pub system: SparseSystem,
    /// Global P2 dof (`comp * (nv + ne) + node`) of each χ unknown.
    pub chi_dofs: Vec<usize>,
    /// Unknown index of each global P2 dof, `None` on the Γ_N closure.
    pub unknown: Vec<Option<usize>>,
}

impl SymmetryKkt {
    pub fn n_chi(&self) -> usize {
        self.chi_dofs.len()
    }
}

/// `(as σ, J)_T = ∫_T (σ_12 − σ_21)` per element.
pub fn antisymmetric_moments(rs: &ReconstructedStress, mesh: &Mesh) -> Vec<f64> {
    (0..mesh.n_triangles())
        .into_par_iter()
        .map(|t| {
            let area = mesh.geometry(t).area;
            VOLUME
                .points
                .iter()
                .zip(&VOLUME.weights)
                .map(|(l, w)| {
                    let (s, _) = rs.eval(mesh, t, *l);
                    w * area * (s[0][1] - s[1][0])
                })
                .sum()
        })
        .collect()
}

/// Nodes of the P2 space fixed to zero: vertices and midpoints of Γ_N edges.
fn fixed_nodes(mesh: &Mesh) -> Vec<bool> {
    let nv = mesh.n_vertices();
    let mut fixed = vec![false; nv + mesh.n_edges()];
    for (e, edge) in mesh.edges().iter().enumerate().filter(|(_, e)| e.is_neumann()) {
        fixed[edge.vertices[0]] = true;
        fixed[edge.vertices[1]] = true;
        fixed[nv + e] = true;
    }
    fixed
}

struct LocalBlocks {
    k: [[f64; 6]; 6],
    d: [[f64; 6]; 2],
}

fn local_blocks(mesh: &Mesh, t: usize) -> LocalBlocks {
    let geo = mesh.geometry(t);
    let rule = &*VOLUME;
    let mut k = [[0.0; 6]; 6];
    let mut d = [[0.0; 6]; 2];
    for (l, &w) in rule.points.iter().zip(&rule.weights) {
        let g: [Vec2; 6] = p2_dl(*l).map(|dl| bary_grad(dl, &geo.grad_bary));
        let wq = w * geo.area;
        for n in 0..6 {
            for m in 0..6 {
                k[n][m] += wq * (g[n][0] * g[m][0] + g[n][1] * g[m][1]);
            }
            d[0][n] += wq * g[n][0];
            d[1][n] += wq * g[n][1];
        }
    }
    LocalBlocks { k, d }
}

/// Assembles `[K  -Dᵀ; -D  0] [χ; ν] = [0; -r]` with `r_T = (as σ_h^R, J)_T`.
pub fn assemble_symmetry_kkt(rs: &ReconstructedStress, mesh: &Mesh) -> Result<SymmetryKkt> {
    rs.field.check_mesh(mesh)?;
    if !mesh.edges().iter().any(|e| e.is_neumann()) {
        return Err(Error::EmptyNeumann);
    }
    let stride = mesh.n_vertices() + mesh.n_edges();
    let fixed = fixed_nodes(mesh);
    let mut unknown = vec![None; 2 * stride];
    let mut chi_dofs = Vec::new();
    for c in 0..2 {
        for node in 0..stride {
            if !fixed[node] {
                unknown[c * stride + node] = Some(chi_dofs.len());
                chi_dofs.push(c * stride + node);
            }
        }
    }
    let n_chi = chi_dofs.len();
    let nt = mesh.n_triangles();
    let blocks: Vec<LocalBlocks> = (0..nt).into_par_iter().map(|t| local_blocks(mesh, t)).collect();
    let mut entries = Vec::with_capacity(nt * (72 + 24));
    for (t, blk) in blocks.iter().enumerate() {
        let nodes = p2_nodes(mesh, t);
        for c in 0..2 {
            for n in 0..6 {
                let Some(i) = unknown[c * stride + nodes[n]] else { continue };
                for m in 0..6 {
                    if let Some(j) = unknown[c * stride + nodes[m]] {
                        entries.push((i, j, blk.k[n][m]));
                    }
                }
                let v = -blk.d[c][n];
                entries.push((i, n_chi + t, v));
                entries.push((n_chi + t, i, v));
            }
        }
    }
    let r = antisymmetric_moments(rs, mesh);
    let loads: Vec<(usize, f64)> = r.iter().enumerate().map(|(t, &v)| (n_chi + t, -v)).collect();
    Ok(SymmetryKkt {
        system: SparseSystem::assemble(n_chi + nt, entries, loads)?,
        chi_dofs,
        unknown,
    })
}

/// Rotated gradient, row-wise: row `i` is `(∂_2 χ_i, −∂_1 χ_i)`.
#[inline]
pub fn rot_grad(g: &Tensor2) -> Tensor2 {
    [[g[0][1], -g[0][0]], [g[1][1], -g[1][0]]]
}

/// RT1 interpolant of a discontinuous P1 tensor with continuous normal
/// traces; exact for such fields. Edge moments are taken from the first
/// adjacent element.
pub fn p1_tensor_to_rt1(field: &FeField, mesh: &Mesh, space: &Rt1Space) -> Vec<f64> {
    let mut out = vec![0.0; space.n_dofs()];
    let local: Vec<[[f64; 8]; 2]> = (0..mesh.n_triangles())
        .into_par_iter()
        .map(|t| {
            let f = |row: usize| {
                dof_functionals(mesh, t, |x| field.eval_p1_tensor(t, mesh.barycentric(t, x))[row])
            };
            [f(0), f(1)]
        })
        .collect();
    for (t, loc) in local.iter().enumerate() {
        let te = mesh.triangle_edges(t);
        for row in 0..2 {
            for (k, &e) in te.iter().enumerate() {
                if mesh.edge(e).triangles[0] == t {
                    for m in 0..2 {
                        out[space.edge_dof(e, row, m)] = loc[row][2 * k + m];
                    }
                }
            }
            for j in 0..2 {
                out[space.interior_dof(t, row, j)] = loc[row][6 + j];
            }
        }
    }
    out
}

/// Solves the symmetry saddle system and applies the correction.
pub fn apply_symmetry_correction(rs: &ReconstructedStress, mesh: &Mesh) -> Result<SymmetrizedStress> {
    let kkt = assemble_symmetry_kkt(rs, mesh)?;
    let sol = linalg::solve(&kkt.system)?;
    let n_chi = kkt.n_chi();
    let mut chi = FeField::zeros(SpaceKind::P2ConfVector, mesh);
    for (i, &g) in kkt.chi_dofs.iter().enumerate() {
        chi.coefficients[g] = sol[i];
    }
    let nu = sol[n_chi..].to_vec();

    let mut correction = FeField::zeros(SpaceKind::P1DiscTensor, mesh);
    for t in 0..mesh.n_triangles() {
        for i in 0..3 {
            let mut l = [0.0; 3];
            l[i] = 1.0;
            let (_, g) = chi.eval_p2_conf(mesh, t, l);
            let rg = rot_grad(&g);
            for r in 0..2 {
                for c in 0..2 {
                    correction.coefficients[12 * t + 3 * (2 * r + c) + i] = rg[r][c];
                }
            }
        }
    }
    let delta = p1_tensor_to_rt1(&correction, mesh, &rs.space);
    let coefficients: Vec<f64> = rs.field.coefficients.iter().zip(&delta).map(|(a, b)| a + b).collect();
    let stress = ReconstructedStress {
        field: FeField::new(SpaceDescriptor::new(SpaceKind::Rt1Tensor, mesh), coefficients)?,
        space: rs.space.clone(),
        steps: rs.steps,
    };
    Ok(SymmetrizedStress {
        stress,
        correction,
        chi,
        nu,
    })
}
