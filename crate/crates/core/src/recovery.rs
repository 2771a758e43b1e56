//! Conforming displacement recovery with prescribed element divergence means.
//!
//! The broken displacement is localized by a partition of unity subordinate
//! to vertex patches. On each patch a continuous P3 field is fitted to the
//! localized displacement in the H¹ seminorm, subject to matching the
//! divergence mean on every element; the patch fields sum to `u_h^C`.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fem::basis::{bary_grad, p3_dl};
use crate::fem::quadrature::VOLUME;
use crate::fem::space::{p3_node_count, p3_nodes, FeField, SpaceKind};
use crate::mesh::Mesh;
use crate::tensor::{Tensor2, Vec2};

/// Weights `φ_z = Σ_{c ∈ C_z} λ_c` for vertices `z` off the Dirichlet
/// boundary; each Dirichlet vertex is absorbed into one neighbor.
#[derive(Debug, Clone)]
pub struct PartitionOfUnity {
    /// Vertices carrying a weight.
    pub vertices: Vec<usize>,
    /// Per weight, the vertices whose hats it sums (`z` first).
    pub centers: Vec<Vec<usize>>,
    /// Per weight, the support elements in ascending order.
    pub elements: Vec<Vec<usize>>,
    /// Per mesh vertex, the index of the weight containing its hat.
    pub owner: Vec<usize>,
}

impl PartitionOfUnity {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// `φ_i` and its gradient on element `t` at barycentric `l`.
    pub fn eval(&self, mesh: &Mesh, i: usize, t: usize, l: [f64; 3]) -> (f64, Vec2) {
        let tri = mesh.triangle(t);
        let gb = mesh.geometry(t).grad_bary;
        let mut v = 0.0;
        let mut g = [0.0; 2];
        for (k, &vk) in tri.iter().enumerate() {
            if self.owner[vk] == i {
                v += l[k];
                g[0] += gb[k][0];
                g[1] += gb[k][1];
            }
        }
        (v, g)
    }
}

pub fn build_partition(mesh: &Mesh) -> Result<PartitionOfUnity> {
    let nv = mesh.n_vertices();
    let mut index = vec![usize::MAX; nv];
    let mut vertices = Vec::new();
    for v in 0..nv {
        if !mesh.is_dirichlet_vertex(v) {
            index[v] = vertices.len();
            vertices.push(v);
        }
    }
    if vertices.is_empty() {
        return Err(Error::InvalidMesh("no vertex off the Dirichlet boundary".into()));
    }
    let mut owner = index.clone();
    let mut centers: Vec<Vec<usize>> = vertices.iter().map(|&z| vec![z]).collect();
    for d in (0..nv).filter(|&v| mesh.is_dirichlet_vertex(v)) {
        let target = mesh
            .vertex_edges(d)
            .iter()
            .map(|&e| mesh.edge(e))
            .filter(|e| !e.is_boundary())
            .map(|e| if e.vertices[0] == d { e.vertices[1] } else { e.vertices[0] })
            .filter(|&z| !mesh.is_dirichlet_vertex(z))
            .min()
            .ok_or(Error::DirichletVertexIsolated(d))?;
        owner[d] = index[target];
        centers[index[target]].push(d);
    }
    let elements = centers
        .iter()
        .map(|cs| {
            let mut set = BTreeSet::new();
            for &c in cs {
                set.extend(mesh.vertex_patch(c)?.iter().copied());
            }
            Ok(set.into_iter().collect())
        })
        .collect::<Result<_>>()?;
    Ok(PartitionOfUnity {
        vertices,
        centers,
        elements,
        owner,
    })
}

/// Solution of one patch problem.
#[derive(Debug, Clone)]
pub struct PatchSolution {
    /// Global P3 dofs (`comp * n_nodes + node`) of the free unknowns.
    pub dofs: Vec<usize>,
    pub values: Vec<f64>,
    /// Element-mean multipliers in the order of the patch elements.
    pub multipliers: Vec<f64>,
    /// Relative KKT residual.
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct ConformingRecovery {
    pub field: FeField,
    pub patches: Vec<PatchSolution>,
}

/// Free P3 nodes of patch `i`: nodes on the center vertices, on edges
/// touching a center, and interior nodes, excluding the Dirichlet boundary.
pub fn patch_nodes(mesh: &Mesh, partition: &PartitionOfUnity, i: usize) -> Vec<usize> {
    let nv = mesh.n_vertices();
    let ne = mesh.n_edges();
    let is_center = |v: usize| partition.owner[v] == i;
    let mut set = BTreeSet::new();
    for &t in &partition.elements[i] {
        for node in p3_nodes(mesh, t) {
            let free = if node < nv {
                is_center(node) && !mesh.is_dirichlet_vertex(node)
            } else if node < nv + 2 * ne {
                let edge = mesh.edge((node - nv) / 2);
                !edge.is_dirichlet() && (is_center(edge.vertices[0]) || is_center(edge.vertices[1]))
            } else {
                true
            };
            if free {
                set.insert(node);
            }
        }
    }
    set.into_iter().collect()
}

/// Value and gradient of `u_h φ_i` on element `t`.
fn localized(u: &FeField, mesh: &Mesh, partition: &PartitionOfUnity, i: usize, t: usize, l: [f64; 3]) -> Tensor2 {
    let (uv, ug) = u.eval_broken_p2(mesh, t, l);
    let (phi, gphi) = partition.eval(mesh, i, t, l);
    let mut g = [[0.0; 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            g[r][c] = ug[r][c] * phi + uv[r] * gphi[c];
        }
    }
    g
}

/// Minimizes `‖∇(w − u_h φ_i)‖` over continuous P3 fields `w` supported on
/// the patch, subject to `(div w, 1)_T = (div(u_h φ_i), 1)_T` on each patch
/// element.
pub fn solve_patch(u: &FeField, mesh: &Mesh, partition: &PartitionOfUnity, i: usize) -> Result<PatchSolution> {
    let nodes = patch_nodes(mesh, partition, i);
    let elements = &partition.elements[i];
    let np = p3_node_count(mesh);
    let local = |node: usize| nodes.binary_search(&node).ok();
    let n = 2 * nodes.len();
    let m = elements.len();
    // a Neumann edge touching a center breaks the zero-sum dependency of
    // the constraints; otherwise one multiplier is pinned
    let open = partition.centers[i]
        .iter()
        .flat_map(|&c| mesh.vertex_edges(c).iter())
        .any(|&e| mesh.edge(e).is_neumann());
    let mc = if open { m } else { m - 1 };
    let dim = n + mc;
    let mut kkt = DMatrix::<f64>::zeros(dim, dim);
    let mut rhs = DVector::<f64>::zeros(dim);
    for (j, &t) in elements.iter().enumerate() {
        let geo = mesh.geometry(t);
        let tn = p3_nodes(mesh, t);
        let loc: Vec<Option<usize>> = tn.iter().map(|&nd| local(nd)).collect();
        let mut div_target = 0.0;
        for (l, &w) in VOLUME.points.iter().zip(&VOLUME.weights) {
            let wq = w * geo.area;
            let g: Vec<Vec2> = p3_dl(*l).iter().map(|d| bary_grad(*d, &geo.grad_bary)).collect();
            let gu = localized(u, mesh, partition, i, t, *l);
            div_target += wq * (gu[0][0] + gu[1][1]);
            for a in 0..10 {
                let Some(la) = loc[a] else { continue };
                for b in 0..10 {
                    let Some(lb) = loc[b] else { continue };
                    let v = wq * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
                    kkt[(la, lb)] += v;
                    kkt[(nodes.len() + la, nodes.len() + lb)] += v;
                }
                for c in 0..2 {
                    let row = c * nodes.len() + la;
                    rhs[row] += wq * (g[a][0] * gu[c][0] + g[a][1] * gu[c][1]);
                    if j < mc {
                        let v = wq * g[a][c];
                        kkt[(row, n + j)] += v;
                        kkt[(n + j, row)] += v;
                    }
                }
            }
        }
        if j < mc {
            rhs[n + j] = div_target;
        }
    }
    let sol = kkt
        .clone()
        .lu()
        .solve(&rhs)
        .filter(|s| s.iter().all(|v| v.is_finite()))
        .ok_or_else(|| Error::Singular {
            pivot: partition.vertices[i],
            detail: "patch saddle system".into(),
        })?;
    let res = (&kkt * &sol - &rhs).norm() / rhs.norm().max(f64::MIN_POSITIVE);
    let residual = if rhs.norm() == 0.0 { (&kkt * &sol).norm() } else { res };
    let mut dofs = Vec::with_capacity(n);
    for c in 0..2 {
        dofs.extend(nodes.iter().map(|&nd| c * np + nd));
    }
    let mut multipliers: Vec<f64> = sol.rows(n, mc).iter().copied().collect();
    multipliers.resize(m, 0.0);
    Ok(PatchSolution {
        dofs,
        values: sol.rows(0, n).iter().copied().collect(),
        multipliers,
        residual,
    })
}

/// `u_h^C = Σ_z u_{h,z}^C`.
pub fn recover_conforming(u: &FeField, mesh: &Mesh) -> Result<ConformingRecovery> {
    u.check_mesh(mesh)?;
    let partition = build_partition(mesh)?;
    recover_with(u, mesh, &partition)
}

pub fn recover_with(u: &FeField, mesh: &Mesh, partition: &PartitionOfUnity) -> Result<ConformingRecovery> {
    let patches: Vec<PatchSolution> = (0..partition.len())
        .into_par_iter()
        .map(|i| solve_patch(u, mesh, partition, i))
        .collect::<Result<_>>()?;
    let mut field = FeField::zeros(SpaceKind::P3ConfVector, mesh);
    for p in &patches {
        for (&d, &v) in p.dofs.iter().zip(&p.values) {
            field.coefficients[d] += v;
        }
    }
    Ok(ConformingRecovery { field, patches })
}

/// `(div v, 1)_T` for a broken P2 or continuous P3 vector field.
pub fn divergence_means(field: &FeField, mesh: &Mesh) -> Vec<f64> {
    (0..mesh.n_triangles())
        .map(|t| {
            let area = mesh.geometry(t).area;
            VOLUME
                .points
                .iter()
                .zip(&VOLUME.weights)
                .map(|(l, w)| {
                    let (_, g) = match field.kind() {
                        SpaceKind::P3ConfVector => field.eval_p3_conf(mesh, t, *l),
                        _ => field.eval_broken_p2(mesh, t, *l),
                    };
                    w * area * (g[0][0] + g[1][1])
                })
                .sum()
        })
        .collect()
}
