//! Degree-of-freedom layouts and coefficient vectors.

use super::basis::{bary_grad, p2, p2_dl, p3, p3_dl, Bary};
use super::rt1::build_element;
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::tensor::{Tensor2, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpaceKind {
    /// Discontinuous P2 vector field, `12t + 6c + node`.
    BrokenP2Vector,
    /// Discontinuous P1 scalar by vertex values, `3t + i`.
    P1DiscScalar,
    /// Discontinuous P1 vector field, `6t + 3c + i`.
    P1DiscVector,
    /// Discontinuous P1 tensor field, `12t + 3(2r + c) + i`.
    P1DiscTensor,
    /// Piecewise constants, `t`.
    P0Scalar,
    /// Piecewise constant vector field, `2t + c`.
    P0Vector,
    /// Continuous P2 vector field on vertices and edge midpoints,
    /// `c (nv + ne) + node`.
    P2ConfVector,
    /// Continuous P3 vector field, `c (nv + 2ne + nt) + node` with vertex nodes,
    /// two nodes per edge (nearer `lo` first) and one per triangle.
    P3ConfVector,
    /// RT1 tensor field, see [`super::rt1::Rt1Space`].
    Rt1Tensor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Entity {
    Vertex(usize),
    Edge(usize),
    Triangle(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpaceDescriptor {
    pub kind: SpaceKind,
    pub n_dofs: usize,
    n_vertices: usize,
    n_edges: usize,
    n_triangles: usize,
}

impl SpaceDescriptor {
    pub fn new(kind: SpaceKind, mesh: &Mesh) -> Self {
        let (nv, ne, nt) = (mesh.n_vertices(), mesh.n_edges(), mesh.n_triangles());
        let n_dofs = match kind {
            SpaceKind::BrokenP2Vector => 12 * nt,
            SpaceKind::P1DiscScalar => 3 * nt,
            SpaceKind::P1DiscVector => 6 * nt,
            SpaceKind::P1DiscTensor => 12 * nt,
            SpaceKind::P0Scalar => nt,
            SpaceKind::P0Vector => 2 * nt,
            SpaceKind::P2ConfVector => 2 * (nv + ne),
            SpaceKind::P3ConfVector => 2 * (nv + 2 * ne + nt),
            SpaceKind::Rt1Tensor => 4 * (ne + nt),
        };
        SpaceDescriptor {
            kind,
            n_dofs,
            n_vertices: nv,
            n_edges: ne,
            n_triangles: nt,
        }
    }

    pub fn matches(&self, mesh: &Mesh) -> bool {
        self.n_vertices == mesh.n_vertices()
            && self.n_edges == mesh.n_edges()
            && self.n_triangles == mesh.n_triangles()
    }

    /// The mesh entity a dof is attached to and its index among that
    /// entity's dofs.
    pub fn dof_entity(&self, dof: usize) -> Result<(Entity, usize)> {
        if dof >= self.n_dofs {
            return Err(Error::IndexOutOfRange {
                index: dof,
                len: self.n_dofs,
            });
        }
        let (nv, ne) = (self.n_vertices, self.n_edges);
        let per_tri = |n: usize| (Entity::Triangle(dof / n), dof % n);
        Ok(match self.kind {
            SpaceKind::BrokenP2Vector | SpaceKind::P1DiscTensor => per_tri(12),
            SpaceKind::P1DiscScalar => per_tri(3),
            SpaceKind::P1DiscVector => per_tri(6),
            SpaceKind::P0Scalar => per_tri(1),
            SpaceKind::P0Vector => per_tri(2),
            SpaceKind::P2ConfVector => {
                let (c, node) = (dof / (nv + ne), dof % (nv + ne));
                if node < nv {
                    (Entity::Vertex(node), c)
                } else {
                    (Entity::Edge(node - nv), c)
                }
            }
            SpaceKind::P3ConfVector => {
                let n = nv + 2 * ne + self.n_triangles;
                let (c, node) = (dof / n, dof % n);
                if node < nv {
                    (Entity::Vertex(node), c)
                } else if node < nv + 2 * ne {
                    (Entity::Edge((node - nv) / 2), 2 * c + (node - nv) % 2)
                } else {
                    (Entity::Triangle(node - nv - 2 * ne), c)
                }
            }
            SpaceKind::Rt1Tensor => {
                if dof < 4 * ne {
                    (Entity::Edge(dof / 4), dof % 4)
                } else {
                    (Entity::Triangle((dof - 4 * ne) / 4), (dof - 4 * ne) % 4)
                }
            }
        })
    }
}

/// Global P2 node indices (vertices, then `nv + edge`) of triangle `t`.
pub fn p2_nodes(mesh: &Mesh, t: usize) -> [usize; 6] {
    let tri = mesh.triangle(t);
    let te = mesh.triangle_edges(t);
    let nv = mesh.n_vertices();
    [tri[0], tri[1], tri[2], nv + te[0], nv + te[1], nv + te[2]]
}

/// Global P3 node indices of triangle `t`, matching the local node order of
/// [`super::basis::P3_NODES`].
pub fn p3_nodes(mesh: &Mesh, t: usize) -> [usize; 10] {
    let tri = mesh.triangle(t);
    let te = mesh.triangle_edges(t);
    let (nv, ne) = (mesh.n_vertices(), mesh.n_edges());
    let mut n = [0usize; 10];
    n[..3].copy_from_slice(&tri);
    for k in 0..3 {
        let near_first = tri[(k + 1) % 3];
        let lo = mesh.edge(te[k]).vertices[0];
        let (a, b) = if near_first == lo { (0, 1) } else { (1, 0) };
        n[3 + 2 * k] = nv + 2 * te[k] + a;
        n[4 + 2 * k] = nv + 2 * te[k] + b;
    }
    n[9] = nv + 2 * ne + t;
    n
}

pub fn p3_node_count(mesh: &Mesh) -> usize {
    mesh.n_vertices() + 2 * mesh.n_edges() + mesh.n_triangles()
}

/// A finite element function: descriptor plus coefficients.
#[derive(Debug, Clone)]
pub struct FeField {
    pub space: SpaceDescriptor,
    pub coefficients: Vec<f64>,
}

impl FeField {
    pub fn new(space: SpaceDescriptor, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.len() != space.n_dofs {
            return Err(Error::InvalidParameter(format!(
                "{:?} field needs {} coefficients, got {}",
                space.kind,
                space.n_dofs,
                coefficients.len()
            )));
        }
        Ok(FeField {
            space,
            coefficients,
        })
    }

    pub fn zeros(kind: SpaceKind, mesh: &Mesh) -> Self {
        let space = SpaceDescriptor::new(kind, mesh);
        let coefficients = vec![0.0; space.n_dofs];
        FeField {
            space,
            coefficients,
        }
    }

    pub fn kind(&self) -> SpaceKind {
        self.space.kind
    }

    pub fn check_mesh(&self, mesh: &Mesh) -> Result<()> {
        if self.space.matches(mesh) {
            Ok(())
        } else {
            Err(Error::MeshMismatch)
        }
    }

    /// Value and gradient `g[i][j] = ∂u_i/∂x_j` of a broken P2 vector field.
    pub fn eval_broken_p2(&self, mesh: &Mesh, t: usize, l: Bary) -> (Vec2, Tensor2) {
        debug_assert_eq!(self.kind(), SpaceKind::BrokenP2Vector);
        let c = &self.coefficients[12 * t..12 * t + 12];
        lagrange_eval(&p2(l), &p2_dl(l), &mesh.geometry(t).grad_bary, |comp, n| c[6 * comp + n])
    }

    /// Value and gradient of a continuous P3 vector field.
    pub fn eval_p3_conf(&self, mesh: &Mesh, t: usize, l: Bary) -> (Vec2, Tensor2) {
        debug_assert_eq!(self.kind(), SpaceKind::P3ConfVector);
        let nodes = p3_nodes(mesh, t);
        let stride = p3_node_count(mesh);
        let c = &self.coefficients;
        lagrange_eval(&p3(l), &p3_dl(l), &mesh.geometry(t).grad_bary, |comp, n| {
            c[comp * stride + nodes[n]]
        })
    }

    /// Value and gradient of a continuous P2 vector field.
    pub fn eval_p2_conf(&self, mesh: &Mesh, t: usize, l: Bary) -> (Vec2, Tensor2) {
        debug_assert_eq!(self.kind(), SpaceKind::P2ConfVector);
        let nodes = p2_nodes(mesh, t);
        let stride = mesh.n_vertices() + mesh.n_edges();
        let c = &self.coefficients;
        lagrange_eval(&p2(l), &p2_dl(l), &mesh.geometry(t).grad_bary, |comp, n| {
            c[comp * stride + nodes[n]]
        })
    }

    pub fn eval_p1_scalar(&self, t: usize, l: Bary) -> f64 {
        debug_assert_eq!(self.kind(), SpaceKind::P1DiscScalar);
        let c = &self.coefficients[3 * t..3 * t + 3];
        c[0] * l[0] + c[1] * l[1] + c[2] * l[2]
    }

    pub fn eval_p1_vector(&self, t: usize, l: Bary) -> Vec2 {
        debug_assert_eq!(self.kind(), SpaceKind::P1DiscVector);
        let c = &self.coefficients[6 * t..6 * t + 6];
        [
            c[0] * l[0] + c[1] * l[1] + c[2] * l[2],
            c[3] * l[0] + c[4] * l[1] + c[5] * l[2],
        ]
    }

    pub fn eval_p1_tensor(&self, t: usize, l: Bary) -> Tensor2 {
        debug_assert_eq!(self.kind(), SpaceKind::P1DiscTensor);
        let c = &self.coefficients[12 * t..12 * t + 12];
        let f = |k: usize| c[3 * k] * l[0] + c[3 * k + 1] * l[1] + c[3 * k + 2] * l[2];
        [[f(0), f(1)], [f(2), f(3)]]
    }

    pub fn eval_p0(&self, t: usize) -> f64 {
        self.coefficients[t]
    }
}

pub(crate) fn lagrange_eval<const N: usize>(
    v: &[f64; N],
    dl: &[[f64; 3]; N],
    grad_bary: &[Vec2; 3],
    coeff: impl Fn(usize, usize) -> f64,
) -> (Vec2, Tensor2) {
    let mut u = [0.0; 2];
    let mut g = [[0.0; 2]; 2];
    for n in 0..N {
        let gn = bary_grad(dl[n], grad_bary);
        for comp in 0..2 {
            let cn = coeff(comp, n);
            u[comp] += cn * v[n];
            g[comp][0] += cn * gn[0];
            g[comp][1] += cn * gn[1];
        }
    }
    (u, g)
}

/// Reference basis evaluations on one element.
#[derive(Debug, Clone)]
pub enum BasisEval {
    /// Per point, per scalar basis function: values and physical gradients.
    /// Vector Lagrange spaces use the same scalar basis for each component.
    Scalar {
        values: Vec<Vec<f64>>,
        grads: Vec<Vec<Vec2>>,
    },
    /// Per point, per dof of one tensor row: vector values and divergences.
    Vector {
        values: Vec<Vec<Vec2>>,
        divs: Vec<Vec<f64>>,
    },
}

/// Evaluates the local basis of `space` at barycentric `points` of triangle `t`.
pub fn eval_basis(space: SpaceKind, mesh: &Mesh, t: usize, points: &[Bary]) -> BasisEval {
    let gb = mesh.geometry(t).grad_bary;
    let scalar = |f: &dyn Fn(Bary) -> (Vec<f64>, Vec<[f64; 3]>)| {
        let mut values = Vec::with_capacity(points.len());
        let mut grads = Vec::with_capacity(points.len());
        for &l in points {
            let (v, d) = f(l);
            values.push(v);
            grads.push(d.iter().map(|dl| bary_grad(*dl, &gb)).collect());
        }
        BasisEval::Scalar { values, grads }
    };
    match space {
        SpaceKind::BrokenP2Vector | SpaceKind::P2ConfVector => {
            scalar(&|l| (p2(l).to_vec(), p2_dl(l).to_vec()))
        }
        SpaceKind::P3ConfVector => scalar(&|l| (p3(l).to_vec(), p3_dl(l).to_vec())),
        SpaceKind::P1DiscScalar | SpaceKind::P1DiscVector | SpaceKind::P1DiscTensor => scalar(
            &|l| {
                (
                    l.to_vec(),
                    vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
                )
            },
        ),
        SpaceKind::P0Scalar | SpaceKind::P0Vector => scalar(&|_| (vec![1.0], vec![[0.0; 3]])),
        SpaceKind::Rt1Tensor => {
            let el = build_element(mesh, t);
            let mut values = Vec::with_capacity(points.len());
            let mut divs = Vec::with_capacity(points.len());
            for &l in points {
                let x = mesh.map_point(t, l);
                let mut vrow = Vec::with_capacity(8);
                let mut drow = Vec::with_capacity(8);
                for d in 0..8 {
                    let c: [f64; 8] = std::array::from_fn(|b| el.inv[b][d]);
                    vrow.push(el.value(&c, x));
                    drow.push(el.div(&c, x));
                }
                values.push(vrow);
                divs.push(drow);
            }
            BasisEval::Vector { values, divs }
        }
    }
}
