//! Conforming triangle meshes with Dirichlet/Neumann boundary labels.
//!
//! Triangles are stored counterclockwise. The local vertex order also encodes
//! the bisection state: edge `(v0, v1)` is the refinement edge and `v2` the
//! newest vertex. Local edge `k` is the edge opposite local vertex `k`.
//!
//! Edges are globally oriented from the lower to the higher vertex index. An
//! interior edge's normal points from the lower-indexed adjacent triangle
//! into the higher-indexed one; boundary normals point outward.

mod generate;
mod io;
mod refine;

use std::collections::HashMap;

pub use generate::{cook_membrane, cook_membrane_structured, unit_square};
pub use io::{read_mesh_file, write_mesh_file};
pub use refine::{refine, MarkSet};

use crate::error::{Error, Result};
use crate::tensor::{cross, norm, sub, Point, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryLabel {
    Dirichlet,
    Neumann,
}

impl BoundaryLabel {
    pub fn as_char(self) -> char {
        match self {
            BoundaryLabel::Dirichlet => 'D',
            BoundaryLabel::Neumann => 'N',
        }
    }
}

#[derive(Debug, Clone)]
pub struct Edge {
    /// `(lo, hi)` with `lo < hi`.
    pub vertices: [usize; 2],
    /// Adjacent triangles: `[lower, higher]` for interior edges, `[t, usize::MAX]` on the boundary.
    pub triangles: [usize; 2],
    pub label: Option<BoundaryLabel>,
    pub normal: Vec2,
    /// Unit tangent from `vertices[0]` to `vertices[1]`.
    pub tangent: Vec2,
    pub length: f64,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.triangles[1] == usize::MAX
    }

    pub fn is_dirichlet(&self) -> bool {
        self.label == Some(BoundaryLabel::Dirichlet)
    }

    pub fn is_neumann(&self) -> bool {
        self.label == Some(BoundaryLabel::Neumann)
    }

    pub fn adjacent(&self) -> impl Iterator<Item = usize> + '_ {
        self.triangles.iter().copied().filter(|&t| t != usize::MAX)
    }
}

#[derive(Debug, Clone)]
pub struct TriangleGeometry {
    pub area: f64,
    pub diameter: f64,
    pub min_angle: f64,
    pub centroid: Point,
    /// Gradients of the barycentric coordinates.
    pub grad_bary: [Vec2; 3],
}

/// Which structural checks [`build_mesh_with`] enforces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshChecks {
    /// Everything, including that every Dirichlet vertex owns an interior edge
    /// (needed by the conforming recovery).
    Full,
    /// Orientation, manifoldness and labels only.
    Topology,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    edges: Vec<Edge>,
    tri_edges: Vec<[usize; 3]>,
    geometry: Vec<TriangleGeometry>,
    vertex_triangles: Vec<Vec<usize>>,
    vertex_edges: Vec<Vec<usize>>,
    on_dirichlet: Vec<bool>,
    on_neumann: Vec<bool>,
    edge_lookup: HashMap<(usize, usize), usize>,
}

/// Builds a mesh after validating all structural invariants.
///
/// `boundary_labels` lists `(v0, v1, label)` for every boundary edge, in either
/// vertex order. Each triangle is rotated so that its longest edge becomes the
/// refinement edge; orientation is preserved.
pub fn build_mesh(
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    boundary_labels: &[(usize, usize, BoundaryLabel)],
) -> Result<Mesh> {
    build_mesh_with(vertices, triangles, boundary_labels, MeshChecks::Full)
}

pub fn build_mesh_with(
    vertices: Vec<Point>,
    mut triangles: Vec<[usize; 3]>,
    boundary_labels: &[(usize, usize, BoundaryLabel)],
    checks: MeshChecks,
) -> Result<Mesh> {
    for tri in triangles.iter_mut() {
        for &v in tri.iter() {
            if v >= vertices.len() {
                return Err(Error::IndexOutOfRange {
                    index: v,
                    len: vertices.len(),
                });
            }
        }
        let p = tri.map(|v| vertices[v]);
        let len = |a: usize, b: usize| norm(sub(p[b], p[a]));
        // rotate so that (v0, v1) is the longest edge, keeping CCW order
        let l = [len(1, 2), len(2, 0), len(0, 1)];
        let opposite_longest = (0..3)
            .max_by(|&a, &b| l[a].partial_cmp(&l[b]).unwrap().then(b.cmp(&a)))
            .unwrap();
        tri.rotate_left((opposite_longest + 1) % 3);
    }
    let mut labels = HashMap::new();
    for &(a, b, label) in boundary_labels {
        labels.insert(key(a, b), label);
    }
    Mesh::assemble(vertices, triangles, &labels, checks)
}

/// Triangles having `z` as a vertex.
pub fn vertex_patch(mesh: &Mesh, z: usize) -> Result<&[usize]> {
    mesh.vertex_patch(z)
}

#[inline]
pub(crate) fn key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl Mesh {
    /// Assembles connectivity without reordering triangle vertices.
    pub(crate) fn assemble(
        vertices: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        labels: &HashMap<(usize, usize), BoundaryLabel>,
        checks: MeshChecks,
    ) -> Result<Mesh> {
        let nv = vertices.len();
        if triangles.is_empty() {
            return Err(Error::InvalidMesh("no triangles".into()));
        }
        let mut geometry = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                if v >= nv {
                    return Err(Error::IndexOutOfRange { index: v, len: nv });
                }
            }
            let p = tri.map(|v| vertices[v]);
            let det = cross(sub(p[1], p[0]), sub(p[2], p[0]));
            if !(det > 0.0) {
                return Err(Error::InvertedTriangle(t));
            }
            geometry.push(triangle_geometry(p));
        }

        let mut edge_lookup: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges: Vec<Edge> = Vec::new();
        let mut tri_edges = vec![[0usize; 3]; triangles.len()];
        for (t, tri) in triangles.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (tri[(k + 1) % 3], tri[(k + 2) % 3]);
                let kk = key(a, b);
                let e = match edge_lookup.get(&kk) {
                    Some(&e) => {
                        let edge = &mut edges[e];
                        if edge.triangles[1] != usize::MAX {
                            return Err(Error::NonManifold(kk.0, kk.1));
                        }
                        edge.triangles[1] = t;
                        e
                    }
                    None => {
                        let e = edges.len();
                        let (pa, pb) = (vertices[kk.0], vertices[kk.1]);
                        let d = sub(pb, pa);
                        let length = norm(d);
                        let tangent = [d[0] / length, d[1] / length];
                        edges.push(Edge {
                            vertices: [kk.0, kk.1],
                            triangles: [t, usize::MAX],
                            label: None,
                            normal: [0.0; 2],
                            tangent,
                            length,
                        });
                        edge_lookup.insert(kk, e);
                        e
                    }
                };
                tri_edges[t][k] = e;
            }
        }

        let mut on_dirichlet = vec![false; nv];
        let mut on_neumann = vec![false; nv];
        let (mut any_d, mut any_n) = (false, false);
        for edge in edges.iter_mut() {
            // adjacency is recorded in increasing triangle order already
            let t0 = edge.triangles[0];
            // orient the normal to point out of triangles[0]
            let centroid = geometry[t0].centroid;
            let pa = vertices[edge.vertices[0]];
            let mut n = [edge.tangent[1], -edge.tangent[0]];
            let to_c = sub(centroid, pa);
            if n[0] * to_c[0] + n[1] * to_c[1] > 0.0 {
                n = [-n[0], -n[1]];
            }
            edge.normal = n;
            if edge.is_boundary() {
                let label = labels.get(&(edge.vertices[0], edge.vertices[1])).copied().ok_or(
                    Error::UnlabeledBoundary(edge.vertices[0], edge.vertices[1]),
                )?;
                edge.label = Some(label);
                let flags = match label {
                    BoundaryLabel::Dirichlet => {
                        any_d = true;
                        &mut on_dirichlet
                    }
                    BoundaryLabel::Neumann => {
                        any_n = true;
                        &mut on_neumann
                    }
                };
                flags[edge.vertices[0]] = true;
                flags[edge.vertices[1]] = true;
            }
        }
        if !any_d {
            return Err(Error::EmptyDirichlet);
        }
        if !any_n {
            return Err(Error::EmptyNeumann);
        }

        let mut vertex_triangles = vec![Vec::new(); nv];
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                vertex_triangles[v].push(t);
            }
        }
        let mut vertex_edges = vec![Vec::new(); nv];
        for (e, edge) in edges.iter().enumerate() {
            vertex_edges[edge.vertices[0]].push(e);
            vertex_edges[edge.vertices[1]].push(e);
        }
        if let Some(v) = vertex_triangles.iter().position(|ts| ts.is_empty()) {
            return Err(Error::InvalidMesh(format!("vertex {v} belongs to no triangle")));
        }

        let mesh = Mesh {
            vertices,
            triangles,
            edges,
            tri_edges,
            geometry,
            vertex_triangles,
            vertex_edges,
            on_dirichlet,
            on_neumann,
            edge_lookup,
        };
        if checks == MeshChecks::Full {
            mesh.check_dirichlet_interior_edges()?;
        }
        Ok(mesh)
    }

    /// Every vertex on the Dirichlet boundary must own an interior edge.
    pub fn check_dirichlet_interior_edges(&self) -> Result<()> {
        for v in 0..self.n_vertices() {
            if self.on_dirichlet[v]
                && !self.vertex_edges[v]
                    .iter()
                    .any(|&e| !self.edges[e].is_boundary())
            {
                return Err(Error::DirichletVertexIsolated(v));
            }
        }
        Ok(())
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn vertex(&self, v: usize) -> Point {
        self.vertices[v]
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn triangle(&self, t: usize) -> [usize; 3] {
        self.triangles[t]
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        self.triangles[t].map(|v| self.vertices[v])
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    /// Global edge index of local edge `k` (opposite local vertex `k`) of triangle `t`.
    pub fn triangle_edges(&self, t: usize) -> [usize; 3] {
        self.tri_edges[t]
    }

    pub fn geometry(&self, t: usize) -> &TriangleGeometry {
        &self.geometry[t]
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_lookup.get(&key(a, b)).copied()
    }

    pub fn is_dirichlet_vertex(&self, v: usize) -> bool {
        self.on_dirichlet[v]
    }

    pub fn is_neumann_vertex(&self, v: usize) -> bool {
        self.on_neumann[v]
    }

    pub fn vertex_edges(&self, v: usize) -> &[usize] {
        &self.vertex_edges[v]
    }

    /// Triangles having `z` as a vertex.
    pub fn vertex_patch(&self, z: usize) -> Result<&[usize]> {
        self.vertex_triangles
            .get(z)
            .map(|v| v.as_slice())
            .ok_or(Error::IndexOutOfRange {
                index: z,
                len: self.n_vertices(),
            })
    }

    /// Boundary labels in the `(v0, v1, label)` form accepted by [`build_mesh`].
    pub fn boundary_labels(&self) -> Vec<(usize, usize, BoundaryLabel)> {
        self.edges
            .iter()
            .filter_map(|e| e.label.map(|l| (e.vertices[0], e.vertices[1], l)))
            .collect()
    }

    pub fn area(&self) -> f64 {
        self.geometry.iter().map(|g| g.area).sum()
    }

    pub fn min_angle(&self) -> f64 {
        self.geometry
            .iter()
            .map(|g| g.min_angle)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_diameter(&self) -> f64 {
        self.geometry.iter().map(|g| g.diameter).fold(0.0, f64::max)
    }

    /// Sign (+1 or -1) of the global normal of local edge `k` relative to the
    /// outward normal of triangle `t`.
    pub fn normal_sign(&self, t: usize, k: usize) -> f64 {
        let e = &self.edges[self.tri_edges[t][k]];
        if e.triangles[0] == t {
            1.0
        } else {
            -1.0
        }
    }

    /// Physical point for barycentric coordinates on triangle `t`.
    pub fn map_point(&self, t: usize, bary: [f64; 3]) -> Point {
        let p = self.triangle_points(t);
        [
            bary[0] * p[0][0] + bary[1] * p[1][0] + bary[2] * p[2][0],
            bary[0] * p[0][1] + bary[1] * p[1][1] + bary[2] * p[2][1],
        ]
    }

    /// Barycentric coordinates of physical point `x` with respect to triangle `t`.
    pub fn barycentric(&self, t: usize, x: Point) -> [f64; 3] {
        let g = &self.geometry[t];
        let d = sub(x, g.centroid);
        let mut b = [0.0; 3];
        for (i, bi) in b.iter_mut().enumerate() {
            *bi = 1.0 / 3.0 + g.grad_bary[i][0] * d[0] + g.grad_bary[i][1] * d[1];
        }
        b
    }

    /// Barycentric coordinates on triangle `t` of the point at parameter `s`
    /// along local edge `k`, measured in the global edge orientation.
    pub fn edge_bary(&self, t: usize, k: usize, s: f64) -> [f64; 3] {
        let e = &self.edges[self.tri_edges[t][k]];
        let tri = self.triangles[t];
        let mut b = [0.0; 3];
        for (j, &v) in tri.iter().enumerate() {
            if v == e.vertices[0] {
                b[j] = 1.0 - s;
            } else if v == e.vertices[1] {
                b[j] = s;
            }
        }
        b
    }

    /// Point at parameter `s` along edge `e` in its global orientation.
    pub fn edge_point(&self, e: usize, s: f64) -> Point {
        let edge = &self.edges[e];
        let (a, b) = (self.vertices[edge.vertices[0]], self.vertices[edge.vertices[1]]);
        [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]
    }

    /// Local index `k` of edge `e` within triangle `t`.
    pub fn local_edge(&self, t: usize, e: usize) -> Option<usize> {
        self.tri_edges[t].iter().position(|&x| x == e)
    }
}

fn triangle_geometry(p: [Point; 3]) -> TriangleGeometry {
    let det = cross(sub(p[1], p[0]), sub(p[2], p[0]));
    let area = 0.5 * det;
    let mut grad_bary = [[0.0; 2]; 3];
    for i in 0..3 {
        let (a, b) = (p[(i + 1) % 3], p[(i + 2) % 3]);
        // gradient of lambda_i is the inward normal of the opposite edge scaled by 1/height
        grad_bary[i] = [(a[1] - b[1]) / det, (b[0] - a[0]) / det];
    }
    let lens = [
        norm(sub(p[1], p[2])),
        norm(sub(p[2], p[0])),
        norm(sub(p[0], p[1])),
    ];
    let diameter = lens.iter().cloned().fold(0.0, f64::max);
    let mut min_angle = f64::INFINITY;
    for i in 0..3 {
        let (a, b, c) = (lens[i], lens[(i + 1) % 3], lens[(i + 2) % 3]);
        let cos = ((b * b + c * c - a * a) / (2.0 * b * c)).clamp(-1.0, 1.0);
        min_angle = min_angle.min(cos.acos());
    }
    TriangleGeometry {
        area,
        diameter,
        min_angle,
        centroid: [
            (p[0][0] + p[1][0] + p[2][0]) / 3.0,
            (p[0][1] + p[1][1] + p[2][1]) / 3.0,
        ],
        grad_bary,
    }
}
