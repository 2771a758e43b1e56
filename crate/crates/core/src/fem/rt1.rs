//! Lowest-but-one Raviart–Thomas space (RT1) for tensor fields, row by row.
//!
//! Each row of the tensor is an RT1 vector field. On an element the space is
//! spanned by the eight polynomials below in the scaled local coordinate
//! `ξ = (x - c_T) / h_T`. Degrees of freedom per row:
//! * per edge, `∫_E v·n_E ψ_m` for `ψ_0 = 1`, `ψ_1 = 2s - 1`, with `n_E` the
//!   global edge normal and `s` the global edge parameter; these are shared
//!   by the neighbors, which gives normal continuity;
//! * per element, the means `|T|^{-1} ∫_T v_j`, `j = 0, 1`.
//!
//! Global numbering: edge dof `4e + 2 row + m`, then interior dof
//! `4 n_edges + 4t + 2 row + j`.

use rayon::prelude::*;

use crate::fem::quadrature::{EDGE, VOLUME};
use crate::mesh::Mesh;
use crate::tensor::{dot, Point, Tensor2, Vec2};

/// Local polynomial basis values at scaled coordinate `xi`.
#[inline]
pub fn poly(xi: Vec2) -> [Vec2; 8] {
    let [a, b] = xi;
    [
        [1.0, 0.0],
        [0.0, 1.0],
        [a, 0.0],
        [b, 0.0],
        [0.0, a],
        [0.0, b],
        [a * a, a * b],
        [a * b, b * b],
    ]
}

/// Divergences (in physical coordinates) of [`poly`].
#[inline]
pub fn poly_div(xi: Vec2, h: f64) -> [f64; 8] {
    let s = 1.0 / h;
    [0.0, 0.0, s, 0.0, 0.0, s, 3.0 * xi[0] * s, 3.0 * xi[1] * s]
}

#[inline]
pub fn psi(m: usize, s: f64) -> f64 {
    if m == 0 {
        1.0
    } else {
        2.0 * s - 1.0
    }
}

#[derive(Debug, Clone)]
pub struct Rt1Element {
    pub center: Point,
    pub h: f64,
    /// Maps local dofs to polynomial coefficients: `coeff = inv · dofs`.
    pub inv: [[f64; 8]; 8],
}

impl Rt1Element {
    #[inline]
    pub fn xi(&self, x: Point) -> Vec2 {
        [(x[0] - self.center[0]) / self.h, (x[1] - self.center[1]) / self.h]
    }

    pub fn coefficients(&self, dofs: &[f64; 8]) -> [f64; 8] {
        let mut c = [0.0; 8];
        for (i, ci) in c.iter_mut().enumerate() {
            *ci = (0..8).map(|j| self.inv[i][j] * dofs[j]).sum();
        }
        c
    }

    #[inline]
    pub fn value(&self, coeff: &[f64; 8], x: Point) -> Vec2 {
        let q = poly(self.xi(x));
        let mut v = [0.0; 2];
        for (c, qb) in coeff.iter().zip(q) {
            v[0] += c * qb[0];
            v[1] += c * qb[1];
        }
        v
    }

    #[inline]
    pub fn div(&self, coeff: &[f64; 8], x: Point) -> f64 {
        let d = poly_div(self.xi(x), self.h);
        coeff.iter().zip(d).map(|(c, d)| c * d).sum()
    }
}

/// Evaluates the eight local dof functionals (edge moments, then means) of a
/// vector field `v` on triangle `t`.
pub fn dof_functionals(mesh: &Mesh, t: usize, v: impl Fn(Point) -> Vec2) -> [f64; 8] {
    let mut out = [0.0; 8];
    let te = mesh.triangle_edges(t);
    for (k, &e) in te.iter().enumerate() {
        let edge = mesh.edge(e);
        for (&s, &w) in EDGE.points.iter().zip(&EDGE.weights) {
            let vn = dot(v(mesh.edge_point(e, s)), edge.normal) * w * edge.length;
            out[2 * k] += vn;
            out[2 * k + 1] += vn * psi(1, s);
        }
    }
    for (b, &w) in VOLUME.points.iter().zip(&VOLUME.weights) {
        let val = v(mesh.map_point(t, *b));
        out[6] += w * val[0];
        out[7] += w * val[1];
    }
    out
}

#[derive(Debug, Clone)]
pub struct Rt1Space {
    pub n_edges: usize,
    pub n_triangles: usize,
    pub elements: Vec<Rt1Element>,
    tri_edges: Vec<[usize; 3]>,
}

impl Rt1Space {
    pub fn new(mesh: &Mesh) -> Self {
        let elements = (0..mesh.n_triangles())
            .into_par_iter()
            .map(|t| build_element(mesh, t))
            .collect();
        Rt1Space {
            n_edges: mesh.n_edges(),
            n_triangles: mesh.n_triangles(),
            elements,
            tri_edges: (0..mesh.n_triangles()).map(|t| mesh.triangle_edges(t)).collect(),
        }
    }

    pub fn n_dofs(&self) -> usize {
        4 * (self.n_edges + self.n_triangles)
    }

    #[inline]
    pub fn edge_dof(&self, e: usize, row: usize, m: usize) -> usize {
        4 * e + 2 * row + m
    }

    #[inline]
    pub fn interior_dof(&self, t: usize, row: usize, j: usize) -> usize {
        4 * self.n_edges + 4 * t + 2 * row + j
    }

    /// Global indices of the eight local dofs of one tensor row.
    pub fn local_dofs(&self, t: usize, row: usize) -> [usize; 8] {
        let te = self.tri_edges[t];
        let mut d = [0usize; 8];
        for k in 0..3 {
            d[2 * k] = self.edge_dof(te[k], row, 0);
            d[2 * k + 1] = self.edge_dof(te[k], row, 1);
        }
        d[6] = self.interior_dof(t, row, 0);
        d[7] = self.interior_dof(t, row, 1);
        d
    }

    /// Polynomial coefficients of both rows on element `t`.
    pub fn local_coefficients(&self, coeffs: &[f64], t: usize) -> [[f64; 8]; 2] {
        let mut out = [[0.0; 8]; 2];
        for (row, o) in out.iter_mut().enumerate() {
            let d = self.local_dofs(t, row).map(|i| coeffs[i]);
            *o = self.elements[t].coefficients(&d);
        }
        out
    }

    /// Tensor value and row divergence at physical point `x` of element `t`.
    pub fn eval(&self, coeffs: &[f64], t: usize, x: Point) -> (Tensor2, Vec2) {
        let c = self.local_coefficients(coeffs, t);
        eval_local(&self.elements[t], &c, x)
    }
}

#[inline]
pub fn eval_local(el: &Rt1Element, c: &[[f64; 8]; 2], x: Point) -> (Tensor2, Vec2) {
    (
        [el.value(&c[0], x), el.value(&c[1], x)],
        [el.div(&c[0], x), el.div(&c[1], x)],
    )
}

pub(crate) fn build_element(mesh: &Mesh, t: usize) -> Rt1Element {
    let g = mesh.geometry(t);
    let proto = Rt1Element {
        center: g.centroid,
        h: g.diameter,
        inv: [[0.0; 8]; 8],
    };
    let mut d = nalgebra::SMatrix::<f64, 8, 8>::zeros();
    for b in 0..8 {
        let col = dof_functionals(mesh, t, |x| poly(proto.xi(x))[b]);
        for (i, v) in col.iter().enumerate() {
            d[(i, b)] = *v;
        }
    }
    let inv = d
        .try_inverse()
        .expect("RT1 dof matrix is invertible on nondegenerate triangles");
    let mut out = [[0.0; 8]; 8];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = inv[(i, j)];
        }
    }
    Rt1Element { inv: out, ..proto }
}
