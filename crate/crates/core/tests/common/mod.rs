//! Independent dense oracles shared by the oracle and acceptance tests.
//!
//! Nothing here uses the library's quadrature, local bases or solvers: volume
//! integrals use Radon's 7-point rule, edge integrals 3-point Gauss, and all
//! local spaces are built from scaled monomials or Bernstein polynomials.

#![allow(dead_code)]

use std::sync::Arc;

use equilibra::elasticity::{DiscreteSolution, ElasticityProblem};
use equilibra::fem::space::{FeField, SpaceKind};
use equilibra::mesh::{build_mesh, BoundaryLabel, Mesh};
use equilibra::recovery::{ConformingRecovery, PartitionOfUnity};
use equilibra::stress_recon::ReconstructedStress;
use equilibra::symmetrize::SymmetryKkt;
use equilibra::{Point, Tensor2, Vec2};
use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

// ---------------------------------------------------------------- quadrature

/// Radon's 7-point rule, exact to degree 5; weights sum to one.
pub fn radon() -> Vec<([f64; 3], f64)> {
    let r = 15f64.sqrt();
    let (a1, b1, w1) = ((6.0 - r) / 21.0, (9.0 + 2.0 * r) / 21.0, (155.0 - r) / 1200.0);
    let (a2, b2, w2) = ((6.0 + r) / 21.0, (9.0 - 2.0 * r) / 21.0, (155.0 + r) / 1200.0);
    vec![
        ([1.0 / 3.0; 3], 9.0 / 40.0),
        ([b1, a1, a1], w1),
        ([a1, b1, a1], w1),
        ([a1, a1, b1], w1),
        ([b2, a2, a2], w2),
        ([a2, b2, a2], w2),
        ([a2, a2, b2], w2),
    ]
}

/// 3-point Gauss on `[0, 1]`.
pub fn gauss3() -> [(f64, f64); 3] {
    let r = (0.6f64).sqrt();
    [(0.5 * (1.0 - r), 5.0 / 18.0), (0.5, 8.0 / 18.0), (0.5 * (1.0 + r), 5.0 / 18.0)]
}

pub fn to_point(mesh: &Mesh, t: usize, l: [f64; 3]) -> Point {
    let p = mesh.triangle_points(t);
    [
        l[0] * p[0][0] + l[1] * p[1][0] + l[2] * p[2][0],
        l[0] * p[0][1] + l[1] * p[1][1] + l[2] * p[2][1],
    ]
}

pub fn area(p: [Point; 3]) -> f64 {
    0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]))
}

fn dist(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

pub fn diameter(p: [Point; 3]) -> f64 {
    dist(p[0], p[1]).max(dist(p[1], p[2])).max(dist(p[2], p[0]))
}

/// Barycentric coordinates of `x` in `p`, by Cramer's rule.
pub fn bary_of(p: [Point; 3], x: Point) -> [f64; 3] {
    let a = area(p);
    let sub = |q: [Point; 3]| area(q) / a;
    [sub([x, p[1], p[2]]), sub([p[0], x, p[2]]), sub([p[0], p[1], x])]
}

// ---------------------------------------------------------------- meshes and data

/// Unit square split into four triangles around its center; `x = 0` is
/// Dirichlet.
pub fn fan4() -> Mesh {
    let v = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.45, 0.55]];
    let t = vec![[0, 1, 4], [1, 2, 4], [2, 3, 4], [3, 0, 4]];
    use BoundaryLabel::*;
    build_mesh(v, t, &[(0, 1, Neumann), (1, 2, Neumann), (2, 3, Neumann), (3, 0, Dirichlet)]).unwrap()
}

/// A triangle split into three around an interior point; one Dirichlet side.
pub fn tri3() -> Mesh {
    let v = vec![[0.0, 0.0], [1.2, 0.1], [0.2, 0.9], [0.45, 0.3]];
    let t = vec![[0, 1, 3], [1, 2, 3], [2, 0, 3]];
    use BoundaryLabel::*;
    build_mesh(v, t, &[(0, 1, Neumann), (1, 2, Neumann), (2, 0, Dirichlet)]).unwrap()
}

pub fn small_meshes() -> Vec<(&'static str, Mesh)> {
    vec![
        ("unit-square-1", equilibra::mesh::unit_square(1)),
        ("fan4", fan4()),
        ("tri3", tri3()),
    ]
}

/// Quadratic load and tractions from a linear stress-like field, so that
/// every oracle integral below is exact.
pub fn polynomial_problem(mesh: Mesh, mu: f64, lambda_inv: f64) -> ElasticityProblem {
    ElasticityProblem::new(
        mesh,
        mu,
        lambda_inv,
        Arc::new(|x: Point| [1.0 + x[0] * x[0] - x[0] * x[1], 2.0 * x[1] * x[1] + x[0] - 0.5]),
        Arc::new(|x: Point, n: Vec2| {
            let a = [[1.0 + x[0], 0.5 * x[1]], [0.3 * x[0], 2.0 - x[1]]];
            [a[0][0] * n[0] + a[0][1] * n[1], a[1][0] * n[0] + a[1][1] * n[1]]
        }),
    )
    .unwrap()
}

// ---------------------------------------------------------------- scaled monomials

/// Scaled monomials `ξ^a η^b`, `a + b <= deg`, with gradients.
pub struct Monomials {
    pub exps: Vec<(i32, i32)>,
    pub c: Point,
    pub h: f64,
}

impl Monomials {
    pub fn new(p: [Point; 3], deg: i32) -> Self {
        let c = [(p[0][0] + p[1][0] + p[2][0]) / 3.0, (p[0][1] + p[1][1] + p[2][1]) / 3.0];
        let exps = (0..=deg).flat_map(|d| (0..=d).map(move |b| (d - b, b))).collect();
        Monomials { exps, c, h: diameter(p) }
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn eval(&self, x: Point) -> Vec<(f64, Vec2)> {
        let (u, v) = ((x[0] - self.c[0]) / self.h, (x[1] - self.c[1]) / self.h);
        let pw = |z: f64, e: i32| if e <= 0 { 1.0 } else { z.powi(e) };
        self.exps
            .iter()
            .map(|&(a, b)| {
                let val = pw(u, a) * pw(v, b);
                let dx = if a > 0 { a as f64 * pw(u, a - 1) * pw(v, b) / self.h } else { 0.0 };
                let dy = if b > 0 { b as f64 * pw(u, a) * pw(v, b - 1) / self.h } else { 0.0 };
                (val, [dx, dy])
            })
            .collect()
    }
}

fn lu_solve(a: DMatrix<f64>, b: DVector<f64>) -> DVector<f64> {
    a.full_piv_lu().solve(&b).expect("dense oracle system is singular")
}

// ---------------------------------------------------------------- (b) elasticity

/// Displacement and pressure of the discrete saddle problem, assembled
/// from scratch with per-element monomial bases.
pub struct ElasticityOracle {
    bases_u: Vec<Monomials>,
    bases_p: Vec<Monomials>,
    x: DVector<f64>,
}

impl ElasticityOracle {
    pub fn solve(problem: &ElasticityProblem) -> Self {
        let mesh = &problem.mesh;
        let nt = mesh.n_triangles();
        let bases_u: Vec<Monomials> = (0..nt).map(|t| Monomials::new(mesh.triangle_points(t), 2)).collect();
        let bases_p: Vec<Monomials> = (0..nt).map(|t| Monomials::new(mesh.triangle_points(t), 1)).collect();
        let ui = |t: usize, c: usize, k: usize| 12 * t + 6 * c + k;
        let pi = |t: usize, k: usize| 12 * nt + 3 * t + k;
        let constrained: Vec<usize> = (0..mesh.n_edges())
            .filter(|&e| !mesh.edge(e).is_neumann())
            .collect();
        let dim = 15 * nt + 4 * constrained.len();
        let mut a = DMatrix::<f64>::zeros(dim, dim);
        let mut rhs = DVector::<f64>::zeros(dim);
        let (mu, li) = (problem.mu, problem.lambda_inv);
        for t in 0..nt {
            let p = mesh.triangle_points(t);
            let ar = area(p);
            let mut fbar = [0.0; 2];
            for (l, w) in radon() {
                let f = (problem.f)(to_point(mesh, t, l));
                fbar[0] += w * f[0];
                fbar[1] += w * f[1];
            }
            for (l, w) in radon() {
                let x = to_point(mesh, t, l);
                let wq = w * ar;
                let mu_ = bases_u[t].eval(x);
                let mp = bases_p[t].eval(x);
                for c in 0..2 {
                    for (k, &(vk, gk)) in mu_.iter().enumerate() {
                        let gi = grad_of(c, gk);
                        rhs[ui(t, c, k)] += wq * fbar[c] * vk;
                        for d in 0..2 {
                            for (m, &(_, gm)) in mu_.iter().enumerate() {
                                let gj = grad_of(d, gm);
                                a[(ui(t, c, k), ui(t, d, m))] += wq * 2.0 * mu * sym_inner(&gi, &gj);
                            }
                        }
                        for (q, &(vq, _)) in mp.iter().enumerate() {
                            let v = wq * vq * (gi[0][0] + gi[1][1]);
                            a[(pi(t, q), ui(t, c, k))] += v;
                            a[(ui(t, c, k), pi(t, q))] += v;
                        }
                    }
                }
                for (q, &(vq, _)) in mp.iter().enumerate() {
                    for (r, &(vr, _)) in mp.iter().enumerate() {
                        a[(pi(t, q), pi(t, r))] -= wq * li * vq * vr;
                    }
                }
            }
        }
        for (j, &e) in constrained.iter().enumerate() {
            let edge = mesh.edge(e);
            let sides: Vec<(usize, f64)> = if edge.is_boundary() {
                vec![(edge.triangles[0], 1.0)]
            } else {
                vec![(edge.triangles[0], 1.0), (edge.triangles[1], -1.0)]
            };
            for (t, sign) in sides {
                for (s, w) in gauss3() {
                    let vals = bases_u[t].eval(mesh.edge_point(e, s));
                    for m in 0..2 {
                        let psi = if m == 0 { 1.0 } else { 2.0 * s - 1.0 };
                        for c in 0..2 {
                            let row = 15 * nt + 4 * j + 2 * c + m;
                            for (k, &(vk, _)) in vals.iter().enumerate() {
                                let v = sign * w * edge.length * psi * vk;
                                a[(row, ui(t, c, k))] += v;
                                a[(ui(t, c, k), row)] += v;
                            }
                        }
                    }
                }
            }
        }
        for e in (0..mesh.n_edges()).filter(|&e| mesh.edge(e).is_neumann()) {
            let edge = mesh.edge(e);
            let t = edge.triangles[0];
            for (s, w) in gauss3() {
                let x = mesh.edge_point(e, s);
                let g = (problem.g)(x, edge.normal);
                for (k, &(vk, _)) in bases_u[t].eval(x).iter().enumerate() {
                    for c in 0..2 {
                        rhs[ui(t, c, k)] += w * edge.length * g[c] * vk;
                    }
                }
            }
        }
        ElasticityOracle {
            bases_u,
            bases_p,
            x: lu_solve(a, rhs),
        }
    }

    pub fn u(&self, t: usize, x: Point) -> Vec2 {
        let mut out = [0.0; 2];
        for (k, (v, _)) in self.bases_u[t].eval(x).into_iter().enumerate() {
            for (c, o) in out.iter_mut().enumerate() {
                *o += self.x[12 * t + 6 * c + k] * v;
            }
        }
        out
    }

    pub fn p(&self, t: usize, x: Point) -> f64 {
        let nt = self.bases_u.len();
        self.bases_p[t]
            .eval(x)
            .into_iter()
            .enumerate()
            .map(|(k, (v, _))| self.x[12 * nt + 3 * t + k] * v)
            .sum()
    }
}

fn grad_of(c: usize, g: Vec2) -> Tensor2 {
    let mut out = [[0.0; 2]; 2];
    out[c] = g;
    out
}

fn sym_inner(a: &Tensor2, b: &Tensor2) -> f64 {
    let mut s = 0.0;
    for r in 0..2 {
        for c in 0..2 {
            s += 0.25 * (a[r][c] + a[c][r]) * (b[r][c] + b[c][r]);
        }
    }
    s
}

/// Largest deviation between the library solution and the oracle at the
/// Radon points, relative to `1 + max |oracle|`.
pub fn elasticity_discrepancy(sol: &DiscreteSolution, problem: &ElasticityProblem) -> f64 {
    let oracle = ElasticityOracle::solve(problem);
    let mesh = &problem.mesh;
    let (mut diff, mut scale) = (0.0f64, 0.0f64);
    for t in 0..mesh.n_triangles() {
        for (l, _) in radon() {
            let x = to_point(mesh, t, l);
            let (u, _) = sol.eval_u(mesh, t, l);
            let uo = oracle.u(t, x);
            let (p, po) = (sol.eval_p(t, l), oracle.p(t, x));
            diff = diff.max((u[0] - uo[0]).abs()).max((u[1] - uo[1]).abs()).max((p - po).abs());
            scale = scale.max(uo[0].abs()).max(uo[1].abs()).max(po.abs());
        }
    }
    diff / (1.0 + scale)
}

/// Dense LU of an assembled sparse system.
pub fn dense_solve(system: &equilibra::linalg::SparseSystem) -> Vec<f64> {
    let n = system.dim();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for (r, c, v) in system.entries() {
        a[(r, c)] += v;
    }
    lu_solve(a, DVector::from_column_slice(&system.rhs)).iter().copied().collect()
}

pub fn max_rel_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / (1.0 + scale)
}

/// Symmetry saddle system against dense LU: `(χ, ν)` discrepancy.
pub fn symmetry_discrepancy(kkt: &SymmetryKkt, chi: &FeField, nu: &[f64]) -> f64 {
    let x = dense_solve(&kkt.system);
    let n = kkt.n_chi();
    let lib: Vec<f64> = kkt.chi_dofs.iter().map(|&g| chi.coefficients[g]).chain(nu.iter().copied()).collect();
    debug_assert_eq!(lib.len(), x.len());
    debug_assert!(n <= x.len());
    max_rel_diff(&lib, &x)
}

// ---------------------------------------------------------------- (a) reconstruction

/// P1 L² projection of `f` on element `t`, as values at the vertices.
pub fn p1_projection(f: &(dyn Fn(Point) -> Vec2 + Sync), mesh: &Mesh, t: usize) -> [Vec2; 3] {
    // mass matrix (1 + δ_ij) |T| / 12
    let ar = area(mesh.triangle_points(t));
    let mut b = [[0.0; 2]; 3];
    for (l, w) in radon() {
        let v = f(to_point(mesh, t, l));
        for i in 0..3 {
            for c in 0..2 {
                b[i][c] += w * ar * l[i] * v[c];
            }
        }
    }
    let m = nalgebra::Matrix3::from_fn(|i, j| ar / 12.0 * if i == j { 2.0 } else { 1.0 });
    let inv = m.try_inverse().unwrap();
    let mut out = [[0.0; 2]; 3];
    for i in 0..3 {
        for c in 0..2 {
            out[i][c] = (0..3).map(|j| inv[(i, j)] * b[j][c]).sum();
        }
    }
    out
}

/// Solves all reconstruction conditions at once: every edge moment of the
/// normal trace and every P1 moment of `div σ + P_h f`, in the least-squares
/// sense over the whole RT1 space. Returns the coefficient discrepancy and
/// the least-squares residual.
pub fn reconstruction_discrepancy(
    problem: &ElasticityProblem,
    sigma_h: &FeField,
    rs: &ReconstructedStress,
) -> (f64, f64) {
    let mesh = &problem.mesh;
    let space = &rs.space;
    let n = space.n_dofs();
    let (ne, nt) = (mesh.n_edges(), mesh.n_triangles());
    let rows = 4 * ne + 6 * nt;
    let mut m = DMatrix::<f64>::zeros(rows, n);
    let mut b = DVector::<f64>::zeros(rows);
    let mut unit = vec![0.0; n];
    let sigma_at = |t: usize, x: Point| sigma_h.eval_p1_tensor(t, bary_of(mesh.triangle_points(t), x));
    let trace = |t: usize, e: usize, r: usize, mm: usize| -> f64 {
        let edge = mesh.edge(e);
        gauss3()
            .iter()
            .map(|&(s, w)| {
                let x = mesh.edge_point(e, s);
                let sg = sigma_at(t, x);
                let psi = if mm == 0 { 1.0 } else { 2.0 * s - 1.0 };
                w * edge.length * psi * (sg[r][0] * edge.normal[0] + sg[r][1] * edge.normal[1])
            })
            .sum()
    };
    for e in 0..ne {
        let edge = mesh.edge(e);
        let t = edge.triangles[0];
        for r in 0..2 {
            for mm in 0..2 {
                let row = 4 * e + 2 * r + mm;
                for rr in 0..2 {
                    for d in space.local_dofs(t, rr) {
                        unit[d] = 1.0;
                        m[(row, d)] = gauss3()
                            .iter()
                            .map(|&(s, w)| {
                                let x = mesh.edge_point(e, s);
                                let (v, _) = space.eval(&unit, t, x);
                                let psi = if mm == 0 { 1.0 } else { 2.0 * s - 1.0 };
                                w * edge.length * psi * (v[r][0] * edge.normal[0] + v[r][1] * edge.normal[1])
                            })
                            .sum();
                        unit[d] = 0.0;
                    }
                }
                b[row] = if edge.is_neumann() {
                    gauss3()
                        .iter()
                        .map(|&(s, w)| {
                            let psi = if mm == 0 { 1.0 } else { 2.0 * s - 1.0 };
                            w * edge.length * psi * (problem.g)(mesh.edge_point(e, s), edge.normal)[r]
                        })
                        .sum()
                } else if edge.is_boundary() {
                    trace(t, e, r, mm)
                } else {
                    0.5 * (trace(t, e, r, mm) + trace(edge.triangles[1], e, r, mm))
                };
            }
        }
    }
    for t in 0..nt {
        let ar = area(mesh.triangle_points(t));
        let pf = p1_projection(&*problem.f, mesh, t);
        for r in 0..2 {
            for k in 0..3 {
                let row = 4 * ne + 6 * t + 3 * r + k;
                for rr in 0..2 {
                    for d in space.local_dofs(t, rr) {
                        unit[d] = 1.0;
                        m[(row, d)] = radon()
                            .iter()
                            .map(|&(l, w)| w * ar * l[k] * space.eval(&unit, t, to_point(mesh, t, l)).1[r])
                            .sum();
                        unit[d] = 0.0;
                    }
                }
                b[row] = -radon()
                    .iter()
                    .map(|&(l, w)| w * ar * l[k] * (0..3).map(|i| l[i] * pf[i][r]).sum::<f64>())
                    .sum::<f64>();
            }
        }
    }
    let x = m.clone().svd(true, true).solve(&b, 1e-13).unwrap();
    let residual = (&m * &x - &b).norm() / (1.0 + b.norm());
    let x: Vec<f64> = x.iter().copied().collect();
    (max_rel_diff(&rs.field.coefficients, &x), residual)
}

// ---------------------------------------------------------------- (c) patch problems

/// Patch fit with a broken monomial P3 basis; continuity and support are
/// imposed as point constraints and eliminated through an SVD null space;
/// the divergence-mean constraints (possibly redundant) go through a
/// pseudo-inverse of the reduced saddle matrix. Returns the largest
/// pointwise discrepancy against patch `i` of `rec`.
pub fn patch_discrepancy(
    u: &FeField,
    mesh: &Mesh,
    partition: &PartitionOfUnity,
    rec: &ConformingRecovery,
    i: usize,
) -> f64 {
    let elems = &partition.elements[i];
    let ne_p = elems.len();
    let bases: Vec<Monomials> = elems.iter().map(|&t| Monomials::new(mesh.triangle_points(t), 3)).collect();
    let nb = 20 * ne_p;
    let idx = |j: usize, c: usize, k: usize| 20 * j + 10 * c + k;
    let center = |v: usize| partition.owner[v] == i;
    let pos = |t: usize| elems.iter().position(|&s| s == t);

    // point constraints
    let mut cons: Vec<Vec<(usize, f64)>> = Vec::new();
    let eval_row = |j: usize, c: usize, x: Point, sign: f64, row: &mut Vec<(usize, f64)>| {
        for (k, (v, _)) in bases[j].eval(x).into_iter().enumerate() {
            row.push((idx(j, c, k), sign * v));
        }
    };
    let samples = [0.1, 0.35, 0.6, 0.9];
    for (j, &t) in elems.iter().enumerate() {
        let tri = mesh.triangle(t);
        for &v in &tri {
            if !center(v) || mesh.is_dirichlet_vertex(v) {
                for c in 0..2 {
                    let mut row = Vec::new();
                    eval_row(j, c, mesh.vertex(v), 1.0, &mut row);
                    cons.push(row);
                }
            }
        }
        for e in mesh.triangle_edges(t) {
            let edge = mesh.edge(e);
            let touches = center(edge.vertices[0]) || center(edge.vertices[1]);
            let zero = edge.is_dirichlet() || !touches;
            for &s in &samples {
                let x = mesh.edge_point(e, s);
                for c in 0..2 {
                    let mut row = Vec::new();
                    if zero {
                        eval_row(j, c, x, 1.0, &mut row);
                    } else if !edge.is_boundary() {
                        let other = if edge.triangles[0] == t { edge.triangles[1] } else { edge.triangles[0] };
                        let jo = pos(other).expect("edge touching a center lies inside the patch");
                        if jo < j {
                            continue;
                        }
                        eval_row(j, c, x, 1.0, &mut row);
                        eval_row(jo, c, x, -1.0, &mut row);
                    } else {
                        continue;
                    }
                    cons.push(row);
                }
            }
        }
    }
    let nrows = cons.len().max(nb);
    let mut cmat = DMatrix::<f64>::zeros(nrows, nb);
    for (r, row) in cons.iter().enumerate() {
        for &(c, v) in row {
            cmat[(r, c)] += v;
        }
    }
    let svd = cmat.svd(false, true);
    let vt = svd.v_t.unwrap();
    let smax = svd.singular_values.max();
    let null: Vec<usize> = (0..nb).filter(|&k| svd.singular_values[k] < 1e-10 * smax).collect();
    let q = null.len();
    let nmat = DMatrix::<f64>::from_fn(nb, q, |r, c| vt[(null[c], r)]);

    // energy, load and divergence constraints in the broken basis
    let mut a = DMatrix::<f64>::zeros(nb, nb);
    let mut load = DVector::<f64>::zeros(nb);
    let mut dmat = DMatrix::<f64>::zeros(ne_p, nb);
    let mut dv = DVector::<f64>::zeros(ne_p);
    for (j, &t) in elems.iter().enumerate() {
        let p = mesh.triangle_points(t);
        let ar = area(p);
        for (l, w) in radon() {
            let x = to_point(mesh, t, l);
            let wq = w * ar;
            let lb = bary_of(p, x);
            let (uv, ug) = u.eval_broken_p2(mesh, t, lb);
            let (phi, gphi) = partition.eval(mesh, i, t, lb);
            let mut target = [[0.0; 2]; 2];
            for r in 0..2 {
                for c in 0..2 {
                    target[r][c] = ug[r][c] * phi + uv[r] * gphi[c];
                }
            }
            dv[j] += wq * (target[0][0] + target[1][1]);
            let vals = bases[j].eval(x);
            for c in 0..2 {
                for (k, &(_, gk)) in vals.iter().enumerate() {
                    let ik = idx(j, c, k);
                    load[ik] += wq * (gk[0] * target[c][0] + gk[1] * target[c][1]);
                    dmat[(j, ik)] += wq * gk[c];
                    for (m, &(_, gm)) in vals.iter().enumerate() {
                        a[(ik, idx(j, c, m))] += wq * (gk[0] * gm[0] + gk[1] * gm[1]);
                    }
                }
            }
        }
    }
    let ar_ = nmat.transpose() * &a * &nmat;
    let dr = &dmat * &nmat;
    let mut kkt = DMatrix::<f64>::zeros(q + ne_p, q + ne_p);
    kkt.view_mut((0, 0), (q, q)).copy_from(&ar_);
    kkt.view_mut((0, q), (q, ne_p)).copy_from(&dr.transpose());
    kkt.view_mut((q, 0), (ne_p, q)).copy_from(&dr);
    let mut rhs = DVector::<f64>::zeros(q + ne_p);
    rhs.rows_mut(0, q).copy_from(&(nmat.transpose() * &load));
    rhs.rows_mut(q, ne_p).copy_from(&dv);
    let sol = kkt.svd(true, true).solve(&rhs, 1e-12).unwrap();
    let coeffs = &nmat * sol.rows(0, q);

    // library patch field
    let patch = &rec.patches[i];
    let mut lib = FeField::zeros(SpaceKind::P3ConfVector, mesh);
    for (&d, &v) in patch.dofs.iter().zip(&patch.values) {
        lib.coefficients[d] = v;
    }
    let (mut diff, mut scale) = (0.0f64, 0.0f64);
    for (j, &t) in elems.iter().enumerate() {
        let p = mesh.triangle_points(t);
        let pts: Vec<[f64; 3]> = radon()
            .into_iter()
            .map(|(l, _)| l)
            .chain([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
            .collect();
        for l in pts {
            let x = to_point(mesh, t, l);
            let (wl, _) = lib.eval_p3_conf(mesh, t, bary_of(p, x));
            let vals = bases[j].eval(x);
            for c in 0..2 {
                let wo: f64 = vals.iter().enumerate().map(|(k, (v, _))| coeffs[idx(j, c, k)] * v).sum();
                diff = diff.max((wl[c] - wo).abs());
                scale = scale.max(wo.abs());
            }
        }
    }
    diff / (1.0 + scale)
}

// ---------------------------------------------------------------- Korn

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn multi_indices(n: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for a in (0..=n).rev() {
        for b in (0..=n - a).rev() {
            out.push([a, b, n - a - b]);
        }
    }
    out
}

/// `∫_T λ^γ = 2|T| γ! / (|γ| + 2)!`.
fn bary_monomial_integral(g: [usize; 3], area: f64) -> f64 {
    2.0 * area * factorial(g[0]) * factorial(g[1]) * factorial(g[2]) / factorial(g[0] + g[1] + g[2] + 2)
}

/// Korn quotient `sup ‖∇w − α_w J‖ / ‖ε(w)‖` over degree-`k` vector fields,
/// in a Bernstein basis with exact integration; rigid motions are removed by
/// an explicit orthogonal complement and the reduced pencil is solved by
/// Cholesky.
pub fn korn_oracle(p: [Point; 3], k: usize) -> f64 {
    let ar = area(p);
    // barycentric gradients
    let gb: [Vec2; 3] = {
        let mut g = [[0.0; 2]; 3];
        for i in 0..3 {
            let (a, b) = (p[(i + 1) % 3], p[(i + 2) % 3]);
            g[i] = [(a[1] - b[1]) / (2.0 * ar), (b[0] - a[0]) / (2.0 * ar)];
        }
        g
    };
    let alphas = multi_indices(k);
    let ns = alphas.len();
    // ∂_a B_α = Σ_j k!/(α − e_j)! ∂_a λ_j λ^{α − e_j}
    let grads: Vec<Vec<([usize; 3], Vec2)>> = alphas
        .iter()
        .map(|al| {
            let mut terms = Vec::new();
            for j in 0..3 {
                if al[j] == 0 {
                    continue;
                }
                let mut be = *al;
                be[j] -= 1;
                let c = factorial(k) / (factorial(be[0]) * factorial(be[1]) * factorial(be[2]));
                terms.push((be, [c * gb[j][0], c * gb[j][1]]));
            }
            terms
        })
        .collect();
    // P[a][b][α][α'] = ∫ ∂_a B_α ∂_b B_α'
    let mut pm = vec![vec![DMatrix::<f64>::zeros(ns, ns); 2]; 2];
    let mut first = [vec![0.0; ns], vec![0.0; ns]];
    for i in 0..ns {
        for (be, c) in &grads[i] {
            let int = bary_monomial_integral(*be, ar);
            first[0][i] += c[0] * int;
            first[1][i] += c[1] * int;
        }
        for j in 0..ns {
            for (bi, ci) in &grads[i] {
                for (bj, cj) in &grads[j] {
                    let int = bary_monomial_integral([bi[0] + bj[0], bi[1] + bj[1], bi[2] + bj[2]], ar);
                    for a in 0..2 {
                        for b in 0..2 {
                            pm[a][b][(i, j)] += ci[a] * cj[b] * int;
                        }
                    }
                }
            }
        }
    }
    let n = 2 * ns;
    let comp = |i: usize| (i / ns, i % ns);
    let mut amat = DMatrix::<f64>::zeros(n, n);
    let mut bmat = DMatrix::<f64>::zeros(n, n);
    let mut rot = DVector::<f64>::zeros(n);
    for i in 0..n {
        let (ci, ai) = comp(i);
        // (∇w, J) with J = [[0, 1], [−1, 0]]
        rot[i] = if ci == 0 { first[1][ai] } else { -first[0][ai] };
        for j in 0..n {
            let (cj, aj) = comp(j);
            if ci == cj {
                amat[(i, j)] = pm[0][0][(ai, aj)] + pm[1][1][(ai, aj)];
            }
            // ε_rs = (δ_rc ∂_s + δ_sc ∂_r) / 2
            let mut s = 0.0;
            for r in 0..2 {
                for q in 0..2 {
                    let d = |x: usize, y: usize| (x == y) as u8 as f64;
                    s += 0.25
                        * (d(r, ci) * d(r, cj) * pm[q][q][(ai, aj)]
                            + d(r, ci) * d(q, cj) * pm[q][r][(ai, aj)]
                            + d(q, ci) * d(r, cj) * pm[r][q][(ai, aj)]
                            + d(q, ci) * d(q, cj) * pm[r][r][(ai, aj)]);
                }
            }
            bmat[(i, j)] = s;
        }
    }
    amat -= &rot * rot.transpose() / (2.0 * ar);

    // rigid motions in Bernstein coefficients: Bernstein reproduces linears
    let node = |al: &[usize; 3]| -> Point {
        let s = |c: usize| (0..3).map(|j| al[j] as f64 / k as f64 * p[j][c]).sum::<f64>();
        [s(0), s(1)]
    };
    let mut rm = DMatrix::<f64>::zeros(n, 3);
    for (a, al) in alphas.iter().enumerate() {
        let x = node(al);
        rm[(a, 0)] = 1.0;
        rm[(ns + a, 1)] = 1.0;
        rm[(a, 2)] = -x[1];
        rm[(ns + a, 2)] = x[0];
    }
    // modified Gram-Schmidt: orthonormalize the rigid motions, then extend
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let push = |v: DVector<f64>, basis: &mut Vec<DVector<f64>>| {
        let mut w = v;
        for _ in 0..2 {
            for b in basis.iter() {
                let c = w.dot(b);
                w -= c * b;
            }
        }
        let nrm = w.norm();
        if nrm > 1e-8 {
            basis.push(w / nrm);
            true
        } else {
            false
        }
    };
    for c in 0..3 {
        push(rm.column(c).into_owned(), &mut basis);
    }
    assert_eq!(basis.len(), 3);
    let mut comp_cols = Vec::new();
    for e in 0..n {
        let mut v = DVector::<f64>::zeros(n);
        v[e] = 1.0;
        if push(v, &mut basis) {
            comp_cols.push(basis.last().unwrap().clone());
        }
    }
    let q = DMatrix::from_columns(&comp_cols);
    let br = q.transpose() * &bmat * &q;
    let arr = q.transpose() * &amat * &q;
    let l = Cholesky::new(0.5 * (&br + br.transpose())).expect("strain Gram matrix not positive").unpack();
    let linv = l.clone().try_inverse().unwrap();
    let red = &linv * arr * linv.transpose();
    let e = SymmetricEigen::new(0.5 * (&red + red.transpose()));
    e.eigenvalues.max().sqrt()
}

// ---------------------------------------------------------------- oscillation and energy

/// Σ_T h_T² ‖f − P_h f‖²_T + Σ_{E ⊂ Γ_N} h_E ‖g − P g‖²_E, square-rooted;
/// `g` must be affine along each edge, so that its edge projection is itself.
pub fn oscillation_oracle(problem: &ElasticityProblem) -> f64 {
    let mesh = &problem.mesh;
    let mut s = 0.0;
    for t in 0..mesh.n_triangles() {
        let p = mesh.triangle_points(t);
        let pf = p1_projection(&*problem.f, mesh, t);
        let mut e = 0.0;
        for (l, w) in radon() {
            let f = (problem.f)(to_point(mesh, t, l));
            for c in 0..2 {
                let v = f[c] - (0..3).map(|i| l[i] * pf[i][c]).sum::<f64>();
                e += w * area(p) * v * v;
            }
        }
        s += diameter(p).powi(2) * e;
    }
    s.sqrt()
}

/// Energy error by Radon's rule on `4^levels` similar subtriangles of every
/// element.
pub fn energy_error_oracle(
    sol: &DiscreteSolution,
    problem: &ElasticityProblem,
    grad_u: &dyn Fn(Point) -> Tensor2,
    pressure: &dyn Fn(Point) -> f64,
    levels: usize,
) -> f64 {
    let mesh = &problem.mesh;
    let mut s = 0.0;
    for t in 0..mesh.n_triangles() {
        let p = mesh.triangle_points(t);
        let mut tris = vec![p];
        for _ in 0..levels {
            tris = tris
                .into_iter()
                .flat_map(|q| {
                    let m = |a: usize, b: usize| [(q[a][0] + q[b][0]) / 2.0, (q[a][1] + q[b][1]) / 2.0];
                    let (m01, m12, m20) = (m(0, 1), m(1, 2), m(2, 0));
                    [[q[0], m01, m20], [m01, q[1], m12], [m20, m12, q[2]], [m12, m20, m01]]
                })
                .collect();
        }
        for q in tris {
            let aq = area(q).abs();
            for (l, w) in radon() {
                let x = [
                    l[0] * q[0][0] + l[1] * q[1][0] + l[2] * q[2][0],
                    l[0] * q[0][1] + l[1] * q[1][1] + l[2] * q[2][1],
                ];
                let lb = bary_of(p, x);
                let (_, gh) = sol.eval_u(mesh, t, lb);
                let g = grad_u(x);
                let mut e2 = 0.0;
                for r in 0..2 {
                    for c in 0..2 {
                        let a = 0.5 * ((g[r][c] - gh[r][c]) + (g[c][r] - gh[c][r]));
                        e2 += a * a;
                    }
                }
                let dp = pressure(x) - sol.eval_p(t, lb);
                s += w * aq * (2.0 * problem.mu * e2 + problem.lambda_inv * dp * dp);
            }
        }
    }
    s.sqrt()
}
