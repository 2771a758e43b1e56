//! Element Korn constants
//! `inf_ρ ‖∇(w − ρ)‖_{L²(T)} ≤ C′_{K,T} ‖ε(w)‖_{L²(T)}`, estimated over
//! vector polynomials of bounded degree.
//!
//! The quotient is invariant under similarity transforms, so values are
//! cached by the normalized side lengths.

use std::collections::HashMap;
use std::sync::Mutex;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fem::quadrature::triangle_rule;
use crate::mesh::Mesh;
use crate::tensor::{norm, sub, Point};

pub const DEFAULT_DEGREE: usize = 6;
pub const DEFAULT_SAFETY: f64 = 1.1;

#[derive(Debug, Clone)]
pub struct KornConstants {
    pub per_element: Vec<f64>,
    pub global: f64,
    pub degree: usize,
    pub safety: f64,
}

/// Computes and caches element Korn constants, or returns a fixed value.
#[derive(Debug)]
pub struct KornEstimator {
    pub degree: usize,
    pub safety: f64,
    /// Used for every element instead of the eigenvalue estimate.
    pub fixed: Option<f64>,
    cache: Mutex<HashMap<(i64, i64), f64>>,
}

impl Default for KornEstimator {
    fn default() -> Self {
        KornEstimator::new(DEFAULT_DEGREE, DEFAULT_SAFETY)
    }
}

impl KornEstimator {
    pub fn new(degree: usize, safety: f64) -> Self {
        KornEstimator {
            degree,
            safety,
            fixed: None,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn fixed(value: f64) -> Self {
        KornEstimator {
            fixed: Some(value),
            ..KornEstimator::new(DEFAULT_DEGREE, 1.0)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(v) = self.fixed {
            if !(v.is_finite() && v >= 1.0) {
                return Err(Error::InvalidParameter(format!("Korn constant {v} must be >= 1")));
            }
            return Ok(());
        }
        if self.degree == 0 || 2 * (self.degree - 1) > crate::fem::quadrature::MAX_DEGREE {
            return Err(Error::InvalidParameter(format!("Korn degree {} out of range", self.degree)));
        }
        if !(self.safety.is_finite() && self.safety >= 1.0) {
            return Err(Error::InvalidParameter(format!("Korn safety factor {} must be >= 1", self.safety)));
        }
        Ok(())
    }

    pub fn constant(&self, p: [Point; 3]) -> Result<f64> {
        if let Some(v) = self.fixed {
            return Ok(v);
        }
        let key = shape_key(p);
        if let Some(v) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(*v);
        }
        let v = self.safety * korn_quotient(p, self.degree)?.sqrt();
        self.cache.lock().expect("cache lock").insert(key, v);
        Ok(v)
    }

    pub fn for_mesh(&self, mesh: &Mesh) -> Result<KornConstants> {
        self.validate()?;
        let per_element: Vec<f64> = (0..mesh.n_triangles())
            .into_par_iter()
            .map(|t| self.constant(mesh.triangle_points(t)))
            .collect::<Result<_>>()?;
        let global = per_element.iter().copied().fold(1.0, f64::max);
        Ok(KornConstants {
            per_element,
            global,
            degree: self.degree,
            safety: if self.fixed.is_some() { 1.0 } else { self.safety },
        })
    }

    pub fn cached_shapes(&self) -> usize {
        self.cache.lock().expect("cache lock").len()
    }
}

fn shape_key(p: [Point; 3]) -> (i64, i64) {
    let mut l = [norm(sub(p[1], p[0])), norm(sub(p[2], p[1])), norm(sub(p[0], p[2]))];
    l.sort_by(f64::total_cmp);
    let q = |x: f64| (x * 1e9).round() as i64;
    (q(l[0] / l[2]), q(l[1] / l[2]))
}

/// Largest value of `inf_α ‖∇w − αJ‖² / ‖ε(w)‖²` over `w ∈ P_k(T)²`
/// outside the rigid motions.
pub fn korn_quotient(p: [Point; 3], degree: usize) -> Result<f64> {
    if degree == 0 {
        return Err(Error::InvalidParameter("Korn degree must be positive".into()));
    }
    let c = [(p[0][0] + p[1][0] + p[2][0]) / 3.0, (p[0][1] + p[1][1] + p[2][1]) / 3.0];
    let h = norm(sub(p[1], p[0])).max(norm(sub(p[2], p[1]))).max(norm(sub(p[0], p[2])));
    let area = 0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]));
    // scalar monomials ξ^a η^b with 1 <= a + b <= k; constants have zero gradient
    let exps: Vec<(i32, i32)> = (1..=degree as i32)
        .flat_map(|d| (0..=d).map(move |b| (d - b, b)))
        .collect();
    let ns = exps.len();
    let n = 2 * ns;
    let rule = triangle_rule(2 * (degree - 1))?;
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut b = DMatrix::<f64>::zeros(n, n);
    let mut rot = vec![0.0; n];
    let mut grads = vec![[[0.0; 2]; 2]; n];
    for (l, &w) in rule.points.iter().zip(&rule.weights) {
        let x = [
            l[0] * p[0][0] + l[1] * p[1][0] + l[2] * p[2][0],
            l[0] * p[0][1] + l[1] * p[1][1] + l[2] * p[2][1],
        ];
        let (xi, eta) = ((x[0] - c[0]) / h, (x[1] - c[1]) / h);
        let pw = |v: f64, e: i32| if e <= 0 { 1.0 } else { v.powi(e) };
        for (s, &(ea, eb)) in exps.iter().enumerate() {
            let dx = if ea > 0 { ea as f64 * pw(xi, ea - 1) * pw(eta, eb) } else { 0.0 };
            let dy = if eb > 0 { eb as f64 * pw(xi, ea) * pw(eta, eb - 1) } else { 0.0 };
            // component c of basis function c * ns + s
            grads[s] = [[dx, dy], [0.0, 0.0]];
            grads[ns + s] = [[0.0, 0.0], [dx, dy]];
        }
        let wq = w * area;
        for i in 0..n {
            let gi = grads[i];
            rot[i] += wq * (gi[0][1] - gi[1][0]);
            let ei = [[gi[0][0], 0.5 * (gi[0][1] + gi[1][0])], [0.5 * (gi[0][1] + gi[1][0]), gi[1][1]]];
            for j in i..n {
                let gj = grads[j];
                let ga: f64 = (0..2).flat_map(|r| (0..2).map(move |s| (r, s))).map(|(r, s)| gi[r][s] * gj[r][s]).sum();
                let ej = [[gj[0][0], 0.5 * (gj[0][1] + gj[1][0])], [0.5 * (gj[0][1] + gj[1][0]), gj[1][1]]];
                let eb: f64 = (0..2).flat_map(|r| (0..2).map(move |s| (r, s))).map(|(r, s)| ei[r][s] * ej[r][s]).sum();
                a[(i, j)] += wq * ga;
                b[(i, j)] += wq * eb;
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            a[(i, j)] = a[(j, i)];
            b[(i, j)] = b[(j, i)];
        }
    }
    // remove the best rotation: ‖∇w − αJ‖² minimized at α = (∇w, J) / (2|T|)
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] -= rot[i] * rot[j] / (2.0 * area);
        }
    }
    generalized_max(&a, &b)
}

/// Largest `λ` with `A x = λ B x` on the complement of the null space of
/// the positive semidefinite `B`.
pub fn generalized_max(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
    let eig = SymmetricEigen::try_new(b.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Eigen("no convergence for the strain Gram matrix".into()))?;
    let top = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..b.nrows()).filter(|&i| eig.eigenvalues[i] > 1e-11 * top).collect();
    if keep.is_empty() {
        return Err(Error::Eigen("strain Gram matrix vanishes".into()));
    }
    let m = keep.len();
    let mut w = DMatrix::<f64>::zeros(b.nrows(), m);
    for (c, &k) in keep.iter().enumerate() {
        let s = 1.0 / eig.eigenvalues[k].sqrt();
        for r in 0..b.nrows() {
            w[(r, c)] = eig.eigenvectors[(r, k)] * s;
        }
    }
    let red = w.transpose() * a * &w;
    let red = 0.5 * (&red + red.transpose());
    let e = SymmetricEigen::try_new(red, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Eigen("no convergence for the reduced problem".into()))?;
    let v = e.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !v.is_finite() {
        return Err(Error::Eigen("non-finite eigenvalue".into()));
    }
    Ok(v)
}
