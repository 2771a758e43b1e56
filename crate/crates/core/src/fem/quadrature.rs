//! Gauss rules on triangles (collapsed tensor Gauss–Legendre) and edges.

use std::sync::LazyLock;

use crate::error::{Error, Result};

pub const MAX_DEGREE: usize = 10;

/// Barycentric points with weights summing to one: `∫_T f ≈ |T| Σ w_i f(x_i)`.
#[derive(Debug, Clone)]
pub struct TriangleRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

/// Edge parameters `s ∈ [0, 1]` with weights summing to one: `∫_E f ≈ |E| Σ w_i f(s_i)`.
#[derive(Debug, Clone)]
pub struct EdgeRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

/// The fixed volume rule used throughout the pipeline.
pub static VOLUME: LazyLock<TriangleRule> = LazyLock::new(|| triangle_rule(7).unwrap());
/// The fixed edge rule used throughout the pipeline.
pub static EDGE: LazyLock<EdgeRule> = LazyLock::new(|| edge_rule(5).unwrap());

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let dp = legendre(n, z).1;
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// `(P_n(z), P_n'(z))` by the three-term recurrence.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    (p1, n as f64 * (z * p1 - p0) / (z * z - 1.0))
}

pub fn edge_rule(degree: usize) -> Result<EdgeRule> {
    if degree > MAX_DEGREE {
        return Err(Error::UnsupportedDegree(degree));
    }
    let n = (degree + 1).div_ceil(2).max(1);
    let (x, w) = gauss_legendre(n);
    Ok(EdgeRule {
        points: x.iter().map(|z| 0.5 * (z + 1.0)).collect(),
        weights: w.iter().map(|w| 0.5 * w).collect(),
        degree,
    })
}

pub fn triangle_rule(degree: usize) -> Result<TriangleRule> {
    if degree > MAX_DEGREE {
        return Err(Error::UnsupportedDegree(degree));
    }
    if degree <= 1 {
        return Ok(TriangleRule {
            points: vec![[1.0 / 3.0; 3]],
            weights: vec![1.0],
            degree,
        });
    }
    // Duffy map (u, v) -> (u, v (1 - u)) with Jacobian 1 - u
    let n = (degree + 2).div_ceil(2);
    let (x, w) = gauss_legendre(n);
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for i in 0..n {
        let u = 0.5 * (x[i] + 1.0);
        for j in 0..n {
            let v = 0.5 * (x[j] + 1.0);
            let (l1, l2) = (u, v * (1.0 - u));
            points.push([1.0 - l1 - l2, l1, l2]);
            // 0.25 from the interval maps, 2 to normalize by the reference area
            weights.push(0.5 * w[i] * w[j] * (1.0 - u));
        }
    }
    Ok(TriangleRule {
        points,
        weights,
        degree,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Triangle,
    Edge,
}

/// Points are barycentric triples on triangles and `[s, 1 - s, 0]` on edges.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub domain: Domain,
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

pub fn quad_rule(domain: Domain, degree: usize) -> Result<QuadratureRule> {
    match domain {
        Domain::Triangle => {
            let r = triangle_rule(degree)?;
            Ok(QuadratureRule {
                domain,
                points: r.points,
                weights: r.weights,
                degree,
            })
        }
        Domain::Edge => {
            let r = edge_rule(degree)?;
            Ok(QuadratureRule {
                domain,
                points: r.points.iter().map(|&s| [s, 1.0 - s, 0.0]).collect(),
                weights: r.weights,
                degree,
            })
        }
    }
}
