//! Small fixed-size vector and 2x2 tensor helpers.

pub type Point = [f64; 2];
pub type Vec2 = [f64; 2];
/// Row-major 2x2 tensor: `t[i][j]`, row `i` is the `i`-th stress row.
pub type Tensor2 = [[f64; 2]; 2];

pub const IDENTITY: Tensor2 = [[1.0, 0.0], [0.0, 1.0]];
/// The rotation `J = [[0, 1], [-1, 0]]`.
pub const ROT_J: Tensor2 = [[0.0, 1.0], [-1.0, 0.0]];

#[inline]
pub fn dot(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn sub(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn norm(a: Vec2) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn cross(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub fn mat_vec(t: &Tensor2, n: Vec2) -> Vec2 {
    [dot(t[0], n), dot(t[1], n)]
}

#[inline]
pub fn add(a: &Tensor2, b: &Tensor2) -> Tensor2 {
    [
        [a[0][0] + b[0][0], a[0][1] + b[0][1]],
        [a[1][0] + b[1][0], a[1][1] + b[1][1]],
    ]
}

#[inline]
pub fn sub_t(a: &Tensor2, b: &Tensor2) -> Tensor2 {
    [
        [a[0][0] - b[0][0], a[0][1] - b[0][1]],
        [a[1][0] - b[1][0], a[1][1] - b[1][1]],
    ]
}

#[inline]
pub fn scale(a: &Tensor2, s: f64) -> Tensor2 {
    [[a[0][0] * s, a[0][1] * s], [a[1][0] * s, a[1][1] * s]]
}

#[inline]
pub fn trace(t: &Tensor2) -> f64 {
    t[0][0] + t[1][1]
}

/// Trace-free part `t - (tr t / 2) I`.
#[inline]
pub fn dev(t: &Tensor2) -> Tensor2 {
    let h = 0.5 * trace(t);
    [[t[0][0] - h, t[0][1]], [t[1][0], t[1][1] - h]]
}

/// Antisymmetric part `(t - t^T) / 2`.
#[inline]
pub fn skew(t: &Tensor2) -> Tensor2 {
    let a = 0.5 * (t[0][1] - t[1][0]);
    [[0.0, a], [-a, 0.0]]
}

#[inline]
pub fn sym(t: &Tensor2) -> Tensor2 {
    let s = 0.5 * (t[0][1] + t[1][0]);
    [[t[0][0], s], [s, t[1][1]]]
}

/// Frobenius inner product `a : b`.
#[inline]
pub fn ddot(a: &Tensor2, b: &Tensor2) -> f64 {
    a[0][0] * b[0][0] + a[0][1] * b[0][1] + a[1][0] * b[1][0] + a[1][1] * b[1][1]
}

#[inline]
pub fn frob2(t: &Tensor2) -> f64 {
    ddot(t, t)
}

/// `(as t) : J = t12 - t21`.
#[inline]
pub fn skew_moment(t: &Tensor2) -> f64 {
    t[0][1] - t[1][0]
}

/// Pointwise A-weighted squared magnitude `(1/2mu)|dev t|^2 + c_tr (tr t)^2`
/// with `c_tr = lambda_inv / (4 (1 + mu lambda_inv))`.
#[inline]
pub fn a_weighted2(t: &Tensor2, mu: f64, lambda_inv: f64) -> f64 {
    let c_tr = lambda_inv / (4.0 * (1.0 + mu * lambda_inv));
    frob2(&dev(t)) / (2.0 * mu) + c_tr * trace(t).powi(2)
}
