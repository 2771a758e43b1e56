//! Nodal Lagrange bases on a triangle in barycentric coordinates.
//!
//! Derivatives are taken with respect to the barycentric coordinates; the
//! physical gradient is `Σ_i ∂φ/∂λ_i ∇λ_i`.
//!
//! Local node order: vertices `0..3`, then edge nodes by local edge `k`
//! (the edge opposite vertex `k`), then interior nodes.

use crate::tensor::Vec2;

pub type Bary = [f64; 3];

#[inline]
pub fn bary_grad(dl: [f64; 3], grad_bary: &[Vec2; 3]) -> Vec2 {
    [
        dl[0] * grad_bary[0][0] + dl[1] * grad_bary[1][0] + dl[2] * grad_bary[2][0],
        dl[0] * grad_bary[0][1] + dl[1] * grad_bary[1][1] + dl[2] * grad_bary[2][1],
    ]
}

#[inline]
fn edge_ends(k: usize) -> (usize, usize) {
    ((k + 1) % 3, (k + 2) % 3)
}

pub const P2_NODES: [Bary; 6] = [
    [1.0, 0.0, 0.0],
    [0.0, 1.0, 0.0],
    [0.0, 0.0, 1.0],
    [0.0, 0.5, 0.5],
    [0.5, 0.0, 0.5],
    [0.5, 0.5, 0.0],
];

pub fn p2(l: Bary) -> [f64; 6] {
    let mut v = [0.0; 6];
    for i in 0..3 {
        v[i] = l[i] * (2.0 * l[i] - 1.0);
        let (a, b) = edge_ends(i);
        v[3 + i] = 4.0 * l[a] * l[b];
    }
    v
}

pub fn p2_dl(l: Bary) -> [[f64; 3]; 6] {
    let mut d = [[0.0; 3]; 6];
    for i in 0..3 {
        d[i][i] = 4.0 * l[i] - 1.0;
        let (a, b) = edge_ends(i);
        d[3 + i][a] = 4.0 * l[b];
        d[3 + i][b] = 4.0 * l[a];
    }
    d
}

/// P3 nodes: vertices, two per local edge `k` (first nearer vertex `k+1`),
/// then the centroid.
pub const P3_NODES: [Bary; 10] = {
    const A: f64 = 2.0 / 3.0;
    const B: f64 = 1.0 / 3.0;
    [
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
        [0.0, A, B],
        [0.0, B, A],
        [B, 0.0, A],
        [A, 0.0, B],
        [A, B, 0.0],
        [B, A, 0.0],
        [B, B, B],
    ]
};

/// Local vertex that P3 edge node `3 + 2k + j` lies nearer to.
pub fn p3_edge_node_near(k: usize, j: usize) -> usize {
    let (a, b) = edge_ends(k);
    if j == 0 {
        a
    } else {
        b
    }
}

pub fn p3(l: Bary) -> [f64; 10] {
    let mut v = [0.0; 10];
    for i in 0..3 {
        v[i] = 0.5 * l[i] * (3.0 * l[i] - 1.0) * (3.0 * l[i] - 2.0);
        let (a, b) = edge_ends(i);
        v[3 + 2 * i] = 4.5 * l[a] * l[b] * (3.0 * l[a] - 1.0);
        v[4 + 2 * i] = 4.5 * l[a] * l[b] * (3.0 * l[b] - 1.0);
    }
    v[9] = 27.0 * l[0] * l[1] * l[2];
    v
}

pub fn p3_dl(l: Bary) -> [[f64; 3]; 10] {
    let mut d = [[0.0; 3]; 10];
    for i in 0..3 {
        let x = l[i];
        d[i][i] = 0.5 * (27.0 * x * x - 18.0 * x + 2.0);
        let (a, b) = edge_ends(i);
        // 4.5 (3 la^2 lb - la lb)
        d[3 + 2 * i][a] = 4.5 * (6.0 * l[a] * l[b] - l[b]);
        d[3 + 2 * i][b] = 4.5 * (3.0 * l[a] * l[a] - l[a]);
        d[4 + 2 * i][b] = 4.5 * (6.0 * l[a] * l[b] - l[a]);
        d[4 + 2 * i][a] = 4.5 * (3.0 * l[b] * l[b] - l[b]);
    }
    d[9] = [27.0 * l[1] * l[2], 27.0 * l[0] * l[2], 27.0 * l[0] * l[1]];
    d
}

/// The nonconforming quadratic bubble `2 - 3 Σ λ_i²`.
pub fn fs_bubble(l: Bary) -> f64 {
    2.0 - 3.0 * (l[0] * l[0] + l[1] * l[1] + l[2] * l[2])
}

pub fn fs_bubble_dl(l: Bary) -> [f64; 3] {
    [-6.0 * l[0], -6.0 * l[1], -6.0 * l[2]]
}
