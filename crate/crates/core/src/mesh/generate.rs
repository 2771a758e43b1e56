//! Built-in initial meshes.

use super::{build_mesh_with, BoundaryLabel, Mesh, MeshChecks};
use crate::tensor::{norm, sub, Point};

fn dist(a: Point, b: Point) -> f64 {
    norm(sub(a, b))
}

/// Structured `n x n` triangulation of the unit square with the Dirichlet
/// boundary on `x = 0` and Neumann elsewhere.
///
/// The top-left cell uses the opposite diagonal so both Dirichlet corners own
/// an interior edge whenever `n >= 2`.
pub fn unit_square(n: usize) -> Mesh {
    let n = n.max(1);
    let grid = |i: usize, j: usize| j * (n + 1) + i;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push([i as f64 / n as f64, j as f64 / n as f64]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (a, b, c, d) = (grid(i, j), grid(i + 1, j), grid(i + 1, j + 1), grid(i, j + 1));
            if i == 0 && j == n - 1 && n > 1 {
                triangles.push([a, b, d]);
                triangles.push([b, c, d]);
            } else {
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
            }
        }
    }
    let labels = square_labels(n, grid);
    let checks = if n > 1 {
        MeshChecks::Full
    } else {
        MeshChecks::Topology
    };
    build_mesh_with(vertices, triangles, &labels, checks).expect("unit square mesh is valid")
}

fn square_labels(
    n: usize,
    grid: impl Fn(usize, usize) -> usize,
) -> Vec<(usize, usize, BoundaryLabel)> {
    let mut labels = Vec::with_capacity(4 * n);
    for k in 0..n {
        labels.push((grid(0, k), grid(0, k + 1), BoundaryLabel::Dirichlet));
        labels.push((grid(n, k), grid(n, k + 1), BoundaryLabel::Neumann));
        labels.push((grid(k, 0), grid(k + 1, 0), BoundaryLabel::Neumann));
        labels.push((grid(k, n), grid(k + 1, n), BoundaryLabel::Neumann));
    }
    labels
}

pub const COOK_CORNERS: [Point; 4] = [[0.0, 0.0], [0.48, 0.44], [0.48, 0.6], [0.0, 0.44]];

fn cook_map(s: f64, t: f64) -> Point {
    let [p00, p10, p11, p01] = COOK_CORNERS;
    let w = [(1.0 - s) * (1.0 - t), s * (1.0 - t), s * t, (1.0 - s) * t];
    [
        w[0] * p00[0] + w[1] * p10[0] + w[2] * p11[0] + w[3] * p01[0],
        w[0] * p00[1] + w[1] * p10[1] + w[2] * p11[1] + w[3] * p01[1],
    ]
}

/// The 44-element initial triangulation of Cook's membrane.
///
/// A 5 x 4 grid mapped bilinearly onto the tapered panel; the two cells at the
/// upper clamped corner are split into four triangles around their center,
/// every other cell into two along its shorter diagonal. Interior vertices are
/// perturbed slightly so the mesh is not translation invariant.
pub fn cook_membrane() -> Mesh {
    cook_grid(5, 4, &[(0, 3), (1, 3)], 0.05)
}

/// Structured `nx x ny` triangulation of Cook's membrane without perturbation.
pub fn cook_membrane_structured(nx: usize, ny: usize) -> Mesh {
    cook_grid(nx.max(1), ny.max(2), &[], 0.0)
}

fn cook_grid(nx: usize, ny: usize, four_split: &[(usize, usize)], jitter: f64) -> Mesh {
    let grid = |i: usize, j: usize| j * (nx + 1) + i;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1) + four_split.len());
    for j in 0..=ny {
        for i in 0..=nx {
            let (mut s, mut t) = (i as f64 / nx as f64, j as f64 / ny as f64);
            if i > 0 && i < nx && j > 0 && j < ny {
                // deterministic pseudo-random offset in reference coordinates
                let phase = (i * 7 + j * 13) as f64;
                s += jitter / nx as f64 * phase.sin();
                t += jitter / ny as f64 * (1.7 * phase).cos();
            }
            vertices.push(cook_map(s, t));
        }
    }
    let mut triangles = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (grid(i, j), grid(i + 1, j), grid(i + 1, j + 1), grid(i, j + 1));
            if four_split.contains(&(i, j)) {
                let p = [a, b, c, d].map(|v| vertices[v]);
                let m = vertices.len();
                vertices.push([
                    0.25 * (p[0][0] + p[1][0] + p[2][0] + p[3][0]),
                    0.25 * (p[0][1] + p[1][1] + p[2][1] + p[3][1]),
                ]);
                triangles.extend([[a, b, m], [b, c, m], [c, d, m], [d, a, m]]);
            } else if (i == 0 && j == ny - 1)
                || (i > 0 && dist(vertices[b], vertices[d]) < dist(vertices[a], vertices[c]))
            {
                // the upper clamped corner needs a diagonal through it
                triangles.push([a, b, d]);
                triangles.push([b, c, d]);
            } else {
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
            }
        }
    }
    let mut labels = Vec::new();
    for j in 0..ny {
        labels.push((grid(0, j), grid(0, j + 1), BoundaryLabel::Dirichlet));
        labels.push((grid(nx, j), grid(nx, j + 1), BoundaryLabel::Neumann));
    }
    for i in 0..nx {
        labels.push((grid(i, 0), grid(i + 1, 0), BoundaryLabel::Neumann));
        labels.push((grid(i, ny), grid(i + 1, ny), BoundaryLabel::Neumann));
    }
    build_mesh_with(vertices, triangles, &labels, MeshChecks::Full).expect("Cook mesh is valid")
}
