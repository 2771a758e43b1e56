//! Element-wise and edge-wise L² projections of data.

use std::sync::Arc;

use rayon::prelude::*;

use super::quadrature::{EDGE, VOLUME};
use super::rt1::psi;
use super::space::{FeField, SpaceDescriptor, SpaceKind};
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::tensor::{Point, Vec2};

/// Body force or other vector-valued data `x -> f(x)`.
pub type VectorFn = Arc<dyn Fn(Point) -> Vec2 + Send + Sync>;
/// Boundary traction `(x, outward normal) -> g`.
pub type TractionFn = Arc<dyn Fn(Point, Vec2) -> Vec2 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    P1,
    P0,
}

fn finite(v: Vec2, context: &'static str) -> Result<Vec2> {
    for c in v {
        if !c.is_finite() {
            return Err(Error::NonFinite { context, value: c });
        }
    }
    Ok(v)
}

/// Element-wise L² projection of a vector field onto discontinuous P1
/// (vertex values, [`SpaceKind::P1DiscVector`]) or P0 ([`SpaceKind::P0Vector`]).
pub fn project_volume(
    f: &(dyn Fn(Point) -> Vec2 + Send + Sync),
    mesh: &Mesh,
    target: Target,
) -> Result<FeField> {
    let per: Vec<Vec<f64>> = (0..mesh.n_triangles())
        .into_par_iter()
        .map(|t| {
            let mut b = [[0.0; 3]; 2];
            for (l, &w) in VOLUME.points.iter().zip(&VOLUME.weights) {
                let v = finite(f(mesh.map_point(t, *l)), "volume data")?;
                for c in 0..2 {
                    for i in 0..3 {
                        b[c][i] += w * v[c] * l[i];
                    }
                }
            }
            // b holds |T|^{-1} ∫ f λ_i; the P1 mass matrix is |T|(I + 11ᵀ)/12
            Ok(match target {
                Target::P1 => {
                    let mut out = Vec::with_capacity(6);
                    for bc in b {
                        let sum: f64 = bc.iter().sum();
                        out.extend(bc.iter().map(|bi| 3.0 * (4.0 * bi - sum)));
                    }
                    out
                }
                Target::P0 => b.iter().map(|bc| bc.iter().sum()).collect(),
            })
        })
        .collect::<Result<_>>()?;
    let kind = match target {
        Target::P1 => SpaceKind::P1DiscVector,
        Target::P0 => SpaceKind::P0Vector,
    };
    FeField::new(SpaceDescriptor::new(kind, mesh), per.concat())
}

/// A linear vector function on an edge, `mean + slope (2s - 1)` in the
/// global edge parameter `s`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EdgeP1 {
    pub mean: Vec2,
    pub slope: Vec2,
}

impl EdgeP1 {
    #[inline]
    pub fn eval(&self, s: f64) -> Vec2 {
        let p = psi(1, s);
        [self.mean[0] + self.slope[0] * p, self.mean[1] + self.slope[1] * p]
    }

    /// `∫_E v ψ_m ds` for `m ∈ {0, 1}`, per component.
    #[inline]
    pub fn moment(&self, m: usize, length: f64) -> Vec2 {
        if m == 0 {
            [self.mean[0] * length, self.mean[1] * length]
        } else {
            [self.slope[0] * length / 3.0, self.slope[1] * length / 3.0]
        }
    }
}

/// Projected traction per edge; `None` off the Neumann boundary.
#[derive(Debug, Clone)]
pub struct NeumannData {
    pub edges: Vec<Option<EdgeP1>>,
}

/// Edge-wise L² projection of the traction onto linear functions on each
/// Neumann edge.
pub fn project_neumann(
    g: &(dyn Fn(Point, Vec2) -> Vec2 + Send + Sync),
    mesh: &Mesh,
) -> Result<NeumannData> {
    let edges = mesh
        .edges()
        .iter()
        .enumerate()
        .map(|(e, edge)| {
            if !edge.is_neumann() {
                return Ok(None);
            }
            let mut p = EdgeP1::default();
            for (&s, &w) in EDGE.points.iter().zip(&EDGE.weights) {
                let v = finite(g(mesh.edge_point(e, s), edge.normal), "traction data")?;
                for c in 0..2 {
                    p.mean[c] += w * v[c];
                    p.slope[c] += 3.0 * w * v[c] * psi(1, s);
                }
            }
            Ok(Some(p))
        })
        .collect::<Result<_>>()?;
    Ok(NeumannData { edges })
}
