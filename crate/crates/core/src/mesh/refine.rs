//! Newest-vertex bisection.
//!
//! All three edges of a marked triangle are flagged; the closure then flags
//! the refinement edge of every triangle that has a flagged edge. Each
//! triangle is split at most twice recursively, so flagged edges of the
//! parent are exactly the edges that get bisected.

use std::collections::HashMap;

use super::{key, BoundaryLabel, Mesh, MeshChecks};
use crate::error::{Error, Result};

/// Set of triangle indices selected for refinement. Sorted and deduplicated.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MarkSet {
    elems: Vec<usize>,
}

impl MarkSet {
    pub fn new(mut elems: Vec<usize>, n_triangles: usize) -> Result<Self> {
        elems.sort_unstable();
        elems.dedup();
        if let Some(&t) = elems.last() {
            if t >= n_triangles {
                return Err(Error::IndexOutOfRange {
                    index: t,
                    len: n_triangles,
                });
            }
        }
        Ok(MarkSet { elems })
    }

    pub fn empty() -> Self {
        MarkSet::default()
    }

    pub fn all(n_triangles: usize) -> Self {
        MarkSet {
            elems: (0..n_triangles).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn contains(&self, t: usize) -> bool {
        self.elems.binary_search(&t).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.elems.iter().copied()
    }
}

/// Refines the marked triangles and just enough neighbors to stay conforming.
pub fn refine(mesh: &Mesh, marked: &MarkSet) -> Result<Mesh> {
    if let Some(t) = marked.iter().find(|&t| t >= mesh.n_triangles()) {
        return Err(Error::IndexOutOfRange {
            index: t,
            len: mesh.n_triangles(),
        });
    }
    if marked.is_empty() {
        return Ok(mesh.clone());
    }

    let mut flagged = vec![false; mesh.n_edges()];
    for t in marked.iter() {
        for e in mesh.triangle_edges(t) {
            flagged[e] = true;
        }
    }
    // closure: any flagged edge forces the refinement edge (local edge 2)
    loop {
        let mut changed = false;
        for t in 0..mesh.n_triangles() {
            let te = mesh.triangle_edges(t);
            if !flagged[te[2]] && te.iter().any(|&e| flagged[e]) {
                flagged[te[2]] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let mut vertices = mesh.vertices().to_vec();
    let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
    for (e, edge) in mesh.edges().iter().enumerate() {
        if flagged[e] {
            let [a, b] = edge.vertices;
            let (pa, pb) = (mesh.vertex(a), mesh.vertex(b));
            midpoint.insert((a, b), vertices.len());
            vertices.push([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
        }
    }

    let mut triangles = Vec::with_capacity(mesh.n_triangles() + 2 * marked.len());
    for &tri in mesh.triangles() {
        bisect(tri, &midpoint, &mut triangles);
    }

    let mut labels: HashMap<(usize, usize), BoundaryLabel> = HashMap::new();
    for edge in mesh.edges() {
        if let Some(label) = edge.label {
            let [a, b] = edge.vertices;
            match midpoint.get(&(a, b)) {
                Some(&m) => {
                    labels.insert(key(a, m), label);
                    labels.insert(key(m, b), label);
                }
                None => {
                    labels.insert((a, b), label);
                }
            }
        }
    }
    Mesh::assemble(vertices, triangles, &labels, MeshChecks::Topology)
}

fn bisect(tri: [usize; 3], midpoint: &HashMap<(usize, usize), usize>, out: &mut Vec<[usize; 3]>) {
    let [a, b, c] = tri;
    match midpoint.get(&key(a, b)) {
        Some(&m) => {
            bisect([c, a, m], midpoint, out);
            bisect([b, c, m], midpoint, out);
        }
        None => out.push(tri),
    }
}
