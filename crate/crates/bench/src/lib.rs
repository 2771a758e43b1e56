//! Fixtures shared by the benchmarks.

use equilibra::driver::cook_problem;
use equilibra::elasticity::{ElasticityProblem, ProjectedData};
use equilibra::mesh::{cook_membrane, refine, MarkSet, Mesh};

/// Cook's membrane refined uniformly `levels` times.
pub fn cook_mesh(levels: usize) -> Mesh {
    let mut mesh = cook_membrane();
    for _ in 0..levels {
        mesh = refine(&mesh, &MarkSet::all(mesh.n_triangles())).expect("uniform refinement");
    }
    mesh
}

/// Cook's membrane problem at `ν = 0.49` with projected data.
pub fn cook_fixture(levels: usize) -> (ElasticityProblem, ProjectedData) {
    let nu: f64 = 0.49;
    let problem = cook_problem(cook_mesh(levels), 1.0, (1.0 - 2.0 * nu) / (2.0 * nu)).expect("valid problem");
    let data = problem.project_data().expect("projection");
    (problem, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_build() {
        assert_eq!(cook_mesh(1).n_triangles(), 4 * 44);
        let (p, d) = cook_fixture(0);
        assert_eq!(d.f.coefficients.len(), 6 * p.mesh.n_triangles());
    }
}
