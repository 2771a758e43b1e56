mod common;

use std::sync::Arc;

use common::*;
use equilibra::driver::{manufactured_setup, Manufactured};
use equilibra::elasticity::{assemble_elasticity, broken_stress, solve_elasticity, ElasticityProblem};
use equilibra::estimator::korn::KornEstimator;
use equilibra::estimator::{energy_error, oscillation};
use equilibra::mesh::unit_square;
use equilibra::recovery::{build_partition, recover_with};
use equilibra::stress_recon::reconstruct;
use equilibra::symmetrize::{apply_symmetry_correction, assemble_symmetry_kkt};

const LAMBDA_INV: [f64; 3] = [0.0, 1.0 / 49.0, 0.7];

fn cases() -> Vec<(String, ElasticityProblem)> {
    let mut out = Vec::new();
    for (name, mesh) in small_meshes() {
        for li in LAMBDA_INV {
            out.push((format!("{name} lambda_inv={li}"), polynomial_problem(mesh.clone(), 1.3, li)));
        }
    }
    out
}

#[test]
fn elasticity_solve_matches_independent_dense_discretization() {
    for (name, problem) in cases() {
        let data = problem.project_data().unwrap();
        let sol = solve_elasticity(&problem, &data).unwrap();
        let d = elasticity_discrepancy(&sol, &problem);
        assert!(d < 1e-9, "{name}: {d:e}");
    }
}

#[test]
fn sparse_saddle_solve_matches_dense_lu() {
    for (name, problem) in cases() {
        let data = problem.project_data().unwrap();
        let sol = solve_elasticity(&problem, &data).unwrap();
        let dense = dense_solve(&assemble_elasticity(&problem, &data).unwrap());
        let lib: Vec<f64> = sol
            .u
            .coefficients
            .iter()
            .chain(&sol.p.coefficients)
            .chain(&sol.multipliers)
            .copied()
            .collect();
        let d = max_rel_diff(&lib, &dense);
        assert!(d < 1e-9, "{name}: {d:e}");
    }
}

#[test]
fn reconstruction_matches_all_conditions_least_squares() {
    for (name, problem) in cases() {
        let data = problem.project_data().unwrap();
        let sol = solve_elasticity(&problem, &data).unwrap();
        let sigma = broken_stress(&sol, &problem).unwrap();
        let rs = reconstruct(&sigma, &problem, &data).unwrap();
        let (d, res) = reconstruction_discrepancy(&problem, &sigma, &rs);
        assert!(res < 1e-10, "{name}: inconsistent conditions, residual {res:e}");
        assert!(d < 1e-10, "{name}: {d:e}");
    }
}

#[test]
fn symmetry_system_matches_dense_lu() {
    for (name, problem) in cases() {
        let data = problem.project_data().unwrap();
        let sol = solve_elasticity(&problem, &data).unwrap();
        let rs = reconstruct(&broken_stress(&sol, &problem).unwrap(), &problem, &data).unwrap();
        let sym = apply_symmetry_correction(&rs, &problem.mesh).unwrap();
        let kkt = assemble_symmetry_kkt(&rs, &problem.mesh).unwrap();
        let d = symmetry_discrepancy(&kkt, &sym.chi, &sym.nu);
        assert!(d < 1e-9, "{name}: {d:e}");
    }
}

#[test]
fn patch_problems_match_broken_basis_oracle() {
    for (name, problem) in cases() {
        // two triangles leave a Dirichlet vertex without an interior edge
        if problem.mesh.n_triangles() < 3 {
            continue;
        }
        let data = problem.project_data().unwrap();
        let sol = solve_elasticity(&problem, &data).unwrap();
        let mesh = &problem.mesh;
        let partition = build_partition(mesh).unwrap();
        let rec = recover_with(&sol.u, mesh, &partition).unwrap();
        for i in 0..partition.len() {
            let d = patch_discrepancy(&sol.u, mesh, &partition, &rec, i);
            assert!(d < 1e-10, "{name} patch {i}: {d:e}");
        }
    }
}

#[test]
fn korn_constants_match_bernstein_oracle() {
    let shapes = [
        [[0.0, 0.0], [1.0, 0.0], [0.5, 3f64.sqrt() / 2.0]],
        [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
        [[0.1, -0.3], [2.0, 0.1], [0.4, 0.35]],
    ];
    for p in shapes {
        for k in [1, 3, 6] {
            let lib = KornEstimator::new(k, 1.0).constant(p).unwrap();
            let oracle = korn_oracle(p, k);
            assert!((lib - oracle).abs() < 1e-8 * oracle, "{p:?} k={k}: {lib} vs {oracle}");
        }
    }
}

fn quadratic_load_problem(n: usize) -> ElasticityProblem {
    ElasticityProblem::new(
        unit_square(n),
        1.0,
        0.0,
        Arc::new(|x| [x[0] * x[0], 0.0]),
        Arc::new(|_, _| [0.0, 0.0]),
    )
    .unwrap()
}

// h_T times the O(h²) error of the P1 projection: third order in h
#[test]
fn oscillation_matches_quadrature_oracle_and_is_third_order() {
    let mut prev = None;
    for n in [2, 4, 8] {
        let problem = quadratic_load_problem(n);
        let data = problem.project_data().unwrap();
        let osc = oscillation(&problem, &data).unwrap().total;
        let oracle = oscillation_oracle(&problem);
        assert!((osc - oracle).abs() < 1e-12 * oracle, "n={n}: {osc} vs {oracle}");
        if let Some(p) = prev {
            let ratio: f64 = p / osc;
            assert!((7.5..8.5).contains(&ratio), "n={n}: ratio {ratio}");
        }
        prev = Some(osc);
    }
}

#[test]
fn energy_error_matches_subdivided_quadrature() {
    for kind in [Manufactured::Smooth, Manufactured::Divfree] {
        let (problem, exact) = manufactured_setup(kind, unit_square(4), 1.0, 1.0 / 49.0).unwrap();
        let data = problem.project_data().unwrap();
        let sol = solve_elasticity(&problem, &data).unwrap();
        let lib = energy_error(&sol, &exact, &problem).unwrap();
        let oracle = energy_error_oracle(&sol, &problem, &*exact.grad_u, &*exact.p, 5);
        assert!((lib - oracle).abs() < 1e-10 * oracle, "{kind:?}: {lib} vs {oracle}");
    }
}
