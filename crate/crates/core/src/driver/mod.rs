//! Benchmarks, the adaptive loop and CSV output.

pub mod benchmarks;
pub mod config;
pub mod marking;

use std::fs::File;
use std::io::Write;
use std::path::Path;

use crate::elasticity::{broken_stress, solve_elasticity, DiscreteSolution, ElasticityProblem, ProjectedData};
use crate::error::{Error, Result};
use crate::estimator::{compute_estimators, energy_error, EstimatorReport, ExactSolution, KornConstants, KornEstimator};
use crate::fem::space::FeField;
use crate::mesh::{cook_membrane, cook_membrane_structured, read_mesh_file, refine, unit_square, Mesh};
use crate::recovery::{recover_conforming, ConformingRecovery};
use crate::stress_recon::{reconstruct, sup_norm_p1_tensor, ReconstructedStress};
use crate::symmetrize::{apply_symmetry_correction, SymmetrizedStress};

pub use benchmarks::{cook_problem, cook_setup, manufactured_setup, Manufactured};
pub use config::{Benchmark, Material, MeshSource, RunConfig};
pub use marking::dorfler_mark;

pub const CSV_HEADER: [&str; 10] = [
    "step", "n_elem", "n_dof", "eta_R", "eta_C", "eta_S", "bound", "osc", "energy_err", "eff_index",
];

/// A problem together with its exact solution, when known.
#[derive(Debug, Clone)]
pub struct Setup {
    pub problem: ElasticityProblem,
    pub exact: Option<ExactSolution>,
}

fn initial_mesh(config: &RunConfig) -> Result<Mesh> {
    Ok(match &config.mesh {
        MeshSource::Default => match config.benchmark {
            Benchmark::Cook => cook_membrane(),
            _ => unit_square(2),
        },
        MeshSource::File(p) => read_mesh_file(p)?,
        MeshSource::UnitSquare(n) => unit_square(*n),
        MeshSource::Cook => cook_membrane(),
        MeshSource::CookStructured(nx, ny) => cook_membrane_structured(*nx, *ny),
    })
}

pub fn setup(config: &RunConfig) -> Result<Setup> {
    config.validate()?;
    let mesh = initial_mesh(config)?;
    let li = config.lambda_inv()?;
    let kind = match config.benchmark {
        Benchmark::Cook => {
            return Ok(Setup {
                problem: cook_problem(mesh, config.mu, li)?,
                exact: None,
            })
        }
        Benchmark::ManufacturedSmooth => Manufactured::Smooth,
        Benchmark::ManufacturedDivfree => Manufactured::Divfree,
        Benchmark::PatchTest => Manufactured::PatchTest,
    };
    let (problem, exact) = manufactured_setup(kind, mesh, config.mu, li)?;
    Ok(Setup {
        problem,
        exact: Some(exact),
    })
}

pub fn korn_estimator(config: &RunConfig) -> KornEstimator {
    match config.korn_constant {
        Some(v) => KornEstimator::fixed(v),
        None => KornEstimator::new(config.korn_degree, config.korn_safety),
    }
}

/// Everything computed on one mesh.
#[derive(Debug, Clone)]
pub struct StepState {
    pub step: usize,
    pub problem: ElasticityProblem,
    pub data: ProjectedData,
    pub solution: DiscreteSolution,
    pub sigma: FeField,
    pub reconstruction: ReconstructedStress,
    pub symmetrized: SymmetrizedStress,
    pub recovery: ConformingRecovery,
    pub korn: KornConstants,
    pub report: EstimatorReport,
    /// `1 + ‖σ_h‖_∞`.
    pub scale: f64,
}

fn stage<T>(name: &'static str, step: usize, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Stage {
        stage: name,
        step,
        source: Box::new(e),
    })
}

/// Solve, reconstruct, symmetrize, recover and estimate on one mesh.
pub fn solve_step(
    step: usize,
    problem: ElasticityProblem,
    exact: Option<&ExactSolution>,
    korn: &KornEstimator,
) -> Result<StepState> {
    let data = stage("project", step, problem.project_data())?;
    let solution = stage("solve", step, solve_elasticity(&problem, &data))?;
    let sigma = stage("stress", step, broken_stress(&solution, &problem))?;
    let reconstruction = stage("reconstruct", step, reconstruct(&sigma, &problem, &data))?;
    let symmetrized = stage("symmetrize", step, apply_symmetry_correction(&reconstruction, &problem.mesh))?;
    let recovery = stage("recover", step, recover_conforming(&solution.u, &problem.mesh))?;
    let korn = stage("korn", step, korn.for_mesh(&problem.mesh))?;
    let mut report = stage(
        "estimate",
        step,
        compute_estimators(&solution, &symmetrized, &recovery, &problem, &data, &korn),
    )?;
    if let Some(ex) = exact {
        let err = stage("energy error", step, energy_error(&solution, ex, &problem))?;
        report = report.with_energy_error(err);
    }
    let scale = 1.0 + sup_norm_p1_tensor(&sigma, &problem.mesh);
    Ok(StepState {
        step,
        problem,
        data,
        solution,
        sigma,
        reconstruction,
        symmetrized,
        recovery,
        korn,
        report,
        scale,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRow {
    pub step: usize,
    pub n_elem: usize,
    pub n_dof: usize,
    pub eta_r: f64,
    pub eta_c: f64,
    pub eta_s: f64,
    pub bound: f64,
    pub osc: f64,
    pub energy_err: Option<f64>,
    pub eff_index: Option<f64>,
}

impl StepRow {
    pub fn from_state(s: &StepState) -> Self {
        let r = &s.report;
        StepRow {
            step: s.step,
            n_elem: s.problem.mesh.n_triangles(),
            n_dof: crate::elasticity::n_dofs(&s.problem.mesh),
            eta_r: r.eta_r,
            eta_c: r.eta_c,
            eta_s: r.eta_s,
            bound: r.bound,
            osc: r.osc,
            energy_err: r.energy_error,
            eff_index: r.efficiency,
        }
    }

    fn fields(&self) -> Vec<String> {
        let f = |v: f64| format!("{v:.15e}");
        let o = |v: Option<f64>| v.map(f).unwrap_or_default();
        vec![
            self.step.to_string(),
            self.n_elem.to_string(),
            self.n_dof.to_string(),
            f(self.eta_r),
            f(self.eta_c),
            f(self.eta_s),
            f(self.bound),
            f(self.osc),
            o(self.energy_err),
            o(self.eff_index),
        ]
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConvergenceRecord {
    pub rows: Vec<StepRow>,
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|(x, y)| (x.ln(), y.ln())).unzip();
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

impl ConvergenceRecord {
    /// Slope of the bound against `N_h` over the last `last` rows.
    pub fn bound_slope(&self, last: usize) -> Option<f64> {
        let k = self.rows.len().saturating_sub(last);
        let pts: Vec<(f64, f64)> = self.rows[k..].iter().map(|r| (r.n_dof as f64, r.bound)).collect();
        loglog_slope(&pts)
    }

    pub fn energy_slope(&self, last: usize) -> Option<f64> {
        let k = self.rows.len().saturating_sub(last);
        let pts: Option<Vec<(f64, f64)>> = self.rows[k..]
            .iter()
            .map(|r| r.energy_err.map(|e| (r.n_dof as f64, e)))
            .collect();
        loglog_slope(&pts?)
    }
}

/// Writes a record as CSV.
pub fn emit_csv(record: &ConvergenceRecord, path: &Path) -> Result<()> {
    let mut w = CsvSink::create(path)?;
    for row in &record.rows {
        w.push(row)?;
    }
    Ok(())
}

/// Incremental CSV writer, flushed after every row.
pub struct CsvSink {
    writer: csv::Writer<File>,
}

impl CsvSink {
    pub fn create(path: &Path) -> Result<Self> {
        let mut writer = csv::Writer::from_writer(File::create(path)?);
        writer.write_record(CSV_HEADER)?;
        writer.flush()?;
        Ok(CsvSink { writer })
    }

    pub fn push(&mut self, row: &StepRow) -> Result<()> {
        self.writer.write_record(row.fields())?;
        self.writer.flush()?;
        Ok(())
    }
}

/// Renders a record as CSV text.
pub fn csv_string(record: &ConvergenceRecord) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for row in &record.rows {
        w.write_record(row.fields())?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    String::from_utf8(bytes).map_err(|e| Error::InvalidParameter(e.to_string()))
}

/// Runs the adaptive loop from `config`.
pub fn run_adaptive(config: &RunConfig) -> Result<ConvergenceRecord> {
    run_adaptive_with(config, |_| Ok(()))
}

/// Runs the adaptive loop, calling `observer` on every step's full state.
pub fn run_adaptive_with(
    config: &RunConfig,
    mut observer: impl FnMut(&StepState) -> Result<()>,
) -> Result<ConvergenceRecord> {
    let Setup { mut problem, exact } = setup(config)?;
    let korn = korn_estimator(config);
    let mut sink = match &config.out {
        Some(p) => Some(CsvSink::create(p)?),
        None => None,
    };
    let mut record = ConvergenceRecord::default();
    for step in 0..=config.steps {
        let state = solve_step(step, problem, exact.as_ref(), &korn)?;
        observer(&state)?;
        let row = StepRow::from_state(&state);
        if let Some(s) = sink.as_mut() {
            s.push(&row)?;
        }
        record.rows.push(row);
        if step == config.steps || state.report.bound <= config.tol * state.scale {
            break;
        }
        let marks = stage("mark", step, dorfler_mark(&state.report.indicators, config.theta))?;
        if marks.is_empty() {
            break;
        }
        let mesh = stage("refine", step, refine(&state.problem.mesh, &marks))?;
        problem = state.problem.with_mesh(mesh);
    }
    Ok(record)
}

/// Writes a one-line-per-step human readable summary.
pub fn write_summary(record: &ConvergenceRecord, out: &mut impl Write) -> std::io::Result<()> {
    writeln!(
        out,
        "{:>4} {:>8} {:>9} {:>11} {:>11} {:>11} {:>11} {:>11} {:>11} {:>7}",
        "step", "elems", "N_h", "eta_R", "eta_C", "eta_S", "bound", "osc", "error", "eff"
    )?;
    for r in &record.rows {
        let o = |v: Option<f64>| v.map(|x| format!("{x:11.4e}")).unwrap_or_else(|| format!("{:>11}", "-"));
        writeln!(
            out,
            "{:>4} {:>8} {:>9} {:11.4e} {:11.4e} {:11.4e} {:11.4e} {:11.4e} {} {:>7}",
            r.step,
            r.n_elem,
            r.n_dof,
            r.eta_r,
            r.eta_c,
            r.eta_s,
            r.bound,
            r.osc,
            o(r.energy_err),
            r.eff_index.map(|v| format!("{v:.3}")).unwrap_or_else(|| "-".into()),
        )?;
    }
    Ok(())
}
