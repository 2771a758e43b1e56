use std::path::PathBuf;

/// Errors raised anywhere in the pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("inverted triangle {0}: vertices must be listed counterclockwise")]
    InvertedTriangle(usize),

    #[error("non-manifold edge ({0}, {1}) shared by more than two triangles")]
    NonManifold(usize, usize),

    #[error("boundary edge ({0}, {1}) carries no boundary label")]
    UnlabeledBoundary(usize, usize),

    #[error("the Dirichlet boundary is empty")]
    EmptyDirichlet,

    #[error("the Neumann boundary is empty")]
    EmptyNeumann,

    #[error("Dirichlet vertex {0} is not connected to any interior edge")]
    DirichletVertexIsolated(usize),

    #[error("index {index} out of range (size {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("unsupported quadrature degree {0} (maximum is 10)")]
    UnsupportedDegree(usize),

    #[error("non-finite value {value} at {context}")]
    NonFinite { context: &'static str, value: f64 },

    #[error("singular system: pivot {pivot} ({detail})")]
    Singular { pivot: usize, detail: String },

    #[error("linear solve residual {residual:e} exceeds tolerance {tolerance:e}")]
    Residual { residual: f64, tolerance: f64 },

    #[error("eigenvalue computation failed: {0}")]
    Eigen(String),

    #[error("fields live on different meshes")]
    MeshMismatch,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("stage `{stage}` failed at step {step}: {source}")]
    Stage {
        stage: &'static str,
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error in {path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_finite(context: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { context, value })
    }
}
