//! Adaptive mixed finite elements for planar nearly incompressible elasticity
//! with guaranteed a posteriori error bounds from equilibrated stresses.

pub mod driver;
pub mod error;
pub mod estimator;
pub mod fem;
pub mod elasticity;
pub mod linalg;
pub mod mesh;
pub mod recovery;
pub mod stress_recon;
pub mod symmetrize;
pub mod tensor;

pub use error::{Error, Result};
pub use mesh::{build_mesh, refine, vertex_patch, BoundaryLabel, MarkSet, Mesh};
pub use tensor::{Point, Tensor2, Vec2};
