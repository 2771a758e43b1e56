//! Finite element building blocks: quadrature, local bases, dof layouts and
//! data projections.

pub mod basis;
pub mod projection;
pub mod quadrature;
pub mod rt1;
pub mod space;

pub use projection::{project_neumann, project_volume, EdgeP1, NeumannData, Target, TractionFn, VectorFn};
pub use quadrature::{quad_rule, Domain, QuadratureRule};
pub use rt1::Rt1Space;
pub use space::{eval_basis, BasisEval, Entity, FeField, SpaceDescriptor, SpaceKind};
