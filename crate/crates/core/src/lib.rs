//! Differentiable iso-surfacing on deformable tetrahedral grids.
//!
//! The toolkit represents a shape as a signed distance field sampled on a
//! deformable tetrahedral grid, extracts the zero level set with marching
//! tetrahedra, and exposes hand-written vector-Jacobian products for every
//! stage so surface losses can drive the grid parameters directly. A
//! coarse-to-fine fitting pipeline reconstructs surfaces from point clouds
//! or meshes, and an oracle benchmark compares marching tetrahedra against
//! marching cubes at equal query budgets.
//!
//! All numeric code is generic over the scalar type via [`scalar::Real`]
//! (`f32` or `f64`); concrete aliases live at the crate root.

// Negated float comparisons like `!(x > 0)` are deliberate: unlike
// `x <= 0`, they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fitting;
pub mod losses;
pub mod marching;
pub mod math;
pub mod mesh;
pub mod parallel;
pub mod rng;
pub mod scalar;
pub mod sdfield;
pub mod subdivision;
pub mod tetgrid;

pub use error::{Error, Result};
pub use math::Vec3;
pub use mesh::TriangleMesh;
pub use scalar::Real;
pub use tetgrid::{build_grid, GridScheme, TetGrid, TetId, VertexId};

/// Concrete aliases for the common scalar choices.
pub type Vec3f32 = Vec3<f32>;
pub type Vec3f64 = Vec3<f64>;
pub type TetGrid32 = TetGrid<f32>;
pub type TetGrid64 = TetGrid<f64>;
pub type TriangleMesh32 = TriangleMesh<f32>;
pub type TriangleMesh64 = TriangleMesh<f64>;
pub type PointSample32 = losses::PointSample<f32>;
pub type PointSample64 = losses::PointSample<f64>;
pub type Cotangents32 = marching::Cotangents<f32>;
pub type Cotangents64 = marching::Cotangents<f64>;
pub type FitConfig32 = fitting::FitConfig<f32>;
pub type FitConfig64 = fitting::FitConfig<f64>;
pub type AnalyticSdf32 = sdfield::AnalyticSdf<f32>;
pub type AnalyticSdf64 = sdfield::AnalyticSdf<f64>;
