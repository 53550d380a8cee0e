//! Enriched linear Lagrange triangles for the 2D Poisson problem.
//!
//! The crate builds Friedrichs-Keller meshes of the unit square, evaluates
//! weighted and unweighted enrichment families on each triangle, constructs
//! the admissible enriched basis from the edge-average functionals and solves
//! `-Δu = f` with homogeneous Dirichlet data by Galerkin assembly.
//!
//! Modules follow the pipeline order:
//!
//! - [`mesh`]: structured triangulations, refinement, edge connectivity.
//! - [`quadrature`]: Gauss-Legendre, Gauss-Jacobi and triangle rules.
//! - [`barycentric`]: per-triangle geometry and barycentric coordinates.
//! - [`enrichment`]: weight function, enrichment families, the matrix `G`
//!   and the admissible basis `φ₁..φ₆`.
//! - [`projection`]: linear and enriched projectors, error bounds and the
//!   bound-constant optimization.
//! - [`fem`]: DOF numbering, assembly, solvers, condition numbers.
//! - [`study`]: benchmark problems and convergence studies.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod barycentric;
pub mod enrichment;
mod error;
pub mod fem;
pub mod mesh;
pub mod projection;
pub mod quadrature;
pub mod sparse;
pub mod study;

pub use barycentric::{EdgeFlips, Orientation, TriGeom};
pub use enrichment::{ElementBasis, EnrichmentFamily, Factor, FamilyId, WeightParams};
pub use error::{Error, Result};
pub use fem::{DofMap, ElementKind, FeSpace, SparseSystem};
pub use mesh::{MeshMetrics, TriMesh};
pub use quadrature::{Rule1D, RuleTri};
pub use study::{BenchProblem, StudyConfig, StudyReport};

pub use nalgebra::{Point2, Vector2};
