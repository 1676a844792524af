//! Multilevel trust-region minimization of bound-constrained problems that
//! come from Q1 finite-element discretizations on nested uniform grids.
//!
//! Two solvers share one V-cycle driver ([`mlsolver`]):
//!
//! * [`Variant::Rmtr`] restricts with the plain bilinear prolongation;
//! * [`Variant::Mastr`] truncates the prolongation at the active set of each
//!   finer level, so coarse corrections leave bound-active components alone
//!   and the coarse boxes widen.
//!
//! All numerics are generic over [`Scalar`] (`f32` or `f64`); the `*64` /
//! `*32` aliases below fix the scalar type.
//!
//! ```
//! use mastr::{Problem64, ProblemKind, SolveConfig, Variant};
//!
//! let problem = Problem64::build(ProblemKind::Membrane, 3, 4).unwrap();
//! let result = mastr::solve(&problem, Variant::Mastr, SolveConfig::default()).unwrap();
//! assert!(result.converged);
//! ```

// `!(a < b)` is used on purpose so that NaN falls on the rejecting side.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod bounds;
pub mod error;
pub mod grid;
pub mod mlsolver;
mod objective;
pub mod problems;
mod scalar;
mod sparse;
pub mod transfer;
pub mod trstep;

pub use bounds::BoxBounds;
pub use error::{Error, Result};
pub use grid::{BoundaryTag, DirichletSet, DofMap, Hierarchy, MeshLevel};
pub use mlsolver::{solve, LevelState, MultilevelSolver, NoObserver, SolveConfig, SolveObserver, SolveResult, Variant};
pub use objective::Objective;
pub use problems::{Problem, ProblemKind};
pub use scalar::{clamp, Scalar};
pub use sparse::SparseMatrix;
pub use trstep::{QuadraticModel, TrParams};

pub type SparseMatrix64 = SparseMatrix<f64>;
pub type BoxBounds64 = BoxBounds<f64>;
pub type Problem64 = Problem<f64>;
pub type QuadraticModel64 = QuadraticModel<f64>;
pub type TrParams64 = TrParams<f64>;
pub type SolveConfig64 = SolveConfig<f64>;
pub type SolveResult64 = SolveResult<f64>;

pub type SparseMatrix32 = SparseMatrix<f32>;
pub type BoxBounds32 = BoxBounds<f32>;
pub type Problem32 = Problem<f32>;
pub type QuadraticModel32 = QuadraticModel<f32>;
pub type SolveConfig32 = SolveConfig<f32>;
pub type SolveResult32 = SolveResult<f32>;
