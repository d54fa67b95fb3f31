//! Numerical tools for frontals: surfaces `x: U -> R³` with a unit normal
//! along them even where they fail to be immersions.
//!
//! A surface is given together with a tangent moving base `Omega`, a 3×2
//! matrix field whose columns span the image of `Dx`. Everything else is
//! measured relative to it: the matrix `Lambda` with `Dx = Omega Lambdaᵀ`, its
//! determinant `lambda`, and the relative curvatures `K_Omega`, `H_Omega`,
//! `k1_Omega`, `k2_Omega`, which stay smooth across the singular set.

pub mod behavior;
pub mod error;
pub mod exprlang;
pub mod frontal;
pub mod gallery;
pub mod singular;
pub mod tolerance;
pub mod numcore;
pub mod parallel;
pub mod report;
pub mod scene;

pub use error::{Error, Result};
