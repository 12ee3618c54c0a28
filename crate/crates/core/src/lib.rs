//! Monotone finite-difference laboratory for the singularly penalized equation
//! `F(x, t, D²u) − ∂ₜu = B_ε(u) u^{γ−1}` and its regularity estimates.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimator;
pub mod grid;
pub mod matrix;
pub mod operators;
pub mod par;
pub mod solver;
pub mod verification;

pub use error::{Error, Face, Result};
pub use grid::{cylinder_nodes, discrete_gradient, discrete_hessian, make_grid, Cylinder, GridFunction, Point, SpaceTimeGrid};
pub use matrix::SymMatrix;
pub use par::Execution;
