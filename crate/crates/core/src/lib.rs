//! Shape-preserving best uniform polynomial approximation on [-1, 1].
//!
//! The crate computes errors of best unconstrained approximation (Remez
//! exchange), best co-q-monotone approximation with prescribed change points
//! (cutting-plane linear programming), their singular-weighted variants, a
//! constructive q-monotone lift, and numerical moduli of smoothness. The
//! [`experiments`] module runs degree sweeps and named scenarios and renders
//! them as JSON/CSV reports.

pub mod catalog;
pub mod chebcore;
pub mod constrained;
pub mod error;
pub mod experiments;
pub mod lift;
pub mod lp;
pub mod moduli;
pub mod remez;
pub mod theorems;
pub mod weights;

mod extrema;

pub use catalog::{get_function, list_catalog, Params, TestFunction};
pub use chebcore::{cheb_grid, ChebPoly, Grid};
pub use constrained::{best_constrained, brute_force_oracle, ShapeConstraint};
pub use error::{Error, Result};
pub use remez::{best_unconstrained, ApproxResult};
pub use weights::WeightSpec;
