//! Numerical laboratory for the transport equation `u_t + b . grad u = 0`
//! with velocity fields whose divergence lies in BMO.
//!
//! The crate provides periodic-grid fields and seminorms, mollification and
//! commutator studies, two transport solvers with their verification
//! harnesses, the logarithmic BMO-L1 inequality checker, and the Osgood
//! comparison machinery used for stability estimates.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fields;
pub mod logineq;
pub mod mollify;
pub mod osgood;
pub mod scenarios;
pub mod seminorms;
mod spectral;
pub mod transport;

pub use error::{LabError, Result};
pub use fields::{lp_norm, BoxMeanTable, Grid, Point, ScalarField, VectorField};

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
