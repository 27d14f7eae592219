//! Numerical laboratory for quantum ergodicity restricted to rotation
//! isotypic components on spheres of revolution.

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod fit;
pub mod geometry;
pub mod quad;
pub mod semiclassics;
pub mod specfun;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
