//! Discrete Sobolev mapping spaces on the torus and the Riemann sphere.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cutoff;
pub mod diffeo;
pub mod error;
pub mod field;
pub mod grid;
pub mod harness;
pub mod norms;
pub mod probe;
pub mod spectral;
pub mod sphere;
pub mod synth;

pub use error::{LabError, Result};
pub use field::{DiscreteField, SobolevIndex};
pub use grid::{make_grid, Domain, GridSpec};
