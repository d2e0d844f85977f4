// `!(a > b)` comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod convex;
pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod flows;
pub mod instances;
pub mod integrator;
pub mod network;
pub mod rng;
pub mod trajectory;

pub use error::{Error, Result};
