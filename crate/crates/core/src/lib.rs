//! Simulation and control of two flexible Euler-Bernoulli arms grasping a
//! rigid object.

// validation uses `!(x > 0.0)` on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod actuators;
pub mod beam;
pub mod controllers;
pub mod error;
pub mod integrate;
pub mod monitor;
pub mod plant;
pub mod rbfnn;
pub mod scenario;

pub use error::{Error, Result};
