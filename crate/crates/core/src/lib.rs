//! Capacity and interference analysis for cellular networks whose base
//! stations form a Poisson point process.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod capacity;
pub mod channel;
pub mod curve;
pub mod error;
pub mod interference;
pub mod montecarlo;
pub mod quad;
pub mod specfun;

pub use error::{Error, Result};
