#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod cli;
pub mod error;
pub mod nonlinear;
pub mod polytope;
pub mod qcore;
pub mod scenario;
pub mod sdp;
pub mod seesaw;
pub mod symmetry;

pub use error::{Error, Result};
