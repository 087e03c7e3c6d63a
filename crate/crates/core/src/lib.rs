#![no_std]
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]
extern crate alloc;

pub mod error;
pub mod euler;
pub mod geometry;
pub mod grid;
pub mod harmonic;
pub mod higher_dim;
pub mod navier_stokes;
pub mod quadrature;

pub use error::{Error, Result};
