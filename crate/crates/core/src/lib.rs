//! Finite-dimensional Grassmannian geometry, Fredholm pairs and determinant lines.
//!
//! Everything works over dense complex matrices tagged with a [`Field`]; real inputs
//! stay real. The crate is `no_std` and only needs an allocator.
#![no_std]

extern crate alloc;

pub mod bundles;
pub mod detcalc;
mod error;
pub mod fredholm;
pub mod grassmann;
pub mod numcore;
pub mod orient;
pub mod random;
pub mod staralg;

pub use error::{Error, Result};
pub use grassmann::Subspace;
pub use numcore::{CMat, Field, Frame, Matrix, Scalar, Tolerance};
