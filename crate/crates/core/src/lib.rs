//! Exact rotation numbers, Kauffman state sums and normalized multi-variable
//! Alexander polynomials for diagrams of framed, oriented transverse spatial
//! graphs.

// matrix code indexes two rows at once
#![allow(clippy::needless_range_loop)]

pub mod diagram;
pub mod error;
pub mod fixtures;
pub mod graphalg;
pub mod invariant;
pub mod lattice;
pub mod moves;
pub mod ring;
pub mod rotation;
pub mod statesum;

pub use error::{Error, Result};
