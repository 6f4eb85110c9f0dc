//! Exact median geometry on CAT(0) cube complexes and a seeded random-walk
//! laboratory built on top of it.

pub mod boundary;
pub mod classify;
pub mod error;
pub mod families;
pub mod harness;
pub mod pocset;
pub mod walk;

pub use error::{Error, Result};
