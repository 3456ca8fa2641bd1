//! Numerical Finsler geometry: Chern-connection curvatures, nullity
//! distributions and Berwald/Landsberg classification for metrics given as
//! text expressions.

// Tensor code indexes several arrays with the same loop variable.
#![allow(clippy::needless_range_loop)]

pub mod builtins;
pub mod classify;
pub mod cli;
pub mod dsl;
pub mod error;
pub mod geometry;
pub mod jet;
pub mod nullity;
pub mod report;
pub mod reproduce;
pub mod sampling;
pub mod scan;
pub mod tensor;
pub mod verify;

pub use error::{FinslerError, Result};
