//! Arithmetic of the fields Q(√(p1p2q), i) and their second 2-class groups.
//!
//! The modules build on each other bottom-up: rational number theory, Gaussian
//! integers, quadratic fields, the invariant tuple of a prime triple, exact
//! finite 2-groups, and the predictions that tie the arithmetic to the groups.

pub mod error;
pub mod gaussian;
pub mod group2;
pub mod ntheory;
pub mod params;
pub mod predict;
pub mod quadfield;

pub use error::{Error, Result};
