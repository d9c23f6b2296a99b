//! Infinite-size and finite-size QAOA energies for MaxCut on sparse random
//! graphs, the Sherrington–Kirkpatrick model and p=1 diluted/dense spin
//! glasses.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the aliases
//! below pin the common `f64` instantiation.

pub mod angle_tools;
pub mod bitstrings;
pub mod dspin_p1;
pub mod error;
pub mod experiment;
pub mod infinite_limit;
pub mod instances;
pub mod scalar;
pub mod simulator;
pub mod sk_montecarlo;

pub use error::{Error, Result};
pub use scalar::Real;

/// Double-precision angle vector.
pub type Angles = bitstrings::AngleVector<f64>;
/// Single-precision angle vector.
pub type Angles32 = bitstrings::AngleVector<f32>;
/// Double-precision bitstring table.
pub type Table = bitstrings::BitstringTable<f64>;
/// Double-precision `R` table.
pub type RTable64 = infinite_limit::RTable<f64>;
