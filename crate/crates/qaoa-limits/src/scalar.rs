//! Floating-point abstraction shared by the deterministic kernels.

use num_traits::{Float, FloatConst, FromPrimitive};
use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Real scalar usable by the bitstring tables, limit recursions and simulator.
///
/// Implemented for `f32` and `f64`. The Monte-Carlo sampler, instance
/// generators and optimizer are fixed to `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Sum + Send + Sync + Default + 'static
{
    /// Converts an `f64` literal into `Self`.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Converts back to `f64` for reporting.
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Absolute threshold above which a residual imaginary part is treated
    /// as a numerical-consistency failure.
    fn imag_guard() -> Self {
        let floor = Self::lit(1e-8);
        let scaled = Self::epsilon() * Self::lit(1e3);
        if scaled > floor {
            scaled
        } else {
            floor
        }
    }
}

impl Real for f32 {}
impl Real for f64 {}
